#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dirsign/datasets.hpp"
#include "dirsign/dsl.hpp"
#include "dirsign/error.hpp"
#include "dirsign/tensor.hpp"
#include "dirsign/tensor_io.hpp"

namespace dirsign {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DenseLayer {
  RowMatrix weight;  // out x in
  Eigen::VectorXd bias;

  std::size_t inputs() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t outputs() const { return static_cast<std::size_t>(weight.rows()); }
  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() && a.weight == b.weight &&
           a.bias == b.bias;
  }
};

/// Layer widths. The demo network is 2048 -> 32 -> 2 -> 32 -> 2048.
struct ModelSpec {
  std::size_t input_dim = wave_length;
  std::vector<std::size_t> encoder_hidden{32};
  std::size_t latent_dim = 2;
  std::vector<std::size_t> decoder_hidden{32};
};

/// Fully connected autoencoder with ReLU between layers; the latent code and
/// the reconstruction are linear.
struct AutoencoderModel {
  std::vector<DenseLayer> encoder;
  std::vector<DenseLayer> decoder;

  std::size_t input_dim() const { return encoder.front().inputs(); }
  std::size_t latent_dim() const { return encoder.back().outputs(); }
  std::size_t layer_count() const { return encoder.size() + decoder.size(); }

  const DenseLayer& layer(std::size_t i) const { return i < encoder.size() ? encoder[i] : decoder[i - encoder.size()]; }
  DenseLayer& layer(std::size_t i) { return i < encoder.size() ? encoder[i] : decoder[i - encoder.size()]; }

  bool relu_after(std::size_t i) const { return i + 1 != encoder.size() && i + 1 != layer_count(); }

  friend bool operator==(const AutoencoderModel&, const AutoencoderModel&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// He (fan-in) normal initialization, zero bias; each layer draws from its own stream.
inline DenseLayer he_layer(std::size_t in, std::size_t out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(in)));
  DenseLayer layer{RowMatrix(out, in), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
  return layer;
}

}  // namespace detail

inline AutoencoderModel make_autoencoder(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.input_dim == 0 || spec.latent_dim == 0) throw Error(Errc::config, "layer widths must be positive");
  std::vector<std::size_t> widths{spec.input_dim};
  widths.insert(widths.end(), spec.encoder_hidden.begin(), spec.encoder_hidden.end());
  widths.push_back(spec.latent_dim);
  std::size_t latent_index = widths.size() - 1;
  widths.insert(widths.end(), spec.decoder_hidden.begin(), spec.decoder_hidden.end());
  widths.push_back(spec.input_dim);
  for (auto w : widths)
    if (w == 0) throw Error(Errc::config, "layer widths must be positive");

  AutoencoderModel model;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    auto layer = detail::he_layer(widths[i], widths[i + 1], detail::splitmix64(seed ^ (0x100 + i)));
    (i < latent_index ? model.encoder : model.decoder).push_back(std::move(layer));
  }
  return model;
}

namespace detail {

template <typename Input>
RowMatrix forward(const AutoencoderModel& model, const Input& x, std::size_t first, std::size_t last) {
  RowMatrix h = x;
  for (std::size_t i = first; i < last; ++i) {
    const auto& layer = model.layer(i);
    RowMatrix z = h * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    h = model.relu_after(i) ? RowMatrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return h;
}

// Per-layer buffers kept across training steps so that full-batch matrices
// are allocated once.
struct TrainWorkspace {
  std::vector<RowMatrix> pre;     // pre-activation of layer i
  std::vector<RowMatrix> act;     // activation of layer i (unused for the output layer)
  std::vector<RowMatrix> d_pre;   // loss gradient w.r.t. pre[i]
  std::vector<RowMatrix> grad_w;
  std::vector<Eigen::VectorXd> grad_b;

  explicit TrainWorkspace(std::size_t layers)
      : pre(layers), act(layers), d_pre(layers), grad_w(layers), grad_b(layers) {}
};

template <typename Input>
void forward_train(const AutoencoderModel& model, const Input& x, TrainWorkspace& ws) {
  const std::size_t n = model.layer_count();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& layer = model.layer(i);
    if (i == 0) ws.pre[i].noalias() = x * layer.weight.transpose();
    else ws.pre[i].noalias() = ws.act[i - 1] * layer.weight.transpose();
    ws.pre[i].rowwise() += layer.bias.transpose();
    if (i + 1 == n) break;
    if (model.relu_after(i)) ws.act[i] = ws.pre[i].cwiseMax(0.0);
    else ws.act[i] = ws.pre[i];
  }
}

// Fills grad_w / grad_b from ws.d_pre.back(); consumes the d_pre buffers.
template <typename Input>
void backward_train(const AutoencoderModel& model, const Input& x, TrainWorkspace& ws) {
  for (std::size_t i = model.layer_count(); i-- > 0;) {
    if (i == 0) ws.grad_w[i].noalias() = ws.d_pre[i].transpose() * x;
    else ws.grad_w[i].noalias() = ws.d_pre[i].transpose() * ws.act[i - 1];
    ws.grad_b[i] = ws.d_pre[i].colwise().sum().transpose();
    if (i == 0) break;
    ws.d_pre[i - 1].noalias() = ws.d_pre[i] * model.layer(i).weight;
    if (model.relu_after(i - 1))
      ws.d_pre[i - 1].array() *= (ws.pre[i - 1].array() > 0.0).template cast<double>();
  }
}

// One pass: out = k * (y - x); returns the squared norm of y - x.
template <typename Input>
double scaled_residual(const RowMatrix& y, const Input& x, double k, RowMatrix& out) {
  const double* py = y.data();
  const double* px = x.data();
  double* po = out.data();
  const Eigen::Index size = y.size();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < size; ++i) {
    double r = py[i] - px[i];
    acc += r * r;
    po[i] = k * r;
  }
  return acc;
}

inline Eigen::Map<const RowMatrix> as_matrix(const Tensor& t) {
  return {t.values().data(), static_cast<Eigen::Index>(t.extent(0)), static_cast<Eigen::Index>(t.size() / t.extent(0))};
}

inline Tensor to_tensor(const RowMatrix& m) {
  Tensor out(Shape{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMatrix>(out.values().data(), m.rows(), m.cols()) = m;
  return out;
}

inline void check_rows(const AutoencoderModel& model, const Tensor& data) {
  if (data.rank() != 2) throw Error(Errc::shape, "expected an (examples x features) tensor");
  if (data.extent(1) != model.input_dim())
    throw Error(Errc::shape, "model expects " + std::to_string(model.input_dim()) + " features, got " +
                                 std::to_string(data.extent(1)));
}

}  // namespace detail

inline Tensor encode(const AutoencoderModel& model, const Tensor& data) {
  detail::check_rows(model, data);
  return detail::to_tensor(detail::forward(model, detail::as_matrix(data), 0, model.encoder.size()));
}

inline Tensor reconstruct(const AutoencoderModel& model, const Tensor& data) {
  detail::check_rows(model, data);
  return detail::to_tensor(detail::forward(model, detail::as_matrix(data), 0, model.layer_count()));
}

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double mse_weight = 1.0;
  double dsl_weight = 128.0;
  DslConfig dsl = scaled_batch_config(32.0);
  double learning_rate = 1e-3;
  std::size_t batch_size = 1024;
  std::size_t total_batches = 20000;
  AdamSettings adam;
  std::uint64_t seed = 0;
};

struct TrainLogEntry {
  std::size_t batch = 0;
  double mse_term = 0.0;
  std::optional<double> dsl_term;  // unset when the DSL weight is zero
  double total = 0.0;
};

struct TrainResult {
  AutoencoderModel model;
  std::vector<TrainLogEntry> log;
};

namespace detail {

class Adam {
 public:
  Adam(const AutoencoderModel& model, double lr, AdamSettings s) : lr_(lr), s_(s) {
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
      const auto& l = model.layer(i);
      mw_.push_back(RowMatrix::Zero(l.weight.rows(), l.weight.cols()));
      vw_.push_back(RowMatrix::Zero(l.weight.rows(), l.weight.cols()));
      mb_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
      vb_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    }
  }

  void begin_step() {
    ++t_;
    c1_ = 1.0 - std::pow(s_.beta1, static_cast<double>(t_));
    c2_ = 1.0 - std::pow(s_.beta2, static_cast<double>(t_));
  }

  void update(std::size_t i, DenseLayer& layer, const RowMatrix& gw, const Eigen::VectorXd& gb) {
    apply(layer.weight.array(), mw_[i].array(), vw_[i].array(), gw.array());
    apply(layer.bias.array(), mb_[i].array(), vb_[i].array(), gb.array());
  }

 private:
  template <typename P, typename M, typename G>
  void apply(P param, M m, M v, const G& g) {
    m = s_.beta1 * m + (1.0 - s_.beta1) * g;
    v = s_.beta2 * v + (1.0 - s_.beta2) * g.square();
    param -= lr_ * (m / c1_) / ((v / c2_).sqrt() + s_.epsilon);
  }

  double lr_;
  AdamSettings s_;
  std::size_t t_ = 0;
  double c1_ = 1.0, c2_ = 1.0;
  std::vector<RowMatrix> mw_, vw_;
  std::vector<Eigen::VectorXd> mb_, vb_;
};

}  // namespace detail

inline void validate(const TrainConfig& cfg) {
  if (!(cfg.mse_weight >= 0.0) || !(cfg.dsl_weight >= 0.0) || !(cfg.mse_weight + cfg.dsl_weight > 0.0))
    throw Error(Errc::config, "loss weights must be non-negative with a positive sum");
  if (!(cfg.learning_rate > 0.0)) throw Error(Errc::config, "learning rate must be positive");
  if (cfg.batch_size == 0 || cfg.total_batches == 0) throw Error(Errc::config, "batch size and count must be positive");
  if (!cfg.dsl.skip_batch_axis || cfg.dsl.reduction == Reduction::none)
    throw Error(Errc::config, "training DSL must skip the batch axis and reduce to a scalar");
  if (cfg.dsl.sign_kind == SignKind::exact) throw Error(Errc::not_differentiable, "training needs a smooth sign");
  detail::validate(cfg.dsl);
}

/// Mini-batch Adam on mse_weight * MSE + dsl_weight * DSL(batch, reconstruction).
/// Batches walk a seeded permutation of the rows, reshuffled each epoch.
inline TrainResult train_autoencoder(const Tensor& data, const ModelSpec& spec, const TrainConfig& cfg) {
  validate(cfg);
  if (data.rank() != 2 || data.extent(0) == 0) throw Error(Errc::shape, "expected an (examples x features) tensor");
  if (data.extent(1) != spec.input_dim) throw Error(Errc::shape, "feature count does not match the model input");
  require_finite(data, "training data");

  TrainResult result{make_autoencoder(spec, cfg.seed), {}};
  auto& model = result.model;
  detail::Adam adam(model, cfg.learning_rate, cfg.adam);

  const std::size_t rows = data.extent(0), features = data.extent(1), batch = cfg.batch_size;
  std::mt19937_64 rng(detail::splitmix64(cfg.seed ^ 0xba7c4));
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  Tensor x(Shape{batch, features}), y(Shape{batch, features});
  auto xm = detail::as_matrix(x);
  Eigen::Map<RowMatrix> ym(y.values().data(), static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(features));
  detail::TrainWorkspace ws(model.layer_count());
  DslGradient dsl_grad;
  const double n = static_cast<double>(batch * features);
  result.log.reserve(cfg.total_batches);

  for (std::size_t step = 0; step < cfg.total_batches; ++step) {
    for (std::size_t r = 0; r < batch; ++r) {
      if (cursor == rows) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      auto src = data.values().begin() + order[cursor++] * features;
      std::copy(src, src + features, x.values().begin() + r * features);
    }

    detail::forward_train(model, xm, ws);

    TrainLogEntry entry;
    entry.batch = step;
    auto& d_out = ws.d_pre.back();
    d_out.resize(ws.pre.back().rows(), ws.pre.back().cols());
    entry.mse_term = detail::scaled_residual(ws.pre.back(), xm, cfg.mse_weight * 2.0 / n, d_out) / n;
    entry.total = cfg.mse_weight * entry.mse_term;
    if (cfg.dsl_weight > 0.0) {
      ym = ws.pre.back();
      detail::dsl_y_gradient_unchecked(x, y, cfg.dsl, dsl_grad);
      entry.dsl_term = dsl_grad.value;
      entry.total += cfg.dsl_weight * dsl_grad.value;
      d_out += cfg.dsl_weight * detail::as_matrix(dsl_grad.d_y);
    }
    if (!std::isfinite(entry.total))
      throw Error(Errc::diverged, "non-finite loss at batch " + std::to_string(step));
    result.log.push_back(entry);

    detail::backward_train(model, xm, ws);
    adam.begin_step();
    for (std::size_t i = 0; i < model.layer_count(); ++i) adam.update(i, model.layer(i), ws.grad_w[i], ws.grad_b[i]);
  }
  return result;
}

// Checkpoints: one DST1 file per weight matrix and bias vector plus
// manifest.txt with one "<name> <outputs> <inputs>" line per layer.

inline void save_checkpoint(const AutoencoderModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt", std::ios::trunc);
  if (!manifest) throw Error(Errc::io, "cannot write " + (dir / "manifest.txt").string());
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    bool enc = i < model.encoder.size();
    std::string name = (enc ? "encoder_" : "decoder_") + std::to_string(enc ? i : i - model.encoder.size());
    const auto& l = model.layer(i);
    manifest << name << ' ' << l.outputs() << ' ' << l.inputs() << '\n';
    write_tensor(detail::to_tensor(l.weight), dir / (name + "_weight.dst"));
    write_tensor(Tensor(Shape{l.outputs()}, std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())),
                 dir / (name + "_bias.dst"));
  }
}

inline AutoencoderModel load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw Error(Errc::io, "cannot read " + (dir / "manifest.txt").string());
  AutoencoderModel model;
  std::string name;
  std::size_t outs = 0, ins = 0;
  while (manifest >> name >> outs >> ins) {
    auto w = read_tensor(dir / (name + "_weight.dst"));
    auto b = read_tensor(dir / (name + "_bias.dst"));
    if (w.shape() != Shape{outs, ins} || b.shape() != Shape{outs})
      throw Error(Errc::shape, "layer " + name + " does not match the manifest");
    DenseLayer layer{detail::as_matrix(w), Eigen::Map<const Eigen::VectorXd>(b.values().data(), outs)};
    if (name.starts_with("encoder_")) model.encoder.push_back(std::move(layer));
    else if (name.starts_with("decoder_")) model.decoder.push_back(std::move(layer));
    else throw Error(Errc::format, "unknown layer name " + name);
  }
  if (model.encoder.empty() || model.decoder.empty()) throw Error(Errc::format, "manifest lists no layers");
  return model;
}

}  // namespace dirsign
