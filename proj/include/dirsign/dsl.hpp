#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dirsign/error.hpp"
#include "dirsign/tensor.hpp"

namespace dirsign {

enum class SignKind { exact, tanh, softsign };
enum class Reduction { sum, mean, none };

struct DslConfig {
  double sharpness = 32.0;
  /// One weight per compared axis (batch axis excluded when skipped).
  std::optional<std::vector<double>> weights;
  SignKind sign_kind = SignKind::tanh;
  /// Halve each mismatch so a sharp sign-like function counts flips.
  bool match_exact_units = true;
  /// Treat axis 0 as the example index.
  bool skip_batch_axis = false;
  Reduction reduction = Reduction::mean;
  /// Divide by the number of comparisons (exclusive with match_exact_units).
  bool scale_by_comparisons = false;
};

/// Training-style preset: per-comparison scaling, batch axis skipped, mean over examples.
inline DslConfig scaled_batch_config(double sharpness) {
  DslConfig cfg;
  cfg.sharpness = sharpness;
  cfg.match_exact_units = false;
  cfg.scale_by_comparisons = true;
  cfg.skip_batch_axis = true;
  cfg.reduction = Reduction::mean;
  return cfg;
}

struct DslGradient {
  double value = 0.0;  // reduced loss; per-example values are summed under Reduction::none
  Tensor d_y;
  Tensor d_x;
  double d_sharpness = 0.0;
};

namespace detail {

// Sign-like functions, evaluated on whole blocks of scaled differences z.
// `slope` receives f'(z) when requested; `tmp` is scratch of the same length.
using Block = Eigen::Ref<Eigen::ArrayXd>;
using ConstBlock = Eigen::Ref<const Eigen::ArrayXd>;

struct TanhSign {
  static constexpr double saturation = 40.0;
  static double value(double z) { return std::tanh(z); }
  static void eval(ConstBlock z, Block v, Block tmp, Block slope, bool want_slope) {
    // exp(-2|z|) gives tanh and 1 - tanh^2 without cancellation near saturation.
    // Past |z| = 40 tanh rounds to +-1 and the slope (< 4e-35) is flushed to 0,
    // which keeps subnormals out of everything downstream.
    // ArrayBase::sign() and bool casts are not vectorised, hence the selects.
    tmp = (-2.0 * z.abs().min(saturation)).exp();
    v = (1.0 - tmp) / (1.0 + tmp);
    v = (z < 0.0).select(-v, v);
    if (want_slope) slope = (z.abs() < saturation).select(4.0 * tmp / (1.0 + tmp).square(), 0.0);
  }
};

struct SoftsignSign {
  static double value(double z) { return z / (1.0 + std::abs(z)); }
  static void eval(ConstBlock z, Block v, Block tmp, Block slope, bool want_slope) {
    tmp = 1.0 + z.abs();
    v = z / tmp;
    if (want_slope) slope = tmp.square().inverse();
  }
};

struct ExactSign {
  static double value(double z) { return static_cast<double>((z > 0.0) - (z < 0.0)); }
  static void eval(ConstBlock z, Block v, Block, Block slope, bool want_slope) {
    using Arr = Eigen::ArrayXd;
    const auto m = z.size();
    v = (z > 0.0).select(Arr::Constant(m, 1.0), (z < 0.0).select(Arr::Constant(m, -1.0), Arr::Zero(m)));
    if (want_slope) slope.setZero();
  }
};

struct GradSink {
  double* gx = nullptr;
  double* gy = nullptr;
  double ds = 0.0;
  double scale = 1.0;  // extra factor on partials (mean reduction)
};

struct Scratch {
  Eigen::ArrayXd dx, dy, z, fx, fy, sx, sy, tmp;
  void reserve(Eigen::Index n) {
    if (dx.size() >= n) return;
    for (auto* a : {&dx, &dy, &z, &fx, &fy, &sx, &sy, &tmp}) a->resize(n);
  }
};

inline Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

enum class GradMode { none, y_only, full };

// Loss of one contiguous example. Returns u * sum_a w_a * sum |f(s dx) - f(s dy)|.
// Along any axis the trailing and leading elements of all differences of one
// outer slab form two contiguous runs of (n - 1) * inner values.

template <typename Sign, GradMode Mode>
double example_loss(const double* x, const double* y, std::span<const std::size_t> shape,
                    std::span<const double> weights, double s, double u, GradSink* sink) {
  using CMap = Eigen::Map<const Eigen::ArrayXd>;
  using Map = Eigen::Map<Eigen::ArrayXd>;
  using Arr = Eigen::ArrayXd;
  // Runs are cut into chunks so that all scratch arrays stay in L1.
  constexpr Eigen::Index chunk = 512;
  Scratch& b = scratch();
  b.reserve(chunk);
  double total = 0.0;
  for (std::size_t axis = 0; axis < shape.size(); ++axis) {
    double w = weights.empty() ? 1.0 : weights[axis];
    if (w == 0.0) continue;
    auto [outer, n, inner] = split_at(shape, axis);
    const auto run = static_cast<Eigen::Index>((n - 1) * inner);
    double acc = 0.0;
    double coef = s * w * u;
    for (std::size_t o = 0; o < outer; ++o) {
      for (Eigen::Index c = 0; c < run; c += chunk) {
        const Eigen::Index m = std::min(chunk, run - c);
        const std::size_t lo = o * n * inner + static_cast<std::size_t>(c);
        const std::size_t hi = lo + inner;
        auto dx = b.dx.head(m), dy = b.dy.head(m), z = b.z.head(m), fx = b.fx.head(m), fy = b.fy.head(m);
        auto sx = b.sx.head(m), sy = b.sy.head(m), tmp = b.tmp.head(m);
        if constexpr (Mode == GradMode::full) {
          dx = CMap(x + hi, m) - CMap(x + lo, m);
          dy = CMap(y + hi, m) - CMap(y + lo, m);
          z = s * dx;
        } else {
          z = s * (CMap(x + hi, m) - CMap(x + lo, m));
        }
        Sign::eval(z, fx, tmp, sx, Mode == GradMode::full);
        if constexpr (Mode == GradMode::full) z = s * dy;
        else z = s * (CMap(y + hi, m) - CMap(y + lo, m));
        Sign::eval(z, fy, tmp, sy, Mode != GradMode::none);
        acc += (fx - fy).abs().sum();
        if constexpr (Mode != GradMode::none) {
          tmp = (fx > fy).select(Arr::Constant(m, 1.0), (fx < fy).select(Arr::Constant(m, -1.0), Arr::Zero(m)));  // kink: 0
          double k = coef * sink->scale;
          z = tmp * sy * k;
          Map(sink->gy + hi, m) -= z;
          Map(sink->gy + lo, m) += z;
          if constexpr (Mode == GradMode::full) {
            z = tmp * sx * k;
            Map(sink->gx + hi, m) += z;
            Map(sink->gx + lo, m) -= z;
            sink->ds += (tmp * (dx * sx - dy * sy)).sum() * w * u * sink->scale;
          }
        }
      }
    }
    total += w * acc;
  }
  return u * total;
}

struct Layout {
  std::size_t examples = 1;
  std::size_t example_size = 0;
  Shape example_shape;
};

inline Layout check_inputs(const Tensor& x, const Tensor& y, const std::optional<std::vector<double>>& weights,
                           bool skip_batch_axis, bool scan_finite = true) {
  require_same_shape(x, y);
  if (x.empty()) throw Error(Errc::shape, "empty tensor");
  Layout layout;
  if (skip_batch_axis) {
    if (x.rank() < 2) throw Error(Errc::degenerate, "no axes left to compare after skipping the batch axis");
    layout.examples = x.extent(0);
    layout.example_shape.assign(x.shape().begin() + 1, x.shape().end());
  } else {
    layout.example_shape = x.shape();
  }
  layout.example_size = element_count(layout.example_shape);
  if (weights && weights->size() != layout.example_shape.size())
    throw Error(Errc::config, "expected " + std::to_string(layout.example_shape.size()) + " weights, got " +
                                  std::to_string(weights->size()));
  for (std::size_t a = 0; a < layout.example_shape.size(); ++a)
    if (layout.example_shape[a] < 2)
      throw Error(Errc::degenerate, "compared axis " + std::to_string(a) + " has extent 1");
  if (scan_finite) {
    require_finite(x, "X");
    require_finite(y, "Y");
  }
  return layout;
}

inline void validate(const DslConfig& cfg) {
  if (!(cfg.sharpness > 0.0) || !std::isfinite(cfg.sharpness))
    throw Error(Errc::config, "sharpness must be a positive finite number");
  if (cfg.match_exact_units && cfg.scale_by_comparisons)
    throw Error(Errc::config, "match_exact_units and scale_by_comparisons are mutually exclusive");
  if (cfg.weights)
    for (double w : *cfg.weights)
      if (!std::isfinite(w)) throw Error(Errc::config, "non-finite weight");
}

}  // namespace detail

inline double sign_like(double x, SignKind kind, double s) {
  switch (kind) {
    case SignKind::exact: return detail::ExactSign::value(x);
    case SignKind::tanh: return detail::TanhSign::value(s * x);
    case SignKind::softsign: return detail::SoftsignSign::value(s * x);
  }
  return 0.0;
}

/// Number of adjacent-pair comparisons over all axes of `shape`.
inline std::size_t comparison_count(std::span<const std::size_t> shape) {
  std::size_t total = 0;
  for (std::size_t a = 0; a < shape.size(); ++a) total += element_count(shape) / shape[a] * (shape[a] - 1);
  return total;
}

namespace detail {

inline double unit_factor(const DslConfig& cfg, std::span<const std::size_t> example_shape) {
  if (cfg.match_exact_units) return 0.5;
  if (cfg.scale_by_comparisons) return 1.0 / static_cast<double>(comparison_count(example_shape));
  return 1.0;
}

template <typename Sign>
std::vector<double> per_example(const Tensor& x, const Tensor& y, const DslConfig& cfg, const Layout& layout) {
  std::span<const double> w;
  if (cfg.weights) w = *cfg.weights;
  double u = unit_factor(cfg, layout.example_shape);
  std::vector<double> out(layout.examples);
  for (std::size_t e = 0; e < layout.examples; ++e) {
    std::size_t off = e * layout.example_size;
    out[e] = example_loss<Sign, GradMode::none>(x.values().data() + off, y.values().data() + off, layout.example_shape, w,
                                       cfg.sharpness, u, nullptr);
  }
  return out;
}

inline std::vector<double> dispatch_per_example(const Tensor& x, const Tensor& y, const DslConfig& cfg,
                                                const Layout& layout) {
  switch (cfg.sign_kind) {
    case SignKind::exact: return per_example<ExactSign>(x, y, cfg, layout);
    case SignKind::tanh: return per_example<TanhSign>(x, y, cfg, layout);
    case SignKind::softsign: return per_example<SoftsignSign>(x, y, cfg, layout);
  }
  return {};
}

// Reuses out.d_x / out.d_y storage when the shape already matches.
inline void reset_gradient(const Shape& shape, DslGradient& out, bool with_x) {
  for (Tensor* t : {&out.d_x, &out.d_y}) {
    if (t == &out.d_x && !with_x) continue;
    if (t->shape() == shape) std::fill(t->values().begin(), t->values().end(), 0.0);
    else *t = Tensor(shape);
  }
  out.value = 0.0;
  out.d_sharpness = 0.0;
}

template <typename Sign, GradMode Mode>
void gradient(const Tensor& x, const Tensor& y, const DslConfig& cfg, const Layout& layout, DslGradient& out,
              bool with_x = true) {
  std::span<const double> w;
  if (cfg.weights) w = *cfg.weights;
  double u = unit_factor(cfg, layout.example_shape);
  reset_gradient(x.shape(), out, with_x);
  GradSink sink;
  sink.scale = cfg.skip_batch_axis && cfg.reduction == Reduction::mean ? 1.0 / static_cast<double>(layout.examples)
                                                                       : 1.0;
  double total = 0.0;
  for (std::size_t e = 0; e < layout.examples; ++e) {
    std::size_t off = e * layout.example_size;
    sink.gx = out.d_x.values().data() + off;
    sink.gy = out.d_y.values().data() + off;
    total += example_loss<Sign, Mode>(x.values().data() + off, y.values().data() + off, layout.example_shape, w,
                                      cfg.sharpness, u, &sink);
  }
  out.value = total * sink.scale;
  out.d_sharpness = sink.ds;
}

}  // namespace detail

/// Per-example DSL values as a rank-1 tensor (one entry when the batch axis is not skipped).
inline Tensor dsl_forward_per_example(const Tensor& x, const Tensor& y, const DslConfig& cfg) {
  detail::validate(cfg);
  auto layout = detail::check_inputs(x, y, cfg.weights, cfg.skip_batch_axis);
  auto values = detail::dispatch_per_example(x, y, cfg, layout);
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

/// Scalar DSL value. With a skipped batch axis the per-example values are
/// summed or averaged per cfg.reduction; Reduction::none needs dsl_forward_per_example.
inline double dsl_forward(const Tensor& x, const Tensor& y, const DslConfig& cfg) {
  detail::validate(cfg);
  auto layout = detail::check_inputs(x, y, cfg.weights, cfg.skip_batch_axis);
  if (cfg.skip_batch_axis && cfg.reduction == Reduction::none)
    throw Error(Errc::config, "reduction none yields one value per example; use dsl_forward_per_example");
  auto values = detail::dispatch_per_example(x, y, cfg, layout);
  double total = 0.0;
  for (double v : values) total += v;
  if (cfg.skip_batch_axis && cfg.reduction == Reduction::mean) total /= static_cast<double>(layout.examples);
  return total;
}

/// Analytic partials of the reduced loss with respect to Y, X and the
/// sharpness, written into `out` (its tensors are reused when shapes match).
/// The |.| kink takes subgradient 0. Under Reduction::none the partials are
/// those of the summed per-example losses. With `y_only` the X and sharpness
/// partials are skipped and left at zero.
inline void dsl_gradient_into(const Tensor& x, const Tensor& y, const DslConfig& cfg, DslGradient& out,
                              bool y_only = false) {
  detail::validate(cfg);
  if (cfg.sign_kind == SignKind::exact)
    throw Error(Errc::not_differentiable, "the exact sign function has no useful gradient");
  auto layout = detail::check_inputs(x, y, cfg.weights, cfg.skip_batch_axis);
  using detail::GradMode;
  if (cfg.sign_kind == SignKind::tanh) {
    if (y_only) detail::gradient<detail::TanhSign, GradMode::y_only>(x, y, cfg, layout, out);
    else detail::gradient<detail::TanhSign, GradMode::full>(x, y, cfg, layout, out);
  } else {
    if (y_only) detail::gradient<detail::SoftsignSign, GradMode::y_only>(x, y, cfg, layout, out);
    else detail::gradient<detail::SoftsignSign, GradMode::full>(x, y, cfg, layout, out);
  }
}

namespace detail {

// Training path: Y partials only. Skips the finiteness scans (the caller checks
// the loss instead) and never touches out.d_x.
inline void dsl_y_gradient_unchecked(const Tensor& x, const Tensor& y, const DslConfig& cfg, DslGradient& out) {
  auto layout = check_inputs(x, y, cfg.weights, cfg.skip_batch_axis, false);
  if (cfg.sign_kind == SignKind::tanh) gradient<TanhSign, GradMode::y_only>(x, y, cfg, layout, out, false);
  else gradient<SoftsignSign, GradMode::y_only>(x, y, cfg, layout, out, false);
}

}  // namespace detail

inline DslGradient dsl_gradient(const Tensor& x, const Tensor& y, const DslConfig& cfg) {
  DslGradient out;
  dsl_gradient_into(x, y, cfg, out);
  return out;
}

/// Direct count sum_a w_a * sum |sign(dX) - sign(dY)| / 2 over all examples.
inline double exact_sign_mismatch_count(const Tensor& x, const Tensor& y,
                                        const std::optional<std::vector<double>>& weights = std::nullopt,
                                        bool skip_batch_axis = false) {
  DslConfig cfg;
  cfg.weights = weights;
  cfg.sign_kind = SignKind::exact;
  cfg.match_exact_units = true;
  cfg.skip_batch_axis = skip_batch_axis;
  cfg.reduction = Reduction::sum;
  cfg.sharpness = 1.0;
  return dsl_forward(x, y, cfg);
}

}  // namespace dirsign
