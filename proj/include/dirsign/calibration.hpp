#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dirsign/dsl.hpp"
#include "dirsign/error.hpp"
#include "dirsign/tensor.hpp"

namespace dirsign {

enum class ReferenceLoss { mse, mae };

struct CalibrationConfig {
  std::size_t max_steps = 5000;
  double threshold = 1e-8;  // stop once (DSL - reference)^2 falls below this
  double step_size = 0.5;   // SGD step on log(sharpness)
  std::size_t batch_size = 64;
  ReferenceLoss reference_loss = ReferenceLoss::mse;
  double initial_sharpness = 1.0;
  std::uint64_t seed = 0;
  SignKind sign_kind = SignKind::tanh;
};

struct CalibrationStep {
  std::size_t step = 0;
  double sharpness = 0.0;
  double opt_loss = 0.0;
};

struct CalibrationResult {
  double sharpness = 0.0;
  double final_opt_loss = 0.0;
  std::size_t steps_taken = 0;
  std::vector<CalibrationStep> log;
};

/// Reference loss over two equally shaped halves, paired positionally.
using ReferenceFn = std::function<double(const Tensor&, const Tensor&)>;

inline double mean_squared_error(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double mean_absolute_error(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

/// DSL settings used while calibrating: per-comparison scaling, mean over pairs.
inline DslConfig calibration_dsl_config(double sharpness, SignKind kind = SignKind::tanh) {
  DslConfig cfg = scaled_batch_config(sharpness);
  cfg.sign_kind = kind;
  return cfg;
}

inline void validate(const CalibrationConfig& cfg) {
  if (cfg.max_steps == 0) throw Error(Errc::config, "max_steps must be at least 1");
  if (!(cfg.threshold > 0.0)) throw Error(Errc::config, "threshold must be positive");
  if (!(cfg.step_size > 0.0)) throw Error(Errc::config, "step size must be positive");
  if (cfg.batch_size < 2) throw Error(Errc::config, "batch size must be at least 2");
  if (!(cfg.initial_sharpness > 0.0) || !std::isfinite(cfg.initial_sharpness))
    throw Error(Errc::config, "initial sharpness must be positive");
  if (cfg.sign_kind == SignKind::exact) throw Error(Errc::not_differentiable, "calibration needs a smooth sign");
}

/// Fits the sharpness so that DSL between random example pairs matches a
/// reference loss on the same pairs. Each step samples a batch without
/// replacement, pairs its first half with its second half, and takes one SGD
/// step on (DSL - reference)^2 with respect to log(sharpness). The loop stops
/// before updating once the squared gap is below the threshold.
inline CalibrationResult find_sharpness(std::span<const Tensor> dataset, const CalibrationConfig& cfg,
                                        const ReferenceFn& reference) {
  validate(cfg);
  if (dataset.empty()) throw Error(Errc::sampling, "empty dataset");
  if (cfg.batch_size > dataset.size())
    throw Error(Errc::sampling, "batch of " + std::to_string(cfg.batch_size) + " from " +
                                    std::to_string(dataset.size()) + " examples");
  for (const auto& t : dataset) require_same_shape(t, dataset.front());

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> indices(dataset.size());
  std::iota(indices.begin(), indices.end(), 0);
  const std::size_t half = cfg.batch_size / 2;
  std::vector<Tensor> first(half), second(half);

  CalibrationResult result;
  double log_s = std::log(cfg.initial_sharpness);
  double s = cfg.initial_sharpness;
  for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
    // Partial Fisher-Yates: the first batch_size entries become the sample.
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, indices.size() - 1);
      std::swap(indices[i], indices[pick(rng)]);
    }
    for (std::size_t i = 0; i < half; ++i) {
      first[i] = dataset[indices[i]];
      second[i] = dataset[indices[half + i]];
    }
    Tensor b1 = stack(first), b2 = stack(second);

    double ref = reference(b1, b2);
    if (!std::isfinite(ref)) throw Error(Errc::non_finite, "reference loss is not finite");
    if (ref == 0.0) throw Error(Errc::degenerate, "reference loss is zero on batch " + std::to_string(step));
    auto g = dsl_gradient(b1, b2, calibration_dsl_config(s, cfg.sign_kind));
    double gap = g.value - ref;
    double opt = gap * gap;

    result.log.push_back({step, s, opt});
    result.sharpness = s;
    result.final_opt_loss = opt;
    result.steps_taken = step;
    if (opt < cfg.threshold) break;

    // d opt / d log s = 2 * gap * dDSL/ds * s
    log_s -= cfg.step_size * 2.0 * gap * g.d_sharpness * s;
    s = std::exp(log_s);
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(Errc::diverged, "sharpness left (0, inf) at step " + std::to_string(step));
  }
  return result;
}

inline CalibrationResult find_sharpness(std::span<const Tensor> dataset, const CalibrationConfig& cfg) {
  ReferenceFn ref = cfg.reference_loss == ReferenceLoss::mse ? ReferenceFn(mean_squared_error)
                                                             : ReferenceFn(mean_absolute_error);
  return find_sharpness(dataset, cfg, ref);
}

}  // namespace dirsign
