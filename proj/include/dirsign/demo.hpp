#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dirsign/autoencoder.hpp"
#include "dirsign/datasets.hpp"
#include "dirsign/evaluation.hpp"
#include "dirsign/persistence.hpp"
#include "dirsign/correlation.hpp"
#include "dirsign/wasserstein.hpp"

namespace dirsign {

enum class DemoKind { wave, walk };

inline DemoKind parse_demo_kind(std::string_view name) {
  if (name == "wave") return DemoKind::wave;
  if (name == "walk") return DemoKind::walk;
  throw Error(Errc::config, "unknown demo '" + std::string(name) + "' (expected wave or walk)");
}

struct DemoPreset {
  ModelSpec model;
  TrainConfig train;
  std::size_t dataset_size = 0;
  std::size_t sequence_length = 0;
};

/// Sinusoid demo: 2048 -> 32 -> 2 -> 32 -> 2048, Adam lr 1e-3, batch 1024,
/// 20000 batches, sharpness 32, loss 1 MSE + 128 DSL.
inline DemoPreset wave_preset() {
  DemoPreset p;
  p.model = ModelSpec{wave_length, {32}, 2, {32}};
  p.train.learning_rate = 1e-3;
  p.train.batch_size = 1024;
  p.train.total_batches = 20000;
  p.train.dsl = scaled_batch_config(32.0);
  p.train.mse_weight = 1.0;
  p.train.dsl_weight = 128.0;
  p.dataset_size = 4096;
  p.sequence_length = wave_length;
  return p;
}

/// Random-walk price analogue: 64 -> 2048 -> 256 -> 32 -> 16 and mirrored,
/// Adam lr 1e-4, batch 64, 64000 batches, sharpness 16.
inline DemoPreset walk_preset() {
  DemoPreset p;
  p.model = ModelSpec{64, {2048, 256, 32}, 16, {32, 256, 2048}};
  p.train.learning_rate = 1e-4;
  p.train.batch_size = 64;
  p.train.total_batches = 64000;
  p.train.dsl = scaled_batch_config(16.0);
  p.train.mse_weight = 1.0;
  p.train.dsl_weight = 128.0;
  p.dataset_size = 8192;
  p.sequence_length = 64;
  return p;
}

inline DemoPreset demo_preset(DemoKind kind) { return kind == DemoKind::wave ? wave_preset() : walk_preset(); }

inline Tensor demo_dataset(DemoKind kind, const DemoPreset& preset, std::uint64_t seed) {
  return kind == DemoKind::wave ? generate_wave_dataset(preset.dataset_size, seed)
                                : generate_walk_dataset(preset.dataset_size, preset.sequence_length, seed);
}

struct ExampleEvaluation {
  std::size_t index = 0;
  double directional_agreement = 0.0;
  double wasserstein = 0.0;             // order-2, essential points capped
  double correlation_distance = 0.0;    // scalar features, one location per sample
};

/// Per-row comparison of originals and reconstructions (both examples x features).
inline std::vector<ExampleEvaluation> evaluate_reconstructions(const Tensor& originals, const Tensor& recon,
                                                               std::size_t limit = SIZE_MAX) {
  require_same_shape(originals, recon);
  std::size_t n = std::min(limit, originals.extent(0));
  std::vector<ExampleEvaluation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Tensor a = slice_leading(originals, i), b = slice_leading(recon, i);
    ExampleEvaluation e;
    e.index = i;
    e.directional_agreement = directional_agreement(a, b);
    e.wasserstein = wasserstein_distance(sublevel_persistence_0d(a), sublevel_persistence_0d(b), 2.0,
                                         InfiniteDeathPolicy::cap_at_global_max);
    e.correlation_distance = pairwise_correlation_distance(a, b);
    out.push_back(e);
  }
  return out;
}

struct DemoRun {
  TrainResult trained;
  Tensor held_out;
  Tensor reconstruction;
};

/// Generates the dataset, holds out the last 10%, trains, and reconstructs the held-out rows.
inline DemoRun run_demo(DemoKind kind, const DemoPreset& preset, std::uint64_t data_seed) {
  auto [train, held] = holdout_split(demo_dataset(kind, preset, data_seed));
  DemoRun run{train_autoencoder(train, preset.model, preset.train), std::move(held), {}};
  run.reconstruction = reconstruct(run.trained.model, run.held_out);
  return run;
}

}  // namespace dirsign
