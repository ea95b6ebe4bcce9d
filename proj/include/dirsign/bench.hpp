#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dirsign/correlation.hpp"
#include "dirsign/dsl.hpp"
#include "dirsign/persistence.hpp"
#include "dirsign/wasserstein.hpp"

namespace dirsign {

enum class LossKind { dsl, mse, exact_sign, persistence_wasserstein, correlation_distance };

inline constexpr std::string_view loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::dsl: return "dsl";
    case LossKind::mse: return "mse";
    case LossKind::exact_sign: return "exact-sign";
    case LossKind::persistence_wasserstein: return "persistence-wasserstein";
    case LossKind::correlation_distance: return "correlation-distance";
  }
  return "?";
}

inline LossKind parse_loss_kind(std::string_view name) {
  for (auto k : {LossKind::dsl, LossKind::mse, LossKind::exact_sign, LossKind::persistence_wasserstein,
                 LossKind::correlation_distance})
    if (name == loss_kind_name(k)) return k;
  throw Error(Errc::config, "unknown loss kind '" + std::string(name) + "'");
}

struct BenchRecord {
  LossKind kind = LossKind::dsl;
  std::size_t rank = 1;
  std::size_t size = 0;      // extent of every axis
  std::size_t elements = 0;  // size^rank
  double wall_time_seconds = 0.0;  // median over repetitions
  std::size_t repetitions = 0;
  std::optional<std::size_t> peak_alloc_bytes;
  bool over_budget = false;
};

struct BenchOptions {
  std::vector<LossKind> kinds{LossKind::dsl, LossKind::mse, LossKind::exact_sign, LossKind::persistence_wasserstein,
                              LossKind::correlation_distance};
  std::vector<std::size_t> ranks{1, 2};
  std::vector<std::size_t> sizes{16, 64, 256, 1024};
  std::size_t repetitions = 3;
  double time_budget_seconds = 1.0;
  std::uint64_t seed = 0;
  double sharpness = 32.0;
  /// Optional allocator probe (e.g. a counting operator new in the host program).
  std::function<void()> reset_peak_alloc;
  std::function<std::size_t()> peak_alloc;
};

/// Deterministic random input pair for one (rank, size) cell.
inline std::pair<Tensor, Tensor> bench_inputs(std::size_t rank, std::size_t size, std::uint64_t seed) {
  Shape shape(rank, size);
  std::mt19937_64 rng(seed ^ (rank * 0x9e3779b97f4a7c15ULL) ^ (size * 0xc2b2ae3d27d4eb4fULL));
  std::normal_distribution<double> dist;
  Tensor a(shape), b(shape);
  for (double& v : a.values()) v = dist(rng);
  for (double& v : b.values()) v = dist(rng);
  return {std::move(a), std::move(b)};
}

inline double run_loss(LossKind kind, const Tensor& a, const Tensor& b, double sharpness) {
  switch (kind) {
    case LossKind::dsl: {
      DslConfig cfg;
      cfg.sharpness = sharpness;
      return dsl_forward(a, b, cfg);
    }
    case LossKind::mse: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      return s / static_cast<double>(a.size());
    }
    case LossKind::exact_sign: return exact_sign_mismatch_count(a, b);
    case LossKind::persistence_wasserstein:
      return wasserstein_distance(sublevel_persistence_0d(a), sublevel_persistence_0d(b), 2.0);
    case LossKind::correlation_distance: return pairwise_correlation_distance(a, b);
  }
  return 0.0;
}

/// Median wall time of each loss over ascending sizes; once a kind's median
/// exceeds the budget at some size, larger sizes of that kind and rank are skipped.
inline std::vector<BenchRecord> benchmark_losses(const BenchOptions& opt) {
  if (opt.repetitions < 3) throw Error(Errc::config, "need at least 3 repetitions");
  if (opt.sizes.empty() || opt.ranks.empty() || opt.kinds.empty()) throw Error(Errc::config, "empty benchmark grid");
  for (std::size_t i = 0; i < opt.sizes.size(); ++i)
    if (opt.sizes[i] == 0 || (i && opt.sizes[i] <= opt.sizes[i - 1]))
      throw Error(Errc::config, "sizes must be positive and ascending");
  for (auto r : opt.ranks)
    if (r < 1 || r > 3) throw Error(Errc::config, "benchmark ranks must be 1-3");

  std::vector<BenchRecord> out;
  volatile double sink = 0.0;
  for (auto kind : opt.kinds) {
    for (auto rank : opt.ranks) {
      for (auto size : opt.sizes) {
        auto [a, b] = bench_inputs(rank, size, opt.seed);
        BenchRecord rec{kind, rank, size, a.size(), 0.0, 0, std::nullopt, false};
        std::vector<double> times;
        std::size_t slow = 0;
        if (opt.reset_peak_alloc) opt.reset_peak_alloc();
        for (std::size_t r = 0; r < opt.repetitions; ++r) {
          auto t0 = std::chrono::steady_clock::now();
          sink = sink + run_loss(kind, a, b, opt.sharpness);
          auto t1 = std::chrono::steady_clock::now();
          times.push_back(std::chrono::duration<double>(t1 - t0).count());
          if (times.back() > opt.time_budget_seconds && ++slow * 2 > opt.repetitions) break;
        }
        if (opt.peak_alloc) rec.peak_alloc_bytes = opt.peak_alloc();
        std::sort(times.begin(), times.end());
        rec.repetitions = times.size();
        rec.wall_time_seconds = times[times.size() / 2];
        rec.over_budget = rec.wall_time_seconds > opt.time_budget_seconds;
        out.push_back(rec);
        if (rec.over_budget) break;
      }
    }
  }
  return out;
}

/// First size at which a kind's record went over budget, if any.
inline std::optional<std::size_t> budget_cutoff(const std::vector<BenchRecord>& records, LossKind kind,
                                                std::size_t rank) {
  for (const auto& r : records)
    if (r.kind == kind && r.rank == rank && r.over_budget) return r.size;
  return std::nullopt;
}

}  // namespace dirsign
