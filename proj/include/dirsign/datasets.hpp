#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "dirsign/error.hpp"
#include "dirsign/tensor.hpp"

namespace dirsign {

inline constexpr std::size_t wave_length = 2048;

/// Rows of sin(linspace(0, 2pi) + phase) * exp(+-linspace(-1, 1)), phase ~ U(0, 2pi),
/// envelope direction a fair coin flip. Shape (count, 2048).
inline Tensor generate_wave_dataset(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error(Errc::shape, "wave dataset needs at least one example");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::bernoulli_distribution rising(0.5);
  Tensor out(Shape{count, wave_length});
  auto v = out.values();
  const double last = static_cast<double>(wave_length - 1);
  for (std::size_t r = 0; r < count; ++r) {
    double phase = phase_dist(rng);
    double direction = rising(rng) ? 1.0 : -1.0;
    for (std::size_t k = 0; k < wave_length; ++k) {
      double t = static_cast<double>(k) / last;
      v[r * wave_length + k] = std::sin(2.0 * std::numbers::pi * t + phase) * std::exp(direction * (2.0 * t - 1.0));
    }
  }
  return out;
}

/// Gaussian random walks shifted to start at 0 and divided by the dataset-wide
/// (population) standard deviation. Shape (count, length).
inline Tensor generate_walk_dataset(std::size_t count, std::size_t length, std::uint64_t seed) {
  if (count == 0) throw Error(Errc::shape, "walk dataset needs at least one example");
  if (length < 2) throw Error(Errc::shape, "walk length must be at least 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 1.0);
  Tensor out(Shape{count, length});
  auto v = out.values();
  for (std::size_t r = 0; r < count; ++r) {
    double level = 0.0;
    double* row = v.data() + r * length;
    for (std::size_t k = 0; k < length; ++k) {
      level += step(rng);
      row[k] = level;
    }
    double start = row[0];
    for (std::size_t k = 0; k < length; ++k) row[k] -= start;
  }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  double sd = std::sqrt(var / static_cast<double>(v.size()));
  if (!(sd > 0.0)) throw Error(Errc::degenerate, "walk dataset has zero spread");
  for (double& x : v) x /= sd;
  return out;
}

/// First `train` rows and the remaining rows of a (examples x ...) tensor.
inline std::pair<Tensor, Tensor> split_rows(const Tensor& data, std::size_t train) {
  std::size_t n = data.extent(0);
  if (train == 0 || train >= n) throw Error(Errc::shape, "split must leave both parts non-empty");
  std::size_t per = data.size() / n;
  Shape a = data.shape(), b = data.shape();
  a[0] = train;
  b[0] = n - train;
  auto v = data.values();
  return {Tensor(a, std::vector<double>(v.begin(), v.begin() + train * per)),
          Tensor(b, std::vector<double>(v.begin() + train * per, v.end()))};
}

/// Held-out split: the last 10% of rows (at least one) are held out.
inline std::pair<Tensor, Tensor> holdout_split(const Tensor& data) {
  std::size_t n = data.extent(0);
  std::size_t held = std::max<std::size_t>(1, n / 10);
  return split_rows(data, n - held);
}

}  // namespace dirsign
