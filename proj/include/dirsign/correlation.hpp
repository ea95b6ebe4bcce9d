#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dirsign/error.hpp"
#include "dirsign/tensor.hpp"

namespace dirsign {

namespace detail {

// Location-major copy: row l holds the feature vector of location l.
inline std::vector<double> gather_locations(const Tensor& t, std::optional<std::size_t> feature_axis,
                                            std::size_t& locations, std::size_t& features) {
  if (!feature_axis) {
    locations = t.size();
    features = 1;
    return t.vector();
  }
  auto [outer, f, inner] = split_at(t.shape(), *feature_axis);
  locations = outer * inner;
  features = f;
  std::vector<double> out(t.size());
  auto v = t.values();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < f; ++k)
      for (std::size_t i = 0; i < inner; ++i) out[(o * inner + i) * f + k] = v[(o * f + k) * inner + i];
  return out;
}

inline double euclidean(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace detail

/// One minus the Pearson correlation between the strict upper triangles of
/// the two inputs' location-by-location Euclidean distance matrices. Every
/// axis except `feature_axis` indexes locations; without a feature axis each
/// element is a location with a scalar feature.
inline double pairwise_correlation_distance(const Tensor& x, const Tensor& y,
                                            std::optional<std::size_t> feature_axis = std::nullopt) {
  require_same_shape(x, y);
  if (feature_axis && *feature_axis >= x.rank())
    throw Error(Errc::axis, "feature axis " + std::to_string(*feature_axis) + " out of range");
  require_finite(x, "X");
  require_finite(y, "Y");

  std::size_t m = 0, f = 0;
  auto lx = detail::gather_locations(x, feature_axis, m, f);
  auto ly = detail::gather_locations(y, feature_axis, m, f);
  if (m < 3) throw Error(Errc::too_few_locations, std::to_string(m) + " locations, need at least 3");

  // Streaming co-moments over the m(m-1)/2 distance pairs.
  double count = 0.0, mean_x = 0.0, mean_y = 0.0, m2_x = 0.0, m2_y = 0.0, c_xy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double dx = detail::euclidean(&lx[i * f], &lx[j * f], f);
      double dy = detail::euclidean(&ly[i * f], &ly[j * f], f);
      count += 1.0;
      double ex = dx - mean_x;
      mean_x += ex / count;
      double ey = dy - mean_y;
      mean_y += ey / count;
      m2_x += ex * (dx - mean_x);
      m2_y += ey * (dy - mean_y);
      c_xy += ex * (dy - mean_y);
    }
  }
  if (!(m2_x > 0.0) || !(m2_y > 0.0))
    throw Error(Errc::undefined_correlation, "pairwise distances have zero variance");
  double r = c_xy / std::sqrt(m2_x * m2_y);
  return std::clamp(1.0 - r, 0.0, 2.0);
}

}  // namespace dirsign
