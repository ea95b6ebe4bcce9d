#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>
#include <utility>

#include "dirsign/assignment.hpp"
#include "dirsign/error.hpp"
#include "dirsign/persistence.hpp"

namespace dirsign {

enum class InfiniteDeathPolicy {
  cap_at_global_max,  // replace +inf by the filtration maximum
  drop,               // remove essential points
  reject,             // fail on essential points
};

/// Finite copy of a diagram's points with essential points handled per `policy`.
/// Capping uses diagram.filtration_max, or the largest finite coordinate of the
/// diagram when the filtration maximum is unknown (e.g. read from text).
inline std::vector<PersistencePair> resolve_infinite(const PersistenceDiagram& diagram, InfiniteDeathPolicy policy) {
  std::vector<PersistencePair> out;
  out.reserve(diagram.points.size());
  double cap = 0.0;
  if (policy == InfiniteDeathPolicy::cap_at_global_max) {
    if (diagram.filtration_max) {
      cap = *diagram.filtration_max;
    } else {
      cap = -std::numeric_limits<double>::infinity();
      for (const auto& p : diagram.points) {
        cap = std::max(cap, p.birth);
        if (!p.essential()) cap = std::max(cap, p.death);
      }
    }
  }
  for (const auto& p : diagram.points) {
    if (!p.essential()) {
      out.push_back(p);
      continue;
    }
    switch (policy) {
      case InfiniteDeathPolicy::cap_at_global_max: out.push_back({p.birth, std::max(cap, p.birth)}); break;
      case InfiniteDeathPolicy::drop: break;
      case InfiniteDeathPolicy::reject:
        throw Error(Errc::infinite_death, "diagram has an essential point born at " + format_diagram_value(p.birth));
    }
  }
  return out;
}

/// Euclidean distance from (birth, death) to its projection on the diagonal.
inline double diagonal_distance(const PersistencePair& p) { return std::abs(p.death - p.birth) / std::numbers::sqrt2; }

/// p-Wasserstein distance between diagonal-augmented diagrams with the
/// Euclidean ground metric. Each point matches a point of the other diagram or
/// its own diagonal projection; diagonal-to-diagonal pairs are free.
inline double wasserstein_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, double p = 2.0,
                                   InfiniteDeathPolicy policy = InfiniteDeathPolicy::cap_at_global_max) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(Errc::order, "Wasserstein order must be finite and >= 1");
  auto xs = resolve_infinite(a, policy);
  auto ys = resolve_infinite(b, policy);
  if (xs.size() > ys.size()) std::swap(xs, ys);
  const std::size_t n1 = xs.size(), n2 = ys.size();

  // Every point of the larger diagram starts on the diagonal; each point of
  // the smaller one then either takes its diagonal cost or swaps a larger-side
  // point off the diagonal. Rows: smaller side. Columns: larger-side points,
  // then n1 diagonal slots.
  std::vector<double> y_diag(n2);
  double base = 0.0;
  for (std::size_t j = 0; j < n2; ++j) {
    y_diag[j] = std::pow(diagonal_distance(ys[j]), p);
    base += y_diag[j];
  }
  CostMatrix cost(n1, n2 + n1);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j)
      cost(i, j) = std::pow(std::hypot(xs[i].birth - ys[j].birth, xs[i].death - ys[j].death), p) - y_diag[j];
    double to_diag = std::pow(diagonal_distance(xs[i]), p);
    for (std::size_t j = n2; j < n2 + n1; ++j) cost(i, j) = to_diag;
  }
  double total = base + detail::rectangular_assignment(cost).total_cost;
  return std::pow(std::max(total, 0.0), 1.0 / p);
}

}  // namespace dirsign
