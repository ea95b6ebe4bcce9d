#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dirsign/error.hpp"

namespace dirsign {

/// Dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows) : rows_(rows.size()) {
    cols_ = rows.size() ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
      if (r.size() != cols_) throw Error(Errc::shape, "ragged cost matrix");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Matching {
  /// (row, column) pairs, one per row, ascending by row.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_cost = 0.0;
};

namespace detail {

/// Hungarian method with row/column potentials for rows <= cols; assigns every
/// row to a distinct column. Entries may be negative. O(rows^2 * cols).
inline Matching rectangular_assignment(const CostMatrix& cost) {
  const std::size_t n = cost.rows(), m = cost.cols();
  Matching out;
  if (n == 0) return out;

  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based with a virtual column 0; col_owner[j] is the row matched to column j.
  std::vector<double> row_pot(n + 1, 0.0), col_pot(m + 1, 0.0), min_slack(m + 1);
  std::vector<std::size_t> col_owner(m + 1, 0), came_from(m + 1, 0);
  std::vector<char> visited(m + 1);

  for (std::size_t row = 1; row <= n; ++row) {
    col_owner[0] = row;
    std::size_t col = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(visited.begin(), visited.end(), 0);
    do {
      visited[col] = 1;
      std::size_t r = col_owner[col];
      std::size_t next = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= m; ++j) {
        if (visited[j]) continue;
        double slack = cost(r - 1, j - 1) - row_pot[r] - col_pot[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          came_from[j] = col;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          next = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (visited[j]) {
          row_pot[col_owner[j]] += delta;
          col_pot[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col = next;
    } while (col_owner[col] != 0);
    // Augment along the alternating path back to the virtual column.
    do {
      std::size_t prev = came_from[col];
      col_owner[col] = col_owner[prev];
      col = prev;
    } while (col != 0);
  }

  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= m; ++j)
    if (col_owner[j] != 0) row_to_col[col_owner[j] - 1] = j - 1;
  out.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.pairs.emplace_back(i, row_to_col[i]);
    out.total_cost += cost(i, row_to_col[i]);
  }
  return out;
}

}  // namespace detail

/// Optimal perfect matching of a square non-negative cost matrix
/// (Hungarian method with row/column potentials, O(n^3)).
inline Matching min_cost_assignment(const CostMatrix& cost) {
  if (cost.rows() != cost.cols())
    throw Error(Errc::shape, "cost matrix is " + std::to_string(cost.rows()) + "x" + std::to_string(cost.cols()));
  const std::size_t n = cost.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double c = cost(i, j);
      if (!std::isfinite(c)) throw Error(Errc::domain, "non-finite cost entry");
      if (c < 0.0) throw Error(Errc::domain, "negative cost entry");
    }
  return detail::rectangular_assignment(cost);
}

}  // namespace dirsign
