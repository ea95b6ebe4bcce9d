#pragma once

#include <cstddef>

#include "dirsign/dsl.hpp"
#include "dirsign/error.hpp"
#include "dirsign/tensor.hpp"

namespace dirsign {

/// Running sum of finite-difference signs: out[0] = 0, out[k] = out[k-1] + sign(x[k] - x[k-1]).
inline Tensor cumulative_signs(const Tensor& x) {
  if (x.rank() != 1) throw Error(Errc::shape, "cumulative signs need a rank-1 tensor");
  if (x.size() < 2) throw Error(Errc::degenerate, "cumulative signs need at least two values");
  Tensor out(x.shape());
  for (std::size_t k = 1; k < x.size(); ++k) {
    double d = x[k] - x[k - 1];
    out[k] = out[k - 1] + static_cast<double>((d > 0.0) - (d < 0.0));
  }
  return out;
}

/// Fraction of finite-difference positions, over every compared axis, where
/// sign(dX) == sign(dY) exactly.
inline double directional_agreement(const Tensor& x, const Tensor& y, bool skip_batch_axis = false) {
  auto layout = detail::check_inputs(x, y, std::nullopt, skip_batch_axis);
  std::size_t matches = 0, total = 0;
  auto xv = x.values();
  auto yv = y.values();
  for (std::size_t e = 0; e < layout.examples; ++e) {
    const double* xe = xv.data() + e * layout.example_size;
    const double* ye = yv.data() + e * layout.example_size;
    for (std::size_t axis = 0; axis < layout.example_shape.size(); ++axis) {
      auto [outer, n, inner] = split_at(layout.example_shape, axis);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t k = 0; k + 1 < n; ++k)
          for (std::size_t i = 0; i < inner; ++i) {
            std::size_t lo = (o * n + k) * inner + i;
            double dx = xe[lo + inner] - xe[lo];
            double dy = ye[lo + inner] - ye[lo];
            matches += ((dx > 0.0) - (dx < 0.0)) == ((dy > 0.0) - (dy < 0.0));
            ++total;
          }
    }
  }
  return static_cast<double>(matches) / static_cast<double>(total);
}

}  // namespace dirsign
