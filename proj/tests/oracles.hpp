#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include <quadmath.h>

#include "dirsign/assignment.hpp"
#include "dirsign/dsl.hpp"
#include "dirsign/persistence.hpp"
#include "dirsign/tensor.hpp"

namespace oracle {

using dirsign::PersistencePair;
using dirsign::Tensor;

// 113-bit mantissa: central differences at h = 1e-6 still resolve partials near 1e-12.
using Quad = __float128;

// Grid coordinates of a flat row-major index.
inline std::vector<long> coords_of(std::size_t flat, const dirsign::Shape& shape) {
  std::vector<long> c(shape.size());
  for (std::size_t i = shape.size(); i-- > 0;) {
    c[i] = static_cast<long>(flat % shape[i]);
    flat /= shape[i];
  }
  return c;
}

// All points within Chebyshev distance 1 (3^d - 1 neighbourhood).
inline std::vector<std::size_t> neighbours(std::size_t flat, const dirsign::Shape& shape) {
  auto c = coords_of(flat, shape);
  std::vector<std::size_t> out;
  std::size_t d = shape.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < d; ++i) combos *= 3;
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t rem = code;
    bool zero = true, inside = true;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < d; ++i) {
      long off = static_cast<long>(rem % 3) - 1;
      rem /= 3;
      if (off != 0) zero = false;
      long v = c[i] + off;
      if (v < 0 || v >= static_cast<long>(shape[i])) inside = false;
      idx = idx * shape[i] + static_cast<std::size_t>(std::max(v, 0L));
    }
    if (!zero && inside) out.push_back(idx);
  }
  return out;
}

/// Exhaustive 0-D persistence: threshold at each distinct value, label the
/// sublevel set's connected components by BFS, and follow how components of
/// the previous level combine. Components made only of new points are born at
/// the level; when older components meet, all but the lowest-born die there.
inline std::vector<PersistencePair> threshold_label_persistence(const Tensor& t) {
  auto vals = t.values();
  std::vector<double> levels(vals.begin(), vals.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::vector<long> prev_label(t.size(), -1);
  std::vector<double> prev_birth;
  std::vector<PersistencePair> out;
  for (double level : levels) {
    std::vector<long> label(t.size(), -1);
    std::vector<double> birth;
    long count = 0;
    for (std::size_t s = 0; s < t.size(); ++s) {
      if (vals[s] > level || label[s] >= 0) continue;
      std::vector<std::size_t> members;
      std::queue<std::size_t> q;
      q.push(s);
      label[s] = count;
      while (!q.empty()) {
        auto p = q.front();
        q.pop();
        members.push_back(p);
        for (auto nb : neighbours(p, t.shape()))
          if (vals[nb] <= level && label[nb] < 0) {
            label[nb] = count;
            q.push(nb);
          }
      }
      std::set<long> older;
      for (auto p : members)
        if (prev_label[p] >= 0) older.insert(prev_label[p]);
      if (older.empty()) {
        birth.push_back(level);
      } else {
        std::vector<double> births;
        for (auto o : older) births.push_back(prev_birth[o]);
        std::sort(births.begin(), births.end());
        for (std::size_t i = 1; i < births.size(); ++i) out.push_back({births[i], level});
        birth.push_back(births.front());
      }
      ++count;
    }
    prev_label = std::move(label);
    prev_birth = std::move(birth);
  }
  for (double b : prev_birth) out.push_back({b, std::numeric_limits<double>::infinity()});
  std::sort(out.begin(), out.end());
  return out;
}

/// Points that are minimal within their neighbourhood and strictly lower
/// than all neighbours (valid for inputs without ties).
inline std::size_t strict_local_minima(const Tensor& t) {
  std::size_t n = 0;
  for (std::size_t p = 0; p < t.size(); ++p) {
    bool is_min = true;
    for (auto nb : neighbours(p, t.shape()))
      if (t[nb] <= t[p]) is_min = false;
    n += is_min;
  }
  return n;
}

inline double diag_dist(const PersistencePair& p) { return std::abs(p.death - p.birth) / std::sqrt(2.0); }

/// Wasserstein distance by enumerating every partial matching: each point of
/// `a` goes to a distinct point of `b` or to the diagonal; leftover points of
/// `b` go to the diagonal.
inline double brute_force_wasserstein(const std::vector<PersistencePair>& a, const std::vector<PersistencePair>& b,
                                      double p) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> used(b.size(), 0);
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double acc) {
    if (i == a.size()) {
      double total = acc;
      for (std::size_t j = 0; j < b.size(); ++j)
        if (!used[j]) total += std::pow(diag_dist(b[j]), p);
      best = std::min(best, total);
      return;
    }
    rec(i + 1, acc + std::pow(diag_dist(a[i]), p));
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      used[j] = 1;
      double d = std::sqrt((a[i].birth - b[j].birth) * (a[i].birth - b[j].birth) +
                           (a[i].death - b[j].death) * (a[i].death - b[j].death));
      rec(i + 1, acc + std::pow(d, p));
      used[j] = 0;
    }
  };
  rec(0, 0.0);
  return std::pow(best, 1.0 / p);
}

/// Minimum total cost over all n! permutations.
inline double brute_force_assignment(const dirsign::CostMatrix& c) {
  std::vector<std::size_t> perm(c.rows());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += c(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Textbook two-pass Pearson correlation.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// ---------------------------------------------------------------------------
// DSL reference in quad precision, written from the per-axis definition
// with explicit coordinates (no shared kernel with the library).

inline Quad sign_like_ref(Quad z, dirsign::SignKind kind) {
  switch (kind) {
    case dirsign::SignKind::exact: return (z > 0) - (z < 0);
    case dirsign::SignKind::tanh: return tanhq(z);
    case dirsign::SignKind::softsign: return z / (1 + fabsq(z));
  }
  return 0;
}

struct Comparison {
  std::size_t lo, hi;  // flat indices of the trailing and leading element
  Quad weight;
};

// Every adjacent pair compared by DSL, with its weight times the unit factor
// and the batch reduction factor.
inline std::vector<Comparison> comparisons(const dirsign::Shape& shape, const dirsign::DslConfig& cfg) {
  std::size_t first_axis = cfg.skip_batch_axis ? 1 : 0;
  std::size_t batch = cfg.skip_batch_axis ? shape[0] : 1;
  dirsign::Shape example(shape.begin() + first_axis, shape.end());
  std::size_t per_example_comparisons = 0;
  for (std::size_t a = 0; a < example.size(); ++a)
    per_example_comparisons += dirsign::element_count(example) / example[a] * (example[a] - 1);
  Quad unit = cfg.match_exact_units      ? Quad(0.5)
              : cfg.scale_by_comparisons ? Quad(1) / static_cast<Quad>(per_example_comparisons)
                                         : Quad(1);
  if (cfg.skip_batch_axis && cfg.reduction == dirsign::Reduction::mean) unit /= static_cast<Quad>(batch);

  std::vector<Comparison> out;
  std::size_t total = dirsign::element_count(shape);
  for (std::size_t flat = 0; flat < total; ++flat) {
    auto c = coords_of(flat, shape);
    for (std::size_t axis = first_axis; axis < shape.size(); ++axis) {
      if (c[axis] + 1 >= static_cast<long>(shape[axis])) continue;
      auto next = c;
      ++next[axis];
      std::size_t hi = 0;
      for (std::size_t i = 0; i < shape.size(); ++i) hi = hi * shape[i] + static_cast<std::size_t>(next[i]);
      Quad w = cfg.weights ? (*cfg.weights)[axis - first_axis] : Quad(1);
      out.push_back({flat, hi, w * unit});
    }
  }
  return out;
}

inline Quad dsl_ref(const std::vector<Quad>& x, const std::vector<Quad>& y, const std::vector<Comparison>& comps,
                    Quad s, dirsign::SignKind kind) {
  Quad total = 0;
  for (const auto& c : comps)
    total += c.weight * fabsq(sign_like_ref(s * (x[c.hi] - x[c.lo]), kind) -
                              sign_like_ref(s * (y[c.hi] - y[c.lo]), kind));
  return total;
}

struct GradientCheck {
  std::size_t checked = 0;
  std::size_t excluded = 0;
  double worst_relative_error = 0.0;
  double forward_gap = 0.0;  // |dsl_forward - quad-precision reference|
};

/// Compares every analytic partial (dX, dY, ds) with central differences of
/// the quad-precision reference at step h. Entries touching a comparison
/// whose sign-like gap is within `kink` of zero are skipped.
inline GradientCheck check_gradient(const Tensor& x, const Tensor& y, const dirsign::DslConfig& cfg, double h = 1e-6,
                                    double kink = 1e-8) {
  auto analytic = dirsign::dsl_gradient(x, y, cfg);
  auto comps = comparisons(x.shape(), cfg);
  std::vector<Quad> xl(x.values().begin(), x.values().end()), yl(y.values().begin(), y.values().end());
  Quad s = cfg.sharpness;

  std::vector<char> skip_x(x.size(), 0), skip_y(y.size(), 0);
  bool skip_s = false;
  for (const auto& c : comps) {
    Quad gap = sign_like_ref(s * (xl[c.hi] - xl[c.lo]), cfg.sign_kind) -
                      sign_like_ref(s * (yl[c.hi] - yl[c.lo]), cfg.sign_kind);
    if (fabsq(gap) < kink) {
      skip_x[c.lo] = skip_x[c.hi] = skip_y[c.lo] = skip_y[c.hi] = 1;
      skip_s = true;
    }
  }

  GradientCheck out;
  double fwd = cfg.skip_batch_axis && cfg.reduction == dirsign::Reduction::none
                   ? [&] {
                       double t = 0;
                       for (double v : dirsign::dsl_forward_per_example(x, y, cfg).values()) t += v;
                       return t;
                     }()
                   : dirsign::dsl_forward(x, y, cfg);
  out.forward_gap = std::abs(fwd - static_cast<double>(dsl_ref(xl, yl, comps, s, cfg.sign_kind)));

  auto relative = [](double a, double b) {
    double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
  };
  auto check_vector = [&](std::vector<Quad>& v, const Tensor& grad, const std::vector<char>& skip) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (skip[i]) {
        ++out.excluded;
        continue;
      }
      Quad keep = v[i];
      v[i] = keep + h;
      Quad up = dsl_ref(xl, yl, comps, s, cfg.sign_kind);
      v[i] = keep - h;
      Quad down = dsl_ref(xl, yl, comps, s, cfg.sign_kind);
      v[i] = keep;
      double fd = static_cast<double>((up - down) / (2 * static_cast<Quad>(h)));
      out.worst_relative_error = std::max(out.worst_relative_error, relative(fd, grad[i]));
      ++out.checked;
    }
  };
  check_vector(xl, analytic.d_x, skip_x);
  check_vector(yl, analytic.d_y, skip_y);
  if (skip_s) {
    ++out.excluded;
  } else {
    Quad up = dsl_ref(xl, yl, comps, s + h, cfg.sign_kind);
    Quad down = dsl_ref(xl, yl, comps, s - h, cfg.sign_kind);
    double fd = static_cast<double>((up - down) / (2 * static_cast<Quad>(h)));
    out.worst_relative_error = std::max(out.worst_relative_error, relative(fd, analytic.d_sharpness));
    ++out.checked;
  }
  return out;
}

/// Random shape of the given rank with every extent in [2, max_extent] and
/// at most `max_elements` elements.
inline dirsign::Shape random_shape(std::mt19937_64& rng, std::size_t rank, std::size_t max_extent,
                                   std::size_t max_elements) {
  while (true) {
    dirsign::Shape shape(rank);
    std::uniform_int_distribution<std::size_t> ext(2, max_extent);
    for (auto& n : shape) n = ext(rng);
    if (dirsign::element_count(shape) <= max_elements) return shape;
  }
}

inline Tensor random_normal(std::mt19937_64& rng, const dirsign::Shape& shape, double sd = 1.0) {
  std::normal_distribution<double> dist(0.0, sd);
  Tensor t(shape);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

inline Tensor random_integers(std::mt19937_64& rng, const dirsign::Shape& shape, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  Tensor t(shape);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace oracle
