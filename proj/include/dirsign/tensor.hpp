#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dirsign/error.hpp"

namespace dirsign {

inline constexpr std::size_t max_rank = 8;

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_string(std::span<const std::size_t> shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

inline void validate_shape(std::span<const std::size_t> shape) {
  if (shape.empty() || shape.size() > max_rank)
    throw Error(Errc::shape, "rank " + std::to_string(shape.size()) + " outside [1, 8]");
  for (auto n : shape)
    if (n == 0) throw Error(Errc::shape, "zero extent in " + shape_string(shape));
}

/// Dense row-major (last axis fastest) array of doubles with rank 1..8.
class Tensor {
 public:
  Tensor() = default;

  /// Zero-filled tensor of the given shape.
  explicit Tensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)) {
    validate_shape(shape_);
    data_.assign(element_count(shape_), fill);
  }

  Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape(shape_);
    if (element_count(shape_) != data_.size())
      throw Error(Errc::dimension, "shape " + shape_string(shape_) + " holds " +
                                       std::to_string(element_count(shape_)) + " values, got " +
                                       std::to_string(data_.size()));
  }

  static Tensor create(std::span<const std::size_t> shape, std::span<const double> data) {
    return Tensor(Shape(shape.begin(), shape.end()), std::vector<double>(data.begin(), data.end()));
  }

  static Tensor create(std::initializer_list<std::size_t> shape, std::initializer_list<double> data) {
    return Tensor(Shape(shape), std::vector<double>(data));
  }

  std::size_t rank() const noexcept { return shape_.size(); }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }
  const std::vector<double>& vector() const noexcept { return data_; }

  double operator[](std::size_t flat) const { return data_[flat]; }
  double& operator[](std::size_t flat) { return data_[flat]; }

  Shape strides() const {
    Shape out(shape_.size(), 1);
    for (std::size_t i = shape_.size(); i-- > 1;) out[i - 1] = out[i] * shape_[i];
    return out;
  }

  std::size_t flat_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size())
      throw Error(Errc::dimension, "index rank does not match tensor rank");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] >= shape_[i]) throw Error(Errc::axis, "index out of range on axis " + std::to_string(i));
      flat = flat * shape_[i] + index[i];
    }
    return flat;
  }

  double at(std::initializer_list<std::size_t> index) const {
    return data_[flat_index(std::span<const std::size_t>(index.begin(), index.size()))];
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

inline bool all_finite(const Tensor& t) {
  return std::all_of(t.values().begin(), t.values().end(), [](double v) { return std::isfinite(v); });
}

inline void require_finite(const Tensor& t, std::string_view what) {
  if (!all_finite(t)) throw Error(Errc::non_finite, std::string(what) + " contains NaN or Inf");
}

inline void require_same_shape(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw Error(Errc::shape, "shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
}

/// Splits a shape around `axis` into (outer, extent, inner) so that element
/// (o, k, i) lives at flat index (o * extent + k) * inner + i.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

inline AxisSplit split_at(std::span<const std::size_t> shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

/// Adjacent differences along one axis: out[.., k, ..] = t[.., k+1, ..] - t[.., k, ..].
inline Tensor finite_difference(const Tensor& t, std::size_t axis) {
  if (axis >= t.rank())
    throw Error(Errc::axis, "axis " + std::to_string(axis) + " out of range for rank " + std::to_string(t.rank()));
  if (t.extent(axis) < 2)
    throw Error(Errc::degenerate, "axis " + std::to_string(axis) + " has extent 1");

  auto [outer, n, inner] = split_at(t.shape(), axis);
  Shape out_shape = t.shape();
  out_shape[axis] -= 1;
  Tensor out(out_shape);
  auto src = t.values();
  auto dst = out.values();
  std::size_t w = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    const double* base = src.data() + o * n * inner;
    for (std::size_t k = 0; k + 1 < n; ++k)
      for (std::size_t i = 0; i < inner; ++i) dst[w++] = base[(k + 1) * inner + i] - base[k * inner + i];
  }
  return out;
}

/// Stacks equally shaped tensors along a new leading axis.
inline Tensor stack(std::span<const Tensor> items) {
  if (items.empty()) throw Error(Errc::shape, "cannot stack an empty sequence");
  Shape shape{items.size()};
  shape.insert(shape.end(), items.front().shape().begin(), items.front().shape().end());
  Tensor out(shape);
  std::size_t per = items.front().size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    require_same_shape(items[i], items.front());
    std::copy(items[i].values().begin(), items[i].values().end(), out.values().begin() + i * per);
  }
  return out;
}

/// Row `index` along axis 0 as a tensor of rank - 1 (rank-1 input yields shape {1}).
inline Tensor slice_leading(const Tensor& t, std::size_t index) {
  if (index >= t.extent(0)) throw Error(Errc::axis, "leading index out of range");
  Shape shape(t.shape().begin() + 1, t.shape().end());
  if (shape.empty()) shape = {1};
  std::size_t per = element_count(shape);
  auto first = t.values().begin() + index * per;
  return Tensor(shape, std::vector<double>(first, first + per));
}

}  // namespace dirsign
