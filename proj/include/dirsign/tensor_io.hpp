#pragma once

// DST1 tensor files:
//   bytes 0-3   ASCII "DST1"
//   bytes 4-7   rank, uint32 little-endian
//   rank x uint64 little-endian extents
//   product(extents) x IEEE-754 binary64 little-endian values, row-major
// No padding, no checksum.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "dirsign/tensor.hpp"

namespace dirsign {

inline constexpr std::array<char, 4> dst1_magic{'D', 'S', 'T', '1'};

namespace detail {

template <typename U>
void put_le(std::vector<unsigned char>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(value >> (8 * i)));
}

template <typename U>
U get_le(const unsigned char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(p[i]) << (8 * i);
  return value;
}

}  // namespace detail

inline std::vector<unsigned char> encode_tensor(const Tensor& t) {
  std::vector<unsigned char> out;
  out.reserve(8 + 8 * t.rank() + 8 * t.size());
  out.insert(out.end(), dst1_magic.begin(), dst1_magic.end());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (auto n : t.shape()) detail::put_le<std::uint64_t>(out, n);
  for (double v : t.values()) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

inline Tensor decode_tensor(std::span<const unsigned char> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), dst1_magic.data(), 4) != 0)
    throw Error(Errc::format, "missing DST1 magic");
  auto rank = detail::get_le<std::uint32_t>(bytes.data() + 4);
  if (rank == 0 || rank > max_rank) throw Error(Errc::shape, "rank " + std::to_string(rank) + " outside [1, 8]");
  if (bytes.size() < 8 + 8 * std::size_t{rank}) throw Error(Errc::length, "truncated shape header");

  Shape shape(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    auto n = detail::get_le<std::uint64_t>(bytes.data() + 8 + 8 * i);
    if (n == 0) throw Error(Errc::shape, "zero extent on axis " + std::to_string(i));
    shape[i] = static_cast<std::size_t>(n);
  }
  std::size_t header = 8 + 8 * std::size_t{rank};
  std::size_t count = element_count(shape);
  if (count > (bytes.size() - header) / 8 || bytes.size() - header != 8 * count)
    throw Error(Errc::length, "payload holds " + std::to_string(bytes.size() - header) + " bytes, expected " +
                                  std::to_string(8 * count));

  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i)
    data[i] = std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes.data() + header + 8 * i));
  return Tensor(std::move(shape), std::move(data));
}

inline void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "short write to " + path.string());
}

inline Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

}  // namespace dirsign
