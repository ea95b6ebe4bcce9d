#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dirsign/error.hpp"
#include "dirsign/tensor.hpp"

namespace dirsign {

inline constexpr double infinite_death = std::numeric_limits<double>::infinity();

struct PersistencePair {
  double birth = 0.0;
  double death = 0.0;

  bool essential() const { return std::isinf(death); }
  double persistence() const { return death - birth; }
  friend auto operator<=>(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
  std::vector<PersistencePair> points;
  /// Largest value of the filtered grid, when known; used to cap essential points.
  std::optional<double> filtration_max;

  std::size_t size() const { return points.size(); }

  /// Points sorted by (birth, death); two diagrams are equal as multisets iff
  /// their canonical forms are equal.
  std::vector<PersistencePair> canonical() const {
    auto out = points;
    std::sort(out.begin(), out.end());
    return out;
  }
};

namespace detail {

class ElderUnionFind {
 public:
  explicit ElderUnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t i) {
    std::size_t root = i;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[i] != root) i = std::exchange(parent_[i], root);
    return root;
  }

  void attach(std::size_t child_root, std::size_t parent_root) { parent_[child_root] = parent_root; }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// 0-dimensional sublevel-set persistence of a rank 1-3 grid with
/// (3^d - 1)-neighbour connectivity.
///
/// Points are swept by ascending value, ties by ascending flat index. A point
/// with no already-swept neighbour starts a component; a point touching
/// several components merges them and every component but the eldest dies at
/// the point's value (equal births: the smaller birth index survives).
/// Components that die at their own birth value never appear in the
/// filtration and are not reported.
inline PersistenceDiagram sublevel_persistence_0d(const Tensor& t) {
  if (t.empty()) throw Error(Errc::shape, "empty tensor");
  if (t.rank() > 3) throw Error(Errc::unsupported_rank, "persistence supports rank 1-3, got " + std::to_string(t.rank()));
  require_finite(t, "tensor");

  const std::size_t n = t.size();
  const std::size_t d = t.rank();
  std::array<std::size_t, 3> ext{1, 1, 1};
  for (std::size_t i = 0; i < d; ++i) ext[3 - d + i] = t.extent(i);
  auto vals = t.values();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });

  detail::ElderUnionFind uf(n);
  std::vector<char> swept(n, 0);
  // Roots are birth points, so a root's value is its component's birth.
  auto elder = [&](std::size_t a, std::size_t b) { return vals[a] < vals[b] || (vals[a] == vals[b] && a < b); };

  PersistenceDiagram diagram;
  diagram.filtration_max = *std::max_element(vals.begin(), vals.end());
  std::vector<std::size_t> roots;
  roots.reserve(26);

  for (std::size_t p : order) {
    std::size_t z = p / (ext[1] * ext[2]);
    std::size_t y = p / ext[2] % ext[1];
    std::size_t x = p % ext[2];
    roots.clear();
    for (int dz = -1; dz <= 1; ++dz) {
      if ((dz < 0 && z == 0) || (dz > 0 && z + 1 >= ext[0])) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        if ((dy < 0 && y == 0) || (dy > 0 && y + 1 >= ext[1])) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx < 0 && x == 0) || (dx > 0 && x + 1 >= ext[2])) continue;
          if (dz == 0 && dy == 0 && dx == 0) continue;
          std::size_t q = ((z + dz) * ext[1] + (y + dy)) * ext[2] + (x + dx);
          if (!swept[q]) continue;
          std::size_t r = uf.find(q);
          if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
        }
      }
    }
    swept[p] = 1;
    if (roots.empty()) continue;  // p is its own root: a new component

    std::size_t eldest = *std::min_element(roots.begin(), roots.end(), elder);
    for (std::size_t r : roots) {
      if (r == eldest) continue;
      if (vals[r] < vals[p]) diagram.points.push_back({vals[r], vals[p]});
      uf.attach(r, eldest);
    }
    uf.attach(p, eldest);
  }

  // The grid is connected, so exactly one component survives.
  std::size_t survivor = uf.find(order.front());
  diagram.points.push_back({vals[survivor], infinite_death});
  return diagram;
}

// Diagram text format: one "birth,death" line per point, 17 significant
// digits, "inf" for an infinite death.

inline std::string format_diagram_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_diagram(const PersistenceDiagram& diagram) {
  std::string out;
  for (const auto& p : diagram.points)
    out += format_diagram_value(p.birth) + "," + format_diagram_value(p.death) + "\n";
  return out;
}

namespace detail {

inline double parse_diagram_value(std::string_view text, std::size_t line) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (text == "inf" || text == "+inf") return infinite_death;
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v))
    throw Error(Errc::format, "bad diagram value '" + std::string(text) + "' on line " + std::to_string(line));
  return v;
}

}  // namespace detail

inline PersistenceDiagram parse_diagram(std::string_view text) {
  PersistenceDiagram diagram;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto eol = text.find('\n');
    auto line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      throw Error(Errc::format, "expected 'birth,death' on line " + std::to_string(line_no));
    PersistencePair p{detail::parse_diagram_value(line.substr(0, comma), line_no),
                      detail::parse_diagram_value(line.substr(comma + 1), line_no)};
    if (std::isinf(p.birth)) throw Error(Errc::format, "infinite birth on line " + std::to_string(line_no));
    if (p.death < p.birth) throw Error(Errc::format, "death before birth on line " + std::to_string(line_no));
    diagram.points.push_back(p);
  }
  return diagram;
}

inline void write_diagram(const PersistenceDiagram& diagram, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  out << format_diagram(diagram);
}

inline PersistenceDiagram read_diagram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_diagram(ss.str());
}

}  // namespace dirsign
