#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dirsign {

enum class Errc {
  config,
  shape,
  dimension,
  axis,
  degenerate,
  non_finite,
  format,
  length,
  io,
  unsupported_rank,
  not_differentiable,
  order,
  infinite_death,
  domain,
  sampling,
  undefined_correlation,
  too_few_locations,
  diverged,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::config: return "config error";
    case Errc::shape: return "shape error";
    case Errc::dimension: return "dimension error";
    case Errc::axis: return "axis error";
    case Errc::degenerate: return "degenerate input";
    case Errc::non_finite: return "non-finite value";
    case Errc::format: return "format error";
    case Errc::length: return "length error";
    case Errc::io: return "i/o error";
    case Errc::unsupported_rank: return "unsupported rank";
    case Errc::not_differentiable: return "not differentiable";
    case Errc::order: return "order error";
    case Errc::infinite_death: return "infinite death";
    case Errc::domain: return "domain error";
    case Errc::sampling: return "sampling error";
    case Errc::undefined_correlation: return "undefined correlation";
    case Errc::too_few_locations: return "too few locations";
    case Errc::diverged: return "training diverged";
  }
  return "error";
}

// Process exit status for the command-line tool: 2 usage, 3 data/format,
// 4 numeric/degenerate.
constexpr int exit_status(Errc code) {
  switch (code) {
    case Errc::config:
    case Errc::axis:
    case Errc::order:
    case Errc::not_differentiable:
      return 2;
    case Errc::shape:
    case Errc::dimension:
    case Errc::format:
    case Errc::length:
    case Errc::io:
    case Errc::unsupported_rank:
    case Errc::sampling:
      return 3;
    case Errc::degenerate:
    case Errc::non_finite:
    case Errc::infinite_death:
    case Errc::domain:
    case Errc::undefined_correlation:
    case Errc::too_few_locations:
    case Errc::diverged:
      return 4;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dirsign
