#ifndef HOPFLAX_SRC_NUMFMT_HPP
#define HOPFLAX_SRC_NUMFMT_HPP

#include <charconv>
#include <string>
#include <string_view>

#include "hopflax/grid.hpp"

namespace hopflax::detail {

// Shortest decimal that round-trips to the same double.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error("not a number: '" + std::string(s) + "'");
  return v;
}

}  // namespace hopflax::detail

#endif
