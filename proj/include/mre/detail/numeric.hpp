#pragma once

#include <boost/math/tools/toms748_solve.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>

namespace mre::detail {

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  if (first < last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Mixes any number of keys into one 64-bit stream seed.
template <typename... Keys>
std::uint64_t stream_seed(std::uint64_t seed, Keys... keys) {
  std::uint64_t s = splitmix64(seed);
  ((s = splitmix64(s ^ splitmix64(static_cast<std::uint64_t>(keys) + 0x632be59bd9b4e019ULL))), ...);
  return s;
}

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
  double mid() const { return 0.5 * (lo + hi); }
};

// Brackets the sign change of `f` on [lo, hi]. Requires f(lo) and f(hi) of
// opposite sign (or zero at an end). Works for monotone functions with jumps.
template <typename F>
Bracket solve_bracketed(F&& f, double lo, double hi, double flo, double fhi, int max_iter = 200) {
  if (flo == 0.0) return {lo, lo, 0};
  if (fhi == 0.0) return {hi, hi, 0};
  if ((flo > 0.0) == (fhi > 0.0)) throw std::domain_error("solve_bracketed: no sign change");
  boost::uintmax_t it = static_cast<boost::uintmax_t>(max_iter);
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 3);
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
  return {r.first, r.second, static_cast<int>(it)};
}

inline bool nearly_equal(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
}

}  // namespace mre::detail
