#pragma once

#include <cctype>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace deflectlab {

enum class Unit { kLength, kAngle, kTime, kPower, kFrequency };

namespace detail {

struct Suffix {
  const char* text;
  double scale;
};

inline const std::vector<Suffix>& suffixes_for(Unit unit) {
  // Longest match wins; micro accepts "u" plus both UTF-8 mu encodings.
  static const std::vector<Suffix> length = {
      {"pm", 1e-12}, {"nm", 1e-9},    {"um", 1e-6},  {"µm", 1e-6},
      {"μm", 1e-6}, {"mm", 1e-3}, {"cm", 1e-2}, {"m", 1.0}};
  static const std::vector<Suffix> angle = {
      {"nrad", 1e-9},        {"urad", 1e-6},        {"µrad", 1e-6},
      {"μrad", 1e-6},   {"mrad", 1e-3},        {"rad", 1.0}};
  static const std::vector<Suffix> time = {
      {"ns", 1e-9},      {"us", 1e-6},      {"µs", 1e-6},
      {"μs", 1e-6}, {"ms", 1e-3},      {"s", 1.0}};
  static const std::vector<Suffix> power = {
      {"nW", 1e-9},      {"uW", 1e-6},      {"µW", 1e-6},
      {"μW", 1e-6}, {"mW", 1e-3},      {"W", 1.0}};
  static const std::vector<Suffix> freq = {
      {"mHz", 1e-3}, {"kHz", 1e3}, {"MHz", 1e6}, {"Hz", 1.0}};
  switch (unit) {
    case Unit::kLength: return length;
    case Unit::kAngle: return angle;
    case Unit::kTime: return time;
    case Unit::kPower: return power;
    case Unit::kFrequency: return freq;
  }
  throw std::logic_error("unreachable");
}

}  // namespace detail

/// Parses "1.075mm", "24 nrad", "8us", "400uW", or a bare SI number.
/// Returns the value in base SI units (m, rad, s, W, Hz).
inline double parse_quantity(std::string_view text, Unit unit) {
  std::string s(text);
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start])))
    ++start;
  std::size_t end = s.size();
  while (end > start && std::isspace(static_cast<unsigned char>(s[end - 1])))
    --end;
  s = s.substr(start, end - start);
  if (s.empty()) throw std::invalid_argument("empty quantity");

  const char* begin = s.c_str();
  char* num_end = nullptr;
  const double value = std::strtod(begin, &num_end);
  if (num_end == begin)
    throw std::invalid_argument("quantity has no numeric part: '" + s + "'");

  std::string_view rest(num_end);
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front())))
    rest.remove_prefix(1);
  if (rest.empty()) return value;  // bare number: already SI

  for (const auto& suffix : detail::suffixes_for(unit)) {
    if (rest == suffix.text) return value * suffix.scale;
  }
  throw std::invalid_argument("unknown unit suffix '" + std::string(rest) +
                              "' in '" + s + "'");
}

inline double parse_length(std::string_view s) {
  return parse_quantity(s, Unit::kLength);
}
inline double parse_angle(std::string_view s) {
  return parse_quantity(s, Unit::kAngle);
}
inline double parse_time(std::string_view s) {
  return parse_quantity(s, Unit::kTime);
}
inline double parse_power(std::string_view s) {
  return parse_quantity(s, Unit::kPower);
}

}  // namespace deflectlab
