#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace cchain {

/// Truncate toward zero at `places` decimals. A 1e-9 slack absorbs binary
/// representation error so that a computed 0.99999999999 still prints as 1.000.
inline double truncate_places(double value, int places) {
  const double scale = std::pow(10.0, places);
  const double slack = value >= 0.0 ? 1e-9 : -1e-9;
  return std::trunc(value * scale + slack) / scale;
}

/// Report rendering: 3-decimal truncation, e.g. 0.48484 -> "0.484".
inline std::string format_truncated3(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", truncate_places(value, 3));
  std::string out(buf);
  if (out == "-0.000") out = "0.000";
  return out;
}

/// Canonical knowledge-base rendering: 6 decimals, round-half-even on the
/// exact binary value (what printf does).
inline std::string format_fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string out(buf);
  if (out == "-0.000000") out = "0.000000";
  return out;
}

/// Value as it reads back from format_fixed6.
inline double quantize6(double value) { return std::stod(format_fixed6(value)); }

}  // namespace cchain
