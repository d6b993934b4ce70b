#pragma once

#include <cmath>

#include "acap/error.hpp"

namespace acap {

// Half-away-from-zero rounding at `digits` decimal places. The scaled value
// is snapped to the nearest 1e-9 first so that quantities like (a+b)/2 whose
// decimal result sits exactly on a half-grid point round by their decimal
// value, not by the binary double closest to it.
inline double round_to_digits(double x, int digits) {
    if (!std::isfinite(x)) return x;
    if (digits < 0 || digits > 9) throw ConfigError("rounding digits must lie in [0, 9]");
    const double scale = std::pow(10.0, digits);
    double y = x * scale;
    y = std::round(y * 1e9) / 1e9;
    return std::round(y) / scale;
}

// Truncation toward zero at `digits` decimal places, same 1e-9 snap.
inline double trunc_to_digits(double x, int digits) {
    if (!std::isfinite(x)) return x;
    if (digits < 0 || digits > 9) throw ConfigError("truncation digits must lie in [0, 9]");
    const double scale = std::pow(10.0, digits);
    double y = x * scale;
    y = std::round(y * 1e9) / 1e9;
    return std::trunc(y) / scale;
}

}  // namespace acap
