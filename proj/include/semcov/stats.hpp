#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "semcov/errors.hpp"

namespace semcov {

/// Empirical quantile with linear interpolation between order statistics.
/// `sorted` must be ascending and non-empty; level in [0, 1].
inline double quantile_linear(std::span<const double> sorted, double level) {
    if (sorted.empty()) throw ValidationError("quantile of empty sample");
    if (level < 0.0 || level > 1.0) throw ValidationError("quantile level outside [0,1]");
    if (sorted.size() == 1) return sorted[0];
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

inline double quantile_of(std::vector<double> values, double level) {
    std::sort(values.begin(), values.end());
    return quantile_linear(values, level);
}

} // namespace semcov
