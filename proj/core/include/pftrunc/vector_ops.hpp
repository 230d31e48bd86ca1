#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "pftrunc/errors.hpp"

namespace pftrunc {

using Vec = std::vector<double>;

inline void require_same_size(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) throw DimensionMismatch(expected, got, what);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

inline double inf_norm(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline bool all_zero(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; });
}

}  // namespace pftrunc
