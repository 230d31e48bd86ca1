#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "pftrunc/losses.hpp"
#include "pftrunc/vector_ops.hpp"

namespace pftrunc::testing {

inline Vec random_vec(std::mt19937_64& rng, std::size_t d, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vec v(d);
    for (auto& x : v) x = u(rng);
    return v;
}

// Uniform direction, radius uniform in [0, 1].
inline Vec random_in_unit_ball(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec v(d);
    for (auto& x : v) x = n(rng);
    const double len = norm(v);
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (auto& x : v) x *= r / len;
    return v;
}

inline LabeledExample dense_example(const Vec& x, double y) {
    LabeledExample ex;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ex.features.index.push_back(static_cast<std::uint32_t>(i));
        ex.features.value.push_back(x[i]);
    }
    ex.target = y;
    return ex;
}

// Plain bisection used as an independent oracle: fixed iteration count, no shortcuts.
template <typename F>
double reference_bisect(F f, double lo, double hi, int iterations = 200) {
    const bool lo_negative = f(lo) < 0.0;
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) < 0.0) == lo_negative) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace pftrunc::testing
