#include "pftrunc/rootsolve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pftrunc {

double PolyCoeffs::operator()(double x) const {
    double acc = 0.0;
    for (double c : coefficients) acc = acc * x + c;
    return acc;
}

double PolyCoeffs::derivative(double x) const {
    const std::size_t n = coefficients.size();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        acc = acc * x + coefficients[i] * static_cast<double>(n - 1 - i);
    }
    return acc;
}

double PolyCoeffs::max_abs_coefficient() const {
    double m = 0.0;
    for (double c : coefficients) m = std::max(m, std::abs(c));
    return m;
}

namespace {

constexpr double kLeadingZeroRel = 1e-14;

// Real roots of a x^2 + b x + c (a != 0). A slightly negative discriminant,
// within rounding of b^2 and 4ac, is treated as a double root.
void quadratic_roots(double a, double b, double c, std::vector<double>& out) {
    const double disc = b * b - 4.0 * a * c;
    const double scale = b * b + std::abs(4.0 * a * c);
    if (disc < 0.0) {
        if (disc >= -1e-12 * scale) out.push_back(-b / (2.0 * a));
        return;
    }
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    if (q == 0.0) {
        out.push_back(0.0);
        return;
    }
    out.push_back(q / a);
    out.push_back(c / q);
}

// Real roots of the monic cubic x^3 + a x^2 + b x + c.
void cubic_roots(double a, double b, double c, std::vector<double>& out) {
    const double shift = a / 3.0;
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;

    if (p == 0.0) {
        out.push_back(std::cbrt(-q) - shift);
        return;
    }

    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (p < 0.0 && disc <= 0.0) {
        // Three real roots (possibly repeated): trigonometric form.
        const double m = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            out.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) - shift);
        }
        return;
    }

    // One real root: hyperbolic forms.
    double t = 0.0;
    if (p < 0.0) {
        const double m = std::sqrt(-p / 3.0);
        const double arg = -3.0 * std::abs(q) / (2.0 * p) * std::sqrt(-3.0 / p);
        t = -2.0 * std::copysign(1.0, q) * m * std::cosh(std::acosh(std::max(arg, 1.0)) / 3.0);
    } else {
        const double m = std::sqrt(p / 3.0);
        const double arg = 3.0 * q / (2.0 * p) * std::sqrt(3.0 / p);
        t = -2.0 * m * std::sinh(std::asinh(arg) / 3.0);
    }
    const double r = t - shift;
    out.push_back(r);

    // Deflate and look for a near-double pair that rounding pushed off the real axis.
    const double qa = 1.0;
    const double qb = a + r;
    const double qc = b + r * qb;
    quadratic_roots(qa, qb, qc, out);
}

double polish(const PolyCoeffs& p, double x) {
    const double fx = p(x);
    const double d = p.derivative(x);
    if (d == 0.0 || !std::isfinite(d)) return x;
    const double y = x - fx / d;
    return std::abs(p(y)) <= std::abs(fx) ? y : x;
}

}  // namespace

std::vector<double> roots_in_unit(const PolyCoeffs& p, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("roots_in_unit: requires lo < hi");
    if (p.coefficients.size() > 4) throw std::invalid_argument("roots_in_unit: degree exceeds 3");
    const double scale = p.max_abs_coefficient();
    if (!(scale > 0.0)) throw std::invalid_argument("roots_in_unit: zero polynomial");

    std::vector<double> c = p.coefficients;
    while (!c.empty() && std::abs(c.front()) <= kLeadingZeroRel * scale) c.erase(c.begin());
    if (c.size() < 2) throw std::invalid_argument("roots_in_unit: polynomial has no variable term");

    const PolyCoeffs reduced{c};
    std::vector<double> candidates;
    switch (c.size()) {
        case 2: candidates.push_back(-c[1] / c[0]); break;
        case 3: quadratic_roots(c[0], c[1], c[2], candidates); break;
        default: cubic_roots(c[1] / c[0], c[2] / c[0], c[3] / c[0], candidates); break;
    }

    const double slack = 1e-12 * (hi - lo);
    std::vector<double> roots;
    for (double r : candidates) {
        if (!std::isfinite(r)) continue;
        r = polish(reduced, r);
        if (r < lo - slack || r > hi + slack) continue;
        roots.push_back(std::clamp(r, lo, hi));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [&](double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x)); }),
                roots.end());
    return roots;
}

}  // namespace pftrunc
