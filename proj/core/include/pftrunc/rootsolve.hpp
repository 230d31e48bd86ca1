#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pftrunc {

/// Polynomial of degree at most 3, highest-degree coefficient first.
struct PolyCoeffs {
    std::vector<double> coefficients;

    double operator()(double x) const;
    double derivative(double x) const;
    double max_abs_coefficient() const;
};

/// Real roots of p inside [lo, hi], ascending, duplicates merged.
///
/// Leading coefficients with magnitude <= 1e-14 * max|coeff| are dropped, so a
/// cubic whose leading term vanishes is solved as a quadratic (and so on).
/// Cubics use the trigonometric / hyperbolic closed form for the depressed
/// cubic; every root gets one Newton polishing step on the original
/// polynomial. Throws std::invalid_argument for the zero polynomial, a
/// nonzero constant, degree > 3, or lo >= hi.
std::vector<double> roots_in_unit(const PolyCoeffs& p, double lo = 0.0, double hi = 1.0);

class BracketError : public std::invalid_argument {
public:
    BracketError(double f_lo, double f_hi)
        : std::invalid_argument("bisect: no sign change (f(lo)=" + std::to_string(f_lo) +
                                ", f(hi)=" + std::to_string(f_hi) + ")"),
          f_lo_(f_lo), f_hi_(f_hi) {}

    double f_lo() const noexcept { return f_lo_; }
    double f_hi() const noexcept { return f_hi_; }

private:
    double f_lo_;
    double f_hi_;
};

/// Number of halvings bisect() performs on [lo, hi] for tolerance tol.
inline int bisect_iterations(double lo, double hi, double tol) {
    const double ratio = (hi - lo) / tol;
    if (ratio <= 1.0) return 0;
    return static_cast<int>(std::ceil(std::log2(ratio)));
}

/// Root of a function with a sign change on [lo, hi].
///
/// Evaluates both endpoints (returning immediately on an exact zero), then
/// halves the bracket bisect_iterations(lo, hi, tol) times. The returned point
/// is the secant point of the final bracket, which lies inside it, so
/// |r - r*| <= tol holds for the bracketed root r*.
template <typename F>
double bisect(F&& f, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("bisect: tol must be positive");
    if (!(lo < hi)) throw std::invalid_argument("bisect: requires lo < hi");

    double f_lo = f(lo);
    if (f_lo == 0.0) return lo;
    double f_hi = f(hi);
    if (f_hi == 0.0) return hi;
    if (std::signbit(f_lo) == std::signbit(f_hi)) throw BracketError(f_lo, f_hi);

    const int n = bisect_iterations(lo, hi, tol);
    for (int i = 0; i < n; ++i) {
        const double mid = lo + 0.5 * (hi - lo);
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    double r = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    if (!(r >= lo && r <= hi)) r = lo + 0.5 * (hi - lo);
    return r;
}

}  // namespace pftrunc
