#pragma once

#include <span>

#include "pftrunc/vector_ops.hpp"

namespace pftrunc {

/// Lower model of a loss with infimum 0, built at the anchor w_t:
///     m(w) = max(loss(w_t) + <g_t, w - w_t>, 0).
/// The floor is fixed at zero; losses with a nonzero infimum must be shifted before use.
class TruncatedModel {
public:
    TruncatedModel(Vec anchor, Vec grad, double loss_at_anchor);

    double eval(std::span<const double> w) const;

    /// Value of the linear piece at w. Positive on the linear part, zero at the
    /// corner, negative on the flat part.
    double linear_residual(std::span<const double> w) const;

    const Vec& anchor() const noexcept { return anchor_; }
    const Vec& grad() const noexcept { return grad_; }
    double loss_at_anchor() const noexcept { return loss_; }

private:
    Vec anchor_;
    Vec grad_;
    double loss_;
    double grad_dot_anchor_;
};

double model_eval(const TruncatedModel& m, std::span<const double> w);
double linear_residual(const TruncatedModel& m, std::span<const double> w);

/// Same residual without materializing a model: loss + <g, w_next - w>.
double corner_residual(double loss, std::span<const double> g, std::span<const double> w,
                       std::span<const double> w_next);

/// g and g+ = h g, the subgradient of the truncated model at the updated point.
struct SubgradientPair {
    Vec g;
    Vec g_plus;
    double h = 0.0;
};

SubgradientPair make_subgradient_pair(std::span<const double> g, double h);

}  // namespace pftrunc
