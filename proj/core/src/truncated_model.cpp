#include "pftrunc/truncated_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace pftrunc {

TruncatedModel::TruncatedModel(Vec anchor, Vec grad, double loss_at_anchor)
    : anchor_(std::move(anchor)), grad_(std::move(grad)), loss_(loss_at_anchor) {
    require_same_size(anchor_.size(), grad_.size(), "TruncatedModel");
    if (!(loss_ >= 0.0)) throw std::invalid_argument("TruncatedModel: loss at anchor must be >= 0");
    grad_dot_anchor_ = dot(grad_, anchor_);
}

double TruncatedModel::linear_residual(std::span<const double> w) const {
    require_same_size(anchor_.size(), w.size(), "TruncatedModel");
    return loss_ + (dot(grad_, w) - grad_dot_anchor_);
}

double TruncatedModel::eval(std::span<const double> w) const { return std::max(linear_residual(w), 0.0); }

double model_eval(const TruncatedModel& m, std::span<const double> w) { return m.eval(w); }

double linear_residual(const TruncatedModel& m, std::span<const double> w) { return m.linear_residual(w); }

double corner_residual(double loss, std::span<const double> g, std::span<const double> w,
                       std::span<const double> w_next) {
    require_same_size(g.size(), w.size(), "corner_residual");
    require_same_size(g.size(), w_next.size(), "corner_residual");
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * (w_next[i] - w[i]);
    return loss + s;
}

SubgradientPair make_subgradient_pair(std::span<const double> g, double h) {
    if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("make_subgradient_pair: h must lie in [0, 1]");
    SubgradientPair p{Vec(g.begin(), g.end()), Vec(g.size()), h};
    for (std::size_t i = 0; i < g.size(); ++i) p.g_plus[i] = h * g[i];
    return p;
}

}  // namespace pftrunc
