#include "pftrunc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pftrunc {

std::string_view to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::ogd: return "sgd";
        case BaselineKind::aprox: return "aprox";
        case BaselineKind::iwa: return "iwa";
        case BaselineKind::kt_coin: return "coin";
        case BaselineKind::cocob: return "cocob";
    }
    return "unknown";
}

bool is_tuned(BaselineKind kind) {
    return kind == BaselineKind::ogd || kind == BaselineKind::aprox || kind == BaselineKind::iwa;
}

BaselineState BaselineState::fresh(BaselineKind kind, std::size_t dim, std::optional<double> eta0,
                                   LossKind loss_kind) {
    if (is_tuned(kind)) {
        if (!eta0 || !(*eta0 > 0.0)) {
            throw std::invalid_argument(std::string(to_string(kind)) + ": requires a positive eta0");
        }
    } else if (eta0) {
        throw std::invalid_argument(std::string(to_string(kind)) + ": parameter-free, eta0 not accepted");
    }
    BaselineState s;
    s.kind = kind;
    s.w.assign(dim, 0.0);
    s.eta0 = eta0;
    s.loss_kind = loss_kind;
    if (kind == BaselineKind::kt_coin) s.neg_grad_sum.assign(dim, 0.0);
    if (kind == BaselineKind::cocob) {
        s.neg_grad_sum.assign(dim, 0.0);
        s.cocob_max_grad.assign(dim, 0.0);
        s.cocob_abs_grad_sum.assign(dim, 0.0);
        s.cocob_reward.assign(dim, 0.0);
    }
    return s;
}

double BaselineState::step_size() const {
    return k == 0 ? 0.0 : eta0.value_or(0.0) / std::sqrt(static_cast<double>(k));
}

namespace {

void expect_kind(const BaselineState& s, BaselineKind kind) {
    if (s.kind != kind) throw std::invalid_argument(std::string(to_string(kind)) + ": state kind mismatch");
}

void move_along(Vec& w, std::span<const double> g, double step) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i];
}

}  // namespace

const Vec& ogd_step(BaselineState& s, double /*loss*/, std::span<const double> g) {
    expect_kind(s, BaselineKind::ogd);
    require_same_size(s.w.size(), g.size(), "ogd_step");
    ++s.k;
    move_along(s.w, g, s.step_size());
    return s.w;
}

const Vec& aprox_step(BaselineState& s, double loss, std::span<const double> g) {
    expect_kind(s, BaselineKind::aprox);
    require_same_size(s.w.size(), g.size(), "aprox_step");
    ++s.k;
    const double g_sq = squared_norm(g);
    if (g_sq == 0.0) return s.w;
    move_along(s.w, g, std::min(s.step_size(), loss / g_sq));
    return s.w;
}

// Importance-weight-aware update with unit weight: integrating infinitesimal
// gradient steps moves the prediction p toward the loss minimum at rate
// eta ||x||^2 until the loss is flat. For hinge and absolute loss the
// trajectory stops exactly at the corner.
const Vec& iwa_step(BaselineState& s, double /*loss*/, std::span<const double> g, const LabeledExample& ex) {
    expect_kind(s, BaselineKind::iwa);
    require_same_size(s.w.size(), g.size(), "iwa_step");
    ++s.k;
    const double x_sq = ex.features.squared_norm();
    if (x_sq == 0.0 || all_zero(g)) return s.w;
    const double eta = s.step_size();
    const double p = ex.features.dot(s.w);
    const double y = ex.target;

    double direction = 0.0;  // sign of the prediction change
    double gap = 0.0;        // distance in prediction space to the flat part
    switch (s.loss_kind) {
        case LossKind::hinge:
            if (y * p >= 1.0) return s.w;
            direction = y;
            gap = 1.0 - y * p;
            break;
        case LossKind::absolute:
            if (p == y) return s.w;
            direction = y > p ? 1.0 : -1.0;
            gap = std::abs(y - p);
            break;
    }
    const double scale = direction * std::min(eta, gap / x_sq);
    for (std::size_t k = 0; k < ex.features.nnz(); ++k) {
        s.w[ex.features.index[k]] += scale * ex.features.value[k];
    }
    return s.w;
}

// Krichevsky-Trofimov betting: w_{t+1} = (sum -g_i) / (t + 1) * Wealth_t.
// Zero-gradient rounds do not advance the betting round counter.
const Vec& kt_coin_step(BaselineState& s, double /*loss*/, std::span<const double> g) {
    expect_kind(s, BaselineKind::kt_coin);
    require_same_size(s.w.size(), g.size(), "kt_coin_step");
    ++s.k;
    if (all_zero(g)) return s.w;
    s.kt_wealth -= dot(g, s.w);
    ++s.kt_rounds;
    const double frac = s.kt_wealth / static_cast<double>(s.kt_rounds + 1);
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        s.neg_grad_sum[i] -= g[i];
        s.w[i] = s.neg_grad_sum[i] * frac;
    }
    return s.w;
}

// COCOB-Backprop accumulators with initial point 0 and alpha = 100.
const Vec& cocob_step(BaselineState& s, double /*loss*/, std::span<const double> g) {
    expect_kind(s, BaselineKind::cocob);
    require_same_size(s.w.size(), g.size(), "cocob_step");
    ++s.k;
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        double& max_g = s.cocob_max_grad[i];
        max_g = std::max(max_g, std::abs(gi));
        s.cocob_abs_grad_sum[i] += std::abs(gi);
        s.cocob_reward[i] = std::max(s.cocob_reward[i] - gi * s.w[i], 0.0);
        s.neg_grad_sum[i] -= gi;
        const double denom = max_g * std::max(s.cocob_abs_grad_sum[i] + max_g, kCocobAlpha * max_g);
        s.w[i] = s.neg_grad_sum[i] / denom * (max_g + s.cocob_reward[i]);
    }
    return s.w;
}

BaselineLearner::BaselineLearner(BaselineKind kind, std::size_t dim, std::optional<double> eta0,
                                 LossKind loss_kind)
    : state_(BaselineState::fresh(kind, dim, eta0, loss_kind)) {}

std::string_view BaselineLearner::name() const { return to_string(state_.kind); }

void BaselineLearner::update(double loss, std::span<const double> grad, const LabeledExample* example) {
    StepTrace t;
    const bool trace = tracing();
    if (trace) {
        t.round = state_.k + 1;
        t.w = state_.w;
        t.grad.assign(grad.begin(), grad.end());
        t.loss = loss;
        t.h = all_zero(grad) ? 0.0 : 1.0;
        t.wealth_before = state_.kind == BaselineKind::kt_coin ? state_.kt_wealth : 0.0;
    }
    switch (state_.kind) {
        case BaselineKind::ogd: ogd_step(state_, loss, grad); break;
        case BaselineKind::aprox: aprox_step(state_, loss, grad); break;
        case BaselineKind::iwa:
            if (!example) throw std::invalid_argument("iwa: update requires the example");
            iwa_step(state_, loss, grad, *example);
            break;
        case BaselineKind::kt_coin: kt_coin_step(state_, loss, grad); break;
        case BaselineKind::cocob: cocob_step(state_, loss, grad); break;
    }
    if (trace) {
        t.w_next = state_.w;
        t.wealth_after = state_.kind == BaselineKind::kt_coin ? state_.kt_wealth : 0.0;
        emit(t);
    }
}

}  // namespace pftrunc
