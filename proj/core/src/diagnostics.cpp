#include "pftrunc/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "pftrunc/baselines.hpp"
#include "pftrunc/truncated_model.hpp"

namespace pftrunc {

namespace {

void record(BoundReport& r, double slack, std::size_t round) {
    r.worst_slack = std::min(r.worst_slack, slack);
    if (slack < -r.tolerance && !r.first_violation) r.first_violation = round;
}

template <typename Check>
BoundReport fold(Check check, std::span<const StepTrace> traces) {
    for (const auto& t : traces) check.observe(t);
    return check.report();
}

}  // namespace

double mu_of(std::span<const double> g, double h) {
    double g_sq = 0.0;
    double diff_sq = 0.0;
    for (double gi : g) {
        const double d = gi - h * gi;
        g_sq += gi * gi;
        diff_sq += d * d;
    }
    return 2.0 * (g_sq - diff_sq);
}

void NoOvershootCheck::observe(const StepTrace& t) {
    ++report_.rounds;
    if (all_zero(t.grad)) return;
    record(report_, corner_residual(t.loss, t.grad, t.w, t.w_next), t.round);
}

void WealthIdentityCheck::observe(const StepTrace& t) {
    if (!started_) {
        started_ = true;
        initial_ = t.wealth_before;
    }
    ++report_.rounds;
    double term = 0.0;
    for (std::size_t i = 0; i < t.grad.size(); ++i) {
        term += t.grad[i] * (t.w[i] - t.w_next[i]) + t.h * t.grad[i] * t.w_next[i];
    }
    // Neumaier compensated sum of the per-round terms.
    const double next = sum_ + term;
    compensation_ += std::abs(sum_) >= std::abs(term) ? (sum_ - next) + term : (term - next) + sum_;
    sum_ = next;

    const double from_sum = initial_ - (sum_ + compensation_);
    const double scale = std::max({std::abs(t.wealth_after), std::abs(from_sum), 1e-300});
    const double deviation = std::abs(t.wealth_after - from_sum) / scale;
    max_deviation_ = std::max(max_deviation_, deviation);
    record(report_, -deviation, t.round);
}

BoundReport WealthIdentityCheck::report() const {
    BoundReport r = report_;
    if (r.rounds > 0) r.worst_slack = -max_deviation_;
    return r;
}

WealthLowerBoundCheck::WealthLowerBoundCheck(BettingVariant variant, double initial_wealth)
    : variant_(variant),
      log_wealth_(std::log(initial_wealth)),
      report_{variant == BettingVariant::projected ? "wealth_lower_bound_projected" : "wealth_lower_bound_closed_form",
              0, std::numeric_limits<double>::infinity(), std::nullopt, kLogWealthTolerance} {
    record(report_, log_wealth_ - bound(), 0);
}

double WealthLowerBoundCheck::bound() const {
    const double s = norm(sum_gplus_);
    const double linear = variant_ == BettingVariant::projected ? s / 4.0 : s / 8.0;
    const double growth = sum_mu_ > 0.0 ? std::min(linear, s * s / (2.0 * sum_mu_)) : linear;
    if (variant_ == BettingVariant::projected) {
        return -1.5 - 7.25 * std::log(1.0 + 2.0 * sum_g_gplus_) + growth;
    }
    return -110.25 * std::log(16.0 + 2.0 * sum_g_gplus_) + growth;
}

void WealthLowerBoundCheck::observe(const StepTrace& t) {
    ++report_.rounds;
    if (sum_gplus_.size() < t.grad.size()) sum_gplus_.resize(t.grad.size(), 0.0);
    const double g_norm = norm(t.grad);
    sum_g_gplus_ += g_norm * (t.h * g_norm);
    sum_mu_ += mu_of(t.grad, t.h);
    for (std::size_t i = 0; i < t.grad.size(); ++i) sum_gplus_[i] += t.h * t.grad[i];
    log_wealth_ = std::log(t.wealth_after);
    record(report_, log_wealth_ - bound(), t.round);
}

BetaBallCheck::BetaBallCheck(BetaNorm norm_kind)
    : norm_(norm_kind),
      report_{norm_kind == BetaNorm::l2 ? "beta_ball" : "beta_ball_coordinatewise", 0,
              std::numeric_limits<double>::infinity(), std::nullopt, kIdentityTolerance} {}

void BetaBallCheck::observe(const StepTrace& t) {
    ++report_.rounds;
    if (t.beta.empty()) return;
    const auto measure = [this](const Vec& b) { return norm_ == BetaNorm::l2 ? norm(b) : inf_norm(b); };
    record(report_, 0.5 - std::max(measure(t.beta), measure(t.beta_next)), t.round);
}

void BetaStepCheck::observe(const StepTrace& t) {
    ++report_.rounds;
    if (t.beta.empty()) return;
    const double g_norm = norm(t.grad);
    const double gplus_norm = t.h * g_norm;
    sum_g_gplus_ += g_norm * gplus_norm;
    double step_sq = 0.0;
    for (std::size_t i = 0; i < t.beta.size(); ++i) {
        const double d = t.beta_next[i] - t.beta[i];
        step_sq += d * d;
    }
    const double limit = 3.0 * gplus_norm / (1.0 + 2.0 * sum_g_gplus_);
    record(report_, limit - std::sqrt(step_sq), t.round);
}

void InvEtaAccumulationCheck::observe(const StepTrace& t) {
    ++report_.rounds;
    const double growth = t.inv_eta_after - t.inv_eta_before;
    // Relative to 1/eta: the difference of two large accumulators carries their rounding.
    const double scale = std::max(1.0, std::abs(t.inv_eta_after));
    record(report_, -std::abs(growth - mu_of(t.grad, t.h)) / scale, t.round);
}

BoundReport check_no_overshoot(std::span<const StepTrace> traces) { return fold(NoOvershootCheck{}, traces); }

BoundReport check_wealth_identity(std::span<const StepTrace> traces) {
    return fold(WealthIdentityCheck{}, traces);
}

BoundReport check_wealth_lower_bound(std::span<const StepTrace> traces, BettingVariant variant) {
    const double initial = traces.empty() ? 1.0 : traces.front().wealth_before;
    return fold(WealthLowerBoundCheck{variant, initial}, traces);
}

BoundReport check_beta_ball(std::span<const StepTrace> traces, BetaNorm norm_kind) {
    return fold(BetaBallCheck{norm_kind}, traces);
}

BoundReport check_beta_step(std::span<const StepTrace> traces) { return fold(BetaStepCheck{}, traces); }

BoundReport check_inv_eta_accumulation(std::span<const StepTrace> traces) {
    return fold(InvEtaAccumulationCheck{}, traces);
}

Figure1Result figure1_scenario(std::size_t rounds) {
    Figure1Result out;
    BettingState state = BettingState::fresh(1, BettingVariant::closed_form);
    std::vector<StepTrace> traces;
    traces.reserve(rounds);
    for (std::size_t t = 1; t <= rounds; ++t) {
        const double w = state.beta[0] * state.wealth;
        const double r = w - kFigure1Target;
        const double g = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
        const double gv[1] = {g};
        traces.push_back(alg2_step(state, std::abs(r), gv));
        out.rows.push_back({t, w, traces.back().h});
    }

    constexpr double kPinTol = 1e-6;
    out.never_exceeds = std::all_of(out.rows.begin(), out.rows.end(),
                                    [](const TrajectoryRow& row) { return row.w <= kFigure1Target + kCornerTolerance; });
    for (const auto& row : out.rows) {
        if (std::abs(row.w - kFigure1Target) <= kPinTol) {
            out.first_corner_round = row.t;
            break;
        }
    }
    out.nondecreasing_until_corner = true;
    out.pinned_after_corner = out.first_corner_round.has_value();
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        const auto& row = out.rows[i];
        if (out.first_corner_round && row.t >= *out.first_corner_round) {
            if (std::abs(row.w - kFigure1Target) > kPinTol) out.pinned_after_corner = false;
        } else if (i > 0 && row.w < out.rows[i - 1].w) {
            out.nondecreasing_until_corner = false;
        }
    }
    out.no_overshoot = check_no_overshoot(traces);
    return out;
}

std::vector<StepTrace> figure1_ogd_contrast(double eta0, std::size_t rounds) {
    BaselineLearner ogd(BaselineKind::ogd, 1, eta0);
    std::vector<StepTrace> traces;
    ogd.set_trace_sink([&](const StepTrace& t) { traces.push_back(t); });
    for (std::size_t t = 0; t < rounds; ++t) {
        const double r = ogd.weights()[0] - kFigure1Target;
        const double g[1] = {r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)};
        ogd.update(std::abs(r), g, nullptr);
    }
    return traces;
}

}  // namespace pftrunc
