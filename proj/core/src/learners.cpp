#include "pftrunc/learners.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "pftrunc/rootsolve.hpp"

namespace pftrunc {

BettingState BettingState::fresh(std::size_t dim, BettingVariant variant, const BettingOptions& opts) {
    BettingState s;
    s.beta.assign(dim, 0.0);
    s.wealth = opts.initial_wealth;
    s.variant = variant;
    s.c = opts.c;
    s.inv_eta = variant == BettingVariant::projected ? 3.0 : 2.0 * opts.c;
    s.bisection_tol = opts.bisection_tol;
    return s;
}

CoordinateBettingState CoordinateBettingState::fresh(std::size_t dim, const BettingOptions& opts) {
    CoordinateBettingState s;
    s.beta.assign(dim, 0.0);
    s.wealth.assign(dim, opts.initial_wealth);
    s.inv_eta.assign(dim, 2.0 * opts.c);
    s.c = opts.c;
    s.bisection_tol = opts.bisection_tol;
    return s;
}

Vec predict(const BettingState& state) {
    Vec w(state.beta.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = state.beta[i] * state.wealth;
    return w;
}

Vec predict(const CoordinateBettingState& state) {
    Vec w(state.beta.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = state.beta[i] * state.wealth[i];
    return w;
}

double wealth_update(double wealth, std::span<const double> g, std::span<const double> beta, double h,
                     std::span<const double> beta_next) {
    return wealth * (1.0 - dot(g, beta)) / (1.0 + (h - 1.0) * dot(g, beta_next));
}

namespace {

// Enforces ||g|| <= 1: values in (1, 1 + slack] are rescaled onto the sphere
// and counted, anything larger throws.
std::span<const double> guard_gradient(std::span<const double> g, double g_norm, Vec& scratch,
                                       std::size_t& warnings) {
    if (!(g_norm <= 1.0 + kGradientSlack)) throw GradientBoundError(g_norm, 1.0);
    if (g_norm <= 1.0) return g;
    ++warnings;
    scratch.assign(g.begin(), g.end());
    for (double& v : scratch) v /= g_norm;
    return scratch;
}

// Scalars of one shared-wealth round. Every candidate beta_{t+1} has the form
// (a * beta_t + b * g_t) / scale, so the residual for a trial h costs O(1).
struct SharedRound {
    double loss;
    double g_sq;     // ||g||^2
    double g_norm;   // ||g||
    double gb;       // <g, beta_t>
    double beta_sq;  // ||beta_t||^2
    double wealth;   // Wealth_{t-1}
    double inv_eta;
    double c;
    BettingVariant variant;
    bool shrink_branch;
};

struct Candidate {
    double a;
    double b;
    double scale;
    double inv_eta_increment;
};

Candidate candidate(const SharedRound& r, double h) {
    const double k = 1.0 / r.inv_eta;
    const double m = r.g_sq * (2.0 * h - h * h);  // ||g||^2 - ||g+ - g||^2
    if (r.variant == BettingVariant::projected) {
        const double a = 1.0 - 2.0 * k * m;
        const double b = -k * h;
        const double sq = a * a * r.beta_sq + 2.0 * a * b * r.gb + b * b * r.g_sq;
        return {a, b, std::max(1.0, 2.0 * std::sqrt(std::max(sq, 0.0))), 2.0 * m};
    }
    if (!r.shrink_branch) return {1.0 - 2.0 * k * m, -k * h, 1.0, 2.0 * m};
    return {1.0 - 2.0 * r.c * k * h * r.g_norm, 0.0, 1.0, 2.0 * r.c * h * r.g_norm};
}

// loss + <g, w_{t+1}(h) - w_t>; exactly `loss` at h = 0 where nothing moves.
double shared_residual(const SharedRound& r, double h) {
    if (h == 0.0) return r.loss;
    const Candidate cand = candidate(r, h);
    const double s = (cand.a * r.gb + cand.b * r.g_sq) / cand.scale;  // <g, beta_{t+1}>
    const double wealth_next = r.wealth * (1.0 - r.gb) / (1.0 + (h - 1.0) * s);
    return r.loss + s * wealth_next - r.gb * r.wealth;
}

// Closed-form h for the corner equation of the closed-form variant. Returns the
// largest root in [0, 1) whose residual is within tolerance.
std::optional<double> closed_form_h(const SharedRound& r) {
    const double eta = 1.0 / r.inv_eta;
    const double A = r.gb * r.wealth - r.loss;  // <g, w_t> - loss
    const double B = r.wealth * (1.0 - r.gb);
    const double AB = A + B;

    PolyCoeffs p;
    if (!r.shrink_branch) {
        const double D = 2.0 * eta * r.g_sq * r.gb;
        const double eg = eta * r.g_sq;
        p.coefficients = {-A * D, 2.0 * A * D + A * eg + AB * D, -AB * eg - 2.0 * AB * D - A * r.gb,
                          AB * r.gb - A};
    } else {
        const double D = 2.0 * r.c * eta * r.g_norm * r.gb;
        p.coefficients = {A * D, -A * r.gb - AB * D, AB * r.gb - A};
    }

    std::vector<double> roots;
    try {
        roots = roots_in_unit(p, 0.0, 1.0);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    const double tol = 1e-8 * std::max({1.0, r.loss, std::abs(r.gb * r.wealth)});
    std::optional<double> best;
    for (double h : roots) {
        if (h >= 1.0) continue;
        if (std::abs(shared_residual(r, h)) <= tol) best = h;
    }
    return best;
}

double shared_step(BettingState& state, double loss, std::span<const double> g_in, StepTrace* trace) {
    require_same_size(state.beta.size(), g_in.size(), "betting step");
    if (!(loss >= 0.0)) throw std::invalid_argument("betting step: loss must be >= 0");

    ++state.round;
    Vec scratch;
    const std::span<const double> g = guard_gradient(g_in, norm(g_in), scratch, state.norm_warnings);

    if (trace) {
        trace->round = state.round;
        trace->w = predict(state);
        trace->grad.assign(g.begin(), g.end());
        trace->loss = loss;
        trace->beta = state.beta;
        trace->wealth_before = state.wealth;
        trace->inv_eta_before = state.inv_eta;
        trace->corner = false;
    }

    const double g_sq = squared_norm(g);
    if (g_sq == 0.0) {
        if (trace) {
            trace->h = 0.0;
            trace->w_next = trace->w;
            trace->beta_next = state.beta;
            trace->wealth_after = state.wealth;
            trace->inv_eta_after = state.inv_eta;
        }
        return 0.0;
    }

    const double beta_sq = squared_norm(state.beta);
    const SharedRound r{loss,
                        g_sq,
                        std::sqrt(g_sq),
                        dot(g, state.beta),
                        beta_sq,
                        state.wealth,
                        state.inv_eta,
                        state.c,
                        state.variant,
                        state.variant == BettingVariant::closed_form &&
                            std::sqrt(beta_sq) >= kBetaShrinkThreshold};

    double h = 1.0;
    bool corner = false;
    if (shared_residual(r, 1.0) < 0.0) {
        corner = true;
        ++state.corner_rounds;
        std::optional<double> solved;
        if (state.variant == BettingVariant::closed_form) {
            solved = closed_form_h(r);
            if (!solved) ++state.closed_form_fallbacks;
        }
        h = solved ? *solved
                   : bisect([&](double x) { return shared_residual(r, x); }, 0.0, 1.0, state.bisection_tol);
    }

    const Candidate cand = candidate(r, h);
    Vec beta_next(state.beta.size());
    for (std::size_t i = 0; i < beta_next.size(); ++i) {
        beta_next[i] = (cand.a * state.beta[i] + cand.b * g[i]) / cand.scale;
    }
    const double wealth_next = wealth_update(state.wealth, g, state.beta, h, beta_next);

    state.beta = std::move(beta_next);
    state.wealth = wealth_next;
    state.inv_eta += cand.inv_eta_increment;

    if (trace) {
        trace->h = h;
        trace->corner = corner;
        trace->w_next = predict(state);
        trace->beta_next = state.beta;
        trace->wealth_after = state.wealth;
        trace->inv_eta_after = state.inv_eta;
    }
    return h;
}

double coordinate_beta_next(const CoordinateBettingState& s, std::size_t i, double gi, double h) {
    const double beta = s.beta[i];
    const double k = 1.0 / s.inv_eta[i];
    if (std::abs(beta) < kBetaShrinkThreshold) {
        const double m = gi * gi * (2.0 * h - h * h);
        return beta - k * (h * gi + 2.0 * beta * m);
    }
    return beta * (1.0 - 2.0 * s.c * k * h * std::abs(gi));
}

double coordinate_residual(const CoordinateBettingState& s, double loss, std::span<const double> g, double gw,
                           double h) {
    if (h == 0.0) return loss;
    double gw_next = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        const double bn = coordinate_beta_next(s, i, gi, h);
        const double wn = s.wealth[i] * (1.0 - gi * s.beta[i]) / (1.0 + (h - 1.0) * gi * bn);
        gw_next += gi * bn * wn;
    }
    return loss + gw_next - gw;
}

double wealth_sum(const Vec& w) {
    double s = 0.0;
    for (double v : w) s += v;
    return s;
}

}  // namespace

double alg1_update(BettingState& state, double loss, std::span<const double> g, StepTrace* trace) {
    if (state.variant != BettingVariant::projected) throw std::invalid_argument("alg1_step: wrong state variant");
    return shared_step(state, loss, g, trace);
}

double alg2_update(BettingState& state, double loss, std::span<const double> g, StepTrace* trace) {
    if (state.variant != BettingVariant::closed_form) throw std::invalid_argument("alg2_step: wrong state variant");
    return shared_step(state, loss, g, trace);
}

double alg3_update(CoordinateBettingState& state, double loss, std::span<const double> g_in, StepTrace* trace) {
    require_same_size(state.beta.size(), g_in.size(), "coordinate betting step");
    if (!(loss >= 0.0)) throw std::invalid_argument("coordinate betting step: loss must be >= 0");

    ++state.round;
    Vec scratch;
    const std::span<const double> g = guard_gradient(g_in, inf_norm(g_in), scratch, state.norm_warnings);

    const Vec w = predict(state);
    if (trace) {
        trace->round = state.round;
        trace->w = w;
        trace->grad.assign(g.begin(), g.end());
        trace->loss = loss;
        trace->beta = state.beta;
        trace->wealth_before = wealth_sum(state.wealth);
        trace->inv_eta_before = 0.0;
        trace->inv_eta_after = 0.0;
        trace->corner = false;
    }

    if (all_zero(g)) {
        if (trace) {
            trace->h = 0.0;
            trace->w_next = w;
            trace->beta_next = state.beta;
            trace->wealth_after = trace->wealth_before;
        }
        return 0.0;
    }

    const double gw = dot(g, w);
    double h = 1.0;
    bool corner = false;
    if (coordinate_residual(state, loss, g, gw, 1.0) < 0.0) {
        corner = true;
        ++state.corner_rounds;
        h = bisect([&](double x) { return coordinate_residual(state, loss, g, gw, x); }, 0.0, 1.0,
                   state.bisection_tol);
    }

    for (std::size_t i = 0; i < g.size(); ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        const bool shrink = std::abs(state.beta[i]) >= kBetaShrinkThreshold;
        const double bn = coordinate_beta_next(state, i, gi, h);
        state.wealth[i] = state.wealth[i] * (1.0 - gi * state.beta[i]) / (1.0 + (h - 1.0) * gi * bn);
        state.beta[i] = bn;
        state.inv_eta[i] += shrink ? 2.0 * state.c * h * std::abs(gi) : 2.0 * gi * gi * (2.0 * h - h * h);
    }

    if (trace) {
        trace->h = h;
        trace->corner = corner;
        trace->w_next = predict(state);
        trace->beta_next = state.beta;
        trace->wealth_after = wealth_sum(state.wealth);
    }
    return h;
}

StepTrace alg1_step(BettingState& state, double loss, std::span<const double> g) {
    StepTrace t;
    alg1_update(state, loss, g, &t);
    return t;
}

StepTrace alg2_step(BettingState& state, double loss, std::span<const double> g) {
    StepTrace t;
    alg2_update(state, loss, g, &t);
    return t;
}

StepTrace alg3_step(CoordinateBettingState& state, double loss, std::span<const double> g) {
    StepTrace t;
    alg3_update(state, loss, g, &t);
    return t;
}

ImplicitCoinLearner::ImplicitCoinLearner(std::size_t dim, BettingVariant variant, const BettingOptions& opts)
    : state_(BettingState::fresh(dim, variant, opts)), w_(dim, 0.0) {}

std::string_view ImplicitCoinLearner::name() const {
    return state_.variant == BettingVariant::projected ? "implicit-coin-proj" : "implicit-coin";
}

void ImplicitCoinLearner::update(double loss, std::span<const double> grad, const LabeledExample*) {
    if (tracing()) {
        StepTrace t;
        shared_step(state_, loss, grad, &t);
        emit(t);
    } else {
        shared_step(state_, loss, grad, nullptr);
    }
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] = state_.beta[i] * state_.wealth;
}

CoordinateImplicitCoinLearner::CoordinateImplicitCoinLearner(std::size_t dim, const BettingOptions& opts)
    : state_(CoordinateBettingState::fresh(dim, opts)), w_(dim, 0.0) {}

void CoordinateImplicitCoinLearner::update(double loss, std::span<const double> grad, const LabeledExample*) {
    if (tracing()) {
        StepTrace t;
        alg3_update(state_, loss, grad, &t);
        emit(t);
    } else {
        alg3_update(state_, loss, grad, nullptr);
    }
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] = state_.beta[i] * state_.wealth[i];
}

}  // namespace pftrunc
