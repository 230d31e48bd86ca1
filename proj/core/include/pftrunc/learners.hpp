#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>

#include "pftrunc/losses.hpp"
#include "pftrunc/vector_ops.hpp"

namespace pftrunc {

/// Per-round record emitted by every learner. For coordinate-wise betting the
/// wealth fields hold the sum of the per-coordinate wealths.
struct StepTrace {
    std::size_t round = 0;  // 1-based
    Vec w;                  // prediction w_t
    Vec w_next;             // w_{t+1}
    Vec grad;               // g_t as consumed (after any renormalization)
    double loss = 0.0;      // loss(w_t)
    double h = 1.0;         // g_t^+ = h g_t
    Vec beta;               // betting fraction before the round (empty for baselines)
    Vec beta_next;
    double wealth_before = 0.0;
    double wealth_after = 0.0;
    double inv_eta_before = 0.0;  // shared-wealth learners only
    double inv_eta_after = 0.0;
    bool corner = false;          // h was solved for rather than accepted at 1
};

using TraceSink = std::function<void(const StepTrace&)>;

/// Common predict/update surface used by the harness. One update per gradient.
class OnlineLearner {
public:
    virtual ~OnlineLearner() = default;

    virtual std::string_view name() const = 0;
    virtual std::size_t dim() const = 0;

    /// Current prediction w_t.
    virtual std::span<const double> weights() const = 0;

    /// Consume loss(w_t) and g_t. `example` is only read by learners that
    /// need the raw example (importance-weight-aware updates).
    virtual void update(double loss, std::span<const double> grad,
                        const LabeledExample* example = nullptr) = 0;

    void set_trace_sink(TraceSink sink) { sink_ = std::move(sink); }
    bool tracing() const noexcept { return static_cast<bool>(sink_); }

protected:
    void emit(const StepTrace& trace) const {
        if (sink_) sink_(trace);
    }

private:
    TraceSink sink_;
};

// ---------------------------------------------------------------------------
// Coin betting with truncated linear models.
// ---------------------------------------------------------------------------

enum class BettingVariant {
    projected,    // projected betting fraction; h found by bisection
    closed_form,  // shrink branch near the boundary; h from a cubic/quadratic
};

struct BettingOptions {
    double initial_wealth = 1.0;
    double bisection_tol = 1e-10;
    double c = 9.0;  // shrink constant of the closed-form variant
};

inline constexpr double kGradientSlack = 1e-9;
inline constexpr double kBetaShrinkThreshold = 3.0 / 8.0;

struct BettingState {
    Vec beta;
    double wealth = 1.0;
    double inv_eta = 3.0;
    BettingVariant variant = BettingVariant::closed_form;
    double c = 9.0;
    double bisection_tol = 1e-10;

    std::size_t round = 0;
    std::size_t norm_warnings = 0;      // gradients in (1, 1 + 1e-9] renormalized
    std::size_t closed_form_fallbacks = 0;
    std::size_t corner_rounds = 0;

    static BettingState fresh(std::size_t dim, BettingVariant variant, const BettingOptions& opts = {});
};

struct CoordinateBettingState {
    Vec beta;
    Vec wealth;
    Vec inv_eta;
    double c = 9.0;
    double bisection_tol = 1e-10;

    std::size_t round = 0;
    std::size_t norm_warnings = 0;
    std::size_t corner_rounds = 0;

    static CoordinateBettingState fresh(std::size_t dim, const BettingOptions& opts = {});
};

/// w_t = beta_t * Wealth_{t-1}.
Vec predict(const BettingState& state);
/// w_t = beta_t (.) Wealth_{t-1}, componentwise.
Vec predict(const CoordinateBettingState& state);

/// Wealth after a round: wealth * (1 - <g, beta_t>) / (1 + (h - 1) <g, beta_next>).
double wealth_update(double wealth, std::span<const double> g, std::span<const double> beta,
                     double h, std::span<const double> beta_next);

// Each step consumes exactly one (loss, gradient) pair and mutates `state` to
// the post-round values. Throws GradientBoundError for gradients beyond the
// bound plus 1e-9 and DimensionMismatch on size errors. A zero gradient is a
// no-op reported with h = 0.
StepTrace alg1_step(BettingState& state, double loss, std::span<const double> g);
StepTrace alg2_step(BettingState& state, double loss, std::span<const double> g);
StepTrace alg3_step(CoordinateBettingState& state, double loss, std::span<const double> g);

// Trace-free variants used on hot paths. Return h.
double alg1_update(BettingState& state, double loss, std::span<const double> g, StepTrace* trace = nullptr);
double alg2_update(BettingState& state, double loss, std::span<const double> g, StepTrace* trace = nullptr);
double alg3_update(CoordinateBettingState& state, double loss, std::span<const double> g,
                   StepTrace* trace = nullptr);

/// Shared-wealth learner (projected or closed-form variant).
class ImplicitCoinLearner final : public OnlineLearner {
public:
    ImplicitCoinLearner(std::size_t dim, BettingVariant variant, const BettingOptions& opts = {});

    std::string_view name() const override;
    std::size_t dim() const override { return state_.beta.size(); }
    std::span<const double> weights() const override { return w_; }
    void update(double loss, std::span<const double> grad, const LabeledExample* example) override;

    const BettingState& state() const noexcept { return state_; }

private:
    BettingState state_;
    Vec w_;
};

class CoordinateImplicitCoinLearner final : public OnlineLearner {
public:
    explicit CoordinateImplicitCoinLearner(std::size_t dim, const BettingOptions& opts = {});

    std::string_view name() const override { return "cw-implicit-coin"; }
    std::size_t dim() const override { return state_.beta.size(); }
    std::span<const double> weights() const override { return w_; }
    void update(double loss, std::span<const double> grad, const LabeledExample* example) override;

    const CoordinateBettingState& state() const noexcept { return state_; }

private:
    CoordinateBettingState state_;
    Vec w_;
};

}  // namespace pftrunc
