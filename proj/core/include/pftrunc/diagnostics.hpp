#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pftrunc/learners.hpp"

namespace pftrunc {

/// Outcome of a bound check. Slack is signed: positive means satisfied.
struct BoundReport {
    std::string name;
    std::size_t rounds = 0;
    double worst_slack = std::numeric_limits<double>::infinity();
    std::optional<std::size_t> first_violation;
    double tolerance = 0.0;

    bool pass() const noexcept { return worst_slack >= -tolerance; }
};

inline constexpr double kCornerTolerance = 1e-8;
inline constexpr double kLogWealthTolerance = 1e-6;
inline constexpr double kIdentityTolerance = 1e-12;
inline constexpr double kWealthIdentityTolerance = 1e-9;

// Every check is a fold over StepTrace values: observe() each round in order,
// then report(). The span overloads below run a whole trace at once.

/// loss + <g, w_next - w> >= 0 on every round with g != 0.
class NoOvershootCheck {
public:
    void observe(const StepTrace& t);
    BoundReport report() const { return report_; }

private:
    BoundReport report_{"no_overshoot", 0, std::numeric_limits<double>::infinity(), std::nullopt,
                        kCornerTolerance};
};

/// Recursive wealth against eps - sum(<g, w - w_next> + <g+, w_next>).
class WealthIdentityCheck {
public:
    void observe(const StepTrace& t);
    BoundReport report() const;

private:
    BoundReport report_{"wealth_identity", 0, std::numeric_limits<double>::infinity(), std::nullopt,
                        kWealthIdentityTolerance};
    bool started_ = false;
    double initial_ = 0.0;
    double sum_ = 0.0;
    double compensation_ = 0.0;
    double max_deviation_ = 0.0;
};

/// Explicit log-wealth lower bounds for the projected and closed-form learners,
/// checked at every horizon including T = 0.
class WealthLowerBoundCheck {
public:
    explicit WealthLowerBoundCheck(BettingVariant variant, double initial_wealth = 1.0);
    void observe(const StepTrace& t);
    BoundReport report() const { return report_; }

    /// Right-hand side of the bound for the data seen so far.
    double bound() const;
    double log_wealth() const noexcept { return log_wealth_; }

private:
    BettingVariant variant_;
    double log_wealth_;
    BoundReport report_;
    double sum_g_gplus_ = 0.0;  // sum ||g|| ||g+||
    double sum_mu_ = 0.0;       // sum 2(||g||^2 - ||g - g+||^2)
    Vec sum_gplus_;
};

enum class BetaNorm { l2, linf };

/// 1/2 - max ||beta_t||.
class BetaBallCheck {
public:
    explicit BetaBallCheck(BetaNorm norm = BetaNorm::l2);
    void observe(const StepTrace& t);
    BoundReport report() const { return report_; }

private:
    BetaNorm norm_;
    BoundReport report_;
};

/// ||beta_{t+1} - beta_t|| <= 3 ||g+|| / (1 + 2 sum_{i<=t} ||g_i|| ||g_i+||) (projected learner).
class BetaStepCheck {
public:
    void observe(const StepTrace& t);
    BoundReport report() const { return report_; }

private:
    BoundReport report_{"beta_step", 0, std::numeric_limits<double>::infinity(), std::nullopt,
                        kIdentityTolerance};
    double sum_g_gplus_ = 0.0;
};

/// Growth of 1/eta against mu_t recomputed from (g, g+) (projected learner).
class InvEtaAccumulationCheck {
public:
    void observe(const StepTrace& t);
    BoundReport report() const { return report_; }

private:
    BoundReport report_{"inv_eta_accumulation", 0, std::numeric_limits<double>::infinity(), std::nullopt,
                        kIdentityTolerance};
};

BoundReport check_no_overshoot(std::span<const StepTrace> traces);
BoundReport check_wealth_identity(std::span<const StepTrace> traces);
BoundReport check_wealth_lower_bound(std::span<const StepTrace> traces, BettingVariant variant);
BoundReport check_beta_ball(std::span<const StepTrace> traces, BetaNorm norm = BetaNorm::l2);
BoundReport check_beta_step(std::span<const StepTrace> traces);
BoundReport check_inv_eta_accumulation(std::span<const StepTrace> traces);

/// mu_t = 2(||g||^2 - ||g - g+||^2), computed directly from the two vectors.
double mu_of(std::span<const double> g, double h);

// ---------------------------------------------------------------------------
// 1-d |w - 10| illustration.
// ---------------------------------------------------------------------------

struct TrajectoryRow {
    std::size_t t = 0;
    double w = 0.0;
    double h = 1.0;
};

struct Figure1Result {
    std::vector<TrajectoryRow> rows;
    std::optional<std::size_t> first_corner_round;  // t at which w_t first sits on the minimizer
    bool never_exceeds = false;
    bool nondecreasing_until_corner = false;
    bool pinned_after_corner = false;
    BoundReport no_overshoot;

    bool pass() const noexcept {
        return never_exceeds && nondecreasing_until_corner && pinned_after_corner && first_corner_round &&
               *first_corner_round <= 50 && no_overshoot.pass();
    }
};

inline constexpr double kFigure1Target = 10.0;

/// Closed-form betting learner on |w - 10| from w = 0.
Figure1Result figure1_scenario(std::size_t rounds = 100);

/// OGD (eta0 / sqrt(k) steps) on the same loss; returns its traces.
std::vector<StepTrace> figure1_ogd_contrast(double eta0 = 3.0, std::size_t rounds = 30);

}  // namespace pftrunc
