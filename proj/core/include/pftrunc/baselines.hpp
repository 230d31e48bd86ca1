#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "pftrunc/learners.hpp"
#include "pftrunc/losses.hpp"

namespace pftrunc {

enum class BaselineKind { ogd, aprox, iwa, kt_coin, cocob };

std::string_view to_string(BaselineKind kind);
bool is_tuned(BaselineKind kind);

inline constexpr double kCocobAlpha = 100.0;

/// State shared by all comparison algorithms. Only the accumulators relevant to
/// `kind` are used.
struct BaselineState {
    BaselineKind kind = BaselineKind::ogd;
    Vec w;
    std::size_t k = 0;                 // steps taken, including zero-gradient ones
    std::optional<double> eta0;        // tuned kinds only
    LossKind loss_kind = LossKind::absolute;  // needed by IWA

    // KT coin betting
    Vec neg_grad_sum;
    double kt_wealth = 1.0;
    std::size_t kt_rounds = 0;         // rounds with a nonzero gradient

    // COCOB (per coordinate)
    Vec cocob_max_grad;
    Vec cocob_abs_grad_sum;
    Vec cocob_reward;

    /// Throws std::invalid_argument if eta0 is given for a parameter-free kind,
    /// or missing / non-positive for a tuned kind.
    static BaselineState fresh(BaselineKind kind, std::size_t dim, std::optional<double> eta0 = std::nullopt,
                               LossKind loss_kind = LossKind::absolute);

    double step_size() const;  // eta0 / sqrt(k) for the current k
};

// All steps increment k and return the new iterate. A zero gradient leaves w unchanged.
const Vec& ogd_step(BaselineState& s, double loss, std::span<const double> g);
const Vec& aprox_step(BaselineState& s, double loss, std::span<const double> g);
const Vec& iwa_step(BaselineState& s, double loss, std::span<const double> g, const LabeledExample& ex);
const Vec& kt_coin_step(BaselineState& s, double loss, std::span<const double> g);
const Vec& cocob_step(BaselineState& s, double loss, std::span<const double> g);

class BaselineLearner final : public OnlineLearner {
public:
    BaselineLearner(BaselineKind kind, std::size_t dim, std::optional<double> eta0 = std::nullopt,
                    LossKind loss_kind = LossKind::absolute);

    std::string_view name() const override;
    std::size_t dim() const override { return state_.w.size(); }
    std::span<const double> weights() const override { return state_.w; }
    void update(double loss, std::span<const double> grad, const LabeledExample* example) override;

    const BaselineState& state() const noexcept { return state_; }

private:
    BaselineState state_;
};

}  // namespace pftrunc
