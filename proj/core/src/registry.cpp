#include "pftrunc/registry.hpp"

#include <algorithm>
#include <stdexcept>

#include "pftrunc/baselines.hpp"

namespace pftrunc {

const std::vector<std::string>& algorithm_names() {
    static const std::vector<std::string> names{"sgd",   "aprox",         "iwa",
                                                "coin",  "cocob",         "implicit-coin",
                                                "cw-implicit-coin", "implicit-coin-proj"};
    return names;
}

bool is_registered(std::string_view name) {
    const auto& names = algorithm_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

bool requires_step_size(std::string_view name) { return name == "sgd" || name == "aprox" || name == "iwa"; }

LearnerFamily family_of(std::string_view name) {
    if (name == "implicit-coin") return LearnerFamily::closed_form_coin;
    if (name == "implicit-coin-proj") return LearnerFamily::projected_coin;
    if (name == "cw-implicit-coin") return LearnerFamily::coordinate_coin;
    return LearnerFamily::baseline;
}

std::unique_ptr<OnlineLearner> make_learner(std::string_view name, std::size_t dim, LossKind loss_kind,
                                            std::optional<double> eta0) {
    if (!is_registered(name)) throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
    if (!requires_step_size(name) && eta0) {
        throw std::invalid_argument(std::string(name) + ": parameter-free, eta0 not accepted");
    }
    if (name == "sgd") return std::make_unique<BaselineLearner>(BaselineKind::ogd, dim, eta0, loss_kind);
    if (name == "aprox") return std::make_unique<BaselineLearner>(BaselineKind::aprox, dim, eta0, loss_kind);
    if (name == "iwa") return std::make_unique<BaselineLearner>(BaselineKind::iwa, dim, eta0, loss_kind);
    if (name == "coin") return std::make_unique<BaselineLearner>(BaselineKind::kt_coin, dim, eta0, loss_kind);
    if (name == "cocob") return std::make_unique<BaselineLearner>(BaselineKind::cocob, dim, eta0, loss_kind);
    if (name == "implicit-coin") return std::make_unique<ImplicitCoinLearner>(dim, BettingVariant::closed_form);
    if (name == "implicit-coin-proj") return std::make_unique<ImplicitCoinLearner>(dim, BettingVariant::projected);
    return std::make_unique<CoordinateImplicitCoinLearner>(dim);
}

}  // namespace pftrunc
