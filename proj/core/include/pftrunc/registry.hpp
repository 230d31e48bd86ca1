#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pftrunc/learners.hpp"
#include "pftrunc/losses.hpp"

namespace pftrunc {

/// Names accepted by make_learner, in harness legend order.
const std::vector<std::string>& algorithm_names();

bool is_registered(std::string_view name);

/// True for algorithms that take a tuned initial step size.
bool requires_step_size(std::string_view name);

/// Which betting learner, if any, a name refers to.
enum class LearnerFamily { baseline, projected_coin, closed_form_coin, coordinate_coin };
LearnerFamily family_of(std::string_view name);

/// Throws std::invalid_argument on an unknown name or an eta0 / kind mismatch.
std::unique_ptr<OnlineLearner> make_learner(std::string_view name, std::size_t dim, LossKind loss_kind,
                                            std::optional<double> eta0 = std::nullopt);

}  // namespace pftrunc
