#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pftrunc/vector_ops.hpp"

namespace pftrunc {

/// Sparse feature vector; indices are 0-based and strictly ascending.
struct SparseVector {
    std::vector<std::uint32_t> index;
    std::vector<double> value;

    std::size_t nnz() const noexcept { return index.size(); }
    double dot(std::span<const double> w) const;
    double squared_norm() const;
    Vec to_dense(std::size_t dim) const;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

struct LabeledExample {
    SparseVector features;
    double target = 0.0;

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

enum class LossKind { hinge, absolute };

std::string_view to_string(LossKind kind);

struct LossEval {
    double loss = 0.0;
    Vec grad;
};

// max(0, 1 - y<w,x>). At the exact margin the zero subgradient is returned.
LossEval hinge_eval_grad(std::span<const double> w, const LabeledExample& ex);

// |<w,x> - y| with sign(0) := 0.
LossEval absolute_eval_grad(std::span<const double> w, const LabeledExample& ex);

LossEval eval_grad(LossKind kind, std::span<const double> w, const LabeledExample& ex);

// Loss value only; no gradient allocation.
double eval_loss(LossKind kind, std::span<const double> w, const LabeledExample& ex);

}  // namespace pftrunc
