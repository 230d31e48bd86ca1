#include "pftrunc/losses.hpp"

#include <stdexcept>

namespace pftrunc {

namespace {

void check_indices(const SparseVector& x, std::size_t dim) {
    if (!x.index.empty() && x.index.back() >= dim) {
        throw DimensionMismatch(dim, static_cast<std::size_t>(x.index.back()) + 1, "features");
    }
}

void add_scaled(Vec& out, const SparseVector& x, double scale) {
    for (std::size_t k = 0; k < x.nnz(); ++k) out[x.index[k]] += scale * x.value[k];
}

}  // namespace

double SparseVector::dot(std::span<const double> w) const {
    double s = 0.0;
    for (std::size_t k = 0; k < index.size(); ++k) s += w[index[k]] * value[k];
    return s;
}

double SparseVector::squared_norm() const {
    double s = 0.0;
    for (double v : value) s += v * v;
    return s;
}

Vec SparseVector::to_dense(std::size_t dim) const {
    check_indices(*this, dim);
    Vec out(dim, 0.0);
    add_scaled(out, *this, 1.0);
    return out;
}

std::string_view to_string(LossKind kind) {
    switch (kind) {
        case LossKind::hinge: return "hinge";
        case LossKind::absolute: return "absolute";
    }
    return "unknown";
}

LossEval hinge_eval_grad(std::span<const double> w, const LabeledExample& ex) {
    check_indices(ex.features, w.size());
    if (ex.target != 1.0 && ex.target != -1.0) {
        throw std::invalid_argument("hinge loss requires a target in {-1, +1}");
    }
    const double margin = 1.0 - ex.target * ex.features.dot(w);
    LossEval out{std::max(0.0, margin), Vec(w.size(), 0.0)};
    if (margin > 0.0) add_scaled(out.grad, ex.features, -ex.target);
    return out;
}

LossEval absolute_eval_grad(std::span<const double> w, const LabeledExample& ex) {
    check_indices(ex.features, w.size());
    const double r = ex.features.dot(w) - ex.target;
    LossEval out{std::abs(r), Vec(w.size(), 0.0)};
    if (r > 0.0) {
        add_scaled(out.grad, ex.features, 1.0);
    } else if (r < 0.0) {
        add_scaled(out.grad, ex.features, -1.0);
    }
    return out;
}

LossEval eval_grad(LossKind kind, std::span<const double> w, const LabeledExample& ex) {
    return kind == LossKind::hinge ? hinge_eval_grad(w, ex) : absolute_eval_grad(w, ex);
}

double eval_loss(LossKind kind, std::span<const double> w, const LabeledExample& ex) {
    check_indices(ex.features, w.size());
    const double p = ex.features.dot(w);
    if (kind == LossKind::hinge) return std::max(0.0, 1.0 - ex.target * p);
    return std::abs(p - ex.target);
}

}  // namespace pftrunc
