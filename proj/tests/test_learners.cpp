#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "pftrunc/errors.hpp"
#include "pftrunc/learners.hpp"
#include "pftrunc/truncated_model.hpp"
#include "support.hpp"

using namespace pftrunc;
namespace pt = pftrunc::testing;

namespace {

pt::ReferenceState as_reference(const BettingState& s) { return {s.beta, s.wealth, s.inv_eta}; }

// Loss small enough relative to the step that a good share of rounds hit the corner.
double fuzz_loss(std::mt19937_64& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return u < 0.5 ? 10.0 * u * u * u : 10.0 * u;
}

StepTrace run_variant(BettingState& s, double loss, const Vec& g) {
    return s.variant == BettingVariant::projected ? alg1_step(s, loss, g) : alg2_step(s, loss, g);
}

}  // namespace

TEST_CASE("predict") {
    auto s = BettingState::fresh(3, BettingVariant::closed_form);
    CHECK(predict(s) == Vec{0.0, 0.0, 0.0});
    s.beta = {1.0 / 3.0};
    s.wealth = 1.0;
    CHECK(predict(s) == Vec{1.0 / 3.0});

    auto c = CoordinateBettingState::fresh(2);
    c.beta = {0.1, -0.2};
    c.wealth = {1.0, 2.0};
    CHECK(predict(c) == Vec{0.1, -0.4});
}

TEST_CASE("fresh states carry the published constants") {
    const auto p = BettingState::fresh(2, BettingVariant::projected);
    CHECK(p.inv_eta == 3.0);
    CHECK(p.wealth == 1.0);
    const auto q = BettingState::fresh(2, BettingVariant::closed_form);
    CHECK(q.c == 9.0);
    CHECK(q.inv_eta == 18.0);
    const auto r = CoordinateBettingState::fresh(2);
    CHECK(r.inv_eta == Vec{18.0, 18.0});
    CHECK(r.wealth == Vec{1.0, 1.0});
}

TEST_CASE("projected learner first round on |w - 10|") {
    auto s = BettingState::fresh(1, BettingVariant::projected);
    const auto t = alg1_step(s, 10.0, Vec{-1.0});
    CHECK(t.h == 1.0);
    CHECK(s.beta[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(s.wealth == 1.0);
    CHECK(predict(s)[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(t.w_next == predict(s));
}

TEST_CASE("closed-form learner first round on |w - 10|") {
    auto s = BettingState::fresh(1, BettingVariant::closed_form);
    const auto t = alg2_step(s, 10.0, Vec{-1.0});
    CHECK(t.h == 1.0);
    CHECK(s.beta[0] == doctest::Approx(1.0 / 18.0).epsilon(1e-15));
    CHECK(s.wealth == 1.0);
    CHECK(t.w_next[0] == doctest::Approx(1.0 / 18.0).epsilon(1e-15));
}

TEST_CASE("coordinate learner first round") {
    auto s = CoordinateBettingState::fresh(2);
    const auto t = alg3_step(s, 10.0, Vec{-1.0, 0.0});
    CHECK(t.h == 1.0);
    CHECK(s.beta[0] == doctest::Approx(1.0 / 18.0).epsilon(1e-15));
    CHECK(s.beta[1] == 0.0);

    auto u = CoordinateBettingState::fresh(3);
    const Vec g{0.5, -0.25, 0.1};
    alg3_step(u, 5.0, g);
    for (std::size_t i = 0; i < 3; ++i) CHECK(u.beta[i] == doctest::Approx(-g[i] / 18.0).epsilon(1e-15));
}

TEST_CASE("zero gradient is a full no-op") {
    for (auto variant : {BettingVariant::projected, BettingVariant::closed_form}) {
        auto s = BettingState::fresh(2, variant);
        run_variant(s, 3.0, Vec{0.6, 0.0});
        const auto before = s;
        const auto t = run_variant(s, 3.0, Vec{0.0, 0.0});
        CHECK(t.h == 0.0);
        CHECK(s.beta == before.beta);
        CHECK(s.wealth == before.wealth);
        CHECK(s.inv_eta == before.inv_eta);
        CHECK(t.w_next == predict(before));
        CHECK(t.wealth_after == t.wealth_before);
        CHECK(t.beta_next == t.beta);
    }
    auto c = CoordinateBettingState::fresh(2);
    alg3_step(c, 1.0, Vec{0.3, -0.2});
    const auto before = c;
    const auto t = alg3_step(c, 1.0, Vec{0.0, 0.0});
    CHECK(t.h == 0.0);
    CHECK(c.beta == before.beta);
    CHECK(c.wealth == before.wealth);
    CHECK(c.inv_eta == before.inv_eta);
}

TEST_CASE("gradient norm guard") {
    auto s = BettingState::fresh(2, BettingVariant::closed_form);
    const double over = 1.0 + 5e-10;
    const auto t = alg2_step(s, 1.0, Vec{over, 0.0});
    CHECK(s.norm_warnings == 1);
    CHECK(norm(t.grad) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(alg2_step(s, 1.0, Vec{1.0 + 1e-6, 0.0}), GradientBoundError);
    CHECK_THROWS_AS(alg1_step(s, 1.0, Vec{0.8, 0.8}), std::invalid_argument);

    auto c = CoordinateBettingState::fresh(2);
    CHECK_NOTHROW(alg3_step(c, 1.0, Vec{1.0, -1.0}));
    CHECK_THROWS_AS(alg3_step(c, 1.0, Vec{1.001, 0.0}), GradientBoundError);
}

TEST_CASE("dimension mismatches are rejected") {
    auto s = BettingState::fresh(2, BettingVariant::closed_form);
    CHECK_THROWS_AS(alg2_step(s, 1.0, Vec{0.1}), DimensionMismatch);
    auto c = CoordinateBettingState::fresh(2);
    CHECK_THROWS_AS(alg3_step(c, 1.0, Vec{0.1, 0.1, 0.1}), DimensionMismatch);
    CHECK_THROWS_AS(alg2_step(s, -1.0, Vec{0.1, 0.1}), std::invalid_argument);
}

TEST_CASE("wealth_update") {
    const Vec g{0.5, -0.5};
    const Vec beta{0.2, 0.1};
    const Vec beta_next{0.3, -0.1};
    CHECK(wealth_update(2.0, g, beta, 1.0, beta_next) == doctest::Approx(2.0 * (1.0 - 0.05)));
    CHECK(wealth_update(2.0, g, Vec{0.0, 0.0}, 0.5, beta_next) == doctest::Approx(2.0 / (1.0 - 0.5 * 0.2)));
}

TEST_CASE("learners agree with the straight-line reference on fuzzed rounds") {
    std::mt19937_64 rng(77);
    for (auto variant : {BettingVariant::projected, BettingVariant::closed_form}) {
        auto s = BettingState::fresh(4, variant);
        std::size_t corners = 0;
        for (int round = 0; round < 5000; ++round) {
            const Vec g = pt::random_in_unit_ball(rng, 4);
            const double loss = fuzz_loss(rng);
            const auto ref = variant == BettingVariant::projected
                                 ? pt::reference_round(as_reference(s), loss, g, pt::projected_candidate)
                                 : pt::reference_round(as_reference(s), loss, g,
                                                       [](const auto& st, auto gg, double h) {
                                                           return pt::closed_form_candidate(st, gg, h);
                                                       });
            const auto t = run_variant(s, loss, g);
            INFO("round ", round);
            CHECK(std::abs(t.h - ref.h) <= 1e-6);
            const double scale = 1.0 + norm(ref.w_next);
            for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(t.w_next[i] - ref.w_next[i]) <= 1e-6 * scale);
            CHECK(t.h >= 0.0);
            CHECK(t.h <= 1.0);
            const double r = corner_residual(loss, g, t.w, t.w_next);
            CHECK(r >= -1e-8);
            if (t.h < 1.0) {
                ++corners;
                CHECK(std::abs(r) <= 1e-8);
            }
        }
        CHECK(corners > 100);
        CHECK(s.closed_form_fallbacks == 0);
    }
}

TEST_CASE("coordinate learner agrees with the reference") {
    std::mt19937_64 rng(78);
    auto s = CoordinateBettingState::fresh(3);
    std::size_t corners = 0;
    for (int round = 0; round < 3000; ++round) {
        const Vec g = pt::random_vec(rng, 3);
        const double loss = fuzz_loss(rng);
        pt::ReferenceCoordinateState ref_state{s.beta, s.wealth, s.inv_eta};
        const Vec w = predict(s);
        auto residual = [&](double h) {
            const auto n = pt::coordinate_candidate(ref_state, g, h);
            double r = loss;
            for (std::size_t i = 0; i < 3; ++i) r += g[i] * (n.beta[i] * n.wealth[i] - w[i]);
            return r;
        };
        const double ref_h = residual(1.0) >= 0.0 ? 1.0 : pt::reference_bisect(residual, 0.0, 1.0, 100);
        const auto t = alg3_step(s, loss, g);
        CHECK(std::abs(t.h - ref_h) <= 1e-8);
        CHECK(corner_residual(loss, g, t.w, t.w_next) >= -1e-8);
        if (t.h < 1.0) ++corners;
    }
    CHECK(corners > 100);
}

TEST_CASE("coordinate learner in one dimension reproduces the closed-form learner") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto a = BettingState::fresh(1, BettingVariant::closed_form);
    auto b = CoordinateBettingState::fresh(1);
    for (int round = 0; round < 1000; ++round) {
        const double scale = 0.1 + 0.9 * u(rng);
        const double target = 20.0 * u(rng) - 10.0;
        const double w = predict(a)[0];
        const double loss = scale * std::abs(w - target);
        const Vec g{w > target ? scale : (w < target ? -scale : 0.0)};
        const auto ta = alg2_step(a, loss, g);
        const auto tb = alg3_step(b, loss, g);
        INFO("round ", round);
        REQUIRE(std::abs(ta.w_next[0] - tb.w_next[0]) <= 1e-12 * std::max(1.0, std::abs(ta.w_next[0])));
        REQUIRE(std::abs(ta.h - tb.h) <= 1e-12);
    }
}

TEST_CASE("once at the corner of |w - c| the iterate sits on c") {
    for (double c : {10.0, -3.5, 0.75}) {
        auto s = BettingState::fresh(1, BettingVariant::closed_form);
        auto p = BettingState::fresh(1, BettingVariant::projected);
        auto q = CoordinateBettingState::fresh(1);
        auto step_abs = [c](auto& state, auto step) {
            const double w = predict(state)[0];
            const Vec g{w > c ? 1.0 : (w < c ? -1.0 : 0.0)};
            return step(state, std::abs(w - c), g);
        };
        bool cornered[3] = {false, false, false};
        for (int t = 0; t < 200; ++t) {
            const auto t2 = step_abs(s, [](auto& st, double l, const Vec& g) { return alg2_step(st, l, g); });
            const auto t1 = step_abs(p, [](auto& st, double l, const Vec& g) { return alg1_step(st, l, g); });
            const auto t3 = step_abs(q, [](auto& st, double l, const Vec& g) { return alg3_step(st, l, g); });
            const StepTrace* traces[3] = {&t1, &t2, &t3};
            for (int k = 0; k < 3; ++k) {
                if (traces[k]->h < 1.0) cornered[k] = true;
                if (cornered[k]) CHECK(std::abs(traces[k]->w_next[0] - c) <= 1e-8);
            }
        }
        CHECK(cornered[0]);
        CHECK(cornered[1]);
        CHECK(cornered[2]);
    }
}

TEST_CASE("wealth recursion equals the accumulated wealth sum") {
    for (auto variant : {BettingVariant::projected, BettingVariant::closed_form}) {
        std::mt19937_64 rng(variant == BettingVariant::projected ? 10 : 20);
        auto s = BettingState::fresh(3, variant);
        double sum = 0.0;
        double worst = 0.0;
        for (int round = 0; round < 10000; ++round) {
            const Vec g = pt::random_in_unit_ball(rng, 3);
            const auto t = run_variant(s, fuzz_loss(rng), g);
            for (std::size_t i = 0; i < 3; ++i) {
                sum += g[i] * (t.w[i] - t.w_next[i]) + t.h * g[i] * t.w_next[i];
            }
            const double summed = 1.0 - sum;
            worst = std::max(worst, std::abs(summed - s.wealth) / std::max(std::abs(s.wealth), std::abs(summed)));
        }
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("closed-form learner keeps beta in the half ball; projected learner obeys its step bound") {
    std::mt19937_64 rng(99);
    auto a = BettingState::fresh(2, BettingVariant::closed_form);
    auto p = BettingState::fresh(2, BettingVariant::projected);
    double sum_g_gplus = 0.0;
    double expected_inv_eta = 3.0;
    for (int round = 0; round < 20000; ++round) {
        Vec g = round % 3 == 0 ? Vec{-1.0, 0.0} : pt::random_in_unit_ball(rng, 2);
        const double loss = fuzz_loss(rng);
        alg2_step(a, loss, g);
        CHECK(norm(a.beta) <= 0.5 + 1e-12);

        const auto t = alg1_step(p, loss, g);
        const double gn = norm(g);
        sum_g_gplus += gn * t.h * gn;
        Vec step(2);
        for (std::size_t i = 0; i < 2; ++i) step[i] = t.beta_next[i] - t.beta[i];
        CHECK(norm(step) <= 3.0 * t.h * gn / (1.0 + 2.0 * sum_g_gplus) + 1e-12);
        CHECK(norm(p.beta) <= 0.5 + 1e-12);
        expected_inv_eta += 2.0 * (gn * gn - (1.0 - t.h) * (1.0 - t.h) * gn * gn);
        CHECK(std::abs(p.inv_eta - expected_inv_eta) <= 1e-12 * expected_inv_eta);
    }
}

TEST_CASE("h = 1 rounds keep g+ equal to g") {
    auto s = BettingState::fresh(2, BettingVariant::closed_form);
    const auto t = alg2_step(s, 5.0, Vec{0.3, 0.4});
    REQUIRE(t.h == 1.0);
    const auto pair = make_subgradient_pair(t.grad, t.h);
    CHECK(pair.g_plus == t.grad);
}

TEST_CASE("learner objects wrap the step functions") {
    ImplicitCoinLearner closed(2, BettingVariant::closed_form);
    ImplicitCoinLearner projected(2, BettingVariant::projected);
    CoordinateImplicitCoinLearner coordinate(2);
    CHECK(closed.name() == "implicit-coin");
    CHECK(projected.name() == "implicit-coin-proj");
    CHECK(coordinate.name() == "cw-implicit-coin");

    auto s = BettingState::fresh(2, BettingVariant::closed_form);
    std::mt19937_64 rng(1);
    std::size_t traced = 0;
    closed.set_trace_sink([&](const StepTrace& t) {
        ++traced;
        CHECK(t.round == traced);
    });
    for (int i = 0; i < 50; ++i) {
        const Vec g = pt::random_in_unit_ball(rng, 2);
        const double loss = fuzz_loss(rng);
        closed.update(loss, g, nullptr);
        alg2_step(s, loss, g);
        const auto w = closed.weights();
        CHECK(Vec(w.begin(), w.end()) == predict(s));
    }
    CHECK(traced == 50);
}
