#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "pftrunc/harness.hpp"
#include "pftrunc/registry.hpp"
#include "support.hpp"

using namespace pftrunc;

namespace {

Dataset synthetic(Task task, std::size_t n, std::uint64_t seed, std::size_t dim = 5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset ds;
    ds.task = task;
    ds.n_features = dim;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledExample ex;
        double score = 0.0;
        for (std::uint32_t j = 0; j < dim; ++j) {
            const double v = normal(rng);
            ex.features.index.push_back(j);
            ex.features.value.push_back(v);
            score += (j % 2 ? -1.0 : 1.0) * v;
        }
        ex.target = task == Task::classification ? (score + 0.3 * normal(rng) > 0 ? 1.0 : -1.0) : score;
        ds.examples.push_back(ex);
    }
    return ds;
}

ExperimentConfig config_for(const std::string& algo, Task task) {
    ExperimentConfig c;
    c.algorithm = algo;
    c.task = task;
    c.epochs = 2;
    c.repetitions = 2;
    c.seed = 17;
    c.jobs = 1;
    c.eta_grid = {0.01, 0.1, 1.0};
    return c;
}

}  // namespace

TEST_CASE("one epoch steps the learner once per training example") {
    const auto ds = synthetic(Task::classification, 200, 1);
    auto c = config_for("implicit-coin", Task::classification);
    c.epochs = 1;
    const auto out = run_single(c, ds, 0, std::nullopt);
    CHECK(out.train_size == 140);
    CHECK(out.learner_steps == 140);
    CHECK(out.gradient_calls == 140);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0].epoch == 1);
}

TEST_CASE("gradient calls equal epochs times training size for every algorithm") {
    const auto ds = synthetic(Task::regression, 150, 2);
    for (const auto& name : algorithm_names()) {
        auto c = config_for(name, Task::regression);
        c.epochs = 3;
        const auto eta = requires_step_size(name) ? std::optional<double>(0.1) : std::nullopt;
        const auto out = run_single(c, ds, 1, eta);
        CHECK(out.gradient_calls == 3 * out.train_size);
        CHECK(out.records.size() == 3);
        for (const auto& r : out.records) {
            CHECK(std::isfinite(r.train_loss));
            CHECK(std::isfinite(r.val_loss));
            CHECK(std::isfinite(r.test_loss));
        }
    }
}

TEST_CASE("runs are deterministic apart from wall time") {
    const auto ds = synthetic(Task::classification, 120, 3);
    for (const char* name : {"cw-implicit-coin", "sgd"}) {
        auto c = config_for(name, Task::classification);
        const auto a = tune_and_run(c, ds);
        c.jobs = 3;
        const auto b = tune_and_run(c, ds);
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].train_loss == b.records[i].train_loss);
            CHECK(a.records[i].val_loss == b.records[i].val_loss);
            CHECK(a.records[i].test_loss == b.records[i].test_loss);
            CHECK(a.records[i].eta0 == b.records[i].eta0);
            CHECK(a.records[i].repetition == b.records[i].repetition);
        }
        CHECK(a.chosen_eta == b.chosen_eta);
    }
}

TEST_CASE("bound checks hold on a hinge task") {
    const auto ds = synthetic(Task::classification, 300, 4);
    auto c = config_for("implicit-coin", Task::classification);
    c.check_bounds = true;
    const auto out = run_single(c, ds, 0, std::nullopt);
    REQUIRE_FALSE(out.diagnostics.empty());
    bool saw_overshoot_check = false;
    for (const auto& r : out.diagnostics) {
        INFO(r.name, " worst slack ", r.worst_slack);
        CHECK(r.pass());
        CHECK(r.rounds == out.gradient_calls);
        if (r.name == "no_overshoot") saw_overshoot_check = true;
    }
    CHECK(saw_overshoot_check);
}

TEST_CASE("tuning run counts") {
    const auto ds = synthetic(Task::regression, 100, 5);
    auto c = config_for("sgd", Task::regression);
    c.repetitions = 3;
    c.epochs = 1;
    c.eta_grid = {1e-3, 1e-2, 1e-1, 1.0, 2.0, 5.0, 10.0};
    const auto tuned = tune_and_run(c, ds);
    CHECK(tuned.tuning_runs == 21);
    CHECK(tuned.final_runs == 3);
    CHECK(tuned.records.size() == 3 + 1);
    for (const auto& eta : tuned.chosen_eta) REQUIRE(eta.has_value());

    c.algorithm = "coin";
    c.eta_grid.clear();
    const auto free = tune_and_run(c, ds);
    CHECK(free.tuning_runs == 0);
    CHECK(free.final_runs == 3);
    for (const auto& r : free.records) CHECK_FALSE(r.eta0.has_value());

    c.algorithm = "aprox";
    CHECK_THROWS_AS(tune_and_run(c, ds), std::invalid_argument);
}

TEST_CASE("ties in validation loss go to the smaller step size") {
    Dataset ds;
    ds.task = Task::regression;
    ds.n_features = 2;
    for (int i = 0; i < 50; ++i) {
        LabeledExample ex;
        ex.features = {{0, 1}, {3.0, -1.0}};
        ex.target = static_cast<double>(i % 7);
        ds.examples.push_back(ex);
    }
    auto c = config_for("sgd", Task::regression);
    c.eta_grid = {0.5, 0.05, 5.0};
    const auto result = tune_and_run(c, ds);
    for (const auto& eta : result.chosen_eta) CHECK(eta == 0.05);
}

TEST_CASE("the selected step size minimizes final-epoch validation loss") {
    const auto ds = synthetic(Task::regression, 120, 6);
    auto c = config_for("aprox", Task::regression);
    c.repetitions = 1;
    const auto result = tune_and_run(c, ds);
    double best = std::numeric_limits<double>::infinity();
    double best_eta = 0.0;
    for (double eta : c.eta_grid) {
        const double v = run_single(c, ds, 0, eta).records.back().val_loss;
        if (v < best) {
            best = v;
            best_eta = eta;
        }
    }
    CHECK(result.chosen_eta[0] == best_eta);
}

TEST_CASE("learner failures abort the run with the round index") {
    auto ds = synthetic(Task::regression, 60, 7);
    ds.examples[0].features.value[0] = std::numeric_limits<double>::quiet_NaN();
    auto c = config_for("implicit-coin", Task::regression);
    try {
        run_single(c, ds, 0, std::nullopt);
        FAIL("expected RunAborted");
    } catch (const RunAborted& e) {
        CHECK(e.round() == 1);
        CHECK(std::string(e.what()).find("round 1") == 0);
    }
    c.algorithm = "nope";
    CHECK_THROWS_AS(run_single(c, ds, 0, std::nullopt), std::invalid_argument);
}

TEST_CASE("mean rows are arithmetic means of the repetition rows") {
    std::vector<RunRecord> rows;
    for (int rep = 0; rep < 3; ++rep) {
        for (int epoch = 1; epoch <= 2; ++epoch) {
            rows.push_back({"sgd", rep, epoch, 0.1 * (rep + 1), 1.0 * rep + epoch, 2.0 * rep, 3.0 + rep, 10.0});
        }
    }
    const auto means = average_over_repetitions(rows);
    REQUIRE(means.size() == 2);
    CHECK_FALSE(means[0].repetition.has_value());
    CHECK(means[0].epoch == 1);
    CHECK(means[0].train_loss == doctest::Approx(2.0));
    CHECK(means[1].train_loss == doctest::Approx(3.0));
    CHECK(means[0].val_loss == doctest::Approx(2.0));
    CHECK(means[0].test_loss == doctest::Approx(4.0));
    CHECK_FALSE(means[0].eta0.has_value());

    for (auto& r : rows) r.eta0 = 0.5;
    CHECK(average_over_repetitions(rows)[0].eta0 == 0.5);
}

TEST_CASE("csv output") {
    std::vector<RunRecord> rows{{"implicit-coin", 0, 1, std::nullopt, 0.123456789012345, 1.0 / 3.0, 2e-7, 1.5},
                                {"implicit-coin", std::nullopt, 1, std::nullopt, 0.25, 0.5, 0.75, 2.0}};
    std::ostringstream out;
    write_csv(out, rows);
    const std::string text = out.str();
    CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    CHECK(text.find("implicit-coin,0,1,none,0.123456789,0.3333333333,2e-07,1.5\n") != std::string::npos);
    CHECK(text.find("implicit-coin,mean,1,none,") != std::string::npos);

    std::istringstream in(text + "# DIAGNOSTICS\n# check=x\n");
    const auto back = read_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(std::abs(back[0].train_loss - rows[0].train_loss) <= 1e-9 * rows[0].train_loss);
    CHECK(std::abs(back[0].val_loss - rows[0].val_loss) <= 1e-9);
    CHECK(back[0].repetition == 0);
    CHECK_FALSE(back[1].repetition.has_value());

    std::ostringstream empty;
    CHECK_THROWS_AS(write_csv(empty, {}), std::invalid_argument);
    CHECK_THROWS_AS(emit_csv({}, "/tmp/unused.csv"), std::invalid_argument);
    CHECK_THROWS_AS(emit_csv(rows, "/nonexistent-dir/x/out.csv"), std::runtime_error);
}

TEST_CASE("csv round trip of a real run") {
    const auto ds = synthetic(Task::classification, 100, 8);
    auto c = config_for("sgd", Task::classification);
    const auto result = tune_and_run(c, ds);
    std::ostringstream out;
    write_csv(out, result.records);
    std::istringstream in(out.str());
    const auto back = read_csv(in);
    REQUIRE(back.size() == result.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].algorithm == result.records[i].algorithm);
        CHECK(back[i].epoch == result.records[i].epoch);
        CHECK(back[i].repetition == result.records[i].repetition);
        CHECK(std::abs(back[i].test_loss - result.records[i].test_loss) <=
              1e-9 * std::max(1.0, result.records[i].test_loss));
        if (result.records[i].eta0) CHECK(std::abs(*back[i].eta0 - *result.records[i].eta0) <= 1e-9 * *back[i].eta0);
    }
}

TEST_CASE("wealth trace and metadata") {
    const auto ds = synthetic(Task::classification, 100, 9);
    auto c = config_for("implicit-coin", Task::classification);
    c.trace_wealth_path = "unused";
    const auto result = tune_and_run(c, ds);
    CHECK(result.traces.size() == 2 * 70);
    std::ostringstream trace;
    write_wealth_trace(trace, result.traces);
    CHECK(trace.str().rfind("t,h,wealth,beta_norm,residual\n1,", 0) == 0);

    std::ostringstream meta;
    write_metadata(meta, c, result);
    CHECK(meta.str().find("selection") == std::string::npos);
    CHECK(meta.str().find("[transform repetition=1]") != std::string::npos);

    c.algorithm = "sgd";
    std::ostringstream tuned_meta;
    write_metadata(tuned_meta, c, tune_and_run(c, ds));
    CHECK(tuned_meta.str().find("selection=final-epoch-validation-loss") != std::string::npos);
    CHECK(tuned_meta.str().find("chosen_eta0[1]=") != std::string::npos);
}

TEST_CASE("default grid") {
    const auto grid = default_eta_grid();
    REQUIRE(grid.size() == 13);
    CHECK(grid.front() == doctest::Approx(1e-4));
    CHECK(grid.back() == doctest::Approx(1e2));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] / grid[i - 1] == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("loading datasets from files") {
    const std::string path = "/tmp/pftrunc_harness_test.csv";
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("a,kind,y\n1,x,0.5\n2,y,1.5\n3,x,2.5\n", f);
        std::fclose(f);
    }
    ExperimentConfig c;
    c.data_path = path;
    c.format = DataFormat::csv;
    c.task = Task::regression;
    const auto ds = load_dataset(c);
    CHECK(ds.size() == 3);
    CHECK(ds.n_features == 3);
    CHECK(ds.examples[2].target == 2.5);
    std::remove(path.c_str());

    c.data_path = "/nonexistent/file.svm";
    CHECK_THROWS_AS(load_dataset(c), std::runtime_error);
}
