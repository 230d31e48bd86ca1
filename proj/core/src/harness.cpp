#include "pftrunc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <thread>

#include "pftrunc/registry.hpp"
#include "pftrunc/truncated_model.hpp"

namespace pftrunc {

std::vector<double> default_eta_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 12; ++i) grid.push_back(std::pow(10.0, -4.0 + 0.5 * i));
    return grid;
}

namespace {

std::string format_number(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double average_loss(const OnlineLearner& learner, LossKind kind, const Dataset& ds) {
    if (ds.examples.empty()) return 0.0;
    double total = 0.0;
    for (const auto& ex : ds.examples) total += eval_loss(kind, learner.weights(), ex);
    return total / static_cast<double>(ds.size());
}

// Accumulates every check that applies to the learner family.
class RunChecks {
public:
    explicit RunChecks(LearnerFamily family, std::string_view algorithm) : family_(family) {
        truncated_ = family != LearnerFamily::baseline || algorithm == "aprox" || algorithm == "iwa";
        if (family == LearnerFamily::projected_coin) bound_.emplace(BettingVariant::projected);
        if (family == LearnerFamily::closed_form_coin) bound_.emplace(BettingVariant::closed_form);
        if (family == LearnerFamily::coordinate_coin) ball_ = BetaBallCheck(BetaNorm::linf);
    }

    void observe(const StepTrace& t) {
        if (truncated_) overshoot_.observe(t);
        if (family_ == LearnerFamily::baseline) return;
        identity_.observe(t);
        ball_.observe(t);
        if (bound_) bound_->observe(t);
        if (family_ == LearnerFamily::projected_coin) {
            step_.observe(t);
            inv_eta_.observe(t);
        }
    }

    std::vector<BoundReport> reports() const {
        std::vector<BoundReport> out;
        if (truncated_) out.push_back(overshoot_.report());
        if (family_ == LearnerFamily::baseline) return out;
        out.push_back(identity_.report());
        out.push_back(ball_.report());
        if (bound_) out.push_back(bound_->report());
        if (family_ == LearnerFamily::projected_coin) {
            out.push_back(step_.report());
            out.push_back(inv_eta_.report());
        }
        return out;
    }

private:
    LearnerFamily family_;
    bool truncated_ = false;
    NoOvershootCheck overshoot_;
    WealthIdentityCheck identity_;
    BetaBallCheck ball_{BetaNorm::l2};
    std::optional<WealthLowerBoundCheck> bound_;
    BetaStepCheck step_;
    InvEtaAccumulationCheck inv_eta_;
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads; results keep index order.
template <typename T>
std::vector<T> run_indexed(std::size_t n, unsigned jobs, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out;
    out.reserve(n);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
        return out;
    }
    for (std::size_t start = 0; start < n; start += jobs) {
        std::vector<std::future<T>> batch;
        for (std::size_t i = start; i < std::min(n, start + jobs); ++i) {
            batch.push_back(std::async(std::launch::async, fn, i));
        }
        for (auto& f : batch) out.push_back(f.get());
    }
    return out;
}

unsigned resolve_jobs(unsigned jobs) {
    if (jobs != 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

RunOutput run_single(const ExperimentConfig& config, const Dataset& data, int repetition, std::optional<double> eta0,
                     const RunOptions& options) {
    if (!is_registered(config.algorithm)) throw std::invalid_argument("unknown algorithm '" + config.algorithm + "'");
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (requires_step_size(config.algorithm) && !eta0) {
        throw std::invalid_argument(config.algorithm + ": requires eta0");
    }

    RunOutput out;
    Splits splits = shuffle_split(data, {0.70, 0.15, 0.15, config.seed, static_cast<std::uint32_t>(repetition)});
    double threshold = 0.0;
    const bool binarize = config.task == Task::classification && !has_binary_labels(data);
    if (binarize) threshold = binarize_by_median(splits);
    out.transform = standardize_then_unit_normalize(splits);
    out.transform.seed = config.seed;
    out.transform.repetition = static_cast<std::uint32_t>(repetition);
    out.transform.binarized = binarize;
    out.transform.binarize_threshold = threshold;
    out.train_size = splits.train.size();

    const LossKind kind = config.loss_kind();
    auto learner = make_learner(config.algorithm, data.n_features, kind, eta0);

    std::optional<RunChecks> checks;
    if (config.check_bounds) checks.emplace(family_of(config.algorithm), config.algorithm);
    if (checks || options.collect_traces) {
        learner->set_trace_sink([&](const StepTrace& t) {
            if (checks) checks->observe(t);
            if (options.collect_traces) out.traces.push_back(t);
        });
    }

    std::size_t global_round = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        double train_total = 0.0;
        for (const auto& ex : splits.train.examples) {
            ++global_round;
            LossEval eval = eval_grad(kind, learner->weights(), ex);
            ++out.gradient_calls;
            train_total += eval.loss;
            try {
                learner->update(eval.loss, eval.grad, &ex);
            } catch (const std::invalid_argument& e) {
                throw RunAborted(global_round, e.what());
            }
            ++out.learner_steps;
        }
        RunRecord rec;
        rec.algorithm = config.algorithm;
        rec.repetition = repetition;
        rec.epoch = epoch;
        rec.eta0 = eta0;
        rec.train_loss = splits.train.examples.empty() ? 0.0 : train_total / static_cast<double>(splits.train.size());
        rec.val_loss = average_loss(*learner, kind, splits.val);
        rec.test_loss = average_loss(*learner, kind, splits.test);
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        out.records.push_back(rec);
    }
    if (checks) out.diagnostics = checks->reports();
    return out;
}

ExperimentResult tune_and_run(const ExperimentConfig& config, const Dataset& data) {
    if (!is_registered(config.algorithm)) throw std::invalid_argument("unknown algorithm '" + config.algorithm + "'");
    if (config.repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    const bool tuned = requires_step_size(config.algorithm);
    std::vector<double> grid = config.eta_grid;
    std::sort(grid.begin(), grid.end());
    if (tuned && grid.empty()) throw std::invalid_argument(config.algorithm + ": empty eta0 grid");
    if (tuned && !(grid.front() > 0.0)) throw std::invalid_argument("eta0 grid values must be positive");

    const unsigned jobs = resolve_jobs(config.jobs);
    const auto reps = static_cast<std::size_t>(config.repetitions);
    ExperimentResult result;
    result.chosen_eta.assign(reps, std::nullopt);

    if (tuned) {
        ExperimentConfig tuning = config;
        tuning.check_bounds = false;
        const std::size_t n_tasks = reps * grid.size();
        const auto val_losses = run_indexed<double>(n_tasks, jobs, [&](std::size_t i) {
            const int rep = static_cast<int>(i / grid.size());
            return run_single(tuning, data, rep, grid[i % grid.size()]).records.back().val_loss;
        });
        result.tuning_runs = n_tasks;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < grid.size(); ++j) {
                if (val_losses[rep * grid.size() + j] < val_losses[rep * grid.size() + best]) best = j;
            }
            result.chosen_eta[rep] = grid[best];
        }
    }

    const bool want_traces = !config.trace_wealth_path.empty();
    auto finals = run_indexed<RunOutput>(reps, jobs, [&](std::size_t rep) {
        RunOptions opts;
        opts.collect_traces = want_traces && rep == 0;
        return run_single(config, data, static_cast<int>(rep), result.chosen_eta[rep], opts);
    });
    result.final_runs = reps;

    for (std::size_t rep = 0; rep < reps; ++rep) {
        auto& run = finals[rep];
        result.records.insert(result.records.end(), run.records.begin(), run.records.end());
        result.gradient_calls += run.gradient_calls;
        for (auto& r : run.diagnostics) result.diagnostics.emplace_back(static_cast<int>(rep), std::move(r));
        result.transforms.push_back(std::move(run.transform));
        if (rep == 0) result.traces = std::move(run.traces);
    }
    const auto means = average_over_repetitions(result.records);
    result.records.insert(result.records.end(), means.begin(), means.end());
    return result;
}

std::vector<RunRecord> average_over_repetitions(const std::vector<RunRecord>& records) {
    std::vector<RunRecord> means;
    std::vector<int> counts;
    for (const auto& r : records) {
        if (!r.repetition) continue;
        auto it = std::find_if(means.begin(), means.end(), [&](const RunRecord& m) { return m.epoch == r.epoch; });
        if (it == means.end()) {
            RunRecord m = r;
            m.repetition.reset();
            means.push_back(m);
            counts.push_back(1);
            continue;
        }
        auto& m = *it;
        auto& c = counts[static_cast<std::size_t>(it - means.begin())];
        m.train_loss += r.train_loss;
        m.val_loss += r.val_loss;
        m.test_loss += r.test_loss;
        m.wall_ms += r.wall_ms;
        if (m.eta0 != r.eta0) m.eta0.reset();
        ++c;
    }
    for (std::size_t i = 0; i < means.size(); ++i) {
        const double n = counts[i];
        means[i].train_loss /= n;
        means[i].val_loss /= n;
        means[i].test_loss /= n;
        means[i].wall_ms /= n;
    }
    std::sort(means.begin(), means.end(), [](const RunRecord& a, const RunRecord& b) { return a.epoch < b.epoch; });
    return means;
}

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("emit_csv: no records");
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.algorithm << ',' << (r.repetition ? std::to_string(*r.repetition) : "mean") << ',' << r.epoch << ','
            << (r.eta0 ? format_number(*r.eta0) : "none") << ',' << format_number(r.train_loss) << ','
            << format_number(r.val_loss) << ',' << format_number(r.test_loss) << ',' << format_number(r.wall_ms)
            << '\n';
    }
}

void write_diagnostics(std::ostream& out, const std::vector<std::pair<int, BoundReport>>& reports) {
    out << "# DIAGNOSTICS\n";
    for (const auto& [rep, r] : reports) {
        out << "# check=" << r.name << " repetition=" << rep << " rounds=" << r.rounds
            << " worst_slack=" << format_number(r.worst_slack) << " tolerance=" << format_number(r.tolerance)
            << " first_violation=" << (r.first_violation ? std::to_string(*r.first_violation) : "none")
            << " status=" << (r.pass() ? "pass" : "fail") << '\n';
    }
}

void emit_csv(const std::vector<RunRecord>& records, const std::string& path,
              const std::vector<std::pair<int, BoundReport>>* diagnostics) {
    if (records.empty()) throw std::invalid_argument("emit_csv: no records");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(out, records);
    if (diagnostics) write_diagnostics(out, *diagnostics);
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<RunRecord> read_csv(std::istream& in) {
    std::vector<RunRecord> out;
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 8) throw ParseError(line_no, "expected 8 fields");
        try {
            RunRecord r;
            r.algorithm = cells[0];
            if (cells[1] != "mean") r.repetition = std::stoi(cells[1]);
            r.epoch = std::stoi(cells[2]);
            if (cells[3] != "none") r.eta0 = std::stod(cells[3]);
            r.train_loss = std::stod(cells[4]);
            r.val_loss = std::stod(cells[5]);
            r.test_loss = std::stod(cells[6]);
            r.wall_ms = std::stod(cells[7]);
            out.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw ParseError(line_no, "malformed number");
        }
    }
    return out;
}

void write_wealth_trace(std::ostream& out, const std::vector<StepTrace>& traces) {
    out << "t,h,wealth,beta_norm,residual\n";
    for (const auto& t : traces) {
        out << t.round << ',' << format_number(t.h) << ',' << format_number(t.wealth_after) << ','
            << format_number(t.beta_next.empty() ? 0.0 : norm(t.beta_next)) << ','
            << format_number(corner_residual(t.loss, t.grad, t.w, t.w_next)) << '\n';
    }
}

void write_metadata(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result) {
    out << "algorithm=" << config.algorithm << '\n'
        << "data=" << config.data_path << '\n'
        << "task=" << to_string(config.task) << '\n'
        << "loss=" << to_string(config.loss_kind()) << '\n'
        << "epochs=" << config.epochs << '\n'
        << "repetitions=" << config.repetitions << '\n'
        << "seed=" << config.seed << '\n'
        << "split=0.70/0.15/0.15\n"
        << "epoch_order=split-order\n"
        << "train_loss=progressive-average\n";
    if (requires_step_size(config.algorithm)) {
        out << "eta_grid=";
        for (std::size_t i = 0; i < config.eta_grid.size(); ++i) {
            out << (i ? "," : "") << format_number(config.eta_grid[i]);
        }
        out << "\nselection=final-epoch-validation-loss\ntie_break=smaller-eta0\n";
    } else {
        out << "eta_grid=none\n";
    }
    out << "classification_binarization=median-of-training-targets (only when labels are not already +-1)\n";
    out << "tuning_runs=" << result.tuning_runs << '\n' << "final_runs=" << result.final_runs << '\n';
    for (std::size_t rep = 0; rep < result.chosen_eta.size(); ++rep) {
        out << "chosen_eta0[" << rep << "]="
            << (result.chosen_eta[rep] ? format_number(*result.chosen_eta[rep]) : "none") << '\n';
    }
    for (std::size_t rep = 0; rep < result.transforms.size(); ++rep) {
        out << "[transform repetition=" << rep << "]\n";
        result.transforms[rep].write(out);
    }
}

Dataset load_dataset(const ExperimentConfig& config) {
    std::ifstream in(config.data_path);
    if (!in) throw std::runtime_error("cannot open '" + config.data_path + "'");
    std::string name = config.data_path;
    if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);

    if (config.format == DataFormat::libsvm) return parse_libsvm(in, config.task, name);

    std::string target = config.target_column;
    if (target.empty()) {
        std::string header;
        std::getline(in, header);
        const auto comma = header.find_last_of(',');
        target = comma == std::string::npos ? header : header.substr(comma + 1);
        while (!target.empty() && (target.back() == '\r' || target.back() == ' ')) target.pop_back();
        in.clear();
        in.seekg(0);
    }
    return parse_csv(in, target, config.task, name);
}

}  // namespace pftrunc
