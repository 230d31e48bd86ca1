#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pftrunc/data_io.hpp"
#include "pftrunc/diagnostics.hpp"
#include "pftrunc/losses.hpp"

namespace pftrunc {

enum class DataFormat { libsvm, csv };

/// 13 log-spaced points from 1e-4 to 1e2.
std::vector<double> default_eta_grid();

struct ExperimentConfig {
    std::string algorithm;
    std::string data_path;
    DataFormat format = DataFormat::libsvm;
    Task task = Task::classification;
    std::string target_column;  // csv only
    int epochs = 10;
    int repetitions = 3;
    std::vector<double> eta_grid = default_eta_grid();
    std::uint64_t seed = 0;
    std::string out_path;
    std::string trace_wealth_path;
    bool check_bounds = false;
    unsigned jobs = 0;  // 0: hardware concurrency

    LossKind loss_kind() const { return task == Task::classification ? LossKind::hinge : LossKind::absolute; }
};

struct RunRecord {
    std::string algorithm;
    std::optional<int> repetition;  // nullopt marks the averaged row
    int epoch = 0;
    std::optional<double> eta0;
    double train_loss = 0.0;  // progressive average over the epoch
    double val_loss = 0.0;
    double test_loss = 0.0;
    double wall_ms = 0.0;
};

/// Aborts a run when a learner rejects its input; carries the 1-based global round.
class RunAborted : public std::runtime_error {
public:
    RunAborted(std::size_t round, const std::string& what)
        : std::runtime_error("round " + std::to_string(round) + ": " + what), round_(round) {}
    std::size_t round() const noexcept { return round_; }

private:
    std::size_t round_;
};

struct RunOutput {
    std::vector<RunRecord> records;  // one per epoch
    std::size_t gradient_calls = 0;
    std::size_t learner_steps = 0;
    std::size_t train_size = 0;
    std::vector<BoundReport> diagnostics;  // filled when config.check_bounds
    std::vector<StepTrace> traces;         // filled when collect_traces
    TransformRecord transform;
};

struct RunOptions {
    bool collect_traces = false;
};

/// Splits, preprocesses, and trains one learner for config.epochs passes over
/// the training split in split order. Deterministic given (config, repetition, eta0).
RunOutput run_single(const ExperimentConfig& config, const Dataset& data, int repetition,
                     std::optional<double> eta0, const RunOptions& options = {});

struct ExperimentResult {
    std::vector<RunRecord> records;  // per-repetition rows, then averaged rows
    std::vector<std::optional<double>> chosen_eta;  // per repetition
    std::size_t tuning_runs = 0;
    std::size_t final_runs = 0;
    std::size_t gradient_calls = 0;  // final runs only
    std::vector<std::pair<int, BoundReport>> diagnostics;
    std::vector<TransformRecord> transforms;
    std::vector<StepTrace> traces;  // repetition 0 final run, when requested
};

/// Tuned algorithms: per repetition pick the grid eta0 with the lowest
/// final-epoch validation loss (ties -> smaller eta0) and rerun with it.
/// Parameter-free algorithms run once per repetition.
ExperimentResult tune_and_run(const ExperimentConfig& config, const Dataset& data);

/// Per-epoch arithmetic means over repetitions.
std::vector<RunRecord> average_over_repetitions(const std::vector<RunRecord>& records);

inline constexpr const char* kCsvHeader = "algorithm,repetition,epoch,eta0,train_loss,val_loss,test_loss,wall_ms";

/// Throws std::invalid_argument on an empty record list.
void write_csv(std::ostream& out, const std::vector<RunRecord>& records);
/// Appends a `# DIAGNOSTICS` block.
void write_diagnostics(std::ostream& out, const std::vector<std::pair<int, BoundReport>>& reports);
/// Throws std::runtime_error when the path cannot be written.
void emit_csv(const std::vector<RunRecord>& records, const std::string& path,
              const std::vector<std::pair<int, BoundReport>>* diagnostics = nullptr);

/// Reads rows written by write_csv; '#' lines are skipped.
std::vector<RunRecord> read_csv(std::istream& in);

/// Per-round `t,h,wealth,beta_norm,residual`.
void write_wealth_trace(std::ostream& out, const std::vector<StepTrace>& traces);

/// Run metadata: the eta grid, selection rule, chosen eta0 values and transforms.
void write_metadata(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result);

Dataset load_dataset(const ExperimentConfig& config);

}  // namespace pftrunc
