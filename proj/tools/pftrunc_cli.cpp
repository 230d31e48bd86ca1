#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <functional>
#include <string>

#include "pftrunc/diagnostics.hpp"
#include "pftrunc/errors.hpp"
#include "pftrunc/harness.hpp"
#include "pftrunc/registry.hpp"

namespace {

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

int fail(const std::string& kind, const std::string& message, int code = 1) {
    std::cerr << "error kind=" << kind << " message=\"" << one_line(message) << "\"\n";
    return code;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

int run_command(pftrunc::ExperimentConfig config, const std::string& metadata_path) {
    const auto data = pftrunc::load_dataset(config);
    if (!pftrunc::requires_step_size(config.algorithm)) config.eta_grid.clear();
    const auto result = pftrunc::tune_and_run(config, data);

    pftrunc::emit_csv(result.records, config.out_path, config.check_bounds ? &result.diagnostics : nullptr);
    write_file(metadata_path.empty() ? config.out_path + ".meta" : metadata_path,
               [&](std::ostream& out) { pftrunc::write_metadata(out, config, result); });
    if (!config.trace_wealth_path.empty()) {
        write_file(config.trace_wealth_path, [&](std::ostream& out) { pftrunc::write_wealth_trace(out, result.traces); });
    }

    if (config.check_bounds) {
        for (const auto& [rep, report] : result.diagnostics) {
            if (!report.pass()) {
                return fail("bound_violation", report.name + " failed in repetition " + std::to_string(rep), 3);
            }
        }
    }
    return 0;
}

int figure1_command(std::size_t rounds, const std::string& out_path) {
    const auto result = pftrunc::figure1_scenario(rounds);
    auto body = [&](std::ostream& out) {
        out << "t,w,h\n";
        char buf[96];
        for (const auto& row : result.rows) {
            std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g\n", row.t, row.w, row.h);
            out << buf;
        }
    };
    if (out_path.empty()) {
        body(std::cout);
    } else {
        write_file(out_path, body);
    }
    if (!result.pass()) return fail("figure1", "trajectory overshoots or never settles on the minimizer", 3);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameter-free online learning with truncated linear models"};
    app.require_subcommand(1);

    pftrunc::ExperimentConfig config;
    std::string metadata_path;
    auto* run = app.add_subcommand("run", "Run the tuning/evaluation protocol on one dataset");
    run->add_option("--algo", config.algorithm, "Algorithm name")
        ->required()
        ->check(CLI::IsMember(pftrunc::algorithm_names()));
    run->add_option("--data", config.data_path, "Dataset path")->required();
    std::string format = "libsvm";
    std::string task = "clf";
    run->add_option("--format", format, "Dataset format")->check(CLI::IsMember({"libsvm", "csv"}));
    run->add_option("--task", task, "clf (hinge loss) or reg (absolute loss)")->check(CLI::IsMember({"clf", "reg"}));
    run->add_option("--target", config.target_column, "CSV target column (default: last column)");
    run->add_option("--epochs", config.epochs, "Passes over the training split")->check(CLI::PositiveNumber);
    run->add_option("--reps", config.repetitions, "Repetitions")->check(CLI::PositiveNumber);
    run->add_option("--grid", config.eta_grid, "Comma separated eta0 grid for tuned algorithms")->delimiter(',');
    run->add_option("--seed", config.seed, "Base seed");
    run->add_option("--jobs", config.jobs, "Parallel runs (0: hardware concurrency)");
    run->add_option("--out", config.out_path, "Output CSV")->required();
    run->add_option("--metadata", metadata_path, "Metadata file (default: <out>.meta)");
    run->add_option("--trace-wealth", config.trace_wealth_path, "Per-round wealth trace of repetition 0");
    run->add_flag("--check-bounds", config.check_bounds, "Run trace diagnostics and append them to the CSV");

    std::size_t rounds = 100;
    std::string figure_out;
    auto* figure = app.add_subcommand("figure1", "Closed-form learner on |w - 10| from w = 0");
    figure->add_option("--rounds", rounds, "Rounds")->check(CLI::PositiveNumber);
    figure->add_option("--out", figure_out, "Output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    try {
        if (run->parsed()) {
            config.format = format == "csv" ? pftrunc::DataFormat::csv : pftrunc::DataFormat::libsvm;
            config.task = task == "reg" ? pftrunc::Task::regression : pftrunc::Task::classification;
            return run_command(config, metadata_path);
        }
        return figure1_command(rounds, figure_out);
    } catch (const pftrunc::RunAborted& e) {
        std::cerr << "error kind=run_aborted round=" << e.round() << " message=\"" << one_line(e.what()) << "\"\n";
        return 1;
    } catch (const pftrunc::ParseError& e) {
        std::cerr << "error kind=parse line=" << e.line() << " message=\"" << one_line(e.what()) << "\"\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        return fail("invalid_argument", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
}
