#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nrbo/cli/study.hpp"

namespace {

template <typename T>
std::optional<T> opt_if(const CLI::Option* o, const T& v) {
    return o->count() ? std::optional<T>(v) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    namespace cli = nrbo::cli;

    CLI::App app{"Neighbor-regularized Bayesian optimization"};
    app.require_subcommand(1);

    std::string config, log, out, matrix;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::size_t stop_after = 0;

    auto* run = app.add_subcommand("run", "Run a study from a configuration file");
    run->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    auto* run_log = run->add_option("--log", log, "Trial log path (default: OUT/trials.jsonl)");
    auto* run_out = run->add_option("--out", out, "Output directory (overrides the config)");
    auto* run_seed = run->add_option("--seed", seed, "Seed (overrides the config)");
    auto* run_stop = run->add_option("--stop-after", stop_after, "Stop after this many logged trials");

    auto* resume = app.add_subcommand("resume", "Continue a study from its trial log");
    resume->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    resume->add_option("--log", log, "Trial log to replay and append to")->required()->check(CLI::ExistingFile);
    auto* res_out = resume->add_option("--out", out, "Output directory (overrides the config)");
    auto* res_seed = resume->add_option("--seed", seed, "Seed (overrides the config)");
    auto* res_stop = resume->add_option("--stop-after", stop_after, "Stop after this many logged trials");

    auto* bench = app.add_subcommand("bench", "Run a benchmark matrix");
    bench->add_option("--config", matrix, "Matrix configuration (JSON)")->required()->check(CLI::ExistingFile);
    auto* bench_out = bench->add_option("--out", out, "Output directory (overrides the config)");
    bench->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

    auto* report = app.add_subcommand("report", "Summarize a trial log or a bench output directory");
    auto* rep_log = report->add_option("--log", log, "Trial log")->check(CLI::ExistingFile);
    auto* rep_out = report->add_option("--out", out, "Study or bench output directory")->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitConfig;
    }

    if (run->parsed()) {
        cli::StudyOptions o{opt_if<std::filesystem::path>(run_log, log), opt_if<std::filesystem::path>(run_out, out),
                            opt_if(run_seed, seed), opt_if(run_stop, stop_after)};
        return cli::run_study(config, o, std::cout, std::cerr);
    }
    if (resume->parsed()) {
        cli::StudyOptions o{std::nullopt, opt_if<std::filesystem::path>(res_out, out), opt_if(res_seed, seed),
                            opt_if(res_stop, stop_after)};
        return cli::resume_study(config, log, o, std::cout, std::cerr);
    }
    if (bench->parsed()) {
        cli::BenchOptions o{opt_if<std::filesystem::path>(bench_out, out), jobs};
        return cli::bench_command(matrix, o, std::cout, std::cerr);
    }
    return cli::report_command(opt_if<std::filesystem::path>(rep_log, log), opt_if<std::filesystem::path>(rep_out, out),
                               std::cout, std::cerr);
}
