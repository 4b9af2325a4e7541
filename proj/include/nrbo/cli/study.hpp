#ifndef NRBO_CLI_STUDY_HPP
#define NRBO_CLI_STUDY_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nrbo/cli/config.hpp"

namespace nrbo::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitProtocol = 3,
    kExitNumerical = 4,
};

/// One line of the trial log.
struct TrialLogRecord {
    int trial = 0;
    int iteration = 0;
    Point point;
    nlohmann::json params = nlohmann::json::object();
    double objective = 0.0;  // as reported by the black box
    double value = 0.0;      // engine value, lower is better
    std::string timestamp;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    std::string status = "ok";
    std::string error_kind;
    std::string error;
};

nlohmann::json to_json(const TrialLogRecord& r);
TrialLogRecord trial_record_from_json(const nlohmann::json& j);
std::vector<TrialLogRecord> read_trial_log(const std::filesystem::path& path);

struct StudyOptions {
    std::optional<std::filesystem::path> log_path;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    /// Stop (as if interrupted) once this many trial records exist in the log.
    std::optional<std::size_t> stop_after;
};

int run_study(const std::filesystem::path& config_path, const StudyOptions& opts, std::ostream& out,
              std::ostream& err);

int resume_study(const std::filesystem::path& config_path, const std::filesystem::path& log_path,
                 const StudyOptions& opts, std::ostream& out, std::ostream& err);

struct BenchOptions {
    std::optional<std::filesystem::path> out_dir;
    std::size_t jobs = 1;
};

int bench_command(const std::filesystem::path& matrix_path, const BenchOptions& opts, std::ostream& out,
                  std::ostream& err);

/// Prints a convergence table for a trial log, or the score table of a bench output directory.
int report_command(const std::optional<std::filesystem::path>& log_path,
                   const std::optional<std::filesystem::path>& out_dir, std::ostream& out, std::ostream& err);

/// Robustness table rows: mean RMSEs over seeds per noise level.
struct RobustnessRow {
    double noise_level = 0.0;
    double rmse_plain = 0.0;
    double rmse_regularized = 0.0;
    std::size_t regularized_wins = 0;
    std::size_t seeds = 0;
};

std::vector<RobustnessRow> robustness_table(const RobustnessConfig& cfg, const FitOptions& fit);
void write_robustness_csv(std::ostream& out, const std::vector<RobustnessRow>& rows);

nlohmann::json to_json(const RunRecord& r);
nlohmann::json to_json(const ScoreSummary& s);

}  // namespace nrbo::cli

#endif  // NRBO_CLI_STUDY_HPP
