#ifndef NRBO_CLI_CONFIG_HPP
#define NRBO_CLI_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nrbo/bench.hpp"
#include "nrbo/engine.hpp"

namespace nrbo::cli {

/// Invalid configuration; carries one diagnostic per offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> diagnostics);
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

enum class Direction { minimize, maximize };

struct BuiltinObjective {
    std::string name;
    double noise = 0.0;
};

struct ExternalObjective {
    std::vector<std::string> command;
    std::string objective_key = "objective";
    double timeout_seconds = 0.0;
    /// Directory the command runs in; the config file's directory by default.
    std::filesystem::path working_dir;
};

struct RunConfig {
    std::string study;
    OptimizerConfig optimizer;
    Direction direction = Direction::minimize;
    std::optional<BuiltinObjective> builtin;
    std::optional<ExternalObjective> external;
    std::filesystem::path output_dir;

    /// Engine value for a user-facing objective (negated when maximizing).
    double to_engine(double objective) const { return direction == Direction::maximize ? -objective : objective; }
    double from_engine(double value) const { return direction == Direction::maximize ? -value : value; }
};

/// Parses and validates a run configuration. Relative output directories are
/// resolved against base_dir.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

struct RobustnessConfig {
    std::vector<double> noise_levels;
    int n_train = 60;
    double radius = 0.1;
    std::vector<std::uint64_t> seeds;
};

struct MatrixConfig {
    std::vector<SyntheticObjective> objectives;
    std::vector<Variant> variants;
    std::vector<std::uint64_t> seeds;
    OptimizerConfig optimizer;
    std::optional<RobustnessConfig> robustness;
    std::filesystem::path output_dir;
};

MatrixConfig parse_matrix_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
MatrixConfig load_matrix_config(const std::filesystem::path& path);

}  // namespace nrbo::cli

#endif  // NRBO_CLI_CONFIG_HPP
