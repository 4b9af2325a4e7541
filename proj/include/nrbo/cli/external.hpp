#ifndef NRBO_CLI_EXTERNAL_HPP
#define NRBO_CLI_EXTERNAL_HPP

#include <chrono>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace nrbo::cli {

enum class EvalErrorKind { spawn, timeout, exit_status, unparseable, non_finite };

std::string_view to_string(EvalErrorKind k);

class EvalError : public std::runtime_error {
public:
    EvalError(EvalErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    EvalErrorKind kind() const { return kind_; }

private:
    EvalErrorKind kind_;
};

/// Runs command, writes params as one JSON line on its stdin, and returns the
/// number found at objective_key (dot-separated path) in the last JSON object
/// line of its stdout. A non-empty working_dir becomes the child's cwd.
double evaluate_external(const std::vector<std::string>& command, const nlohmann::json& params,
                         std::chrono::duration<double> timeout, std::string_view objective_key = "objective",
                         const std::filesystem::path& working_dir = {});

}  // namespace nrbo::cli

#endif  // NRBO_CLI_EXTERNAL_HPP
