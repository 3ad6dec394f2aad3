#pragma once
/// Subcommand pipelines behind the command-line runner. Each writes its artifacts into an
/// output directory and returns a summary with pass/fail checks.

#include "magbl/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace magbl {

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    std::string relation = "<=";  // value <= tolerance, or value < tolerance
    bool pass = false;
};

struct RunSummary {
    std::string subcommand;
    bool pass = true;
    std::vector<Check> checks;
    std::vector<std::string> artifacts;  // file names relative to the output directory
    std::string failed_stage;
    std::string to_json() const;
};

/// Computation failed inside a named stage.
class StageError : public ComputeError {
public:
    StageError(std::string stage, const std::string& what)
        : ComputeError(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

const std::vector<std::string>& subcommand_names();

/// Runs one subcommand. The configuration must already be validated for it.
/// Writes summary.json last. Compute failures are rethrown as StageError.
RunSummary run_subcommand(const std::string& subcommand, const ExperimentConfig& cfg,
                          const std::filesystem::path& out);

}  // namespace magbl
