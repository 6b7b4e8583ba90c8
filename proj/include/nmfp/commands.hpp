#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmfp/problem_file.hpp"

namespace nmfp {

enum ExitCode : int { kExitPass = 0, kExitRefuted = 1, kExitInconclusive = 2, kExitInputError = 3 };

struct CommandOptions {
    std::optional<Vector> point;      ///< overrides [candidate] point
    std::optional<Vector> direction;  ///< overrides [candidate] direction
    int grid = 0;                     ///< overrides the file grid; 0 keeps it
    std::optional<std::uint64_t> seed;
    bool weak = false;
    bool sweep = false;  ///< check-kkt: all sampled critical directions; pareto: full scalarization sweep
    bool timings = false;
};

struct CommandResult {
    nlohmann::json report;
    int exit_code = kExitPass;
};

/// derivatives, check-kkt, sufficiency, duality, pareto.
const std::vector<std::string>& command_names();

/**
 * Runs one command and builds its report
 *   {command, inputs, verdicts[], diagnostics, tolerances, seed, timings}.
 * Each verdict carries status pass, fail or inconclusive; the exit code is
 * 1 if any verdict fails, else 2 if any is inconclusive, else 0. Input and
 * precondition errors give exit code 3 and an `error` member.
 */
CommandResult run_command(const std::string& command, const ProblemFile& file,
                          const CommandOptions& opts, const std::string& source = {});

/// Grid size per axis for the all-points scalarization sweep.
int default_sweep_resolution(std::size_t n);

}  // namespace nmfp
