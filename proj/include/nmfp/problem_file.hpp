#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "nmfp/deriv.hpp"
#include "nmfp/duality.hpp"
#include "nmfp/kkt.hpp"
#include "nmfp/problem.hpp"

namespace nmfp {

/// Malformed or inconsistent problem file. `line` is 1-based, 0 if unknown.
class InputError : public std::runtime_error {
public:
    InputError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/**
 * Problem description read from a flat sectioned text file:
 *
 *   [problem]     name, dimension, lower, upper, f, F, g, h, grid
 *   [candidate]   point, direction
 *   [multipliers] lambda, mu, nu
 *   [dual]        u, lambda, mu, nu
 *   [estimator]   t0, gamma, levels, ball_samples, phase_samples,
 *                 oscillation_threshold, seed, exact_bypass
 *
 * Values are numbers, true/false, "quoted strings" or [arrays] of either,
 * and arrays may span lines. `#` starts a comment.
 */
struct ProblemFile {
    std::string name;
    FractionalProblem problem;
    int grid = 0;  ///< 0: default_grid_resolution
    std::optional<Vector> point;
    std::optional<Vector> direction;
    std::optional<MultiplierVector> multipliers;
    std::optional<DualPoint> dual;
    EstimatorConfig estimator;
};

ProblemFile parse_problem_file(std::string_view text);
ProblemFile load_problem_file(const std::filesystem::path& path);

}  // namespace nmfp
