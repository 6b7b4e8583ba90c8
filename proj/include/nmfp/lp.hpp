#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmfp/expr.hpp"

namespace nmfp {

enum class LpStatus { optimal, infeasible, unbounded };
std::string to_string(LpStatus s);

/// maximize c'x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  x_j >= 0 unless free.
struct LinearProgram {
    std::size_t num_vars = 0;
    Vector objective;
    std::vector<Vector> eq_rows;
    Vector eq_rhs;
    std::vector<Vector> le_rows;
    Vector le_rhs;
    std::vector<bool> free;  ///< empty means all variables nonnegative

    void add_eq(Vector row, double rhs);
    void add_le(Vector row, double rhs);
};

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    Vector x;
    double objective = 0.0;
    std::size_t pivots = 0;
};

/// Dense two-phase primal simplex with Bland's rule (deterministic,
/// cycle-free). Throws std::runtime_error on iteration overflow.
LpSolution solve_lp(const LinearProgram& lp);

struct LpFeasibility {
    LpStatus status = LpStatus::infeasible;
    Vector point;
    /// max min_{i in strict group} x_i; -inf when the constraints are infeasible.
    double margin = 0.0;
    bool strictly_feasible = false;
};

inline constexpr double kStrictTol = 1e-9;

/**
 * Maximize delta subject to the equalities and inequalities of `lp`
 * (its objective is ignored), x_i >= delta for i in `strict`, and
 * sum_{i in strict} x_i = 1.
 */
LpFeasibility lp_feasibility(const LinearProgram& lp, const std::vector<std::size_t>& strict,
                             double strict_tol = kStrictTol);

}  // namespace nmfp
