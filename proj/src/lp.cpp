#include "nmfp/lp.hpp"

#include <cmath>
#include <limits>

namespace nmfp {

std::string to_string(LpStatus s)
{
    switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    }
    return "?";
}

void LinearProgram::add_eq(Vector row, double rhs)
{
    eq_rows.push_back(std::move(row));
    eq_rhs.push_back(rhs);
}

void LinearProgram::add_le(Vector row, double rhs)
{
    le_rows.push_back(std::move(row));
    le_rhs.push_back(rhs);
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;
constexpr std::size_t kMaxPivots = 100000;

struct Tableau {
    std::size_t rows = 0;
    std::size_t cols = 0;  // structural + slack + artificial
    std::vector<Vector> a; // rows x (cols + 1); last entry is the rhs
    Vector cost;           // reduced costs, size cols
    double value = 0.0;    // objective value of the current basis
    std::vector<std::size_t> basis;
    std::size_t pivots = 0;

    void pivot(std::size_t r, std::size_t c)
    {
        Vector& pr = a[r];
        const double p = pr[c];
        for (double& x : pr) x /= p;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            const double f = a[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols; ++j) a[i][j] -= f * pr[j];
            a[i][c] = 0.0;
        }
        const double f = cost[c];
        if (f != 0.0) {
            for (std::size_t j = 0; j < cols; ++j) cost[j] -= f * pr[j];
            value += f * pr[cols];
            cost[c] = 0.0;
        }
        basis[r] = c;
        if (++pivots > kMaxPivots) throw std::runtime_error("LP iteration limit exceeded");
    }

    // Maximizes; returns false when unbounded.
    bool run(std::size_t allowed_cols)
    {
        for (;;) {
            std::size_t enter = allowed_cols;
            for (std::size_t j = 0; j < allowed_cols; ++j)
                if (cost[j] > kCostTol) {
                    enter = j;
                    break;
                }
            if (enter == allowed_cols) return true;
            std::size_t leave = rows;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows; ++i) {
                if (a[i][enter] <= kPivotTol) continue;
                double ratio = a[i][cols] / a[i][enter];
                if (ratio < best - 1e-15 ||
                    (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave == rows) return false;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp)
{
    const std::size_t nv = lp.num_vars;
    if (lp.objective.size() != nv) throw std::invalid_argument("LP objective size mismatch");
    for (const auto& r : lp.eq_rows)
        if (r.size() != nv) throw std::invalid_argument("LP equality row size mismatch");
    for (const auto& r : lp.le_rows)
        if (r.size() != nv) throw std::invalid_argument("LP inequality row size mismatch");
    auto is_free = [&](std::size_t j) { return !lp.free.empty() && lp.free[j]; };

    // Column layout: structural (free split in two), slacks, artificials.
    std::vector<std::size_t> pos_col(nv), neg_col(nv, SIZE_MAX);
    std::size_t ncol = 0;
    for (std::size_t j = 0; j < nv; ++j) {
        pos_col[j] = ncol++;
        if (is_free(j)) neg_col[j] = ncol++;
    }
    const std::size_t n_struct = ncol;
    const std::size_t neq = lp.eq_rows.size(), nle = lp.le_rows.size();
    const std::size_t rows = neq + nle;
    const std::size_t n_real = n_struct + nle;
    const std::size_t cols = n_real + rows;

    Tableau T;
    T.rows = rows;
    T.cols = cols;
    T.a.assign(rows, Vector(cols + 1, 0.0));
    T.basis.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const Vector& src = i < neq ? lp.eq_rows[i] : lp.le_rows[i - neq];
        double rhs = i < neq ? lp.eq_rhs[i] : lp.le_rhs[i - neq];
        Vector& row = T.a[i];
        for (std::size_t j = 0; j < nv; ++j) {
            row[pos_col[j]] = src[j];
            if (neg_col[j] != SIZE_MAX) row[neg_col[j]] = -src[j];
        }
        if (i >= neq) row[n_struct + (i - neq)] = 1.0;
        row[cols] = rhs;
        if (rhs < 0.0)
            for (std::size_t j = 0; j <= cols; ++j) row[j] = -row[j];
        row[n_real + i] = 1.0;
        T.basis[i] = n_real + i;
    }

    // Phase 1: maximize -sum(artificials).
    T.cost.assign(cols, 0.0);
    T.value = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < n_real; ++j) T.cost[j] += T.a[i][j];
        T.value -= T.a[i][cols];
    }
    T.run(n_real);

    LpSolution sol;
    double scale = 1.0;
    for (std::size_t i = 0; i < rows; ++i) scale = std::max(scale, std::abs(T.a[i][cols]));
    if (T.value < -1e-9 * scale) {
        sol.status = LpStatus::infeasible;
        sol.pivots = T.pivots;
        return sol;
    }
    for (std::size_t i = 0; i < rows; ++i) {
        if (T.basis[i] < n_real) continue;
        for (std::size_t j = 0; j < n_real; ++j)
            if (std::abs(T.a[i][j]) > 1e-9) {
                T.pivot(i, j);
                break;
            }
    }

    // Phase 2 with the true objective.
    Vector c(cols, 0.0);
    for (std::size_t j = 0; j < nv; ++j) {
        c[pos_col[j]] = lp.objective[j];
        if (neg_col[j] != SIZE_MAX) c[neg_col[j]] = -lp.objective[j];
    }
    T.cost = c;
    T.value = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const double cb = c[T.basis[i]];
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) T.cost[j] -= cb * T.a[i][j];
        T.value += cb * T.a[i][cols];
    }
    for (std::size_t i = 0; i < rows; ++i) T.cost[T.basis[i]] = 0.0;
    bool bounded = T.run(n_real);

    sol.pivots = T.pivots;
    if (!bounded) {
        sol.status = LpStatus::unbounded;
        return sol;
    }
    Vector colval(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) colval[T.basis[i]] = T.a[i][cols];
    sol.x.assign(nv, 0.0);
    for (std::size_t j = 0; j < nv; ++j) {
        sol.x[j] = colval[pos_col[j]];
        if (neg_col[j] != SIZE_MAX) sol.x[j] -= colval[neg_col[j]];
    }
    sol.objective = 0.0;
    for (std::size_t j = 0; j < nv; ++j) sol.objective += lp.objective[j] * sol.x[j];
    sol.status = LpStatus::optimal;
    return sol;
}

LpFeasibility lp_feasibility(const LinearProgram& lp, const std::vector<std::size_t>& strict,
                             double strict_tol)
{
    if (strict.empty())
        throw std::invalid_argument("strict group is empty: the margin problem is unbounded");
    const std::size_t nv = lp.num_vars;
    for (std::size_t i : strict)
        if (i >= nv) throw std::invalid_argument("strict index out of range");

    // Append delta as the last (free) variable.
    LinearProgram aug;
    aug.num_vars = nv + 1;
    aug.objective.assign(nv + 1, 0.0);
    aug.objective[nv] = 1.0;
    aug.free.assign(nv + 1, false);
    for (std::size_t j = 0; j < nv; ++j) aug.free[j] = !lp.free.empty() && lp.free[j];
    aug.free[nv] = true;
    auto widen = [&](const Vector& r) {
        Vector w(r);
        w.push_back(0.0);
        return w;
    };
    for (std::size_t i = 0; i < lp.eq_rows.size(); ++i) aug.add_eq(widen(lp.eq_rows[i]), lp.eq_rhs[i]);
    for (std::size_t i = 0; i < lp.le_rows.size(); ++i) aug.add_le(widen(lp.le_rows[i]), lp.le_rhs[i]);
    Vector norm(nv + 1, 0.0);
    for (std::size_t i : strict) {
        Vector r(nv + 1, 0.0);
        r[i] = -1.0;
        r[nv] = 1.0;
        aug.add_le(std::move(r), 0.0);
        norm[i] = 1.0;
    }
    aug.add_eq(std::move(norm), 1.0);

    LpSolution sol = solve_lp(aug);
    LpFeasibility out;
    out.status = sol.status;
    if (sol.status == LpStatus::unbounded) throw std::runtime_error("margin LP unbounded");
    if (sol.status == LpStatus::infeasible) {
        out.margin = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.point.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(nv));
    out.margin = sol.x[nv];
    out.strictly_feasible = out.margin > strict_tol;
    return out;
}

}  // namespace nmfp
