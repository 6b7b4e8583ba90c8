#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmfp/cones.hpp"
#include "nmfp/deriv.hpp"
#include "nmfp/lp.hpp"
#include "nmfp/problem.hpp"

namespace nmfp {

/// Gateaux gradient: exact when available, otherwise one-sided estimates
/// along +-e_i, which must agree (else PreconditionError naming `label`).
Vector gateaux_gradient(const Expression& e, const std::string& label, std::span<const double> x0,
                        const EstimatorConfig& cfg);

/// Rows [gradient | curvature along v]. C ends with the row [0 | -1].
struct DualSystem {
    std::size_t n = 0;
    Vector v;
    Vector s;
    std::vector<Vector> B;  ///< p rows: f_i - s_i F_i
    std::vector<Vector> C;  ///< |J(x0,v)| + 1 rows
    std::vector<Vector> D;  ///< l rows
    std::vector<std::size_t> active;         ///< J(x0)
    std::vector<std::size_t> active_second;  ///< J(x0, v), indexes the first rows of C
};

/// Curvature entries use the Pales-Zeidan derivative for f, g, h and the
/// ordinary second-order derivative for F; a missing F'' is a
/// PreconditionError naming the function.
DualSystem assemble_dual_system(const FractionalProblem& P, std::span<const double> x0,
                                std::span<const double> v, const EstimatorConfig& cfg);

struct MultiplierVector {
    Vector lambda;
    Vector mu;  ///< full length m
    Vector nu;
    double margin = 0.0;  ///< min lambda_i after normalization

    /// Divides everything by sum(lambda). Throws if that sum is not positive.
    MultiplierVector normalized() const;
};

struct KktOptions {
    /// lambda >= 0, not all zero, instead of lambda > 0.
    bool weak = false;
    double strict_tol = kStrictTol;
};

struct KktResult {
    std::optional<MultiplierVector> certificate;
    LpStatus lp_status = LpStatus::infeasible;
    /// Optimal margin; -inf when even sum(lambda) = 1, lambda >= 0 is infeasible.
    double margin = 0.0;
    std::vector<DualSystem> systems;  ///< one per direction used
};

/**
 * Stationarity rows as equalities, the curvature row as an inequality,
 * mu_j = 0 outside J(x0, v), normalization sum(lambda) = 1, and the
 * margin min lambda_i maximized.
 */
KktResult solve_strong_kkt(const FractionalProblem& P, std::span<const double> x0,
                           std::span<const double> v, const EstimatorConfig& cfg,
                           const KktOptions& opts = {});

/// One certificate valid for every listed direction: one curvature row per
/// direction, mu_j free only on the intersection of the J(x0, v).
KktResult solve_strong_kkt_sweep(const FractionalProblem& P, std::span<const double> x0,
                                 const std::vector<Vector>& directions, const EstimatorConfig& cfg,
                                 const KktOptions& opts = {});

struct SlacknessEntry {
    std::size_t index = 0;
    double value = 0.0;        ///< g_j(x0)
    double multiplier = 0.0;   ///< mu_j
    double directional = 0.0;  ///< g'_j(x0) v
    bool flagged = false;
};

inline constexpr double kSlacknessTol = 1e-9;

std::vector<SlacknessEntry> complementary_slackness_report(const FractionalProblem& P,
                                                           std::span<const double> x0,
                                                           std::span<const double> v,
                                                           const MultiplierVector& mult,
                                                           const EstimatorConfig& cfg);

struct MultiplierCheck {
    double stationarity_residual = 0.0;  ///< infinity norm
    double curvature_value = 0.0;        ///< left side of the curvature inequality
    bool signs_ok = false;
    bool slackness_ok = false;
    bool holds = false;
    std::vector<SlacknessEntry> slackness;
};

/// Checks given multipliers against all strong-KKT relations at (x0, v).
/// Scale free: the normalization of lambda is not required.
MultiplierCheck verify_multipliers(const FractionalProblem& P, std::span<const double> x0,
                                   std::span<const double> v, const MultiplierVector& mult,
                                   const EstimatorConfig& cfg, const KktOptions& opts = {},
                                   double tol = 1e-6);

enum class PrimalStatus { incompatible_on_samples, solvable };
std::string to_string(PrimalStatus s);

struct PrimalReport {
    PrimalStatus status = PrimalStatus::incompatible_on_samples;
    std::optional<Vector> witness;
    /// The linearized system was decided exactly by LP (all data smooth at x0).
    bool linearization_exact = false;
    bool linearization_solvable = false;
    std::size_t samples_checked = 0;
};

/// Searches w in Z solving the strict first-and-second-order system for
/// fixed (v, r): sampled unit vectors, the lattice, and the LP solution of
/// the linearized system, each re-checked with nonsmooth estimates.
PrimalReport primal_condition_check(const FractionalProblem& P, std::span<const double> x0,
                                    std::span<const double> v, double r, int sphere_samples,
                                    std::uint64_t seed, const EstimatorConfig& cfg);

}  // namespace nmfp
