#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmfp/cones.hpp"
#include "nmfp/kkt.hpp"
#include "nmfp/problem.hpp"
#include "nmfp/sufficiency.hpp"

namespace nmfp {

/// A point (u, lambda, mu, nu) of the Mond-Weir second-order dual.
struct DualPoint {
    Vector u;
    MultiplierVector mult;
    std::vector<Vector> directions;  ///< critical directions at u that were checked
};

enum class DualFeasibility { feasible, infeasible, inconclusive };
std::string to_string(DualFeasibility s);

struct DualityOptions {
    bool weak = false;  ///< lambda >= 0, not all zero
    int sphere_samples = 8;
    std::uint64_t seed = 0;
    double tol = 1e-6;
    ConeSearchConfig cone;
};

struct DualFeasibilityReport {
    DualFeasibility status = DualFeasibility::inconclusive;
    double stationarity_residual = 0.0;
    double curvature_min = 0.0;  ///< over the checked directions (0 when none)
    double constraint_value = 0.0;  ///< sum mu_j g_j(u) + sum nu_k h_k(u)
    bool signs_ok = false;
    bool normalized = false;
    std::vector<Vector> directions;
    std::string reason;
};

/// Stationarity at u, the curvature inequality on sampled critical
/// directions of u (none when u is outside X), the constraint block and
/// the sign and normalization block.
DualFeasibilityReport mond_weir_feasible(const FractionalProblem& P, const DualPoint& dp,
                                         const EstimatorConfig& cfg,
                                         const DualityOptions& opts = {},
                                         const std::optional<std::vector<Vector>>& directions = std::nullopt);

struct DualPremises {
    CertificateStatus objective = CertificateStatus::inconclusive;   ///< each f_i - s_i F_i convex2
    CertificateStatus inequality = CertificateStatus::inconclusive;  ///< each g_j convex2
    CertificateStatus equality = CertificateStatus::inconclusive;    ///< each h_k infine2
    bool certified() const
    {
        return objective == CertificateStatus::certified_on_samples &&
               inequality == CertificateStatus::certified_on_samples &&
               equality == CertificateStatus::certified_on_samples;
    }
    std::optional<Vector> counterexample;
};

/// Premises of weak duality at u with respect to the domain sample.
DualPremises weak_duality_premises(const FractionalProblem& P, std::span<const double> u,
                                   const std::vector<Vector>& domain_samples,
                                   const EstimatorConfig& cfg, const DualityOptions& opts = {});

struct WeakDualityViolation {
    Vector x;
    std::size_t dual_index = 0;
    Vector primal_value;
    Vector dual_value;
};

struct WeakDualityReport {
    std::size_t pairs = 0;
    std::vector<WeakDualityViolation> violations;
    std::vector<DualPremises> premises;  ///< one per dual point
    std::vector<DualFeasibility> feasibility;
};

/// Flags every feasible grid x with (f/F)(x) <= (f/F)(u) componentwise and
/// unequal (weak mode: strictly smaller in every component). Violations are
/// reported whether or not the premises were certified.
WeakDualityReport weak_duality_sweep(const FractionalProblem& P, const std::vector<Vector>& primal_grid,
                                     const std::vector<DualPoint>& duals,
                                     const std::vector<Vector>& domain_samples,
                                     const EstimatorConfig& cfg, const DualityOptions& opts = {});

struct StrongDualityResult {
    std::optional<DualPoint> point;
    double margin = 0.0;  ///< LP margin; -inf when infeasible
    LpStatus lp_status = LpStatus::infeasible;
    RegularityReport abadie;
    std::optional<DualFeasibilityReport> feasibility;
    /// Dual objective minus primal objective at the constructed pair.
    std::optional<Vector> gap;
};

/// Solves the strong-KKT system over {v} and the sampled critical
/// directions at x0, normalizes lambda, and re-checks dual feasibility.
/// The Abadie-type probe along v is reported, not enforced.
StrongDualityResult strong_duality_construct(const FractionalProblem& P, std::span<const double> x0,
                                             std::span<const double> v, const EstimatorConfig& cfg,
                                             const DualityOptions& opts = {});

struct ConverseDualityReport {
    SufficiencyStatus theorem = SufficiencyStatus::inconclusive;
    JointCertificate premises;
    ParetoStatus oracle = ParetoStatus::inconclusive;
    bool consistent = true;
    DualFeasibilityReport feasibility;
};

/// Requires u in X. Premises at u: lambda'(f - s F) pseudoconvex2, mu'g
/// quasiconvex2, each h_k infine2, with one shared (v, w) per sample of X.
ConverseDualityReport converse_duality_check(const FractionalProblem& P, const DualPoint& dp,
                                             const EstimatorConfig& cfg,
                                             const DualityOptions& opts = {},
                                             int sample_resolution = 0, int oracle_resolution = 0,
                                             const std::optional<Box>& oracle_box = std::nullopt);

}  // namespace nmfp
