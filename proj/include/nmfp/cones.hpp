#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmfp/deriv.hpp"
#include "nmfp/problem.hpp"

namespace nmfp {

enum class ConeVerdict { member, non_member, inconclusive };
std::string to_string(ConeVerdict v);

/// Geometric step schedule and correction search for the curve tests.
struct ConeSearchConfig {
    double t0 = 0.1;
    double gamma = 0.5;
    int levels = 12;
    int tail = 5;             ///< levels that decide the verdict
    double cap = 1.0;         ///< correction cap constant c
    double feas_tol = 1e-12;  ///< absolute constraint violation accepted as feasible
    int max_iterations = 60;

    void validate() const;
};

/// Sum of positive parts of g and absolute values of h. The box is not
/// part of X here; it only bounds grids.
double constraint_violation(const FractionalProblem& P, std::span<const double> x);

/**
 * Least-norm Gauss-Newton correction of `start` toward X. Succeeds when a
 * point with violation <= feas_tol is reached within `radius` of `start`.
 */
std::optional<Vector> correct_to_feasible(const FractionalProblem& P, std::span<const double> start,
                                          double radius, const ConeSearchConfig& cfg);

/// Contingent cone: x0 + t d' in X with |d' - d| <= c sqrt(t) along the
/// t-grid. Directions are normalized first, so the verdict is scale free.
ConeVerdict contingent_member(const FractionalProblem& P, std::span<const double> x0,
                              std::span<const double> d, const ConeSearchConfig& cfg = {});

struct LinearizingCheck {
    ConeVerdict verdict = ConeVerdict::inconclusive;
    Vector objective_values;   ///< (f/F)_i°(x0; d)
    Vector inequality_values;  ///< g_j°(x0; d), j in J(x0)
    Vector equality_values;    ///< h_k°(x0; d)
    std::vector<std::size_t> active;
};

inline constexpr double kDerivTol = 1e-6;

/// Linearizing cone: objective ratios and active inequalities have
/// nonpositive Clarke derivatives along d, equalities vanish.
LinearizingCheck linearizing_member(const FractionalProblem& P, std::span<const double> x0,
                                    std::span<const double> d, const EstimatorConfig& ecfg,
                                    double deriv_tol = kDerivTol);

struct DirectionSample {
    Vector direction;
    ConeVerdict tangent = ConeVerdict::inconclusive;
    ConeVerdict linearizing = ConeVerdict::inconclusive;
    bool critical() const
    {
        return tangent == ConeVerdict::member && linearizing == ConeVerdict::member;
    }
};

struct CriticalDirections {
    std::vector<DirectionSample> samples;
    std::vector<Vector> critical;  ///< unit vectors; the zero direction is implicit
};

/// Samples unit directions (coordinate axes, null space of the active
/// gradients, uniform sphere) and tags both memberships.
CriticalDirections critical_directions(const FractionalProblem& P, std::span<const double> x0,
                                       int sphere_samples, std::uint64_t seed,
                                       const EstimatorConfig& ecfg,
                                       const ConeSearchConfig& ccfg = {});

/**
 * Projective second-order tangent cone. Along s_k = t0 gamma^k the curve
 * point is x0 + t v + s w'/2 with t = sqrt(r s) for r > 0 and
 * t = s^(2/3) for r = 0 (then r_k = s^(1/3) -> 0 and t/r_k -> 0).
 * w' ranges over a cap of radius c sqrt(s) max(1, |w|) around w.
 */
ConeVerdict tangent2_member(const FractionalProblem& P, std::span<const double> x0,
                            std::span<const double> v, std::span<const double> w, double r,
                            const ConeSearchConfig& cfg = {});

struct Linearizing2Check {
    ConeVerdict verdict = ConeVerdict::inconclusive;
    Vector objective_values;
    Vector inequality_values;
    Vector equality_values;
    std::vector<std::size_t> active_second;  ///< J(x0, v)
};

/// Projective second-order linearizing cone. Ratio curvature uses the
/// Pales-Zeidan estimate of f_i/F_i itself.
Linearizing2Check linearizing2_member(const FractionalProblem& P, std::span<const double> x0,
                                      std::span<const double> v, std::span<const double> w,
                                      double r, const EstimatorConfig& ecfg,
                                      double deriv_tol = kDerivTol);

enum class ProbeStatus { holds_on_samples, violated, inconclusive };
std::string to_string(ProbeStatus s);

struct RegularityReport {
    ProbeStatus status = ProbeStatus::inconclusive;
    std::optional<Vector> witness_w;
    double witness_r = 0.0;
    std::size_t pairs_tested = 0;     ///< pairs accepted by the linearizing test
    std::size_t pairs_sampled = 0;
};

/// Candidate (w, r) pairs: lattice {-1,0,1}^n without 0 (n <= 4), random unit
/// vectors, each with r in {0, 1/2, 1, 2}.
std::vector<std::pair<Vector, double>> second_order_pairs(std::size_t n, int sphere_samples,
                                                          std::uint64_t seed);

/// Linearizing pairs must lie in the tangent cone.
RegularityReport second_order_abadie_probe(const FractionalProblem& P, std::span<const double> x0,
                                           std::span<const double> v, int sphere_samples,
                                           std::uint64_t seed, const EstimatorConfig& ecfg,
                                           const ConeSearchConfig& ccfg = {});

/// Linearizing pairs must lie in the conic hull of the sampled tangent
/// pairs (the tangent cone is a cone in (w, r), so its closed convex hull
/// is approximated from inside by that hull).
RegularityReport second_order_guignard_probe(const FractionalProblem& P, std::span<const double> x0,
                                             std::span<const double> v, int sphere_samples,
                                             std::uint64_t seed, const EstimatorConfig& ecfg,
                                             const ConeSearchConfig& ccfg = {});

}  // namespace nmfp
