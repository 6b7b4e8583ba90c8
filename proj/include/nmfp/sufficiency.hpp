#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nmfp/cones.hpp"
#include "nmfp/deriv.hpp"
#include "nmfp/kkt.hpp"
#include "nmfp/problem.hpp"

namespace nmfp {

/// Second-order generalized convexity at x0 with respect to a sample of X.
/// With q(v, w) = theta°(x0; w) + theta°°(x0; v) / 2 and
/// delta(x) = theta(x) - theta(x0), each x needs some (v, w) with
///   convex2:       delta >= q
///   pseudoconvex2: q >= 0  implies delta >= 0
///   quasiconvex2:  delta <= 0  implies q <= 0
///   infine2:       delta == q
enum class ConvexityNotion { convex2, pseudoconvex2, quasiconvex2, infine2 };
std::string to_string(ConvexityNotion n);

enum class CertificateStatus { certified_on_samples, counterexample, inconclusive };
std::string to_string(CertificateStatus s);

/// Candidate directions. x - x0 is always added to both lists; vectors with
/// norm below 1e-9 are skipped.
struct VwSearch {
    std::vector<Vector> v;
    std::vector<Vector> w;
};

/// v: the given directions; w: lattice {-1,0,1}^n without 0 (n <= 4, else
/// the signed axes) plus `sphere_samples` random unit vectors.
VwSearch default_search(std::size_t n, const std::vector<Vector>& v_directions, int sphere_samples,
                        std::uint64_t seed);

struct Witness {
    Vector x;
    Vector v;
    Vector w;
    double residual = 0.0;
};

struct ConvexityCertificate {
    ConvexityNotion notion = ConvexityNotion::convex2;
    CertificateStatus status = CertificateStatus::inconclusive;
    Vector base_point;
    std::vector<Witness> witnesses;
    double max_residual = 0.0;
    std::optional<Vector> counterexample;
    double counterexample_residual = 0.0;  ///< smallest violation found at the counterexample
    std::size_t samples = 0;
    std::size_t inconclusive_samples = 0;
};

/// Residual tolerance 1e-6 (1 + |theta(x)|), widened by estimator bands.
inline constexpr double kResidualTol = 1e-6;

/// `common` fixes one (v, w) for every sample instead of searching.
ConvexityCertificate certify(const Expression& theta, ConvexityNotion notion,
                             std::span<const double> x0, const std::vector<Vector>& samples,
                             const VwSearch& search, const EstimatorConfig& cfg,
                             const std::optional<std::pair<Vector, Vector>>& common = std::nullopt);

struct PremiseItem {
    std::string label;
    Expression expr;
    ConvexityNotion notion;
};

struct JointCertificate {
    CertificateStatus status = CertificateStatus::inconclusive;
    std::vector<Witness> witnesses;  ///< one shared pair per sample
    std::optional<Vector> counterexample;
    double max_residual = 0.0;
    std::size_t samples = 0;
};

/// Every item must hold at each sample with one shared (v, w).
JointCertificate certify_joint(const std::vector<PremiseItem>& items, std::span<const double> x0,
                               const std::vector<Vector>& samples, const VwSearch& search,
                               const EstimatorConfig& cfg);

struct SufficiencyOptions {
    int sample_resolution = 0;  ///< 0: 41 for n <= 2, 11 for n = 3, 5 beyond
    int oracle_resolution = 0;  ///< 0: default_grid_resolution
    std::optional<Box> oracle_box;
    int sphere_samples = 8;
    std::uint64_t seed = 0;
    bool weak = false;  ///< lambda >= 0, not all zero; concludes weak efficiency
    double tol = 1e-6;
    ConeSearchConfig cone;
};

int default_sample_resolution(std::size_t n);

struct ConditionReport {
    double equality_residual = 0.0;  ///< max over sampled w of the first-order combination
    double curvature_min = 0.0;      ///< min over sampled critical v of the curvature combination
    double slackness = 0.0;          ///< |sum mu_j g_j(x0)|
    bool signs_ok = false;
    bool holds = false;
    std::size_t w_checked = 0;
    std::size_t v_checked = 0;
};

enum class SufficiencyStatus { pareto_efficient, weakly_efficient, not_certified, inconclusive };
std::string to_string(SufficiencyStatus s);

struct PremiseReport {
    std::string label;
    ConvexityNotion notion;
    CertificateStatus status;
    std::optional<Vector> counterexample;
};

struct SufficiencyVerdict {
    SufficiencyStatus status = SufficiencyStatus::inconclusive;
    std::string reason;
    ConditionReport conditions;
    std::vector<PremiseReport> premises;
    JointCertificate joint;
    ParetoStatus oracle = ParetoStatus::inconclusive;
    /// False when a certified point is dominated on the oracle grid.
    bool consistent = true;
    std::vector<Vector> critical;
};

/// First-order equality, curvature inequality and slackness for given
/// multipliers at x0, over sampled w and sampled critical v.
ConditionReport sufficiency_conditions(const FractionalProblem& P, std::span<const double> x0,
                                       const MultiplierVector& mult,
                                       const std::vector<Vector>& critical, const VwSearch& search,
                                       const EstimatorConfig& cfg, const SufficiencyOptions& opts);

/// Premises: each f_i - s_i F_i and each g_j convex2, each h_k infine2.
SufficiencyVerdict convex_sufficiency_check(const FractionalProblem& P, std::span<const double> x0,
                                            const MultiplierVector& mult, const EstimatorConfig& cfg,
                                            const SufficiencyOptions& opts = {});

/// Premises: lambda'(f - s F) pseudoconvex2, mu'g quasiconvex2, each h_k infine2.
SufficiencyVerdict pseudoconvex_sufficiency_check(const FractionalProblem& P,
                                                  std::span<const double> x0,
                                                  const MultiplierVector& mult,
                                                  const EstimatorConfig& cfg,
                                                  const SufficiencyOptions& opts = {});

/// lambda'(f - s F) with s = (f/F)(x0).
Expression weighted_objective(const FractionalProblem& P, std::span<const double> s,
                              std::span<const double> lambda);

}  // namespace nmfp
