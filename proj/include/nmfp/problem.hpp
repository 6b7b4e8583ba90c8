#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmfp/deriv.hpp"
#include "nmfp/expr.hpp"

namespace nmfp {

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Box {
    Vector lower;
    Vector upper;

    std::size_t dimension() const noexcept { return lower.size(); }
    bool contains(std::span<const double> x) const;
    /// Strictly inside, at least `margin` from every face.
    bool interior(std::span<const double> x, double margin = 1e-6) const;
    void validate() const;
};

struct FeasibilityTolerances {
    double eq = 1e-9;
    double ineq = 1e-9;
    double active = 1e-8;
};

/// min f(x)/F(x) componentwise, subject to g(x) <= 0, h(x) = 0, x in box.
struct FractionalProblem {
    std::size_t n = 0;
    std::vector<ScalarFunction> f;
    std::vector<ScalarFunction> F;
    std::vector<ScalarFunction> g;
    std::vector<ScalarFunction> h;
    Box box;

    std::size_t p() const noexcept { return f.size(); }
    std::size_t m() const noexcept { return g.size(); }
    std::size_t l() const noexcept { return h.size(); }

    void validate() const;

    /// f_i - s_i F_i as a single expression.
    Expression shifted_objective(std::size_t i, double s) const;
    /// f_i / F_i as a single expression.
    Expression ratio_expression(std::size_t i) const;
};

bool feasible(const FractionalProblem& P, std::span<const double> x,
              const FeasibilityTolerances& tol = {});

/// Componentwise f/F; throws DomainError on a nonpositive denominator.
Vector ratio_objective(const FractionalProblem& P, std::span<const double> x);
Vector s_parameter(const FractionalProblem& P, std::span<const double> x0);
Vector smfp_objective(const FractionalProblem& P, std::span<const double> x,
                      std::span<const double> s);

/// J(x0): indices with |g_j(x0)| <= active tolerance (0-based).
std::vector<std::size_t> active_inequalities(const FractionalProblem& P,
                                             std::span<const double> x0,
                                             const FeasibilityTolerances& tol = {});

/// J(x0, v): members of J(x0) whose Clarke derivative along v vanishes.
std::vector<std::size_t> active_second(const FractionalProblem& P, std::span<const double> x0,
                                       std::span<const double> v, const EstimatorConfig& cfg,
                                       double deriv_tol = 1e-6,
                                       const FeasibilityTolerances& tol = {});

/// Default per-axis grid size: 201 for n <= 2, 41 for n = 3, 15 beyond.
int default_grid_resolution(std::size_t n);

/// Feasible points of the regular grid with `resolution` points per axis.
std::vector<Vector> feasible_grid(const FractionalProblem& P, int resolution,
                                  const std::optional<Box>& box = std::nullopt,
                                  const FeasibilityTolerances& tol = {});

enum class ParetoStatus { efficient, weakly_efficient_only, dominated, inconclusive };
std::string to_string(ParetoStatus s);

inline constexpr double kDominanceTol = 1e-12;

/// a <= b componentwise with a != b, up to kDominanceTol.
bool pareto_dominates(std::span<const double> a, std::span<const double> b);
/// a < b in every component by more than kDominanceTol.
bool strictly_dominates(std::span<const double> a, std::span<const double> b);

struct ParetoVerdict {
    ParetoStatus status = ParetoStatus::inconclusive;
    std::optional<Vector> witness;        ///< dominating grid point
    std::optional<Vector> witness_value;  ///< its objective vector
    std::vector<Vector> front;            ///< nondominated grid points
    std::vector<Vector> front_values;
    std::size_t feasible_points = 0;
};

/// Classify a target image against a cloud of images.
ParetoStatus classify_image(const std::vector<Vector>& images, std::span<const double> target,
                            std::optional<std::size_t>* witness = nullptr);

/// Indices of the nondominated members of `images`.
std::vector<std::size_t> nondominated_indices(const std::vector<Vector>& images);

ParetoVerdict pareto_oracle(const FractionalProblem& P, int resolution,
                            std::span<const double> x0,
                            const std::optional<Box>& box = std::nullopt,
                            bool with_front = true);

/// True when x0 receives the same Pareto status under f/F and under
/// f - s*F with s = (f/F)(x0).
bool scalarization_equivalence_check(const FractionalProblem& P, std::span<const double> x0, int resolution,
                   const std::optional<Box>& box = std::nullopt);

struct ScalarizationSweep {
    std::size_t points = 0;
    std::size_t mismatches = 0;
    std::optional<Vector> first_mismatch;
};

/// scalarization_equivalence_check at every feasible grid point, sharing one grid evaluation.
ScalarizationSweep scalarization_sweep(const FractionalProblem& P, int resolution,
                                       const std::optional<Box>& box = std::nullopt);

enum class BorweinStatus { consistent, violated };

struct BorweinProbe {
    BorweinStatus status = BorweinStatus::consistent;
    std::optional<Vector> witness;  ///< grid point producing the offending direction
    Vector direction;               ///< normalized image direction
    std::size_t directions_checked = 0;
};

/// Desk-scale proper-efficiency probe: tangent directions of the image cloud
/// at (f/F)(x0), estimated from the nearest image points.
BorweinProbe borwein_probe(const FractionalProblem& P, std::span<const double> x0,
                           int resolution, int ray_samples = 64,
                           const std::optional<Box>& box = std::nullopt);

}  // namespace nmfp
