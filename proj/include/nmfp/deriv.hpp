#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmfp/expr.hpp"

namespace nmfp {

enum class Verdict { converged, oscillating, nonexistent };

enum class EstimateMethod {
    exact,              ///< forward-mode dual numbers
    smooth_difference,  ///< central differences of exact first derivatives
    sampled             ///< quotient sampling over the t-grid
};

std::string to_string(Verdict v);
std::string to_string(EstimateMethod m);

struct DerivativeEstimate {
    double value = 0.0;
    /// Spread of the last three refinement levels, widened to cover the
    /// distance between the value and their running extremum.
    double error_band = 0.0;
    Verdict verdict = Verdict::converged;
    std::size_t samples = 0;
    EstimateMethod method = EstimateMethod::sampled;
    /// Internal estimate of |value - truth|; feeds the noise model of the
    /// second-order estimators. Never larger than error_band + noise.
    double accuracy = 0.0;
};

struct EstimatorConfig {
    double t0 = 0.1;
    double gamma = 0.5;
    int levels = 20;
    int ball_samples = 64;
    int phase_samples = 16;
    double oscillation_threshold = 0.05;
    std::uint64_t seed = 0;
    /// Use exact values on syntactically smooth expressions.
    bool exact_bypass = true;

    void validate() const;
};

/// One-sided Gateaux derivative lim (f(x0+tv)-f(x0))/t.
DerivativeEstimate gateaux_dd(const Expression& f, std::span<const double> x0,
                              std::span<const double> v, const EstimatorConfig& cfg);

/// Clarke generalized directional derivative. The base point y ranges over
/// the ball of radius t_k*|v| around x0 at level k.
DerivativeEstimate clarke_dd(const Expression& f, std::span<const double> x0,
                             std::span<const double> v, const EstimatorConfig& cfg);

/// Second-order directional derivative
/// lim (f(x0+tv)-f(x0)-t*d1)/(t^2/2), with d1 the Gateaux value.
DerivativeEstimate second_dd(const Expression& f, std::span<const double> x0,
                             std::span<const double> v, const EstimatorConfig& cfg,
                             std::optional<DerivativeEstimate> d1 = std::nullopt);

/// Pales-Zeidan second-order derivative: limsup of the same quotient built
/// on the Clarke value.
DerivativeEstimate pales_zeidan_dd2(const Expression& f, std::span<const double> x0,
                                    std::span<const double> v, const EstimatorConfig& cfg,
                                    std::optional<DerivativeEstimate> d1 = std::nullopt);

struct RegularityProbe {
    bool holds = true;
    bool derivative_missing = false;
    double worst_gap = 0.0;
    Vector worst_direction;
};

RegularityProbe clarke_regular_probe(const Expression& f, std::span<const double> x0,
                                     const std::vector<Vector>& directions,
                                     const EstimatorConfig& cfg, double abs_tol = 1e-4,
                                     double rel_tol = 1e-3);

/// A calculus rule was asked to consume a derivative that does not exist.
class InapplicableRule : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (n/d)° = (1/d)[n° - (n/d) d'].
double quotient_clarke(double num_clarke, double num_value, double den_value, double den_gateaux);

/// (n - beta d)° = n° - beta d'.
double affine_clarke(double num_clarke, double beta, double den_gateaux);

/// (n/d)°° = (1/d)[n°° - (n/d) d'']; refuses when d'' does not exist.
double quotient_pz2(double num_pz, double num_value, double den_value,
                    const DerivativeEstimate& den_second);

/// (n - beta d)°° = n°° - beta d''; refuses when d'' does not exist.
double affine_pz2(double num_pz, double beta, const DerivativeEstimate& den_second);

}  // namespace nmfp
