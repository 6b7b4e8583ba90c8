#include "nmfp/deriv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmfp/sampling.hpp"

namespace nmfp {

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::oscillating: return "oscillating";
    case Verdict::nonexistent: return "nonexistent";
    }
    return "?";
}

std::string to_string(EstimateMethod m)
{
    switch (m) {
    case EstimateMethod::exact: return "exact";
    case EstimateMethod::smooth_difference: return "smooth-difference";
    case EstimateMethod::sampled: return "sampled";
    }
    return "?";
}

void EstimatorConfig::validate() const
{
    if (!(t0 > 0.0)) throw std::invalid_argument("estimator t0 must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("estimator gamma must lie in (0,1)");
    if (levels < 3) throw std::invalid_argument("estimator needs at least 3 levels");
    if (ball_samples < 1 || phase_samples < 1)
        throw std::invalid_argument("estimator sample counts must be >= 1");
    if (!(oscillation_threshold > 0.0))
        throw std::invalid_argument("oscillation threshold must be positive");
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// A level is trusted while its roundoff/propagated noise stays below this
// fraction of the quotient magnitude.
constexpr double kUsableNoise = 1e-3;

struct Level {
    double t = 0.0;
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    double base = 0.0;
    double noise = 0.0;
};

enum class Mode { limit, limsup };

double rel_scale(double x) { return std::max(1.0, std::abs(x)); }

DerivativeEstimate exact_zero()
{
    DerivativeEstimate e;
    e.method = EstimateMethod::exact;
    return e;
}

/// Phase offsets t = t_k * gamma^((j + phi)/P), identical at every level.
std::vector<double> phase_exponents(const EstimatorConfig& cfg, std::string_view tag)
{
    Rng rng(derive_seed(cfg.seed, tag));
    double phi = uniform01(rng);
    std::vector<double> e(static_cast<std::size_t>(cfg.phase_samples));
    for (std::size_t j = 0; j < e.size(); ++j)
        e[j] = (static_cast<double>(j) + phi) / static_cast<double>(cfg.phase_samples);
    return e;
}

DerivativeEstimate summarize(const std::vector<Level>& levels, Mode mode,
                             const EstimatorConfig& cfg, std::size_t samples)
{
    const double thr = cfg.oscillation_threshold;
    const double g = cfg.gamma;

    std::size_t n = 0;
    while (n < levels.size() && levels[n].noise <= kUsableNoise * rel_scale(levels[n].hi)) ++n;
    n = std::max<std::size_t>(n, std::min<std::size_t>(3, levels.size()));

    auto first_of_last = [&](std::size_t count) { return n - std::min(count, n); };
    const std::size_t tail_begin = first_of_last(5);
    const std::size_t last3_begin = first_of_last(3);

    bool oscillatory = false;
    for (std::size_t k = last3_begin; k < n; ++k)
        if (levels[k].hi - levels[k].lo > thr * rel_scale(levels[k].hi)) oscillatory = true;

    DerivativeEstimate est;
    est.samples = samples;
    est.method = EstimateMethod::sampled;

    if (!oscillatory) {
        auto x = [&](std::size_t k) { return mode == Mode::limit ? levels[k].base : levels[k].hi; };
        auto rich = [&](std::size_t k) { return (x(k) - g * x(k - 1)) / (1.0 - g); };
        const double amp = (1.0 + g) / (1.0 - g);
        std::size_t best = n - 1;
        double best_err = std::numeric_limits<double>::infinity();
        double value = x(n - 1);
        if (n >= 3) {
            for (std::size_t k = 2; k < n; ++k) {
                double err = std::abs(rich(k) - rich(k - 1)) / 3.0 + amp * levels[k].noise;
                if (err < best_err) {
                    best_err = err;
                    best = k;
                }
            }
            value = rich(best);
        } else {
            best_err = levels[n - 1].noise;
        }
        // Band over the extrapolated refinement levels ending at `best`.
        auto refined = [&](std::size_t k) { return k >= 1 && n >= 3 ? rich(k) : x(k); };
        double lo = refined(best), hi = lo;
        const std::size_t first = n >= 3 ? std::max<std::size_t>(1, best >= 2 ? best - 2 : 0)
                                         : (best >= 2 ? best - 2 : 0);
        for (std::size_t k = first; k <= best; ++k) {
            lo = std::min(lo, refined(k));
            hi = std::max(hi, refined(k));
        }
        double extremum = mode == Mode::limit ? refined(best) : hi;
        est.value = value;
        est.accuracy = best_err;
        est.error_band = std::max(hi - lo, std::abs(value - extremum)) + levels[best].noise;
        est.verdict = Verdict::converged;
        return est;
    }

    double tail_hi = -std::numeric_limits<double>::infinity();
    double tail_lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = tail_begin; k < n; ++k) {
        tail_hi = std::max(tail_hi, levels[k].hi);
        tail_lo = std::min(tail_lo, levels[k].lo);
    }

    if (mode == Mode::limit) {
        bool sustained = true;
        for (std::size_t k = tail_begin; k < n; ++k) {
            double mid = 0.5 * (levels[k].hi + levels[k].lo);
            if (levels[k].hi - levels[k].lo <= thr * rel_scale(mid)) sustained = false;
        }
        est.value = 0.5 * (tail_hi + tail_lo);
        est.error_band = 0.5 * (tail_hi - tail_lo);
        est.accuracy = est.error_band;
        est.verdict = sustained ? Verdict::nonexistent : Verdict::oscillating;
        return est;
    }

    // Running maximum over the tail; converged once it stops moving.
    std::vector<double> running;
    double run = -std::numeric_limits<double>::infinity();
    for (std::size_t k = tail_begin; k < n; ++k) {
        run = std::max(run, levels[k].hi);
        running.push_back(run);
    }
    const std::size_t r3 = running.size() - std::min<std::size_t>(3, running.size());
    const double settle = running.back() - running[r3];
    est.value = running.back();
    est.error_band = settle + levels[n - 1].noise;
    est.accuracy = est.error_band;
    est.verdict = settle <= thr * rel_scale(est.value) ? Verdict::converged : Verdict::oscillating;
    return est;
}

void check_sizes(const Expression& f, std::span<const double> x0, std::span<const double> v)
{
    if (x0.size() != f.dimension() || v.size() != f.dimension())
        throw std::invalid_argument("point/direction dimension does not match the function");
}

/// Quotient levels for lim/limsup_t (f(x0+tv) - f(x0) - order*t*d1) / scale(t).
std::vector<Level> sample_along_ray(const Expression& f, std::span<const double> x0,
                                    std::span<const double> v, const EstimatorConfig& cfg,
                                    int order, double d1, double d1_accuracy,
                                    std::string_view tag, std::size_t& samples)
{
    const double f0 = f.evaluate(x0);
    const auto phases = phase_exponents(cfg, tag);
    std::vector<Level> levels(static_cast<std::size_t>(cfg.levels));
    double tk = cfg.t0;
    for (auto& lv : levels) {
        lv.t = tk;
        double scale = std::abs(f0);
        for (std::size_t j = 0; j < phases.size(); ++j) {
            double t = tk * std::pow(cfg.gamma, phases[j]);
            double ft = f.evaluate(axpy(x0, t, v));
            scale = std::max(scale, std::abs(ft));
            double q = order == 1 ? (ft - f0) / t : (ft - f0 - t * d1) / (0.5 * t * t);
            lv.hi = std::max(lv.hi, q);
            lv.lo = std::min(lv.lo, q);
            if (j == 0) lv.base = q;
            ++samples;
        }
        double tmin = tk * cfg.gamma;
        lv.noise = order == 1 ? 8.0 * kEps * scale / tmin
                              : 8.0 * kEps * scale / (0.5 * tmin * tmin) + 2.0 * d1_accuracy / tmin;
        tk *= cfg.gamma;
    }
    return levels;
}

std::optional<DerivativeEstimate> exact_first(const Expression& f, std::span<const double> x0,
                                              std::span<const double> v, const EstimatorConfig& cfg)
{
    if (!cfg.exact_bypass || !f.smooth()) return std::nullopt;
    auto d = f.exact_directional(x0, v);
    if (!d) return std::nullopt;
    DerivativeEstimate e;
    e.value = *d;
    e.method = EstimateMethod::exact;
    e.samples = 1;
    return e;
}

/// v'Hv from central differences of the exact directional derivative with
/// one Richardson step. Empty when the neighbourhood leaves the smooth domain.
std::optional<DerivativeEstimate> smooth_second(const Expression& f, std::span<const double> x0,
                                                std::span<const double> v,
                                                const EstimatorConfig& cfg)
{
    if (!cfg.exact_bypass || !f.smooth()) return std::nullopt;
    try {
        const double h1 = 1e-3 / std::max(1.0, norm2(v));
        auto central = [&](double h) -> std::optional<double> {
            auto a = f.exact_directional(axpy(x0, h, v), v);
            auto b = f.exact_directional(axpy(x0, -h, v), v);
            if (!a || !b) return std::nullopt;
            return (*a - *b) / (2.0 * h);
        };
        auto c1 = central(h1);
        auto c2 = central(0.5 * h1);
        if (!c1 || !c2) return std::nullopt;
        DerivativeEstimate e;
        e.value = (4.0 * *c2 - *c1) / 3.0;
        e.method = EstimateMethod::smooth_difference;
        e.error_band = std::abs(e.value - *c2);
        e.accuracy = e.error_band;
        e.samples = 8;
        return e;
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

}  // namespace

DerivativeEstimate gateaux_dd(const Expression& f, std::span<const double> x0,
                              std::span<const double> v, const EstimatorConfig& cfg)
{
    cfg.validate();
    check_sizes(f, x0, v);
    if (norm2(v) == 0.0) return exact_zero();
    if (auto e = exact_first(f, x0, v, cfg)) return *e;
    std::size_t samples = 0;
    auto levels = sample_along_ray(f, x0, v, cfg, 1, 0.0, 0.0, "gateaux", samples);
    return summarize(levels, Mode::limit, cfg, samples);
}

DerivativeEstimate clarke_dd(const Expression& f, std::span<const double> x0,
                             std::span<const double> v, const EstimatorConfig& cfg)
{
    cfg.validate();
    check_sizes(f, x0, v);
    const double vn = norm2(v);
    if (vn == 0.0) return exact_zero();
    if (auto e = exact_first(f, x0, v, cfg)) return *e;

    const std::size_t n = x0.size();
    Rng rng(derive_seed(cfg.seed, "clarke-ball"));
    std::vector<Vector> pattern;
    pattern.emplace_back(n, 0.0);
    for (int i = 1; i < cfg.ball_samples; ++i) pattern.push_back(unit_ball_sample(rng, n));
    const auto phases = phase_exponents(cfg, "clarke-phase");

    std::vector<Level> levels(static_cast<std::size_t>(cfg.levels));
    std::size_t samples = 0;
    double tk = cfg.t0;
    for (auto& lv : levels) {
        lv.t = tk;
        double scale = 0.0;
        const double radius = tk * vn;
        for (std::size_t i = 0; i < pattern.size(); ++i) {
            Vector y = axpy(x0, radius, pattern[i]);
            double fy = f.evaluate(y);
            scale = std::max(scale, std::abs(fy));
            for (std::size_t j = 0; j < phases.size(); ++j) {
                double t = tk * std::pow(cfg.gamma, phases[j]);
                double ft = f.evaluate(axpy(y, t, v));
                scale = std::max(scale, std::abs(ft));
                double q = (ft - fy) / t;
                lv.hi = std::max(lv.hi, q);
                lv.lo = std::min(lv.lo, q);
                if (i == 0 && j == 0) lv.base = q;
                ++samples;
            }
        }
        lv.noise = 8.0 * kEps * scale / (tk * cfg.gamma);
        tk *= cfg.gamma;
    }
    DerivativeEstimate est = summarize(levels, Mode::limsup, cfg, samples);
    return est;
}

DerivativeEstimate second_dd(const Expression& f, std::span<const double> x0,
                             std::span<const double> v, const EstimatorConfig& cfg,
                             std::optional<DerivativeEstimate> d1)
{
    cfg.validate();
    check_sizes(f, x0, v);
    if (norm2(v) == 0.0) return exact_zero();
    if (auto e = smooth_second(f, x0, v, cfg)) return *e;
    if (!d1) d1 = gateaux_dd(f, x0, v, cfg);
    if (d1->verdict == Verdict::nonexistent) {
        DerivativeEstimate e;
        e.value = std::numeric_limits<double>::quiet_NaN();
        e.verdict = Verdict::nonexistent;
        e.error_band = std::numeric_limits<double>::infinity();
        e.accuracy = e.error_band;
        return e;
    }
    std::size_t samples = d1->samples;
    auto levels = sample_along_ray(f, x0, v, cfg, 2, d1->value, d1->accuracy, "second", samples);
    return summarize(levels, Mode::limit, cfg, samples);
}

DerivativeEstimate pales_zeidan_dd2(const Expression& f, std::span<const double> x0,
                                    std::span<const double> v, const EstimatorConfig& cfg,
                                    std::optional<DerivativeEstimate> d1)
{
    cfg.validate();
    check_sizes(f, x0, v);
    if (norm2(v) == 0.0) return exact_zero();
    if (auto e = smooth_second(f, x0, v, cfg)) return *e;
    if (!d1) d1 = clarke_dd(f, x0, v, cfg);
    std::size_t samples = d1->samples;
    auto levels = sample_along_ray(f, x0, v, cfg, 2, d1->value, d1->accuracy, "pales-zeidan", samples);
    return summarize(levels, Mode::limsup, cfg, samples);
}

RegularityProbe clarke_regular_probe(const Expression& f, std::span<const double> x0,
                                     const std::vector<Vector>& directions,
                                     const EstimatorConfig& cfg, double abs_tol, double rel_tol)
{
    if (directions.empty()) throw std::invalid_argument("regularity probe needs directions");
    RegularityProbe probe;
    probe.worst_gap = -1.0;
    for (const auto& d : directions) {
        DerivativeEstimate g = gateaux_dd(f, x0, d, cfg);
        DerivativeEstimate c = clarke_dd(f, x0, d, cfg);
        if (g.verdict == Verdict::nonexistent) {
            probe.holds = false;
            probe.derivative_missing = true;
            probe.worst_gap = std::numeric_limits<double>::infinity();
            probe.worst_direction = d;
            return probe;
        }
        double gap = std::abs(g.value - c.value);
        if (gap > probe.worst_gap) {
            probe.worst_gap = gap;
            probe.worst_direction = d;
        }
        if (gap > std::max(abs_tol, rel_tol * std::abs(c.value))) probe.holds = false;
    }
    return probe;
}

double quotient_clarke(double num_clarke, double num_value, double den_value, double den_gateaux)
{
    if (!(den_value > 0.0)) throw std::domain_error("quotient rule needs a positive denominator");
    return (num_clarke - (num_value / den_value) * den_gateaux) / den_value;
}

double affine_clarke(double num_clarke, double beta, double den_gateaux)
{
    if (beta < 0.0) throw std::domain_error("affine rule needs beta >= 0");
    return num_clarke - beta * den_gateaux;
}

namespace {
void require_second(const DerivativeEstimate& d)
{
    if (d.verdict == Verdict::nonexistent)
        throw InapplicableRule(
            "second-order calculus rule inapplicable: the second-order "
            "directional derivative of the subtracted or dividing function does not exist");
}
}  // namespace

double quotient_pz2(double num_pz, double num_value, double den_value,
                    const DerivativeEstimate& den_second)
{
    if (!(den_value > 0.0)) throw std::domain_error("quotient rule needs a positive denominator");
    require_second(den_second);
    return (num_pz - (num_value / den_value) * den_second.value) / den_value;
}

double affine_pz2(double num_pz, double beta, const DerivativeEstimate& den_second)
{
    if (beta < 0.0) throw std::domain_error("affine rule needs beta >= 0");
    require_second(den_second);
    return num_pz - beta * den_second.value;
}

}  // namespace nmfp
