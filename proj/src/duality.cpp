#include "nmfp/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmfp/sampling.hpp"

namespace nmfp {

std::string to_string(DualFeasibility s)
{
    switch (s) {
    case DualFeasibility::feasible: return "feasible";
    case DualFeasibility::infeasible: return "infeasible";
    case DualFeasibility::inconclusive: return "inconclusive";
    }
    return "?";
}

DualFeasibilityReport mond_weir_feasible(const FractionalProblem& P, const DualPoint& dp,
                                         const EstimatorConfig& cfg, const DualityOptions& opts,
                                         const std::optional<std::vector<Vector>>& directions)
{
    const auto& u = dp.u;
    const auto& m = dp.mult;
    if (u.size() != P.n) throw std::invalid_argument("dual point has wrong dimension");
    if (m.lambda.size() != P.p() || m.mu.size() != P.m() || m.nu.size() != P.l())
        throw std::invalid_argument("multiplier lengths do not match the problem");
    if (!P.box.contains(u)) throw PreconditionError("dual point lies outside the domain box");
    const Vector s = s_parameter(P, u);  // throws on a nonpositive denominator

    DualFeasibilityReport rep;
    bool failed = false, unsure = false;
    auto fail = [&](const std::string& why) {
        if (!failed) rep.reason = why;
        failed = true;
    };

    double lsum = 0.0, lmin = std::numeric_limits<double>::infinity();
    for (double l : m.lambda) {
        lsum += l;
        lmin = std::min(lmin, l);
    }
    rep.signs_ok = (opts.weak ? lmin >= 0.0 : lmin > 0.0) &&
                   std::all_of(m.mu.begin(), m.mu.end(), [](double x) { return x >= 0.0; });
    rep.normalized = std::abs(lsum - 1.0) <= 1e-9;
    if (!rep.signs_ok) fail("multiplier signs");
    if (!rep.normalized) fail("lambda does not sum to one");

    double scale = 1.0;
    for (const auto* vec : {&m.lambda, &m.mu, &m.nu})
        for (double x : *vec) scale = std::max(scale, std::abs(x));
    const double tol = opts.tol * scale;

    try {
        Vector stat(P.n, 0.0);
        for (std::size_t i = 0; i < P.p(); ++i) {
            Vector gf = gateaux_gradient(P.f[i].expr, P.f[i].label, u, cfg);
            Vector gF = gateaux_gradient(P.F[i].expr, P.F[i].label, u, cfg);
            for (std::size_t q = 0; q < P.n; ++q) stat[q] += m.lambda[i] * (gf[q] - s[i] * gF[q]);
        }
        for (std::size_t j = 0; j < P.m(); ++j) {
            if (m.mu[j] == 0.0) continue;
            Vector gg = gateaux_gradient(P.g[j].expr, P.g[j].label, u, cfg);
            for (std::size_t q = 0; q < P.n; ++q) stat[q] += m.mu[j] * gg[q];
        }
        for (std::size_t k = 0; k < P.l(); ++k) {
            if (m.nu[k] == 0.0) continue;
            Vector gh = gateaux_gradient(P.h[k].expr, P.h[k].label, u, cfg);
            for (std::size_t q = 0; q < P.n; ++q) stat[q] += m.nu[k] * gh[q];
        }
        rep.stationarity_residual = norm_inf(stat);
        if (rep.stationarity_residual > tol) fail("stationarity");
    } catch (const PreconditionError&) {
        unsure = true;
        if (rep.reason.empty()) rep.reason = "gradient unavailable";
    }

    if (directions) rep.directions = *directions;
    else if (feasible(P, u))
        rep.directions = critical_directions(P, u, opts.sphere_samples, opts.seed, cfg, opts.cone).critical;

    bool first = true;
    for (const auto& v : rep.directions) {
        double val = 0.0, band = 0.0;
        bool usable = true;
        auto add = [&](double coef, const DerivativeEstimate& e) {
            if (coef == 0.0) return;
            if (e.verdict != Verdict::converged) usable = false;
            val += coef * e.value;
            band += std::abs(coef) * e.error_band;
        };
        for (std::size_t i = 0; i < P.p(); ++i) {
            add(m.lambda[i], pales_zeidan_dd2(P.f[i].expr, u, v, cfg));
            add(-m.lambda[i] * s[i], second_dd(P.F[i].expr, u, v, cfg));
        }
        for (std::size_t j = 0; j < P.m(); ++j) add(m.mu[j], pales_zeidan_dd2(P.g[j].expr, u, v, cfg));
        for (std::size_t k = 0; k < P.l(); ++k) add(m.nu[k], pales_zeidan_dd2(P.h[k].expr, u, v, cfg));
        if (!usable) {
            unsure = true;
            continue;
        }
        rep.curvature_min = first ? val : std::min(rep.curvature_min, val);
        first = false;
        if (val < -(tol + band)) fail("curvature inequality");
    }

    double cv = 0.0;
    for (std::size_t j = 0; j < P.m(); ++j) cv += m.mu[j] * P.g[j](u);
    for (std::size_t k = 0; k < P.l(); ++k) cv += m.nu[k] * P.h[k](u);
    rep.constraint_value = cv;
    if (cv < -tol) fail("constraint block");

    rep.status = failed ? DualFeasibility::infeasible
                        : (unsure ? DualFeasibility::inconclusive : DualFeasibility::feasible);
    return rep;
}

namespace {

CertificateStatus worst(CertificateStatus a, CertificateStatus b)
{
    if (a == CertificateStatus::counterexample || b == CertificateStatus::counterexample)
        return CertificateStatus::counterexample;
    if (a == CertificateStatus::inconclusive || b == CertificateStatus::inconclusive)
        return CertificateStatus::inconclusive;
    return CertificateStatus::certified_on_samples;
}

}  // namespace

DualPremises weak_duality_premises(const FractionalProblem& P, std::span<const double> u,
                                   const std::vector<Vector>& domain_samples,
                                   const EstimatorConfig& cfg, const DualityOptions& opts)
{
    DualPremises out;
    out.objective = out.inequality = out.equality = CertificateStatus::certified_on_samples;
    const Vector s = s_parameter(P, u);
    VwSearch base = default_search(P.n, {}, opts.sphere_samples, opts.seed);
    base.v = base.w;
    auto run = [&](const Expression& e, ConvexityNotion n, CertificateStatus& slot) {
        ConvexityCertificate c = certify(e, n, u, domain_samples, base, cfg);
        slot = worst(slot, c.status);
        if (c.counterexample && !out.counterexample) out.counterexample = c.counterexample;
    };
    for (std::size_t i = 0; i < P.p(); ++i)
        run(P.shifted_objective(i, s[i]), ConvexityNotion::convex2, out.objective);
    for (const auto& g : P.g) run(g.expr, ConvexityNotion::convex2, out.inequality);
    for (const auto& h : P.h) run(h.expr, ConvexityNotion::infine2, out.equality);
    return out;
}

WeakDualityReport weak_duality_sweep(const FractionalProblem& P, const std::vector<Vector>& primal_grid,
                                     const std::vector<DualPoint>& duals,
                                     const std::vector<Vector>& domain_samples,
                                     const EstimatorConfig& cfg, const DualityOptions& opts)
{
    WeakDualityReport rep;
    std::vector<Vector> xs, fx;
    for (const auto& x : primal_grid) {
        if (!feasible(P, x)) continue;
        xs.push_back(x);
        fx.push_back(ratio_objective(P, x));
    }
    for (std::size_t d = 0; d < duals.size(); ++d) {
        const DualPoint& dp = duals[d];
        rep.feasibility.push_back(mond_weir_feasible(P, dp, cfg, opts).status);
        rep.premises.push_back(weak_duality_premises(P, dp.u, domain_samples, cfg, opts));
        const Vector fu = ratio_objective(P, dp.u);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            ++rep.pairs;
            bool below = opts.weak ? strictly_dominates(fx[k], fu) : pareto_dominates(fx[k], fu);
            if (below) rep.violations.push_back({xs[k], d, fx[k], fu});
        }
    }
    return rep;
}

StrongDualityResult strong_duality_construct(const FractionalProblem& P, std::span<const double> x0,
                                             std::span<const double> v, const EstimatorConfig& cfg,
                                             const DualityOptions& opts)
{
    if (!feasible(P, x0)) throw PreconditionError("strong duality requires a feasible point");
    StrongDualityResult out;
    out.abadie = second_order_abadie_probe(P, x0, v, opts.sphere_samples, opts.seed, cfg, opts.cone);

    std::vector<Vector> dirs{Vector(v.begin(), v.end())};
    for (auto& d : critical_directions(P, x0, opts.sphere_samples, opts.seed, cfg, opts.cone).critical)
        dirs.push_back(std::move(d));
    KktOptions kopts;
    kopts.weak = opts.weak;
    KktResult kr = solve_strong_kkt_sweep(P, x0, dirs, cfg, kopts);
    out.margin = kr.margin;
    out.lp_status = kr.lp_status;
    if (!kr.certificate) return out;

    DualPoint dp;
    dp.u.assign(x0.begin(), x0.end());
    dp.mult = kr.certificate->normalized();
    dp.directions = dirs;
    out.feasibility = mond_weir_feasible(P, dp, cfg, opts, dirs);
    const Vector primal = ratio_objective(P, x0);
    const Vector dual = ratio_objective(P, dp.u);
    Vector gap(primal.size());
    for (std::size_t i = 0; i < gap.size(); ++i) gap[i] = dual[i] - primal[i];
    out.gap = gap;
    out.point = std::move(dp);
    return out;
}

ConverseDualityReport converse_duality_check(const FractionalProblem& P, const DualPoint& dp,
                                             const EstimatorConfig& cfg, const DualityOptions& opts,
                                             int sample_resolution, int oracle_resolution,
                                             const std::optional<Box>& oracle_box)
{
    if (!feasible(P, dp.u)) throw PreconditionError("converse duality requires u in the feasible set");
    ConverseDualityReport rep;
    rep.feasibility = mond_weir_feasible(P, dp, cfg, opts);

    const Vector s = s_parameter(P, dp.u);
    std::vector<PremiseItem> items;
    items.push_back({"lambda'(f - s*F)", weighted_objective(P, s, dp.mult.lambda),
                     ConvexityNotion::pseudoconvex2});
    if (P.m() > 0) {
        std::vector<Expression> gs;
        for (const auto& g : P.g) gs.push_back(g.expr);
        items.push_back({"mu'g", weighted_sum(gs, dp.mult.mu, P.n), ConvexityNotion::quasiconvex2});
    }
    for (const auto& h : P.h) items.push_back({h.label, h.expr, ConvexityNotion::infine2});

    const int res = sample_resolution > 0 ? sample_resolution : default_sample_resolution(P.n);
    VwSearch search = default_search(P.n, rep.feasibility.directions, opts.sphere_samples, opts.seed);
    rep.premises = certify_joint(items, dp.u, feasible_grid(P, res), search, cfg);

    const int ores = oracle_resolution > 0 ? oracle_resolution : default_grid_resolution(P.n);
    rep.oracle = pareto_oracle(P, ores, dp.u, oracle_box, false).status;

    if (rep.feasibility.status == DualFeasibility::infeasible ||
        rep.premises.status == CertificateStatus::counterexample) {
        rep.theorem = SufficiencyStatus::not_certified;
    } else if (rep.feasibility.status == DualFeasibility::inconclusive ||
               rep.premises.status == CertificateStatus::inconclusive) {
        rep.theorem = SufficiencyStatus::inconclusive;
    } else {
        rep.theorem = opts.weak ? SufficiencyStatus::weakly_efficient : SufficiencyStatus::pareto_efficient;
        rep.consistent = opts.weak ? rep.oracle != ParetoStatus::dominated
                                   : rep.oracle == ParetoStatus::efficient;
    }
    return rep;
}

}  // namespace nmfp
