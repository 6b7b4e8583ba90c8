#include "nmfp/sufficiency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmfp/sampling.hpp"

namespace nmfp {

std::string to_string(ConvexityNotion n)
{
    switch (n) {
    case ConvexityNotion::convex2: return "convex2";
    case ConvexityNotion::pseudoconvex2: return "pseudoconvex2";
    case ConvexityNotion::quasiconvex2: return "quasiconvex2";
    case ConvexityNotion::infine2: return "infine2";
    }
    return "?";
}

std::string to_string(CertificateStatus s)
{
    switch (s) {
    case CertificateStatus::certified_on_samples: return "certified-on-samples";
    case CertificateStatus::counterexample: return "counterexample";
    case CertificateStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

std::string to_string(SufficiencyStatus s)
{
    switch (s) {
    case SufficiencyStatus::pareto_efficient: return "pareto-efficient";
    case SufficiencyStatus::weakly_efficient: return "weakly-efficient";
    case SufficiencyStatus::not_certified: return "not-certified";
    case SufficiencyStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

VwSearch default_search(std::size_t n, const std::vector<Vector>& v_directions, int sphere_samples,
                        std::uint64_t seed)
{
    VwSearch s;
    for (const auto& v : v_directions)
        if (norm2(v) >= 1e-9) s.v.push_back(v);
    for (const auto& [w, r] : second_order_pairs(n, sphere_samples, seed))
        if (r == 0.0) s.w.push_back(w);
    return s;
}

int default_sample_resolution(std::size_t n)
{
    if (n <= 2) return 41;
    if (n == 3) return 11;
    return 5;
}

namespace {

constexpr double kMinNorm = 1e-9;

struct Term {
    double value = 0.0;
    double band = 0.0;
    bool usable = true;
};

Term first_term(const Expression& e, std::span<const double> x0, std::span<const double> w,
                const EstimatorConfig& cfg)
{
    DerivativeEstimate d = clarke_dd(e, x0, w, cfg);
    return {d.value, d.error_band, d.verdict == Verdict::converged};
}

Term second_term(const Expression& e, std::span<const double> x0, std::span<const double> v,
                 const EstimatorConfig& cfg)
{
    DerivativeEstimate d = pales_zeidan_dd2(e, x0, v, cfg);
    return {d.value, d.error_band, d.verdict == Verdict::converged};
}

bool satisfied(ConvexityNotion n, double delta, double q, double tol)
{
    switch (n) {
    case ConvexityNotion::convex2: return delta >= q - tol;
    case ConvexityNotion::pseudoconvex2: return delta >= -tol || q < -tol;
    case ConvexityNotion::quasiconvex2: return delta > tol || q <= tol;
    case ConvexityNotion::infine2: return std::abs(delta - q) <= tol;
    }
    return false;
}

double residual(ConvexityNotion n, double delta, double q)
{
    switch (n) {
    case ConvexityNotion::convex2: return std::max(0.0, q - delta);
    case ConvexityNotion::pseudoconvex2: return std::min(std::max(0.0, -delta), std::max(0.0, q));
    case ConvexityNotion::quasiconvex2: return delta > 0.0 ? 0.0 : std::max(0.0, q);
    case ConvexityNotion::infine2: return std::abs(delta - q);
    }
    return 0.0;
}

// Derivative tables of one function over the fixed candidates.
struct Tables {
    std::vector<Term> first;   // over search.w
    std::vector<Term> second;  // over search.v
};

Tables tables_for(const Expression& e, std::span<const double> x0, const VwSearch& s,
                  const EstimatorConfig& cfg)
{
    Tables t;
    for (const auto& w : s.w) t.first.push_back(first_term(e, x0, w, cfg));
    for (const auto& v : s.v) t.second.push_back(second_term(e, x0, v, cfg));
    return t;
}

}  // namespace

ConvexityCertificate certify(const Expression& theta, ConvexityNotion notion,
                             std::span<const double> x0, const std::vector<Vector>& samples,
                             const VwSearch& search, const EstimatorConfig& cfg,
                             const std::optional<std::pair<Vector, Vector>>& common)
{
    ConvexityCertificate cert;
    cert.notion = notion;
    cert.base_point.assign(x0.begin(), x0.end());
    if (common && (norm2(common->first) < kMinNorm || norm2(common->second) < kMinNorm))
        throw std::invalid_argument("common (v, w) must be nonzero");

    const double theta0 = theta(x0);
    Tables tab;
    Term common_a, common_b;
    if (common) {
        common_b = second_term(theta, x0, common->first, cfg);
        common_a = first_term(theta, x0, common->second, cfg);
    } else {
        tab = tables_for(theta, x0, search, cfg);
    }

    for (const auto& x : samples) {
        Vector d(x.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] - x0[i];
        if (norm2(d) < 1e-12) continue;
        ++cert.samples;
        double value;
        try {
            value = theta(x);
        } catch (const DomainError&) {
            ++cert.inconclusive_samples;
            continue;
        }
        const double delta = value - theta0;
        const double tol = kResidualTol * (1.0 + std::abs(value));

        // Candidate lists with x - x0 appended.
        std::vector<std::pair<const Vector*, Term>> As, Bs;
        std::vector<Vector> own;
        own.reserve(1);
        if (common) {
            As.emplace_back(&common->second, common_a);
            Bs.emplace_back(&common->first, common_b);
        } else {
            for (std::size_t k = 0; k < search.w.size(); ++k)
                if (tab.first[k].usable) As.emplace_back(&search.w[k], tab.first[k]);
            for (std::size_t k = 0; k < search.v.size(); ++k)
                if (tab.second[k].usable) Bs.emplace_back(&search.v[k], tab.second[k]);
            if (norm2(d) >= kMinNorm) {
                own.push_back(d);
                Term a = first_term(theta, x0, d, cfg), b = second_term(theta, x0, d, cfg);
                if (a.usable) As.emplace_back(&own.back(), a);
                if (b.usable) Bs.emplace_back(&own.back(), b);
            }
        }
        if (As.empty() || Bs.empty()) {
            ++cert.inconclusive_samples;
            continue;
        }

        bool found = false;
        double best_res = std::numeric_limits<double>::infinity();
        Witness wit;
        for (const auto& [vp, b] : Bs) {
            for (const auto& [wp, a] : As) {
                if (!a.usable || !b.usable) continue;
                const double q = a.value + 0.5 * b.value;
                const double t = tol + a.band + 0.5 * b.band;
                const double res = residual(notion, delta, q);
                if (satisfied(notion, delta, q, t)) {
                    if (!found || res < wit.residual) {
                        wit = {x, *vp, *wp, res};
                        found = true;
                    }
                    if (res == 0.0) break;
                } else {
                    best_res = std::min(best_res, res);
                }
            }
            if (found && wit.residual == 0.0) break;
        }
        if (found) {
            cert.max_residual = std::max(cert.max_residual, wit.residual);
            cert.witnesses.push_back(std::move(wit));
        } else if (!cert.counterexample) {
            cert.counterexample = x;
            cert.counterexample_residual = best_res;
        }
    }
    if (cert.counterexample) cert.status = CertificateStatus::counterexample;
    else if (cert.inconclusive_samples > 0) cert.status = CertificateStatus::inconclusive;
    else cert.status = CertificateStatus::certified_on_samples;
    return cert;
}

JointCertificate certify_joint(const std::vector<PremiseItem>& items, std::span<const double> x0,
                               const std::vector<Vector>& samples, const VwSearch& search,
                               const EstimatorConfig& cfg)
{
    JointCertificate jc;
    std::vector<Tables> tabs;
    std::vector<double> base;
    for (const auto& it : items) {
        tabs.push_back(tables_for(it.expr, x0, search, cfg));
        base.push_back(it.expr(x0));
    }
    bool unsure = false;
    for (const auto& x : samples) {
        Vector d(x.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] - x0[i];
        if (norm2(d) < 1e-12) continue;
        ++jc.samples;

        std::vector<double> delta(items.size()), tol(items.size());
        std::vector<Term> own_a(items.size()), own_b(items.size());
        const bool with_own = norm2(d) >= kMinNorm;
        try {
            for (std::size_t k = 0; k < items.size(); ++k) {
                double value = items[k].expr(x);
                delta[k] = value - base[k];
                tol[k] = kResidualTol * (1.0 + std::abs(value));
                if (with_own) {
                    own_a[k] = first_term(items[k].expr, x0, d, cfg);
                    own_b[k] = second_term(items[k].expr, x0, d, cfg);
                }
            }
        } catch (const DomainError&) {
            unsure = true;
            continue;
        }

        const std::size_t nv = search.v.size() + (with_own ? 1 : 0);
        const std::size_t nw = search.w.size() + (with_own ? 1 : 0);
        // x - x0 is tried first, as the classical choice.
        auto v_at = [&](std::size_t i) -> const Vector& { return with_own ? (i == 0 ? d : search.v[i - 1]) : search.v[i]; };
        auto w_at = [&](std::size_t i) -> const Vector& { return with_own ? (i == 0 ? d : search.w[i - 1]) : search.w[i]; };
        auto a_at = [&](std::size_t k, std::size_t i) -> const Term& {
            return with_own ? (i == 0 ? own_a[k] : tabs[k].first[i - 1]) : tabs[k].first[i];
        };
        auto b_at = [&](std::size_t k, std::size_t i) -> const Term& {
            return with_own ? (i == 0 ? own_b[k] : tabs[k].second[i - 1]) : tabs[k].second[i];
        };

        bool found = false;
        for (std::size_t iv = 0; iv < nv && !found; ++iv) {
            for (std::size_t iw = 0; iw < nw && !found; ++iw) {
                bool all = true;
                double worst = 0.0;
                for (std::size_t k = 0; k < items.size() && all; ++k) {
                    const Term& a = a_at(k, iw);
                    const Term& b = b_at(k, iv);
                    if (!a.usable || !b.usable) {
                        all = false;
                        break;
                    }
                    const double q = a.value + 0.5 * b.value;
                    if (!satisfied(items[k].notion, delta[k], q, tol[k] + a.band + 0.5 * b.band)) all = false;
                    else worst = std::max(worst, residual(items[k].notion, delta[k], q));
                }
                if (all) {
                    found = true;
                    jc.witnesses.push_back({x, v_at(iv), w_at(iw), worst});
                    jc.max_residual = std::max(jc.max_residual, worst);
                }
            }
        }
        if (!found && !jc.counterexample) jc.counterexample = x;
    }
    if (jc.counterexample) jc.status = CertificateStatus::counterexample;
    else if (unsure) jc.status = CertificateStatus::inconclusive;
    else jc.status = CertificateStatus::certified_on_samples;
    return jc;
}

Expression weighted_objective(const FractionalProblem& P, std::span<const double> s,
                              std::span<const double> lambda)
{
    std::vector<Expression> terms;
    for (std::size_t i = 0; i < P.p(); ++i) terms.push_back(P.shifted_objective(i, s[i]));
    return weighted_sum(terms, lambda, P.n);
}

ConditionReport sufficiency_conditions(const FractionalProblem& P, std::span<const double> x0,
                                       const MultiplierVector& mult,
                                       const std::vector<Vector>& critical, const VwSearch& search,
                                       const EstimatorConfig& cfg, const SufficiencyOptions& opts)
{
    if (mult.lambda.size() != P.p() || mult.mu.size() != P.m() || mult.nu.size() != P.l())
        throw std::invalid_argument("multiplier lengths do not match the problem");
    ConditionReport rep;
    const Vector s = s_parameter(P, x0);

    double lsum = 0.0, lmin = std::numeric_limits<double>::infinity();
    for (double l : mult.lambda) {
        lsum += l;
        lmin = std::min(lmin, l);
    }
    const bool lambda_ok = opts.weak ? (lmin >= 0.0 && lsum > 0.0) : lmin > 0.0;
    rep.signs_ok = lambda_ok && std::all_of(mult.mu.begin(), mult.mu.end(), [](double m) { return m >= 0.0; });

    double scale = 1.0;
    for (const auto* vec : {&mult.lambda, &mult.mu, &mult.nu})
        for (double x : *vec) scale = std::max(scale, std::abs(x));
    const double tol = opts.tol * scale;

    bool eq_ok = true;
    for (const auto& w : search.w) {
        double val = 0.0, band = 0.0;
        for (std::size_t i = 0; i < P.p(); ++i) {
            if (mult.lambda[i] == 0.0) continue;
            auto fc = clarke_dd(P.f[i].expr, x0, w, cfg);
            auto Fg = gateaux_dd(P.F[i].expr, x0, w, cfg);
            val += mult.lambda[i] * (fc.value - s[i] * Fg.value);
            band += std::abs(mult.lambda[i]) * (fc.error_band + std::abs(s[i]) * Fg.error_band);
        }
        for (std::size_t j = 0; j < P.m(); ++j) {
            if (mult.mu[j] == 0.0) continue;
            auto gc = clarke_dd(P.g[j].expr, x0, w, cfg);
            val += mult.mu[j] * gc.value;
            band += mult.mu[j] * gc.error_band;
        }
        for (std::size_t k = 0; k < P.l(); ++k) {
            if (mult.nu[k] == 0.0) continue;
            auto hc = clarke_dd(P.h[k].expr, x0, w, cfg);
            val += mult.nu[k] * hc.value;
            band += std::abs(mult.nu[k]) * hc.error_band;
        }
        ++rep.w_checked;
        rep.equality_residual = std::max(rep.equality_residual, std::abs(val));
        if (std::abs(val) > tol + band) eq_ok = false;
    }

    bool curv_ok = true;
    rep.curvature_min = 0.0;
    bool first = true;
    for (const auto& v : critical) {
        double val = 0.0, band = 0.0;
        bool usable = true;
        auto add = [&](double coef, const DerivativeEstimate& e) {
            if (coef == 0.0) return;
            if (e.verdict != Verdict::converged) usable = false;
            val += coef * e.value;
            band += std::abs(coef) * e.error_band;
        };
        for (std::size_t i = 0; i < P.p(); ++i) {
            add(mult.lambda[i], pales_zeidan_dd2(P.f[i].expr, x0, v, cfg));
            add(-mult.lambda[i] * s[i], second_dd(P.F[i].expr, x0, v, cfg));
        }
        for (std::size_t j = 0; j < P.m(); ++j) add(mult.mu[j], pales_zeidan_dd2(P.g[j].expr, x0, v, cfg));
        for (std::size_t k = 0; k < P.l(); ++k) add(mult.nu[k], pales_zeidan_dd2(P.h[k].expr, x0, v, cfg));
        ++rep.v_checked;
        if (!usable) {
            curv_ok = false;
            continue;
        }
        rep.curvature_min = first ? val : std::min(rep.curvature_min, val);
        first = false;
        if (val < -(tol + band)) curv_ok = false;
    }

    double slack = 0.0;
    for (std::size_t j = 0; j < P.m(); ++j) slack += mult.mu[j] * P.g[j](x0);
    rep.slackness = std::abs(slack);
    rep.holds = rep.signs_ok && eq_ok && curv_ok && rep.slackness <= tol;
    return rep;
}

namespace {

enum class Variant { convex, pseudoconvex };

SufficiencyVerdict sufficiency_check(const FractionalProblem& P, std::span<const double> x0,
                                     const MultiplierVector& mult, const EstimatorConfig& cfg,
                                     const SufficiencyOptions& opts, Variant variant)
{
    if (!feasible(P, x0)) throw PreconditionError("sufficiency check requires a feasible point");
    SufficiencyVerdict out;
    const Vector s = s_parameter(P, x0);
    out.critical = critical_directions(P, x0, opts.sphere_samples, opts.seed, cfg, opts.cone).critical;
    VwSearch search = default_search(P.n, out.critical, opts.sphere_samples, opts.seed);
    out.conditions = sufficiency_conditions(P, x0, mult, out.critical, search, cfg, opts);

    std::vector<PremiseItem> items;
    if (variant == Variant::convex) {
        for (std::size_t i = 0; i < P.p(); ++i)
            items.push_back({P.f[i].label + " - s*" + P.F[i].label, P.shifted_objective(i, s[i]),
                             ConvexityNotion::convex2});
        for (const auto& g : P.g) items.push_back({g.label, g.expr, ConvexityNotion::convex2});
    } else {
        items.push_back({"lambda'(f - s*F)", weighted_objective(P, s, mult.lambda),
                         ConvexityNotion::pseudoconvex2});
        if (P.m() > 0) {
            std::vector<Expression> gs;
            for (const auto& g : P.g) gs.push_back(g.expr);
            items.push_back({"mu'g", weighted_sum(gs, mult.mu, P.n), ConvexityNotion::quasiconvex2});
        }
    }
    for (const auto& h : P.h) items.push_back({h.label, h.expr, ConvexityNotion::infine2});

    const int res = opts.sample_resolution > 0 ? opts.sample_resolution : default_sample_resolution(P.n);
    std::vector<Vector> samples = feasible_grid(P, res);

    bool premise_unsure = false, premise_failed = false;
    for (const auto& it : items) {
        ConvexityCertificate c = certify(it.expr, it.notion, x0, samples, search, cfg);
        out.premises.push_back({it.label, it.notion, c.status, c.counterexample});
        premise_failed = premise_failed || c.status == CertificateStatus::counterexample;
        premise_unsure = premise_unsure || c.status == CertificateStatus::inconclusive;
    }
    out.joint = certify_joint(items, x0, samples, search, cfg);

    const int ores = opts.oracle_resolution > 0 ? opts.oracle_resolution : default_grid_resolution(P.n);
    out.oracle = pareto_oracle(P, ores, x0, opts.oracle_box, false).status;

    if (!out.conditions.signs_ok) {
        out.status = SufficiencyStatus::not_certified;
        out.reason = "multiplier signs";
    } else if (!out.conditions.holds) {
        out.status = SufficiencyStatus::not_certified;
        out.reason = "multiplier conditions fail";
    } else if (premise_failed || out.joint.status == CertificateStatus::counterexample) {
        out.status = SufficiencyStatus::not_certified;
        out.reason = "convexity premise has a counterexample";
    } else if (premise_unsure || out.joint.status == CertificateStatus::inconclusive) {
        out.status = SufficiencyStatus::inconclusive;
        out.reason = "convexity premise inconclusive";
    } else {
        out.status = opts.weak ? SufficiencyStatus::weakly_efficient : SufficiencyStatus::pareto_efficient;
        out.reason = "premises certified on samples";
        const bool contradicted = opts.weak ? out.oracle == ParetoStatus::dominated
                                            : (out.oracle == ParetoStatus::dominated ||
                                               out.oracle == ParetoStatus::weakly_efficient_only);
        out.consistent = !contradicted;
    }
    return out;
}

}  // namespace

SufficiencyVerdict convex_sufficiency_check(const FractionalProblem& P, std::span<const double> x0,
                                            const MultiplierVector& mult, const EstimatorConfig& cfg,
                                            const SufficiencyOptions& opts)
{
    return sufficiency_check(P, x0, mult, cfg, opts, Variant::convex);
}

SufficiencyVerdict pseudoconvex_sufficiency_check(const FractionalProblem& P,
                                                  std::span<const double> x0,
                                                  const MultiplierVector& mult,
                                                  const EstimatorConfig& cfg,
                                                  const SufficiencyOptions& opts)
{
    return sufficiency_check(P, x0, mult, cfg, opts, Variant::pseudoconvex);
}

}  // namespace nmfp
