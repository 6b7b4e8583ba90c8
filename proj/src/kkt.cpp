#include "nmfp/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmfp/sampling.hpp"

namespace nmfp {

Vector gateaux_gradient(const Expression& e, const std::string& label, std::span<const double> x0,
                        const EstimatorConfig& cfg)
{
    if (auto g = e.exact_gradient(x0)) return *g;
    const std::size_t n = x0.size();
    Vector grad(n), dir(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        dir[i] = 1.0;
        DerivativeEstimate fwd = gateaux_dd(e, x0, dir, cfg);
        dir[i] = -1.0;
        DerivativeEstimate bwd = gateaux_dd(e, x0, dir, cfg);
        dir[i] = 0.0;
        if (fwd.verdict != Verdict::converged || bwd.verdict != Verdict::converged ||
            std::abs(fwd.value + bwd.value) > 1e-4 * (1.0 + std::abs(fwd.value)) + fwd.error_band + bwd.error_band)
            throw PreconditionError(label + " is not Gateaux differentiable at the point");
        grad[i] = 0.5 * (fwd.value - bwd.value);
    }
    return grad;
}

namespace {

// Curvature entries of the dual system along v.
struct Curvatures {
    Vector s;
    Vector objective;  // f_i°°(v) - s_i F_i''(v)
    std::vector<std::size_t> active_second;
    Vector inequality;  // g_j°°(v), j in J(x0, v)
    Vector equality;    // h_k°°(v)
};

double finite_pz(const ScalarFunction& fn, std::span<const double> x0, std::span<const double> v,
                 const EstimatorConfig& cfg)
{
    DerivativeEstimate e = pales_zeidan_dd2(fn.expr, x0, v, cfg);
    if (e.verdict != Verdict::converged)
        throw PreconditionError("second-order generalized derivative of " + fn.label +
                                " along the direction is not finite");
    return e.value;
}

Curvatures curvatures(const FractionalProblem& P, std::span<const double> x0,
                      std::span<const double> v, const EstimatorConfig& cfg)
{
    Curvatures c;
    c.s = s_parameter(P, x0);
    for (std::size_t i = 0; i < P.p(); ++i) {
        DerivativeEstimate den = second_dd(P.F[i].expr, x0, v, cfg);
        if (den.verdict != Verdict::converged)
            throw PreconditionError("second-order directional derivative of " + P.F[i].label +
                                    " along the direction does not exist");
        c.objective.push_back(finite_pz(P.f[i], x0, v, cfg) - c.s[i] * den.value);
    }
    c.active_second = active_second(P, x0, v, cfg);
    for (std::size_t j : c.active_second) c.inequality.push_back(finite_pz(P.g[j], x0, v, cfg));
    for (const auto& h : P.h) c.equality.push_back(finite_pz(h, x0, v, cfg));
    return c;
}

Vector with_tail(Vector row, double last)
{
    row.push_back(last);
    return row;
}

}  // namespace

DualSystem assemble_dual_system(const FractionalProblem& P, std::span<const double> x0,
                                std::span<const double> v, const EstimatorConfig& cfg)
{
    if (!feasible(P, x0)) throw PreconditionError("dual system requires a feasible point");
    if (v.size() != P.n) throw std::invalid_argument("direction has wrong dimension");
    DualSystem S;
    S.n = P.n;
    S.v.assign(v.begin(), v.end());
    Curvatures c = curvatures(P, x0, v, cfg);
    S.s = c.s;
    S.active = active_inequalities(P, x0);
    S.active_second = c.active_second;
    for (std::size_t i = 0; i < P.p(); ++i) {
        Vector gf = gateaux_gradient(P.f[i].expr, P.f[i].label, x0, cfg);
        Vector gF = gateaux_gradient(P.F[i].expr, P.F[i].label, x0, cfg);
        S.B.push_back(with_tail(axpy(gf, -S.s[i], gF), c.objective[i]));
    }
    for (std::size_t q = 0; q < S.active_second.size(); ++q) {
        const auto& g = P.g[S.active_second[q]];
        S.C.push_back(with_tail(gateaux_gradient(g.expr, g.label, x0, cfg), c.inequality[q]));
    }
    Vector last(P.n + 1, 0.0);
    last[P.n] = -1.0;
    S.C.push_back(last);
    for (std::size_t k = 0; k < P.l(); ++k)
        S.D.push_back(with_tail(gateaux_gradient(P.h[k].expr, P.h[k].label, x0, cfg), c.equality[k]));
    return S;
}

MultiplierVector MultiplierVector::normalized() const
{
    double sum = 0.0;
    for (double l : lambda) sum += l;
    if (!(sum > 0.0)) throw std::invalid_argument("cannot normalize multipliers: sum of lambda is not positive");
    MultiplierVector out = *this;
    for (double& l : out.lambda) l /= sum;
    for (double& m : out.mu) m /= sum;
    for (double& k : out.nu) k /= sum;
    out.margin = out.lambda.empty() ? 0.0 : *std::min_element(out.lambda.begin(), out.lambda.end());
    return out;
}

KktResult solve_strong_kkt_sweep(const FractionalProblem& P, std::span<const double> x0,
                                 const std::vector<Vector>& directions, const EstimatorConfig& cfg,
                                 const KktOptions& opts)
{
    KktResult res;
    std::vector<Vector> dirs = directions;
    if (dirs.empty()) dirs.push_back(Vector(P.n, 0.0));
    for (const auto& v : dirs) res.systems.push_back(assemble_dual_system(P, x0, v, cfg));

    // mu_j may be nonzero only where j belongs to every J(x0, v).
    std::vector<std::size_t> allowed = res.systems.front().active_second;
    for (const auto& S : res.systems) {
        std::vector<std::size_t> keep;
        for (std::size_t j : allowed)
            if (std::find(S.active_second.begin(), S.active_second.end(), j) != S.active_second.end())
                keep.push_back(j);
        allowed = std::move(keep);
    }
    auto c_row = [](const DualSystem& S, std::size_t j) -> const Vector& {
        auto it = std::find(S.active_second.begin(), S.active_second.end(), j);
        return S.C[static_cast<std::size_t>(it - S.active_second.begin())];
    };

    const std::size_t p = P.p(), a = allowed.size(), l = P.l(), n = P.n;
    const std::size_t nv = p + a + l;
    LinearProgram lp;
    lp.num_vars = nv;
    lp.objective.assign(nv, 0.0);
    lp.free.assign(nv, false);
    for (std::size_t k = 0; k < l; ++k) lp.free[p + a + k] = true;

    const DualSystem& S0 = res.systems.front();
    for (std::size_t q = 0; q < n; ++q) {
        Vector row(nv, 0.0);
        for (std::size_t i = 0; i < p; ++i) row[i] = S0.B[i][q];
        for (std::size_t t = 0; t < a; ++t) row[p + t] = c_row(S0, allowed[t])[q];
        for (std::size_t k = 0; k < l; ++k) row[p + a + k] = S0.D[k][q];
        lp.add_eq(std::move(row), 0.0);
    }
    for (const auto& S : res.systems) {
        Vector row(nv, 0.0);
        for (std::size_t i = 0; i < p; ++i) row[i] = -S.B[i][n];
        for (std::size_t t = 0; t < a; ++t) row[p + t] = -c_row(S, allowed[t])[n];
        for (std::size_t k = 0; k < l; ++k) row[p + a + k] = -S.D[k][n];
        lp.add_le(std::move(row), 0.0);
    }
    std::vector<std::size_t> strict(p);
    for (std::size_t i = 0; i < p; ++i) strict[i] = i;

    LpFeasibility fz = lp_feasibility(lp, strict, opts.strict_tol);
    res.lp_status = fz.status;
    res.margin = fz.margin;
    bool accept = fz.status == LpStatus::optimal &&
                  (opts.weak ? fz.margin >= -1e-12 : fz.margin > opts.strict_tol);
    if (accept) {
        MultiplierVector m;
        m.lambda.assign(fz.point.begin(), fz.point.begin() + static_cast<std::ptrdiff_t>(p));
        for (double& x : m.lambda) x = std::max(0.0, x);
        m.mu.assign(P.m(), 0.0);
        for (std::size_t t = 0; t < a; ++t) m.mu[allowed[t]] = std::max(0.0, fz.point[p + t]);
        m.nu.assign(fz.point.begin() + static_cast<std::ptrdiff_t>(p + a), fz.point.end());
        m.margin = fz.margin;
        res.certificate = std::move(m);
    }
    return res;
}

KktResult solve_strong_kkt(const FractionalProblem& P, std::span<const double> x0,
                           std::span<const double> v, const EstimatorConfig& cfg,
                           const KktOptions& opts)
{
    return solve_strong_kkt_sweep(P, x0, {Vector(v.begin(), v.end())}, cfg, opts);
}

std::vector<SlacknessEntry> complementary_slackness_report(const FractionalProblem& P,
                                                           std::span<const double> x0,
                                                           std::span<const double> v,
                                                           const MultiplierVector& mult,
                                                           const EstimatorConfig& cfg)
{
    if (mult.mu.size() != P.m()) throw std::invalid_argument("mu has wrong length");
    std::vector<SlacknessEntry> out;
    for (std::size_t j = 0; j < P.m(); ++j) {
        SlacknessEntry e;
        e.index = j;
        e.value = P.g[j](x0);
        e.multiplier = mult.mu[j];
        e.directional = gateaux_dd(P.g[j].expr, x0, v, cfg).value;
        e.flagged = std::abs(e.multiplier * e.value) > kSlacknessTol ||
                    std::abs(e.multiplier * e.directional) > kSlacknessTol;
        out.push_back(e);
    }
    return out;
}

MultiplierCheck verify_multipliers(const FractionalProblem& P, std::span<const double> x0,
                                   std::span<const double> v, const MultiplierVector& mult,
                                   const EstimatorConfig& cfg, const KktOptions& opts, double tol)
{
    if (mult.lambda.size() != P.p() || mult.mu.size() != P.m() || mult.nu.size() != P.l())
        throw std::invalid_argument("multiplier lengths do not match the problem");
    MultiplierCheck chk;
    const Vector s = s_parameter(P, x0);
    Vector stat(P.n, 0.0);
    double curv = 0.0;
    for (std::size_t i = 0; i < P.p(); ++i) {
        Vector gf = gateaux_gradient(P.f[i].expr, P.f[i].label, x0, cfg);
        Vector gF = gateaux_gradient(P.F[i].expr, P.F[i].label, x0, cfg);
        for (std::size_t q = 0; q < P.n; ++q) stat[q] += mult.lambda[i] * (gf[q] - s[i] * gF[q]);
        DerivativeEstimate den = second_dd(P.F[i].expr, x0, v, cfg);
        if (den.verdict != Verdict::converged)
            throw PreconditionError("second-order directional derivative of " + P.F[i].label +
                                    " along the direction does not exist");
        curv += mult.lambda[i] * (finite_pz(P.f[i], x0, v, cfg) - s[i] * den.value);
    }
    for (std::size_t j = 0; j < P.m(); ++j) {
        if (mult.mu[j] == 0.0) continue;
        Vector gg = gateaux_gradient(P.g[j].expr, P.g[j].label, x0, cfg);
        for (std::size_t q = 0; q < P.n; ++q) stat[q] += mult.mu[j] * gg[q];
        curv += mult.mu[j] * finite_pz(P.g[j], x0, v, cfg);
    }
    for (std::size_t k = 0; k < P.l(); ++k) {
        if (mult.nu[k] == 0.0) continue;
        Vector gh = gateaux_gradient(P.h[k].expr, P.h[k].label, x0, cfg);
        for (std::size_t q = 0; q < P.n; ++q) stat[q] += mult.nu[k] * gh[q];
        curv += mult.nu[k] * finite_pz(P.h[k], x0, v, cfg);
    }
    chk.stationarity_residual = norm_inf(stat);
    chk.curvature_value = curv;

    double lsum = 0.0, lmin = std::numeric_limits<double>::infinity();
    for (double l : mult.lambda) {
        lsum += l;
        lmin = std::min(lmin, l);
    }
    bool lambda_ok = opts.weak ? (lmin >= 0.0 && lsum > 0.0) : lmin > 0.0;
    bool mu_ok = std::all_of(mult.mu.begin(), mult.mu.end(), [](double m) { return m >= 0.0; });
    chk.signs_ok = lambda_ok && mu_ok;

    chk.slackness = complementary_slackness_report(P, x0, v, mult, cfg);
    chk.slackness_ok = std::none_of(chk.slackness.begin(), chk.slackness.end(),
                                    [](const SlacknessEntry& e) { return e.flagged; });
    double scale = std::max(1.0, norm_inf(mult.lambda));
    chk.holds = chk.signs_ok && chk.slackness_ok && chk.stationarity_residual <= tol * scale &&
                chk.curvature_value >= -tol * scale;
    return chk;
}

std::string to_string(PrimalStatus s)
{
    switch (s) {
    case PrimalStatus::incompatible_on_samples: return "incompatible-on-samples";
    case PrimalStatus::solvable: return "solvable";
    }
    return "?";
}

PrimalReport primal_condition_check(const FractionalProblem& P, std::span<const double> x0,
                                    std::span<const double> v, double r, int sphere_samples,
                                    std::uint64_t seed, const EstimatorConfig& cfg)
{
    if (r < 0.0) throw std::invalid_argument("r must be nonnegative");
    if (!feasible(P, x0)) throw PreconditionError("primal condition requires a feasible point");
    const std::size_t n = P.n, p = P.p();
    Curvatures c = curvatures(P, x0, v, cfg);
    PrimalReport rep;

    std::vector<Vector> gradF(p);
    for (std::size_t i = 0; i < p; ++i) gradF[i] = gateaux_gradient(P.F[i].expr, P.F[i].label, x0, cfg);

    // Linearized system: maximize sum tau subject to
    // <B_i, w> + r b_i + tau_i <= 0, constraint rows, |w_q| <= 1, tau_i <= 1.
    std::optional<Vector> lp_w;
    try {
        std::vector<Vector> gf(p), gg, gh;
        bool smooth = true;
        auto grad = [&](const ScalarFunction& fn) {
            smooth = smooth && fn.expr.exact_gradient(x0).has_value();
            return gateaux_gradient(fn.expr, fn.label, x0, cfg);
        };
        for (std::size_t i = 0; i < p; ++i) gf[i] = grad(P.f[i]);
        for (std::size_t j : c.active_second) gg.push_back(grad(P.g[j]));
        for (const auto& h : P.h) gh.push_back(grad(h));
        for (std::size_t i = 0; i < p; ++i) smooth = smooth && P.F[i].expr.exact_gradient(x0).has_value();

        LinearProgram lp;
        lp.num_vars = n + p;
        lp.objective.assign(n + p, 0.0);
        lp.free.assign(n + p, false);
        for (std::size_t q = 0; q < n; ++q) lp.free[q] = true;
        for (std::size_t i = 0; i < p; ++i) {
            lp.objective[n + i] = 1.0;
            Vector row(n + p, 0.0);
            for (std::size_t q = 0; q < n; ++q) row[q] = gf[i][q] - c.s[i] * gradF[i][q];
            row[n + i] = 1.0;
            lp.add_le(std::move(row), -r * c.objective[i]);
            Vector cap(n + p, 0.0);
            cap[n + i] = 1.0;
            lp.add_le(std::move(cap), 1.0);
        }
        for (std::size_t t = 0; t < gg.size(); ++t) {
            Vector row(n + p, 0.0);
            std::copy(gg[t].begin(), gg[t].end(), row.begin());
            lp.add_le(std::move(row), -r * c.inequality[t]);
        }
        for (std::size_t k = 0; k < gh.size(); ++k) {
            Vector row(n + p, 0.0);
            std::copy(gh[k].begin(), gh[k].end(), row.begin());
            lp.add_eq(std::move(row), -r * c.equality[k]);
        }
        for (std::size_t q = 0; q < n; ++q) {
            Vector up(n + p, 0.0);
            up[q] = 1.0;
            lp.add_le(up, 1.0);
            up[q] = -1.0;
            lp.add_le(std::move(up), 1.0);
        }
        LpSolution sol = solve_lp(lp);
        rep.linearization_exact = smooth;
        if (sol.status == LpStatus::optimal && sol.objective > 1e-9) {
            rep.linearization_solvable = true;
            lp_w = Vector(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n));
        }
    } catch (const PreconditionError&) {
        rep.linearization_exact = false;
    }

    std::vector<Vector> cands;
    if (lp_w) cands.push_back(*lp_w);
    auto pairs = second_order_pairs(n, sphere_samples, seed);
    for (const auto& [w, rr] : pairs)
        if (rr == 0.0) cands.push_back(w);

    constexpr double kTol = 1e-6;
    for (const auto& w : cands) {
        ++rep.samples_checked;
        bool ok = true, strict = false;
        try {
            for (std::size_t i = 0; i < p && ok; ++i) {
                DerivativeEstimate fc = clarke_dd(P.f[i].expr, x0, w, cfg);
                double val = fc.value - c.s[i] * dot(gradF[i], w) + r * c.objective[i];
                if (val > kTol + fc.error_band) ok = false;
                if (val < -kTol - fc.error_band) strict = true;
            }
            for (std::size_t t = 0; t < c.active_second.size() && ok; ++t) {
                DerivativeEstimate gc = clarke_dd(P.g[c.active_second[t]].expr, x0, w, cfg);
                if (gc.value + r * c.inequality[t] > kTol + gc.error_band) ok = false;
            }
            for (std::size_t k = 0; k < P.l() && ok; ++k) {
                DerivativeEstimate hc = clarke_dd(P.h[k].expr, x0, w, cfg);
                if (std::abs(hc.value + r * c.equality[k]) > kTol + hc.error_band) ok = false;
            }
        } catch (const DomainError&) {
            ok = false;
        }
        if (ok && strict) {
            rep.status = PrimalStatus::solvable;
            rep.witness = w;
            return rep;
        }
    }
    return rep;
}

}  // namespace nmfp
