#include "nmfp/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "nmfp/lp.hpp"
#include "nmfp/sampling.hpp"

namespace nmfp {

std::string to_string(ConeVerdict v)
{
    switch (v) {
    case ConeVerdict::member: return "member";
    case ConeVerdict::non_member: return "non-member";
    case ConeVerdict::inconclusive: return "inconclusive";
    }
    return "?";
}

std::string to_string(ProbeStatus s)
{
    switch (s) {
    case ProbeStatus::holds_on_samples: return "holds-on-samples";
    case ProbeStatus::violated: return "violated";
    case ProbeStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

void ConeSearchConfig::validate() const
{
    if (!(t0 > 0.0)) throw std::invalid_argument("cone search t0 must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("cone search gamma must lie in (0,1)");
    if (tail < 1 || levels < tail) throw std::invalid_argument("cone search needs levels >= tail >= 1");
    if (!(cap > 0.0)) throw std::invalid_argument("cone search cap must be positive");
}

double constraint_violation(const FractionalProblem& P, std::span<const double> x)
{
    double v = 0.0;
    try {
        for (const auto& g : P.g) v += std::max(0.0, g(x));
        for (const auto& h : P.h) v += std::abs(h(x));
    } catch (const DomainError&) {
        return std::numeric_limits<double>::infinity();
    }
    return v;
}

namespace {

Vector gradient_of(const Expression& e, std::span<const double> x)
{
    if (auto g = e.exact_gradient(x)) return *g;
    const std::size_t n = x.size();
    Vector grad(n), y(x.begin(), x.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[i]));
        y[i] = x[i] + h;
        double fp = e(y);
        y[i] = x[i] - h;
        double fm = e(y);
        y[i] = x[i];
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double distance(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

ConeVerdict tail_verdict(const std::vector<bool>& found, int tail)
{
    int hits = 0;
    for (std::size_t k = found.size() - static_cast<std::size_t>(tail); k < found.size(); ++k)
        hits += found[k] ? 1 : 0;
    if (hits == tail) return ConeVerdict::member;
    if (hits == 0) return ConeVerdict::non_member;
    return ConeVerdict::inconclusive;
}

}  // namespace

std::optional<Vector> correct_to_feasible(const FractionalProblem& P, std::span<const double> start,
                                          double radius, const ConeSearchConfig& cfg)
{
    Vector y(start.begin(), start.end());
    double viol = constraint_violation(P, y);
    const std::size_t n = y.size();
    for (int it = 0; it <= cfg.max_iterations; ++it) {
        if (viol <= cfg.feas_tol) {
            if (distance(y, start) <= radius) return y;
            return std::nullopt;
        }
        if (it == cfg.max_iterations || !std::isfinite(viol)) break;

        std::vector<Vector> rows;
        std::vector<double> res;
        for (const auto& g : P.g) {
            double gv = g(y);
            if (gv > 0.0) {
                rows.push_back(gradient_of(g.expr, y));
                res.push_back(gv);
            }
        }
        for (const auto& h : P.h) {
            rows.push_back(gradient_of(h.expr, y));
            res.push_back(h(y));
        }
        Eigen::MatrixXd J(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
        Eigen::VectorXd r(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < n; ++j)
                J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            r(static_cast<Eigen::Index>(i)) = res[i];
        }
        Eigen::VectorXd step = -J.completeOrthogonalDecomposition().solve(r);
        if (!step.allFinite() || step.norm() == 0.0) break;

        double alpha = 1.0;
        bool improved = false;
        Vector trial(n);
        while (alpha > 1e-4) {
            for (std::size_t j = 0; j < n; ++j) trial[j] = y[j] + alpha * step(static_cast<Eigen::Index>(j));
            double tv = constraint_violation(P, trial);
            if (tv < viol) {
                y = trial;
                viol = tv;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) break;
        if (distance(y, start) > 4.0 * radius) break;
    }
    return std::nullopt;
}

ConeVerdict contingent_member(const FractionalProblem& P, std::span<const double> x0,
                              std::span<const double> d, const ConeSearchConfig& cfg)
{
    cfg.validate();
    const double dn = norm2(d);
    if (dn == 0.0) return ConeVerdict::member;
    const Vector dir = scaled(d, 1.0 / dn);
    std::vector<bool> found;
    Vector y(x0.size());
    for (int k = 0; k < cfg.levels; ++k) {
        const double t = cfg.t0 * std::pow(cfg.gamma, k);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = x0[i] + t * dir[i];
        found.push_back(correct_to_feasible(P, y, cfg.cap * t * std::sqrt(t), cfg).has_value());
    }
    return tail_verdict(found, cfg.tail);
}

namespace {

struct ValueWithBand {
    double value;
    double band;
};

ValueWithBand ratio_clarke(const FractionalProblem& P, std::size_t i, std::span<const double> x0,
                           std::span<const double> d, const EstimatorConfig& ecfg)
{
    DerivativeEstimate nc = clarke_dd(P.f[i].expr, x0, d, ecfg);
    DerivativeEstimate dg = gateaux_dd(P.F[i].expr, x0, d, ecfg);
    double num = P.f[i](x0), den = P.F[i](x0);
    double val = quotient_clarke(nc.value, num, den, dg.value);
    double band = (nc.error_band + std::abs(num / den) * dg.error_band) / den;
    return {val, band};
}

}  // namespace

LinearizingCheck linearizing_member(const FractionalProblem& P, std::span<const double> x0,
                                    std::span<const double> d, const EstimatorConfig& ecfg,
                                    double deriv_tol)
{
    LinearizingCheck out;
    out.active = active_inequalities(P, x0);
    bool ok = true, doubtful = false;
    auto judge_le = [&](double value, double band) {
        if (value > deriv_tol + band) ok = false;
        else if (value > deriv_tol) doubtful = true;
    };
    auto judge_eq = [&](double value, double band) {
        if (std::abs(value) > deriv_tol + band) ok = false;
        else if (std::abs(value) > deriv_tol) doubtful = true;
    };
    try {
        for (std::size_t i = 0; i < P.p(); ++i) {
            auto rc = ratio_clarke(P, i, x0, d, ecfg);
            out.objective_values.push_back(rc.value);
            judge_le(rc.value, rc.band);
        }
        for (std::size_t j : out.active) {
            auto e = clarke_dd(P.g[j].expr, x0, d, ecfg);
            out.inequality_values.push_back(e.value);
            judge_le(e.value, e.error_band);
        }
        for (const auto& h : P.h) {
            // h° along d and along -d both vanish exactly when h is flat along d.
            auto e = clarke_dd(h.expr, x0, d, ecfg);
            out.equality_values.push_back(e.value);
            judge_eq(e.value, e.error_band);
        }
    } catch (const DomainError&) {
        out.verdict = ConeVerdict::inconclusive;
        return out;
    }
    out.verdict = !ok ? ConeVerdict::non_member : (doubtful ? ConeVerdict::inconclusive : ConeVerdict::member);
    return out;
}

CriticalDirections critical_directions(const FractionalProblem& P, std::span<const double> x0,
                                       int sphere_samples, std::uint64_t seed,
                                       const EstimatorConfig& ecfg, const ConeSearchConfig& ccfg)
{
    const std::size_t n = P.n;
    std::vector<Vector> dirs;
    auto push_unique = [&](Vector d) {
        double nd = norm2(d);
        if (nd < 1e-12) return;
        d = scaled(d, 1.0 / nd);
        for (const auto& e : dirs)
            if (distance(e, d) < 1e-9) return;
        dirs.push_back(std::move(d));
    };
    for (std::size_t i = 0; i < n; ++i) {
        Vector e(n, 0.0);
        e[i] = 1.0;
        push_unique(e);
        e[i] = -1.0;
        push_unique(e);
    }

    // Null space of the gradients of the active constraints.
    std::vector<Vector> grads;
    for (std::size_t j : active_inequalities(P, x0)) grads.push_back(gradient_of(P.g[j].expr, x0));
    for (const auto& h : P.h) grads.push_back(gradient_of(h.expr, x0));
    if (!grads.empty()) {
        Eigen::MatrixXd A(static_cast<Eigen::Index>(grads.size()), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < grads.size(); ++i)
            for (std::size_t j = 0; j < n; ++j)
                A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = grads[i][j];
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        lu.setThreshold(1e-10);
        Eigen::MatrixXd K = lu.kernel();
        if (lu.rank() < static_cast<Eigen::Index>(n)) {
            for (Eigen::Index c = 0; c < K.cols(); ++c) {
                Vector k(n);
                for (std::size_t j = 0; j < n; ++j) k[j] = K(static_cast<Eigen::Index>(j), c);
                push_unique(k);
                push_unique(scaled(k, -1.0));
            }
        }
    }

    Rng rng(derive_seed(seed, "critical-directions"));
    for (int s = 0; s < sphere_samples; ++s) push_unique(unit_sphere_sample(rng, n));

    CriticalDirections out;
    for (auto& d : dirs) {
        DirectionSample ds;
        ds.direction = d;
        ds.tangent = contingent_member(P, x0, d, ccfg);
        ds.linearizing = linearizing_member(P, x0, d, ecfg).verdict;
        if (ds.critical()) out.critical.push_back(d);
        out.samples.push_back(std::move(ds));
    }
    return out;
}

ConeVerdict tangent2_member(const FractionalProblem& P, std::span<const double> x0,
                            std::span<const double> v, std::span<const double> w, double r,
                            const ConeSearchConfig& cfg)
{
    cfg.validate();
    if (r < 0.0) throw std::invalid_argument("second-order cone scale r must be nonnegative");
    const double wscale = std::max(1.0, norm2(w));
    std::vector<bool> found;
    Vector y(x0.size());
    for (int k = 0; k < cfg.levels; ++k) {
        const double s = cfg.t0 * std::pow(cfg.gamma, k);
        const double t = r > 0.0 ? std::sqrt(r * s) : std::pow(s, 2.0 / 3.0);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = x0[i] + t * v[i] + 0.5 * s * w[i];
        const double radius = 0.5 * s * cfg.cap * std::sqrt(s) * wscale;
        found.push_back(correct_to_feasible(P, y, radius, cfg).has_value());
    }
    return tail_verdict(found, cfg.tail);
}

namespace {

// Curvature terms along v that do not depend on (w, r).
struct CurvatureTerms {
    std::vector<std::size_t> active;
    std::vector<DerivativeEstimate> objective;
    std::vector<DerivativeEstimate> inequality;
    std::vector<DerivativeEstimate> equality;
    bool failed = false;
};

CurvatureTerms curvature_terms(const FractionalProblem& P, std::span<const double> x0,
                               std::span<const double> v, const EstimatorConfig& ecfg)
{
    CurvatureTerms c;
    try {
        c.active = active_second(P, x0, v, ecfg);
        for (std::size_t i = 0; i < P.p(); ++i)
            c.objective.push_back(pales_zeidan_dd2(P.ratio_expression(i), x0, v, ecfg));
        for (std::size_t j : c.active) c.inequality.push_back(pales_zeidan_dd2(P.g[j].expr, x0, v, ecfg));
        for (const auto& h : P.h) c.equality.push_back(pales_zeidan_dd2(h.expr, x0, v, ecfg));
    } catch (const DomainError&) {
        c.failed = true;
    }
    return c;
}

Linearizing2Check linearizing2_with(const FractionalProblem& P, std::span<const double> x0,
                                    const CurvatureTerms& c, std::span<const double> w, double r,
                                    const EstimatorConfig& ecfg, double deriv_tol)
{
    Linearizing2Check out;
    out.active_second = c.active;
    if (c.failed) return out;
    bool ok = true, doubtful = false;
    auto curvature = [&](const DerivativeEstimate& e, double& band) -> std::optional<double> {
        if (r == 0.0) return 0.0;
        if (e.verdict != Verdict::converged) return std::nullopt;
        band += r * e.error_band;
        return r * e.value;
    };
    auto judge = [&](double value, double band, bool equality) {
        double a = equality ? std::abs(value) : value;
        if (a > deriv_tol + band) ok = false;
        else if (a > deriv_tol) doubtful = true;
    };
    try {
        for (std::size_t i = 0; i < P.p(); ++i) {
            auto rc = ratio_clarke(P, i, x0, w, ecfg);
            double band = rc.band;
            auto cv = curvature(c.objective[i], band);
            if (!cv) return out;
            out.objective_values.push_back(rc.value + *cv);
            judge(rc.value + *cv, band, false);
        }
        for (std::size_t q = 0; q < c.active.size(); ++q) {
            auto e = clarke_dd(P.g[c.active[q]].expr, x0, w, ecfg);
            double band = e.error_band;
            auto cv = curvature(c.inequality[q], band);
            if (!cv) return out;
            out.inequality_values.push_back(e.value + *cv);
            judge(e.value + *cv, band, false);
        }
        for (std::size_t k = 0; k < P.l(); ++k) {
            auto e = clarke_dd(P.h[k].expr, x0, w, ecfg);
            double band = e.error_band;
            auto cv = curvature(c.equality[k], band);
            if (!cv) return out;
            out.equality_values.push_back(e.value + *cv);
            judge(e.value + *cv, band, true);
        }
    } catch (const DomainError&) {
        return out;
    }
    out.verdict = !ok ? ConeVerdict::non_member : (doubtful ? ConeVerdict::inconclusive : ConeVerdict::member);
    return out;
}

}  // namespace

Linearizing2Check linearizing2_member(const FractionalProblem& P, std::span<const double> x0,
                                      std::span<const double> v, std::span<const double> w,
                                      double r, const EstimatorConfig& ecfg, double deriv_tol)
{
    if (r < 0.0) throw std::invalid_argument("second-order cone scale r must be nonnegative");
    return linearizing2_with(P, x0, curvature_terms(P, x0, v, ecfg), w, r, ecfg, deriv_tol);
}

std::vector<std::pair<Vector, double>> second_order_pairs(std::size_t n, int sphere_samples,
                                                          std::uint64_t seed)
{
    std::vector<Vector> ws;
    if (n <= 4) {
        std::vector<int> idx(n, -1);
        for (;;) {
            Vector w(n);
            bool zero = true;
            for (std::size_t i = 0; i < n; ++i) {
                w[i] = idx[i];
                zero = zero && idx[i] == 0;
            }
            if (!zero) ws.push_back(w);
            std::size_t i = 0;
            while (i < n && ++idx[i] == 2) idx[i++] = -1;
            if (i == n) break;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            Vector e(n, 0.0);
            e[i] = 1.0;
            ws.push_back(e);
            e[i] = -1.0;
            ws.push_back(e);
        }
    }
    Rng rng(derive_seed(seed, "second-order-pairs"));
    for (int s = 0; s < sphere_samples; ++s) ws.push_back(unit_sphere_sample(rng, n));

    std::vector<std::pair<Vector, double>> pairs;
    for (double r : {0.0, 0.5, 1.0, 2.0})
        for (const auto& w : ws) pairs.emplace_back(w, r);
    return pairs;
}

RegularityReport second_order_abadie_probe(const FractionalProblem& P, std::span<const double> x0,
                                           std::span<const double> v, int sphere_samples,
                                           std::uint64_t seed, const EstimatorConfig& ecfg,
                                           const ConeSearchConfig& ccfg)
{
    RegularityReport rep;
    const CurvatureTerms c = curvature_terms(P, x0, v, ecfg);
    bool unsure = c.failed;
    for (const auto& [w, r] : second_order_pairs(P.n, sphere_samples, seed)) {
        ++rep.pairs_sampled;
        auto lin = linearizing2_with(P, x0, c, w, r, ecfg, kDerivTol);
        if (lin.verdict != ConeVerdict::member) continue;
        ++rep.pairs_tested;
        ConeVerdict tv = tangent2_member(P, x0, v, w, r, ccfg);
        if (tv == ConeVerdict::non_member) {
            rep.status = ProbeStatus::violated;
            rep.witness_w = w;
            rep.witness_r = r;
            return rep;
        }
        if (tv == ConeVerdict::inconclusive) unsure = true;
    }
    rep.status = unsure ? ProbeStatus::inconclusive : ProbeStatus::holds_on_samples;
    return rep;
}

RegularityReport second_order_guignard_probe(const FractionalProblem& P, std::span<const double> x0,
                                             std::span<const double> v, int sphere_samples,
                                             std::uint64_t seed, const EstimatorConfig& ecfg,
                                             const ConeSearchConfig& ccfg)
{
    RegularityReport rep;
    const CurvatureTerms c = curvature_terms(P, x0, v, ecfg);
    auto pairs = second_order_pairs(P.n, sphere_samples, seed);

    std::vector<Vector> tangent;  // generators (w, r) of the sampled tangent cone
    std::vector<std::pair<Vector, double>> linearizing;
    bool unsure = c.failed;
    for (const auto& [w, r] : pairs) {
        ++rep.pairs_sampled;
        if (tangent2_member(P, x0, v, w, r, ccfg) == ConeVerdict::member) {
            Vector g = w;
            g.push_back(r);
            tangent.push_back(std::move(g));
        }
        auto lin = linearizing2_with(P, x0, c, w, r, ecfg, kDerivTol);
        if (lin.verdict == ConeVerdict::member) linearizing.emplace_back(w, r);
        else if (lin.verdict == ConeVerdict::inconclusive) unsure = true;
    }

    const std::size_t dim = P.n + 1;
    for (const auto& [w, r] : linearizing) {
        ++rep.pairs_tested;
        // sum_k alpha_k g_k = (w, r), alpha >= 0.
        LinearProgram lp;
        lp.num_vars = tangent.size();
        lp.objective.assign(tangent.size(), 0.0);
        bool in_hull = false;
        if (!tangent.empty()) {
            for (std::size_t q = 0; q < dim; ++q) {
                Vector row(tangent.size());
                for (std::size_t k = 0; k < tangent.size(); ++k) row[k] = tangent[k][q];
                lp.add_eq(std::move(row), q < P.n ? w[q] : r);
            }
            in_hull = solve_lp(lp).status == LpStatus::optimal;
        }
        if (!in_hull) {
            rep.status = ProbeStatus::violated;
            rep.witness_w = w;
            rep.witness_r = r;
            return rep;
        }
    }
    rep.status = unsure ? ProbeStatus::inconclusive : ProbeStatus::holds_on_samples;
    return rep;
}

}  // namespace nmfp
