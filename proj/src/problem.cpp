#include "nmfp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nmfp/sampling.hpp"

namespace nmfp {

bool Box::contains(std::span<const double> x) const
{
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
}

bool Box::interior(std::span<const double> x, double margin) const
{
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] <= lower[i] + margin || x[i] >= upper[i] - margin) return false;
    return true;
}

void Box::validate() const
{
    if (lower.size() != upper.size()) throw std::invalid_argument("box bounds differ in length");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw std::invalid_argument("box bounds must be finite");
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("box lower bound must be below upper bound in coordinate " +
                                        std::to_string(i + 1));
    }
}

void FractionalProblem::validate() const
{
    if (n == 0) throw std::invalid_argument("problem dimension must be positive");
    if (f.empty()) throw std::invalid_argument("problem needs at least one objective");
    if (f.size() != F.size())
        throw std::invalid_argument("numerator and denominator lists differ in length");
    if (box.dimension() != n) throw std::invalid_argument("box dimension does not match problem");
    box.validate();
    auto check = [&](const std::vector<ScalarFunction>& fs) {
        for (const auto& fn : fs)
            if (fn.dimension() != n)
                throw std::invalid_argument("function " + fn.label + " has wrong arity");
    };
    check(f);
    check(F);
    check(g);
    check(h);
}

Expression FractionalProblem::shifted_objective(std::size_t i, double s) const
{
    if (s == 0.0) return f[i].expr;
    return f[i].expr - s * F[i].expr;
}

Expression FractionalProblem::ratio_expression(std::size_t i) const { return f[i].expr / F[i].expr; }

bool feasible(const FractionalProblem& P, std::span<const double> x, const FeasibilityTolerances& tol)
{
    if (!P.box.contains(x)) return false;
    for (const auto& gj : P.g)
        if (gj(x) > tol.ineq) return false;
    for (const auto& hk : P.h)
        if (std::abs(hk(x)) > tol.eq) return false;
    return true;
}

Vector ratio_objective(const FractionalProblem& P, std::span<const double> x)
{
    Vector r(P.p());
    for (std::size_t i = 0; i < P.p(); ++i) {
        double den = P.F[i](x);
        if (!(den > 0.0))
            throw DomainError("nonpositive denominator " + P.F[i].label + " at a probed point");
        r[i] = P.f[i](x) / den;
    }
    return r;
}

Vector s_parameter(const FractionalProblem& P, std::span<const double> x0) { return ratio_objective(P, x0); }

Vector smfp_objective(const FractionalProblem& P, std::span<const double> x, std::span<const double> s)
{
    Vector r(P.p());
    for (std::size_t i = 0; i < P.p(); ++i) r[i] = P.f[i](x) - s[i] * P.F[i](x);
    return r;
}

std::vector<std::size_t> active_inequalities(const FractionalProblem& P, std::span<const double> x0,
                                             const FeasibilityTolerances& tol)
{
    std::vector<std::size_t> J;
    for (std::size_t j = 0; j < P.m(); ++j)
        if (std::abs(P.g[j](x0)) <= tol.active) J.push_back(j);
    return J;
}

std::vector<std::size_t> active_second(const FractionalProblem& P, std::span<const double> x0,
                                       std::span<const double> v, const EstimatorConfig& cfg,
                                       double deriv_tol, const FeasibilityTolerances& tol)
{
    std::vector<std::size_t> J;
    for (std::size_t j : active_inequalities(P, x0, tol)) {
        DerivativeEstimate d = clarke_dd(P.g[j].expr, x0, v, cfg);
        if (std::abs(d.value) <= deriv_tol + d.accuracy) J.push_back(j);
    }
    return J;
}

int default_grid_resolution(std::size_t n)
{
    if (n <= 2) return 201;
    if (n == 3) return 41;
    return 15;
}

std::vector<Vector> feasible_grid(const FractionalProblem& P, int resolution,
                                  const std::optional<Box>& box, const FeasibilityTolerances& tol)
{
    if (resolution < 1) throw std::invalid_argument("grid resolution must be positive");
    const Box& B = box ? *box : P.box;
    const std::size_t n = P.n;
    std::vector<Vector> axes(n);
    for (std::size_t i = 0; i < n; ++i) {
        axes[i].resize(static_cast<std::size_t>(resolution));
        for (int j = 0; j < resolution; ++j) {
            axes[i][static_cast<std::size_t>(j)] =
                resolution == 1 ? 0.5 * (B.lower[i] + B.upper[i])
                                : B.lower[i] + (B.upper[i] - B.lower[i]) * j / (resolution - 1);
        }
    }
    FractionalProblem grid_problem = P;
    grid_problem.box = B;
    std::vector<Vector> out;
    std::vector<std::size_t> idx(n, 0);
    Vector x(n);
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) x[i] = axes[i][idx[i]];
        if (feasible(grid_problem, x, tol)) out.push_back(x);
        std::size_t i = 0;
        while (i < n && ++idx[i] == static_cast<std::size_t>(resolution)) idx[i++] = 0;
        if (i == n) break;
    }
    return out;
}

std::string to_string(ParetoStatus s)
{
    switch (s) {
    case ParetoStatus::efficient: return "efficient";
    case ParetoStatus::weakly_efficient_only: return "weakly-efficient-only";
    case ParetoStatus::dominated: return "dominated";
    case ParetoStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

bool pareto_dominates(std::span<const double> a, std::span<const double> b)
{
    bool better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i] + kDominanceTol) return false;
        if (a[i] < b[i] - kDominanceTol) better = true;
    }
    return better;
}

bool strictly_dominates(std::span<const double> a, std::span<const double> b)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] < b[i] - kDominanceTol)) return false;
    return true;
}

ParetoStatus classify_image(const std::vector<Vector>& images, std::span<const double> target,
                            std::optional<std::size_t>* witness)
{
    std::optional<std::size_t> weak;
    for (std::size_t k = 0; k < images.size(); ++k) {
        if (strictly_dominates(images[k], target)) {
            if (witness) *witness = k;
            return ParetoStatus::dominated;
        }
        if (!weak && pareto_dominates(images[k], target)) weak = k;
    }
    if (weak) {
        if (witness) *witness = weak;
        return ParetoStatus::weakly_efficient_only;
    }
    return ParetoStatus::efficient;
}

std::vector<std::size_t> nondominated_indices(const std::vector<Vector>& images)
{
    std::vector<std::size_t> order(images.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return images[a] < images[b]; });
    // Lexicographic order: a point can only be dominated by earlier points,
    // up to tolerance ties, which the final pass removes.
    std::vector<std::size_t> front;
    for (std::size_t k : order) {
        bool dominated = false;
        for (std::size_t q : front)
            if (pareto_dominates(images[q], images[k])) {
                dominated = true;
                break;
            }
        if (!dominated) front.push_back(k);
    }
    std::vector<std::size_t> clean;
    for (std::size_t k : front) {
        bool dominated = false;
        for (std::size_t q : front)
            if (q != k && pareto_dominates(images[q], images[k])) {
                dominated = true;
                break;
            }
        if (!dominated) clean.push_back(k);
    }
    std::sort(clean.begin(), clean.end());
    return clean;
}

namespace {

std::vector<Vector> images_of(const FractionalProblem& P, const std::vector<Vector>& pts)
{
    std::vector<Vector> out;
    out.reserve(pts.size());
    for (const auto& x : pts) out.push_back(ratio_objective(P, x));
    return out;
}

}  // namespace

ParetoVerdict pareto_oracle(const FractionalProblem& P, int resolution, std::span<const double> x0,
                            const std::optional<Box>& box, bool with_front)
{
    auto pts = feasible_grid(P, resolution, box);
    if (pts.empty()) throw PreconditionError("pareto oracle: feasible grid is empty");
    ParetoVerdict verdict;
    verdict.feasible_points = pts.size();
    auto imgs = images_of(P, pts);

    if (feasible(P, x0)) {
        std::optional<std::size_t> w;
        verdict.status = classify_image(imgs, ratio_objective(P, x0), &w);
        if (w) {
            verdict.witness = pts[*w];
            verdict.witness_value = imgs[*w];
        }
    } else {
        verdict.status = ParetoStatus::inconclusive;
    }
    if (with_front) {
        for (std::size_t k : nondominated_indices(imgs)) {
            verdict.front.push_back(pts[k]);
            verdict.front_values.push_back(imgs[k]);
        }
    }
    return verdict;
}

bool scalarization_equivalence_check(const FractionalProblem& P, std::span<const double> x0, int resolution,
                   const std::optional<Box>& box)
{
    auto pts = feasible_grid(P, resolution, box);
    if (pts.empty()) return true;
    Vector s = s_parameter(P, x0);
    std::vector<Vector> ratio, shifted;
    for (const auto& x : pts) {
        ratio.push_back(ratio_objective(P, x));
        shifted.push_back(smfp_objective(P, x, s));
    }
    return classify_image(ratio, s) == classify_image(shifted, smfp_objective(P, x0, s));
}

ScalarizationSweep scalarization_sweep(const FractionalProblem& P, int resolution,
                                       const std::optional<Box>& box)
{
    auto pts = feasible_grid(P, resolution, box);
    ScalarizationSweep sweep;
    const std::size_t N = pts.size();
    const std::size_t p = P.p();
    std::vector<Vector> fv(N, Vector(p)), Fv(N, Vector(p)), ratio(N);
    for (std::size_t k = 0; k < N; ++k) {
        for (std::size_t i = 0; i < p; ++i) {
            fv[k][i] = P.f[i](pts[k]);
            Fv[k][i] = P.F[i](pts[k]);
            if (!(Fv[k][i] > 0.0)) throw DomainError("nonpositive denominator " + P.F[i].label);
        }
        ratio[k] = ratio_objective(P, pts[k]);
    }
    std::vector<Vector> shifted(N, Vector(p));
    for (std::size_t a = 0; a < N; ++a) {
        const Vector& s = ratio[a];
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t i = 0; i < p; ++i) shifted[k][i] = fv[k][i] - s[i] * Fv[k][i];
        ParetoStatus r = classify_image(ratio, s);
        ParetoStatus q = classify_image(shifted, shifted[a]);
        ++sweep.points;
        if (r != q) {
            ++sweep.mismatches;
            if (!sweep.first_mismatch) sweep.first_mismatch = pts[a];
        }
    }
    return sweep;
}

BorweinProbe borwein_probe(const FractionalProblem& P, std::span<const double> x0, int resolution,
                           int ray_samples, const std::optional<Box>& box)
{
    BorweinProbe probe;
    auto pts = feasible_grid(P, resolution, box);
    auto imgs = images_of(P, pts);
    const Vector z0 = ratio_objective(P, x0);

    std::optional<std::size_t> w;
    if (classify_image(imgs, z0, &w) != ParetoStatus::efficient) {
        probe.status = BorweinStatus::violated;
        probe.witness = pts[*w];
        Vector d(z0.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = imgs[*w][i] - z0[i];
        probe.direction = normalized(d);
        probe.directions_checked = 1;
        return probe;
    }

    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t k = 0; k < imgs.size(); ++k) {
        Vector d(z0.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = imgs[k][i] - z0[i];
        double dist = norm2(d);
        if (dist > kDominanceTol) near.emplace_back(dist, k);
    }
    std::stable_sort(near.begin(), near.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (near.size() > static_cast<std::size_t>(ray_samples)) near.resize(static_cast<std::size_t>(ray_samples));

    constexpr double kDirTol = 1e-6;
    for (const auto& [dist, k] : near) {
        Vector d(z0.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (imgs[k][i] - z0[i]) / dist;
        ++probe.directions_checked;
        if (*std::max_element(d.begin(), d.end()) <= kDirTol) {
            probe.status = BorweinStatus::violated;
            probe.witness = pts[k];
            probe.direction = d;
            return probe;
        }
    }
    return probe;
}

}  // namespace nmfp
