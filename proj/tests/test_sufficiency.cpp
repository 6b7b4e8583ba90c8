#include <doctest.h>

#include <random>

#include "nmfp/sufficiency.hpp"
#include "support.hpp"

using namespace nmfp;
using testing::ex;
using testing::fn;

namespace {

std::vector<Vector> line_samples(double lo, double hi, int n)
{
    std::vector<Vector> out;
    for (int i = 0; i < n; ++i) out.push_back({lo + (hi - lo) * i / (n - 1)});
    return out;
}

constexpr ConvexityNotion kNotions[] = {ConvexityNotion::convex2, ConvexityNotion::pseudoconvex2,
                                        ConvexityNotion::quasiconvex2, ConvexityNotion::infine2};

}  // namespace

TEST_CASE("sufficiency: one-dimensional notions")
{
    EstimatorConfig e;
    const auto xs = line_samples(-1, 1, 21);
    auto search = default_search(1, {}, 4, 0);
    const Vector z{0.0};
    auto status = [&](const char* src, ConvexityNotion n) {
        return certify(ex(src), n, z, xs, search, e).status;
    };
    for (auto n : kNotions) {
        if (n != ConvexityNotion::infine2) {
            CHECK(status("x1^2", n) == CertificateStatus::certified_on_samples);
            CHECK(status("abs(x1)", n) == CertificateStatus::certified_on_samples);
        }
        CHECK(status("x1", n) == CertificateStatus::certified_on_samples);
    }
    CHECK(status("x1^2", ConvexityNotion::infine2) == CertificateStatus::certified_on_samples);
    // -x^4 is flat to second order at 0 and drops away: not convex2.
    CHECK(status("-x1^4", ConvexityNotion::convex2) == CertificateStatus::counterexample);
    CHECK(status("-x1^4", ConvexityNotion::pseudoconvex2) == CertificateStatus::counterexample);
    CHECK(status("-x1^4", ConvexityNotion::quasiconvex2) == CertificateStatus::certified_on_samples);
    // A bump that is positive on one side and negative on the other.
    CHECK(status("abs(x1)*(1 - x1^2) - 2*x1^3", ConvexityNotion::quasiconvex2) !=
          CertificateStatus::inconclusive);

    auto c = certify(ex("-x1^4"), ConvexityNotion::convex2, z, xs, search, e);
    REQUIRE(c.counterexample);
    CHECK((*c.counterexample)[0] != 0.0);
}

TEST_CASE("sufficiency: convex2 implies the weaker notions")
{
    EstimatorConfig e;
    const auto xs = line_samples(-1, 1, 15);
    auto search = default_search(1, {{1.0}, {-1.0}}, 4, 0);
    const char* family[] = {"x1^2", "abs(x1)", "-x1^4", "x1^3", "exp(x1)", "max(x1, 0)", "-abs(x1)",
                            "x1 - x1^2", "sin(3*x1)", "x1^4 - x1^2"};
    for (const char* src : family) {
        CAPTURE(src);
        auto cv = certify(ex(src), ConvexityNotion::convex2, Vector{0.0}, xs, search, e);
        if (cv.status != CertificateStatus::certified_on_samples) continue;
        CHECK(certify(ex(src), ConvexityNotion::pseudoconvex2, Vector{0.0}, xs, search, e).status ==
              CertificateStatus::certified_on_samples);
        CHECK(certify(ex(src), ConvexityNotion::quasiconvex2, Vector{0.0}, xs, search, e).status ==
              CertificateStatus::certified_on_samples);
    }
}

TEST_CASE("sufficiency: positive scaling preserves every notion")
{
    EstimatorConfig e;
    const auto xs = line_samples(-1, 1, 11);
    auto search = default_search(1, {}, 2, 0);
    const char* family[] = {"x1^2", "-x1^4", "abs(x1) - x1^3", "x1^3"};
    for (const char* src : family)
        for (auto n : kNotions)
            for (double beta : {0.25, 4.0}) {
                CAPTURE(src);
                auto a = certify(ex(src), n, Vector{0.0}, xs, search, e).status;
                auto b = certify(beta * ex(src), n, Vector{0.0}, xs, search, e).status;
                CHECK(a == b);
            }
}

TEST_CASE("sufficiency: sum rule with common witnesses")
{
    EstimatorConfig e;
    const auto xs = line_samples(-1, 1, 11);
    VwSearch none;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 10; ++k) {
        std::pair<Vector, Vector> pair{{U(rng)}, {U(rng)}};
        auto a = ex("x1^2 + abs(x1)"), b = ex("2*x1^2 - x1");
        auto ca = certify(a, ConvexityNotion::convex2, Vector{0.0}, xs, none, e, pair);
        auto cb = certify(b, ConvexityNotion::convex2, Vector{0.0}, xs, none, e, pair);
        if (ca.status != CertificateStatus::certified_on_samples ||
            cb.status != CertificateStatus::certified_on_samples)
            continue;
        CHECK(certify(a + b, ConvexityNotion::convex2, Vector{0.0}, xs, none, e, pair).status ==
              CertificateStatus::certified_on_samples);
    }
}

TEST_CASE("sufficiency: joint certificates share one pair")
{
    EstimatorConfig e;
    const auto xs = line_samples(-1, 1, 11);
    auto search = default_search(1, {}, 2, 0);
    std::vector<PremiseItem> items{{"a", ex("x1^2"), ConvexityNotion::pseudoconvex2},
                                   {"b", ex("abs(x1)"), ConvexityNotion::quasiconvex2}};
    auto j = certify_joint(items, Vector{0.0}, xs, search, e);
    CHECK(j.status == CertificateStatus::certified_on_samples);
    // x0 itself is not a sample.
    CHECK(j.samples == xs.size() - 1);
    CHECK(j.witnesses.size() == j.samples);
    items.push_back({"c", ex("-x1^4"), ConvexityNotion::pseudoconvex2});
    CHECK(certify_joint(items, Vector{0.0}, xs, search, e).status == CertificateStatus::counterexample);
}

TEST_CASE("sufficiency: quartic example")
{
    auto Q = testing::quartic_problem();
    EstimatorConfig e;
    MultiplierVector given{{1, 2}, {1, 0}, {-2}, 0};
    SufficiencyOptions o;
    o.oracle_resolution = 101;
    auto cv = convex_sufficiency_check(Q, Vector{0, 0}, given, e, o);
    CHECK(cv.status == SufficiencyStatus::pareto_efficient);
    CHECK(cv.oracle == ParetoStatus::efficient);
    CHECK(cv.consistent);
    auto pv = pseudoconvex_sufficiency_check(Q, Vector{0, 0}, given.normalized(), e, o);
    CHECK(pv.status == SufficiencyStatus::pareto_efficient);
    CHECK(pv.conditions.holds);

    // The point (0, 1) is efficient, but these multipliers do not fit it.
    MultiplierVector half{{0.5, 0.5}, {0, 0}, {0}, 0};
    auto nf = pseudoconvex_sufficiency_check(Q, Vector{0, 1}, half, e, o);
    CHECK(nf.status == SufficiencyStatus::not_certified);
    MultiplierVector own{{0.25, 0.75}, {0, 0}, {0}, 0};
    CHECK(pseudoconvex_sufficiency_check(Q, Vector{0, 1}, own, e, o).status ==
          SufficiencyStatus::pareto_efficient);
}

TEST_CASE("sufficiency: never certifies a dominated point")
{
    FractionalProblem U;
    U.n = 2;
    U.f = {fn("f1", "(x1 - 1)^2 + (x1 - 1)*(x2 + 1) + 2*(x2 + 1)^2", 2)};
    U.F = {fn("F1", "1", 2)};
    U.box = {{-2, -3}, {3, 2}};
    EstimatorConfig e;
    SufficiencyOptions o;
    o.oracle_resolution = 51;
    MultiplierVector m{{1}, {}, {}, 0};
    for (const Vector& x : {Vector{0, 0}, Vector{1, 0}, Vector{2, -1}}) {
        auto a = convex_sufficiency_check(U, x, m, e, o);
        auto b = pseudoconvex_sufficiency_check(U, x, m, e, o);
        CHECK(a.status != SufficiencyStatus::pareto_efficient);
        CHECK(b.status != SufficiencyStatus::pareto_efficient);
    }
    CHECK(convex_sufficiency_check(U, Vector{1, -1}, m, e, o).status == SufficiencyStatus::pareto_efficient);
}

TEST_CASE("sufficiency: weak mode concludes weak efficiency")
{
    auto Q = testing::quartic_problem();
    EstimatorConfig e;
    SufficiencyOptions o;
    o.weak = true;
    o.oracle_resolution = 51;
    MultiplierVector m{{0, 1}, {1, 0}, {-2}, 0};
    auto r = pseudoconvex_sufficiency_check(Q, Vector{0, 0}, m, e, o);
    CHECK(r.status != SufficiencyStatus::pareto_efficient);
    if (r.status == SufficiencyStatus::weakly_efficient) CHECK(r.consistent);
    o.weak = false;
    CHECK(pseudoconvex_sufficiency_check(Q, Vector{0, 0}, m, e, o).status == SufficiencyStatus::not_certified);
}
