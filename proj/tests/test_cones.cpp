#include <doctest.h>

#include <random>

#include "nmfp/cones.hpp"
#include "nmfp/sampling.hpp"
#include "support.hpp"

using namespace nmfp;
using testing::fn;

TEST_CASE("cones: first-order memberships on the half-axes set")
{
    auto P = testing::half_axes_problem();
    EstimatorConfig e;
    const Vector z(3, 0.0);
    CHECK(contingent_member(P, z, Vector{1, 0, 0}) == ConeVerdict::member);
    CHECK(contingent_member(P, z, Vector{0, 1, 0}) == ConeVerdict::member);
    CHECK(contingent_member(P, z, Vector{0, 0, 1}) == ConeVerdict::member);
    CHECK(contingent_member(P, z, Vector{1, 1, 0}) == ConeVerdict::non_member);
    CHECK(contingent_member(P, z, Vector{-1, 0, 0}) == ConeVerdict::non_member);

    // Both ratios must not increase: 2 d1 / 3 <= d2 <= 3 d1.
    CHECK(linearizing_member(P, z, Vector{1, 1, 0}, e).verdict == ConeVerdict::member);
    CHECK(linearizing_member(P, z, Vector{1, 3, 0}, e).verdict == ConeVerdict::member);
    CHECK(linearizing_member(P, z, Vector{0, 0, 1}, e).verdict == ConeVerdict::member);
    CHECK(linearizing_member(P, z, Vector{1, 0, 0}, e).verdict == ConeVerdict::non_member);
    CHECK(linearizing_member(P, z, Vector{1, 4, 0}, e).verdict == ConeVerdict::non_member);
    auto lc = linearizing_member(P, z, Vector{1, 0, 0}, e);
    CHECK(lc.objective_values[0] == doctest::Approx(-3));
    CHECK(lc.objective_values[1] == doctest::Approx(2));
    CHECK(lc.active == std::vector<std::size_t>{0, 1});
}

TEST_CASE("cones: zero direction and scale invariance")
{
    auto P = testing::half_axes_problem();
    auto Q = testing::quartic_problem();
    EstimatorConfig e;
    CHECK(contingent_member(P, Vector(3, 0.0), Vector(3, 0.0)) == ConeVerdict::member);
    CHECK(contingent_member(Q, Vector(2, 0.0), Vector(2, 0.0)) == ConeVerdict::member);
    CHECK(linearizing_member(Q, Vector(2, 0.0), Vector(2, 0.0), e).verdict == ConeVerdict::member);

    Rng rng(23);
    for (int k = 0; k < 15; ++k) {
        Vector d = unit_sphere_sample(rng, 3);
        auto base = contingent_member(P, Vector(3, 0.0), d);
        auto lbase = linearizing_member(P, Vector(3, 0.0), d, e).verdict;
        for (double s : {0.01, 3.0, 250.0}) {
            CHECK(contingent_member(P, Vector(3, 0.0), scaled(d, s)) == base);
            CHECK(linearizing_member(P, Vector(3, 0.0), scaled(d, s), e).verdict == lbase);
        }
    }
}

TEST_CASE("cones: correction onto a curved set")
{
    FractionalProblem C;
    C.n = 2;
    C.f = {fn("f1", "x1", 2)};
    C.F = {fn("F1", "1", 2)};
    C.h = {fn("h1", "x1^2 + x2^2 - 1", 2)};
    C.box = {{-2, -2}, {2, 2}};
    ConeSearchConfig cfg;
    auto y = correct_to_feasible(C, Vector{1.01, 0.02}, 0.1, cfg);
    REQUIRE(y);
    CHECK(constraint_violation(C, *y) <= cfg.feas_tol);
    CHECK_FALSE(correct_to_feasible(C, Vector{0.2, 0.0}, 0.1, cfg));
    const Vector x0{1, 0};
    CHECK(contingent_member(C, x0, Vector{0, 1}) == ConeVerdict::member);
    CHECK(contingent_member(C, x0, Vector{1, 0}) == ConeVerdict::non_member);
    // Second order: along v = (0, 1) the circle bends by w = (-1, 0) at r = 1.
    CHECK(tangent2_member(C, x0, Vector{0, 1}, Vector{-1, 0}, 1.0) == ConeVerdict::member);
    CHECK(tangent2_member(C, x0, Vector{0, 1}, Vector{1, 0}, 1.0) == ConeVerdict::non_member);
}

TEST_CASE("cones: critical directions")
{
    auto P = testing::half_axes_problem();
    EstimatorConfig e;
    auto cd = critical_directions(P, Vector(3, 0.0), 8, 1, e);
    REQUIRE_FALSE(cd.critical.empty());
    for (const auto& v : cd.critical) {
        CHECK(std::abs(v[0]) <= 1e-9);
        CHECK(std::abs(v[1]) <= 1e-9);
    }
    auto Q = testing::quartic_problem();
    auto cq = critical_directions(Q, Vector(2, 0.0), 8, 1, e);
    REQUIRE(cq.critical.size() == 1);
    CHECK(cq.critical[0][0] == doctest::Approx(0).scale(1));
    CHECK(cq.critical[0][1] == doctest::Approx(1));
}

TEST_CASE("cones: second-order memberships")
{
    auto P = testing::half_axes_problem();
    auto Q = testing::quartic_problem();
    EstimatorConfig e;
    const Vector v{0, 0, 1};
    CHECK(tangent2_member(P, Vector(3, 0.0), v, Vector{1, 0, 0}, 1.0) == ConeVerdict::member);
    CHECK(tangent2_member(P, Vector(3, 0.0), v, Vector{0, 2, -1}, 0.0) == ConeVerdict::member);
    CHECK(tangent2_member(P, Vector(3, 0.0), v, Vector{1, 1, 0}, 1.0) == ConeVerdict::non_member);
    CHECK(linearizing2_member(P, Vector(3, 0.0), v, Vector{1, 3, 0}, 1.0, e).verdict == ConeVerdict::member);

    // Quartic example: the first ratio curves upward along (0, 1).
    auto l2 = linearizing2_member(Q, Vector(2, 0.0), Vector{0, 1}, Vector{0, 1}, 1.0, e);
    CHECK(l2.verdict == ConeVerdict::non_member);
    CHECK(l2.objective_values[0] == doctest::Approx(12));
    CHECK(l2.objective_values[1] == doctest::Approx(-4));
    CHECK(tangent2_member(Q, Vector(2, 0.0), Vector{0, 1}, Vector{0, 1}, 1.0) == ConeVerdict::member);
    CHECK(tangent2_member(Q, Vector(2, 0.0), Vector{0, 1}, Vector{1, 0}, 0.0) == ConeVerdict::non_member);
}

TEST_CASE("cones: regularity probes")
{
    auto P = testing::half_axes_problem();
    EstimatorConfig e;
    auto ab = second_order_abadie_probe(P, Vector(3, 0.0), Vector{0, 0, 1}, 8, 1, e);
    REQUIRE(ab.status == ProbeStatus::violated);
    REQUIRE(ab.witness_w);
    CHECK(linearizing2_member(P, Vector(3, 0.0), Vector{0, 0, 1}, *ab.witness_w, ab.witness_r, e).verdict ==
          ConeVerdict::member);
    CHECK(tangent2_member(P, Vector(3, 0.0), Vector{0, 0, 1}, *ab.witness_w, ab.witness_r) ==
          ConeVerdict::non_member);
    auto gu = second_order_guignard_probe(P, Vector(3, 0.0), Vector{0, 0, 1}, 8, 1, e);
    CHECK(gu.status == ProbeStatus::holds_on_samples);

    // A box-free problem with no constraints: every pair is tangent.
    FractionalProblem U;
    U.n = 2;
    U.f = {fn("f1", "x1^2 + x2^2", 2)};
    U.F = {fn("F1", "1", 2)};
    U.box = {{-1, -1}, {1, 1}};
    CHECK(second_order_abadie_probe(U, Vector(2, 0.0), Vector{1, 0}, 4, 2, e).status != ProbeStatus::violated);
}

TEST_CASE("cones: pair sampling is seeded")
{
    auto a = second_order_pairs(2, 6, 9), b = second_order_pairs(2, 6, 9), c = second_order_pairs(2, 6, 10);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == (8 + 6) * 4);
}

TEST_CASE("cones: configuration validation")
{
    ConeSearchConfig c;
    CHECK_NOTHROW(c.validate());
    c.tail = 20;
    CHECK_THROWS(c.validate());
}
