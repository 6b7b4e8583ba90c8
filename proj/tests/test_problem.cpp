#include <doctest.h>

#include <algorithm>
#include <random>

#include "nmfp/problem.hpp"
#include "support.hpp"

using namespace nmfp;
using testing::fn;

namespace {

// Plain O(N^2) dominance filter.
std::vector<std::size_t> brute_front(const std::vector<Vector>& imgs)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < imgs.size(); ++i) {
        bool dom = false;
        for (std::size_t j = 0; j < imgs.size() && !dom; ++j) {
            if (i == j) continue;
            bool le = true, lt = false;
            for (std::size_t k = 0; k < imgs[i].size(); ++k) {
                if (imgs[j][k] > imgs[i][k]) le = false;
                if (imgs[j][k] < imgs[i][k]) lt = true;
            }
            dom = le && lt;
        }
        if (!dom) out.push_back(i);
    }
    return out;
}

}  // namespace

TEST_CASE("problem: feasibility on the half-axes set")
{
    auto P = testing::half_axes_problem();
    CHECK(feasible(P, Vector{1, 0, 0}));
    CHECK(feasible(P, Vector{0, 0.5, -1}));
    CHECK_FALSE(feasible(P, Vector{1, 1, 0}));
    CHECK_FALSE(feasible(P, Vector{-0.1, 0, 0}));
    CHECK_FALSE(feasible(P, Vector{2, 0, 0}));  // outside the box
    auto J = active_inequalities(P, Vector{0, 0, 0});
    CHECK(J == std::vector<std::size_t>{0, 1});
    CHECK(active_inequalities(P, Vector{0.5, 0, 0}) == std::vector<std::size_t>{1});
}

TEST_CASE("problem: ratios and the shift parameter")
{
    auto P = testing::half_axes_problem();
    Vector r = ratio_objective(P, Vector{1, 0, 0});
    CHECK(r[0] == doctest::Approx(-1.5));
    CHECK(r[1] == doctest::Approx(1.0));
    CHECK(s_parameter(P, Vector{0, 0, 0}) == Vector{0, 0});
    auto Q = testing::quartic_problem();
    CHECK(s_parameter(Q, Vector{0, 0}) == Vector{0, 0});
    Vector s{0.5, -0.25};
    Vector sm = smfp_objective(Q, Vector{0, 1}, s);
    CHECK(sm[0] == doctest::Approx(6 - 0.5 * 2));
    CHECK(sm[1] == doctest::Approx(-2 + 0.25 * 2));
    CHECK(Q.shifted_objective(0, 0.5).evaluate(Vector{0, 1}) == doctest::Approx(sm[0]));
    CHECK(Q.ratio_expression(1).evaluate(Vector{0, 1}) == doctest::Approx(-1.0));

    FractionalProblem Z = testing::quartic_problem();
    Z.F[0] = fn("F1", "x2", 2);
    CHECK_THROWS_AS(ratio_objective(Z, Vector{0, 0}), DomainError);
}

TEST_CASE("problem: validation")
{
    auto P = testing::quartic_problem();
    CHECK_NOTHROW(P.validate());
    auto A = P;
    A.F.pop_back();
    CHECK_THROWS_AS(A.validate(), std::invalid_argument);
    auto B = P;
    B.box.upper[0] = -1;
    CHECK_THROWS_AS(B.validate(), std::invalid_argument);
    auto C = P;
    C.g.push_back(fn("g3", "x1", 1));
    CHECK_THROWS_AS(C.validate(), std::invalid_argument);
}

TEST_CASE("problem: dominance predicates")
{
    CHECK(pareto_dominates(Vector{0, 0}, Vector{0, 1}));
    CHECK_FALSE(pareto_dominates(Vector{0, 1}, Vector{0, 1}));
    CHECK_FALSE(pareto_dominates(Vector{-1, 2}, Vector{0, 1}));
    CHECK(strictly_dominates(Vector{-1, 0}, Vector{0, 1}));
    CHECK_FALSE(strictly_dominates(Vector{0, 0}, Vector{0, 1}));
}

TEST_CASE("problem: nondominated filter matches brute force")
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> U(0, 6);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Vector> imgs;
        const std::size_t p = 1 + trial % 3;
        for (int k = 0; k < 60; ++k) {
            Vector v(p);
            for (auto& x : v) x = U(rng);
            imgs.push_back(v);
        }
        auto got = nondominated_indices(imgs);
        std::sort(got.begin(), got.end());
        CHECK(got == brute_front(imgs));
    }
}

TEST_CASE("problem: classify_image")
{
    std::vector<Vector> imgs{{0, 2}, {1, 1}, {2, 0}, {2, 2}};
    CHECK(classify_image(imgs, Vector{1, 1}) == ParetoStatus::efficient);
    std::optional<std::size_t> w;
    CHECK(classify_image(imgs, Vector{2, 2}, &w) == ParetoStatus::dominated);
    REQUIRE(w);
    CHECK(pareto_dominates(imgs[*w], Vector{2, 2}));
    std::vector<Vector> weak{{0, 1}, {1, 1}};
    CHECK(classify_image(weak, Vector{1, 1}) == ParetoStatus::weakly_efficient_only);
}

TEST_CASE("problem: grid oracle on the bundled examples")
{
    auto Q = testing::quartic_problem();
    auto v = pareto_oracle(Q, 101, Vector{0, 0});
    CHECK(v.status == ParetoStatus::efficient);
    CHECK(v.feasible_points == 101);
    auto P = testing::half_axes_problem();
    CHECK(pareto_oracle(P, 21, Vector{0, 0, 0}).status == ParetoStatus::efficient);

    FractionalProblem S;
    S.n = 2;
    S.f = {fn("f1", "x1 + x2", 2)};
    S.F = {fn("F1", "1 + x1^2", 2)};
    S.g = {fn("g1", "x1^2 + x2^2", 2)};
    S.box = {{-1, -1}, {1, 1}};
    auto sp = pareto_oracle(S, 51, Vector{0, 0});
    CHECK(sp.status == ParetoStatus::efficient);
    CHECK(sp.feasible_points == 1);
    CHECK(scalarization_sweep(S, 51).points == 1);
}

TEST_CASE("problem: scalarization equivalence")
{
    auto Q = testing::quartic_problem();
    CHECK(scalarization_equivalence_check(Q, Vector{0, 0}, 51));
    auto sw = scalarization_sweep(Q, 51);
    CHECK(sw.points == 51);
    CHECK(sw.mismatches == 0);

    // A dominated point stays dominated after shifting.
    FractionalProblem D;
    D.n = 1;
    D.f = {fn("f1", "x1", 1), fn("f2", "x1^2", 1)};
    D.F = {fn("F1", "2 + x1", 1), fn("F2", "1", 1)};
    D.box = {{0}, {1}};
    CHECK(pareto_oracle(D, 41, Vector{0.5}).status == ParetoStatus::dominated);
    CHECK(scalarization_equivalence_check(D, Vector{0.5}, 41));
    CHECK(scalarization_sweep(D, 41).mismatches == 0);
}

TEST_CASE("problem: grids")
{
    CHECK(default_grid_resolution(1) == 201);
    CHECK(default_grid_resolution(2) == 201);
    CHECK(default_grid_resolution(3) == 41);
    auto P = testing::half_axes_problem();
    auto pts = feasible_grid(P, 5);
    for (const auto& x : pts) CHECK(feasible(P, x));
    // x1 = x2 = 0 or one of them positive: (1 + 2 + 2) grid values per x3 line.
    CHECK(pts.size() == 5 * 5);
}

TEST_CASE("problem: proper efficiency probe")
{
    auto P = testing::half_axes_problem();
    CHECK(borwein_probe(P, Vector{0, 0, 0}, 21).status == BorweinStatus::consistent);
}
