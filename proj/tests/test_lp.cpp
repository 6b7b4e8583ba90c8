#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nmfp/lp.hpp"
#include "planted_lp.hpp"

using namespace nmfp;

namespace {

// Brute-force 2-variable LP: best feasible intersection of two constraint
// lines (the axes included). Constraints: A x <= b, x >= 0.
std::optional<double> vertex_enumeration(const std::vector<Vector>& A, const Vector& b, const Vector& c)
{
    std::vector<Vector> rows = A;
    Vector rhs = b;
    rows.push_back({-1, 0});
    rhs.push_back(0);
    rows.push_back({0, -1});
    rhs.push_back(0);
    std::optional<double> best;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            double det = rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0];
            if (std::abs(det) < 1e-12) continue;
            double x = (rhs[i] * rows[j][1] - rows[i][1] * rhs[j]) / det;
            double y = (rows[i][0] * rhs[j] - rhs[i] * rows[j][0]) / det;
            bool ok = true;
            for (std::size_t r = 0; r < rows.size(); ++r)
                if (rows[r][0] * x + rows[r][1] * y > rhs[r] + 1e-9) ok = false;
            if (!ok) continue;
            double val = c[0] * x + c[1] * y;
            if (!best || val > *best) best = val;
        }
    return best;
}

}  // namespace

TEST_CASE("lp: textbook optimum")
{
    LinearProgram lp;
    lp.num_vars = 2;
    lp.objective = {1, 1};
    lp.add_le({1, 2}, 4);
    lp.add_le({3, 1}, 6);
    auto s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(14.0 / 5));
    CHECK(s.x[0] == doctest::Approx(8.0 / 5));
    CHECK(s.x[1] == doctest::Approx(6.0 / 5));
}

TEST_CASE("lp: infeasible, unbounded, free and equality rows")
{
    LinearProgram a;
    a.num_vars = 1;
    a.objective = {1};
    a.add_le({1}, -1);
    CHECK(solve_lp(a).status == LpStatus::infeasible);

    LinearProgram b;
    b.num_vars = 2;
    b.objective = {1, 0};
    b.add_le({1, -1}, 1);
    CHECK(solve_lp(b).status == LpStatus::unbounded);

    LinearProgram c;
    c.num_vars = 1;
    c.objective = {1};
    c.free = {true};
    c.add_le({1}, -2);
    auto sc = solve_lp(c);
    REQUIRE(sc.status == LpStatus::optimal);
    CHECK(sc.objective == doctest::Approx(-2));

    LinearProgram d;
    d.num_vars = 3;
    d.objective = {-1, -1, -1};
    d.free = {true, false, false};
    d.add_eq({1, 1, 0}, -3);
    d.add_eq({0, 1, 1}, 2);
    auto sd = solve_lp(d);
    REQUIRE(sd.status == LpStatus::optimal);
    // x2 in [0, 2], x1 = -3 - x2, x3 = 2 - x2: objective 1 + x2, maximal at x2 = 2.
    CHECK(sd.objective == doctest::Approx(3.0));
    CHECK(sd.x[1] == doctest::Approx(2.0));
}

TEST_CASE("lp: Bland's rule terminates on a cycling example")
{
    LinearProgram lp;
    lp.num_vars = 4;
    lp.objective = {0.75, -20, 0.5, -6};
    lp.add_le({0.25, -8, -1, 9}, 0);
    lp.add_le({0.5, -12, -0.5, 3}, 0);
    lp.add_le({0, 0, 1, 0}, 1);
    auto s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(1.25));
}

TEST_CASE("lp: random two-variable programs match vertex enumeration")
{
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int trial = 0; trial < 100; ++trial) {
        LinearProgram lp;
        lp.num_vars = 2;
        lp.objective = {U(rng), U(rng)};
        std::vector<Vector> A;
        Vector b;
        const int m = 2 + trial % 4;
        for (int r = 0; r < m; ++r) {
            A.push_back({U(rng), U(rng)});
            b.push_back(U(rng) + 1.0);
        }
        A.push_back({1, 0});
        b.push_back(10);
        A.push_back({0, 1});
        b.push_back(10);
        for (std::size_t r = 0; r < A.size(); ++r) lp.add_le(A[r], b[r]);
        auto want = vertex_enumeration(A, b, lp.objective);
        auto got = solve_lp(lp);
        if (!want) {
            CHECK(got.status == LpStatus::infeasible);
            continue;
        }
        REQUIRE(got.status == LpStatus::optimal);
        CHECK(got.objective == doctest::Approx(*want).epsilon(1e-9).scale(1));
    }
}

TEST_CASE("lp: planted feasibility margins")
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto inst = testing::planted_instance(seed, seed % 3 != 0);
        auto r = lp_feasibility(inst.lp, inst.strict);
        if (inst.feasible) {
            REQUIRE(r.status == LpStatus::optimal);
            CHECK(std::abs(r.margin - inst.margin) <= 1e-9);
            CHECK(r.strictly_feasible);
            double sum = 0;
            for (double x : r.point) {
                CHECK(x >= inst.margin - 1e-9);
                sum += x;
            }
            CHECK(sum == doctest::Approx(1.0));
        } else {
            CHECK(r.status == LpStatus::infeasible);
            CHECK(r.margin == -std::numeric_limits<double>::infinity());
            CHECK_FALSE(r.strictly_feasible);
        }
    }
}

TEST_CASE("lp: zero margin is not strict")
{
    LinearProgram lp;
    lp.num_vars = 2;
    lp.objective = {0, 0};
    lp.add_eq({1, 0}, 0);
    auto r = lp_feasibility(lp, {0, 1});
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(std::abs(r.margin) <= 1e-12);
    CHECK_FALSE(r.strictly_feasible);
    CHECK_THROWS_AS(lp_feasibility(lp, {}), std::invalid_argument);
}
