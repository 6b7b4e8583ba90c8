#include <doctest.h>

#include <cmath>
#include <limits>

#include "nmfp/kkt.hpp"
#include "support.hpp"

using namespace nmfp;
using testing::fn;

TEST_CASE("kkt: half-axes example has no strict multipliers")
{
    auto P = testing::half_axes_problem();
    EstimatorConfig e;
    const Vector z(3, 0.0), v{0, 0, 1};
    auto sys = assemble_dual_system(P, z, v, e);
    REQUIRE(sys.B.size() == 2);
    CHECK(sys.B[0] == Vector{-3, 1, 0, 0});
    CHECK(sys.B[1] == Vector{2, -3, 0, 0});
    CHECK(sys.active == std::vector<std::size_t>{0, 1});
    CHECK(sys.C.back() == Vector{0, 0, 0, -1});
    auto r = solve_strong_kkt(P, z, v, e);
    CHECK_FALSE(r.certificate);
    CHECK(r.lp_status == LpStatus::infeasible);
    CHECK(r.margin == -std::numeric_limits<double>::infinity());
    KktOptions weak;
    weak.weak = true;
    CHECK_FALSE(solve_strong_kkt(P, z, v, e, weak).certificate);
}

TEST_CASE("kkt: quartic example certificate")
{
    auto Q = testing::quartic_problem();
    EstimatorConfig e;
    const Vector z(2, 0.0), v{0, 1};
    auto sys = assemble_dual_system(Q, z, v, e);
    CHECK(sys.B[0] == Vector{0, 0, 12});
    CHECK(sys.B[1] == Vector{0, 0, -4});
    auto r = solve_strong_kkt(Q, z, v, e);
    REQUIRE(r.certificate);
    CHECK(r.margin > 1e-6);
    double sum = r.certificate->lambda[0] + r.certificate->lambda[1];
    CHECK(sum == doctest::Approx(1));
    auto check = verify_multipliers(Q, z, v, *r.certificate, e);
    CHECK(check.holds);

    MultiplierVector given{{1, 2}, {1, 0}, {-2}, 0};
    auto gc = verify_multipliers(Q, z, v, given, e);
    CHECK(gc.holds);
    CHECK(gc.stationarity_residual <= 1e-9);
    CHECK(gc.curvature_value == doctest::Approx(4));
}

TEST_CASE("kkt: multiplier checks are scale free")
{
    auto Q = testing::quartic_problem();
    EstimatorConfig e;
    const Vector z(2, 0.0), v{0, 1};
    MultiplierVector base{{1, 2}, {1, 0}, {-2}, 0};
    for (double s : {1e-3, 0.5, 3.0, 1e4}) {
        MultiplierVector m{{s, 2 * s}, {s, 0}, {-2 * s}, 0};
        CHECK(verify_multipliers(Q, z, v, m, e).holds);
    }
    MultiplierVector bad{{1, 2}, {-1, 0}, {-2}, 0};
    auto bc = verify_multipliers(Q, z, v, bad, e);
    CHECK_FALSE(bc.signs_ok);
    CHECK_FALSE(bc.holds);
    auto n = base.normalized();
    CHECK(n.lambda[0] == doctest::Approx(1.0 / 3));
    CHECK(n.nu[0] == doctest::Approx(-2.0 / 3));
    MultiplierVector zero{{0, 0}, {}, {}, 0};
    CHECK_THROWS(zero.normalized());
}

TEST_CASE("kkt: sweep over directions")
{
    auto Q = testing::quartic_problem();
    EstimatorConfig e;
    std::vector<Vector> dirs{{0, 1}, {0, 0}};
    auto r = solve_strong_kkt_sweep(Q, Vector(2, 0.0), dirs, e);
    REQUIRE(r.certificate);
    CHECK(r.systems.size() == 2);
    for (const auto& d : dirs) CHECK(verify_multipliers(Q, Vector(2, 0.0), d, *r.certificate, e).holds);
}

TEST_CASE("kkt: another efficient point of the quartic example")
{
    auto Q = testing::quartic_problem();
    EstimatorConfig e;
    const Vector y{0, 1}, v0{0, 0};
    auto r = solve_strong_kkt(Q, y, v0, e);
    REQUIRE(r.certificate);
    auto m = r.certificate->normalized();
    CHECK(m.lambda[0] == doctest::Approx(0.25));
    CHECK(m.lambda[1] == doctest::Approx(0.75));
}

TEST_CASE("kkt: unconstrained stationarity only")
{
    FractionalProblem U;
    U.n = 2;
    U.f = {fn("f1", "(x1 - 1)^2 + (x1 - 1)*(x2 + 1) + 2*(x2 + 1)^2", 2)};
    U.F = {fn("F1", "1", 2)};
    U.box = {{-2, -3}, {3, 2}};
    EstimatorConfig e;
    CHECK(solve_strong_kkt(U, Vector{1, -1}, Vector{1, 0}, e).certificate);
    CHECK_FALSE(solve_strong_kkt(U, Vector{0, 0}, Vector{1, 0}, e).certificate);
}

TEST_CASE("kkt: slackness report")
{
    auto Q = testing::quartic_problem();
    EstimatorConfig e;
    MultiplierVector m{{1, 2}, {1, 0}, {-2}, 0};
    auto rep = complementary_slackness_report(Q, Vector{0, 0}, Vector{0, 1}, m, e);
    REQUIRE(rep.size() == 2);
    for (const auto& s : rep) CHECK_FALSE(s.flagged);
    MultiplierVector off{{1, 2}, {0, 1}, {-2}, 0};
    auto at = complementary_slackness_report(Q, Vector{0, 1}, Vector{0, 1}, off, e);
    bool flagged = false;
    for (const auto& s : at) flagged = flagged || s.flagged;
    CHECK(flagged);
}

TEST_CASE("kkt: preconditions")
{
    auto O = testing::oscillating_problem();
    EstimatorConfig e;
    CHECK_THROWS_AS(assemble_dual_system(O, Vector{0.0}, Vector{1.0}, e), PreconditionError);
    auto Q = testing::quartic_problem();
    CHECK_THROWS_AS(assemble_dual_system(Q, Vector{0.5, 0.0}, Vector{0, 1}, e), PreconditionError);
    CHECK_THROWS_AS(gateaux_gradient(testing::ex("abs(x1)"), "g", Vector{0.0}, e), PreconditionError);
}

TEST_CASE("kkt: primal condition")
{
    auto Q = testing::quartic_problem();
    EstimatorConfig e;
    auto pr = primal_condition_check(Q, Vector{0, 0}, Vector{0, 1}, 1.0, 8, 1, e);
    CHECK(pr.status == PrimalStatus::incompatible_on_samples);
    CHECK(pr.linearization_exact);

    // Dominated point of min x1 with no constraints: w = -1 decreases the objective.
    FractionalProblem D;
    D.n = 1;
    D.f = {fn("f1", "x1", 1)};
    D.F = {fn("F1", "1", 1)};
    D.box = {{-1}, {1}};
    auto dr = primal_condition_check(D, Vector{0.0}, Vector{0.0}, 1.0, 8, 1, e);
    CHECK(dr.status == PrimalStatus::solvable);
    REQUIRE(dr.witness);
    CHECK((*dr.witness)[0] < 0);
}
