#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "nmfp/expr.hpp"
#include "support.hpp"

using nmfp::DomainError;
using nmfp::Expression;
using nmfp::ParseError;
using nmfp::Vector;
using testing::ex;

TEST_CASE("expr: precedence and associativity")
{
    CHECK(ex("1 + 2*3").evaluate(Vector{0}) == 7);
    CHECK(ex("-2^2").evaluate(Vector{0}) == -4);
    CHECK(ex("(-2)^2").evaluate(Vector{0}) == 4);
    CHECK(ex("8 / 4 / 2").evaluate(Vector{0}) == 1);
    CHECK(ex("8 - 4 - 2").evaluate(Vector{0}) == 2);
    CHECK(ex("2^3^2").evaluate(Vector{0}) == 64);
    CHECK(ex("2*-x1").evaluate(Vector{3}) == -6);
    CHECK(ex("1.5e2 + .5").evaluate(Vector{0}) == 150.5);
}

TEST_CASE("expr: functions and variables")
{
    const Vector x{0.3, -1.2};
    CHECK(ex("sin(x1) + cos(x2)", 2).evaluate(x) == doctest::Approx(std::sin(0.3) + std::cos(-1.2)));
    CHECK(ex("exp(x1)*log(2)", 2).evaluate(x) == doctest::Approx(std::exp(0.3) * std::log(2.0)));
    CHECK(ex("abs(x2)", 2).evaluate(x) == doctest::Approx(1.2));
    CHECK(ex("min(x1, x2) + max(x1, x2)", 2).evaluate(x) == doctest::Approx(-0.9));
    CHECK(ex("if0(x1, 5, 7)").evaluate(Vector{0.0}) == 5);
    CHECK(ex("if0(x1, 5, 7)").evaluate(Vector{1e-300}) == 7);
}

TEST_CASE("expr: parse errors carry positions")
{
    CHECK_THROWS_AS(ex(""), ParseError);
    CHECK_THROWS_AS(ex("x1 +"), ParseError);
    CHECK_THROWS_AS(ex("x2", 1), ParseError);
    CHECK_THROWS_AS(ex("x0", 1), ParseError);
    CHECK_THROWS_AS(ex("foo(x1)"), ParseError);
    CHECK_THROWS_AS(ex("x1^x1"), ParseError);
    CHECK_THROWS_AS(ex("min(x1)"), ParseError);
    CHECK_THROWS_AS(ex("(x1"), ParseError);
    try {
        ex("x1 + * 2");
        FAIL("no throw");
    } catch (const ParseError& e) {
        CHECK(e.position() == 5);
    }
}

TEST_CASE("expr: domain errors")
{
    CHECK_THROWS_AS(ex("1/x1").evaluate(Vector{0.0}), DomainError);
    CHECK_THROWS_AS(ex("log(x1)").evaluate(Vector{-1.0}), DomainError);
    CHECK_THROWS_AS(ex("x1^0.5").evaluate(Vector{-1.0}), DomainError);
    CHECK_THROWS_AS(ex("exp(x1)").evaluate(Vector{1e6}), DomainError);
    CHECK(ex("x1^2").evaluate(Vector{-3.0}) == 9);
    CHECK_THROWS_AS(ex("x1", 1).evaluate(Vector{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("expr: print round-trips on random points")
{
    const char* sources[] = {"-x1^2 + 3*x2 - 1/(1 + x1^2)", "sin(x1*x2) - exp(-x2)/2",
                             "abs(x1 - x2) + min(x1, 2*x2)^2", "if0(x1, 0, x1^2*sin(1/x1))",
                             "2^-1 * x1 - -x2"};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-2, 2);
    for (const char* s : sources) {
        Expression e = ex(s, 2);
        Expression back = ex(e.print(), 2);
        CHECK(back.print() == e.print());
        for (int k = 0; k < 20; ++k) {
            Vector x{U(rng), U(rng)};
            CHECK(back.evaluate(x) == e.evaluate(x));
        }
    }
}

TEST_CASE("expr: exact derivatives match hand gradients")
{
    Expression e = ex("x1^3*x2 + sin(x2)/x1", 2);
    std::function<Vector(double, double)> grad = [](double a, double b) {
        return Vector{3 * a * a * b - std::sin(b) / (a * a), a * a * a + std::cos(b) / a};
    };
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.5, 2);
    for (int k = 0; k < 20; ++k) {
        Vector x{U(rng), U(rng)};
        auto g = e.exact_gradient(x);
        REQUIRE(g);
        Vector want = grad(x[0], x[1]);
        CHECK((*g)[0] == doctest::Approx(want[0]).epsilon(1e-12));
        CHECK((*g)[1] == doctest::Approx(want[1]).epsilon(1e-12));
        Vector v{U(rng) - 1.0, U(rng) - 1.0};
        auto d = e.exact_directional(x, v);
        REQUIRE(d);
        CHECK(*d == doctest::Approx(want[0] * v[0] + want[1] * v[1]).epsilon(1e-12));
    }
}

TEST_CASE("expr: smoothness flag and kinks")
{
    CHECK(ex("x1^2 + sin(x1)").smooth());
    CHECK_FALSE(ex("abs(x1)").smooth());
    CHECK_FALSE(ex("max(x1, 0)").smooth());
    CHECK_FALSE(ex("if0(x1, 0, 1)").smooth());
    // Trees with a kink anywhere never take the dual path.
    CHECK_FALSE(ex("abs(x1)").exact_directional(Vector{2.0}, Vector{1.0}).has_value());
    CHECK(ex("x1^2").exact_directional(Vector{2.0}, Vector{1.0}).value() == 4.0);
    CHECK_FALSE(ex("abs(x1)").exact_directional(Vector{0.0}, Vector{1.0}).has_value());
}

TEST_CASE("expr: algebra on trees")
{
    Expression a = ex("x1 + 1"), b = ex("x1^2");
    const Vector x{1.5};
    CHECK((a + b).evaluate(x) == doctest::Approx(2.5 + 2.25));
    CHECK((a - b).evaluate(x) == doctest::Approx(0.25));
    CHECK((a * b).evaluate(x) == doctest::Approx(2.5 * 2.25));
    CHECK((a / b).evaluate(x) == doctest::Approx(2.5 / 2.25));
    CHECK((-a).evaluate(x) == doctest::Approx(-2.5));
    CHECK((3.0 * a).evaluate(x) == doctest::Approx(7.5));
    std::vector<Expression> terms{a, b};
    CHECK(nmfp::weighted_sum(terms, Vector{2.0, 0.0}, 1).evaluate(x) == doctest::Approx(5.0));
    CHECK(nmfp::weighted_sum(terms, Vector{0.0, 0.0}, 1).evaluate(x) == 0.0);
    CHECK_THROWS_AS(a + ex("x1 + x2", 2), std::invalid_argument);
}
