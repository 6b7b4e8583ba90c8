#pragma once

#include <string>

#include "nmfp/problem.hpp"
#include "nmfp/problem_file.hpp"

namespace testing {

inline nmfp::ScalarFunction fn(const std::string& label, const std::string& src, std::size_t n)
{
    return {label, nmfp::Expression::parse(src, n)};
}

inline nmfp::Expression ex(const std::string& src, std::size_t n = 1)
{
    return nmfp::Expression::parse(src, n);
}

inline std::string corpus(const std::string& name) { return std::string(NMFP_CORPUS_DIR) + "/" + name; }

// Two ratios on the half-axes x1 x2 = 0, x1, x2 >= 0, x3 free.
inline nmfp::FractionalProblem half_axes_problem()
{
    nmfp::FractionalProblem P;
    P.n = 3;
    P.f = {fn("f1", "-3*x1 + x2", 3), fn("f2", "2*x1 - 3*x2", 3)};
    P.F = {fn("F1", "1 + x1 + x2", 3), fn("F2", "1 + x1 + x2", 3)};
    P.g = {fn("g1", "-x1", 3), fn("g2", "-x2", 3)};
    P.h = {fn("h1", "x1*x2", 3)};
    P.box = {{-1, -1, -1}, {1, 1, 1}};
    return P;
}

// Quartic numerator, feasible set {0} x [0, 2].
inline nmfp::FractionalProblem quartic_problem()
{
    nmfp::FractionalProblem P;
    P.n = 2;
    P.f = {fn("f1", "3*x1^4 + 5*x1^2 + 6*x2^2", 2), fn("f2", "-2*x2^2", 2)};
    P.F = {fn("F1", "x1^2 + x2^2 + 1", 2), fn("F2", "x1^2 + x2^2 + 1", 2)};
    P.g = {fn("g1", "-x1^2", 2), fn("g2", "-x2", 2)};
    P.h = {fn("h1", "x1^2", 2)};
    P.box = {{-1, 0}, {1, 2}};
    return P;
}

inline nmfp::FractionalProblem oscillating_problem()
{
    nmfp::FractionalProblem P;
    P.n = 1;
    P.f = {fn("f1", "x1^2 + 1", 1)};
    P.F = {fn("F1", "if0(x1, 1, x1^2*sin(1/x1) + 1)", 1)};
    P.box = {{-1}, {1}};
    return P;
}

}  // namespace testing
