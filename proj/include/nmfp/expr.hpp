#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nmfp {

using Vector = std::vector<double>;

/// Evaluation left the domain of a node (log of a nonpositive value,
/// division by zero, non-finite result).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression source. `position` is a 0-based byte offset.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/**
 * Immutable expression tree over x1..xn.
 *
 * Grammar: constants, variables x1..xn, + - * /, ^ with a constant
 * exponent, sin cos exp log abs (one argument), min max (two arguments)
 * and if0(c, a, b), which yields a when c == 0 and b otherwise.
 * Precedence: ^ > unary minus > * / > + -, all left-associative.
 *
 * Copies share the tree, so passing by value is cheap.
 */
class Expression {
public:
    enum class Op {
        constant, variable, add, sub, mul, div, neg, pow,
        sin, cos, exp, log, abs, min, max, if0
    };
    struct Node;

    static Expression parse(std::string_view source, std::size_t dimension);
    static Expression constant(double value, std::size_t dimension);
    /// 0-based index.
    static Expression variable(std::size_t index, std::size_t dimension);

    std::size_t dimension() const noexcept { return dim_; }

    double evaluate(std::span<const double> x) const;
    double operator()(std::span<const double> x) const { return evaluate(x); }

    /// One-sided directional derivative by forward-mode dual numbers.
    /// Empty when the expression is not smooth along the evaluation path.
    std::optional<double> exact_directional(std::span<const double> x,
                                            std::span<const double> v) const;

    /// Gradient via exact_directional on the coordinate axes.
    std::optional<Vector> exact_gradient(std::span<const double> x) const;

    /// Syntactic smoothness: false if any abs/min/max/if0 node is present.
    bool smooth() const noexcept;

    /// Fully parenthesized source that parses back to an identical value.
    std::string print() const;

    Expression operator-() const;
    friend Expression operator+(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a, const Expression& b);
    friend Expression operator*(const Expression& a, const Expression& b);
    friend Expression operator/(const Expression& a, const Expression& b);
    friend Expression operator*(double c, const Expression& e);

private:
    Expression(std::shared_ptr<const Node> root, std::size_t dim);

    std::shared_ptr<const Node> root_;
    std::size_t dim_ = 0;
};

/// A labelled problem function (an objective numerator, a denominator, or a
/// constraint).
struct ScalarFunction {
    std::string label;
    Expression expr;

    double operator()(std::span<const double> x) const { return expr.evaluate(x); }
    std::size_t dimension() const noexcept { return expr.dimension(); }
};

/// Sum of weights[i] * terms[i]; zero weights are dropped.
Expression weighted_sum(std::span<const Expression> terms,
                        std::span<const double> weights,
                        std::size_t dimension);

}  // namespace nmfp
