#include "nmfp/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace nmfp {

struct Expression::Node {
    Op op = Op::constant;
    double value = 0.0;       // constant value, or exponent for pow
    std::size_t index = 0;    // variable index (0-based)
    std::vector<std::shared_ptr<const Node>> args;
    bool smooth = true;       // subtree free of abs/min/max/if0
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Op;

NodePtr make_node(Op op, std::vector<NodePtr> args, double value = 0.0, std::size_t index = 0)
{
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->value = value;
    n->index = index;
    n->args = std::move(args);
    bool s = !(op == Op::abs || op == Op::min || op == Op::max || op == Op::if0);
    for (const auto& a : n->args) s = s && a->smooth;
    n->smooth = s;
    return n;
}

bool is_integer(double p) { return std::floor(p) == p && std::abs(p) < 1e15; }

double checked_pow(double b, double p)
{
    if (b == 0.0 && p < 0.0) throw DomainError("division by zero in power");
    if (b < 0.0 && !is_integer(p)) throw DomainError("negative base with non-integer exponent");
    return std::pow(b, p);
}

double eval(const Expression::Node& n, std::span<const double> x)
{
    switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return x[n.index];
    case Op::add: return eval(*n.args[0], x) + eval(*n.args[1], x);
    case Op::sub: return eval(*n.args[0], x) - eval(*n.args[1], x);
    case Op::mul: return eval(*n.args[0], x) * eval(*n.args[1], x);
    case Op::div: {
        double num = eval(*n.args[0], x);
        double den = eval(*n.args[1], x);
        if (den == 0.0) throw DomainError("division by zero");
        return num / den;
    }
    case Op::neg: return -eval(*n.args[0], x);
    case Op::pow: return checked_pow(eval(*n.args[0], x), n.value);
    case Op::sin: return std::sin(eval(*n.args[0], x));
    case Op::cos: return std::cos(eval(*n.args[0], x));
    case Op::exp: return std::exp(eval(*n.args[0], x));
    case Op::log: {
        double a = eval(*n.args[0], x);
        if (!(a > 0.0)) throw DomainError("log of nonpositive value");
        return std::log(a);
    }
    case Op::abs: return std::abs(eval(*n.args[0], x));
    case Op::min: return std::min(eval(*n.args[0], x), eval(*n.args[1], x));
    case Op::max: return std::max(eval(*n.args[0], x), eval(*n.args[1], x));
    case Op::if0:
        return eval(*n.args[0], x) == 0.0 ? eval(*n.args[1], x) : eval(*n.args[2], x);
    }
    return 0.0;
}

struct Dual {
    double v;
    double d;
};

// Returns false where the derivative is unavailable (infinite slope of a
// fractional power at zero).
bool eval_dual(const Expression::Node& n, std::span<const double> x,
               std::span<const double> dir, Dual& out)
{
    Dual a{}, b{};
    auto unary = [&]() { return eval_dual(*n.args[0], x, dir, a); };
    auto binary = [&]() {
        return eval_dual(*n.args[0], x, dir, a) && eval_dual(*n.args[1], x, dir, b);
    };
    switch (n.op) {
    case Op::constant: out = {n.value, 0.0}; return true;
    case Op::variable: out = {x[n.index], dir[n.index]}; return true;
    case Op::add:
        if (!binary()) return false;
        out = {a.v + b.v, a.d + b.d};
        return true;
    case Op::sub:
        if (!binary()) return false;
        out = {a.v - b.v, a.d - b.d};
        return true;
    case Op::mul:
        if (!binary()) return false;
        out = {a.v * b.v, a.d * b.v + a.v * b.d};
        return true;
    case Op::div:
        if (!binary()) return false;
        if (b.v == 0.0) throw DomainError("division by zero");
        out = {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
        return true;
    case Op::neg:
        if (!unary()) return false;
        out = {-a.v, -a.d};
        return true;
    case Op::pow: {
        if (!unary()) return false;
        double p = n.value;
        double val = checked_pow(a.v, p);
        if (p == 0.0) { out = {val, 0.0}; return true; }
        if (a.v == 0.0 && p < 1.0) return false;
        out = {val, p * checked_pow(a.v, p - 1.0) * a.d};
        return true;
    }
    case Op::sin:
        if (!unary()) return false;
        out = {std::sin(a.v), std::cos(a.v) * a.d};
        return true;
    case Op::cos:
        if (!unary()) return false;
        out = {std::cos(a.v), -std::sin(a.v) * a.d};
        return true;
    case Op::exp: {
        if (!unary()) return false;
        double e = std::exp(a.v);
        out = {e, e * a.d};
        return true;
    }
    case Op::log:
        if (!unary()) return false;
        if (!(a.v > 0.0)) throw DomainError("log of nonpositive value");
        out = {std::log(a.v), a.d / a.v};
        return true;
    case Op::abs:
    case Op::min:
    case Op::max:
    case Op::if0:
        return false;
    }
    return false;
}

// ---- printing ----

std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (v < 0.0) return "(" + s + ")";
    return s;
}

const char* op_name(Op op)
{
    switch (op) {
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::abs: return "abs";
    case Op::min: return "min";
    case Op::max: return "max";
    case Op::if0: return "if0";
    default: return "";
    }
}

void print_node(const Expression::Node& n, std::string& out)
{
    auto infix = [&](const char* sym) {
        out += '(';
        print_node(*n.args[0], out);
        out += sym;
        print_node(*n.args[1], out);
        out += ')';
    };
    switch (n.op) {
    case Op::constant: out += format_number(n.value); return;
    case Op::variable: out += "x" + std::to_string(n.index + 1); return;
    case Op::add: infix(" + "); return;
    case Op::sub: infix(" - "); return;
    case Op::mul: infix(" * "); return;
    case Op::div: infix(" / "); return;
    case Op::neg:
        out += "(-";
        print_node(*n.args[0], out);
        out += ')';
        return;
    case Op::pow:
        out += '(';
        print_node(*n.args[0], out);
        out += " ^ " + format_number(n.value) + ')';
        return;
    default:
        out += op_name(n.op);
        out += '(';
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print_node(*n.args[i], out);
        }
        out += ')';
        return;
    }
}

// ---- parsing ----

class Parser {
public:
    Parser(std::string_view src, std::size_t dim) : src_(src), dim_(dim) {}

    NodePtr run()
    {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("empty expression", 0);
        NodePtr e = expr();
        skip_ws();
        if (pos_ < src_.size())
            throw ParseError(err("unexpected '" + std::string(1, src_[pos_]) + "'"), pos_);
        return e;
    }

private:
    std::string err(const std::string& msg) const
    {
        return "syntax error at position " + std::to_string(pos_) + ": " + msg;
    }

    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            std::string got = pos_ < src_.size() ? std::string(1, src_[pos_]) : "end of input";
            throw ParseError(err(std::string("expected '") + c + "', got '" + got + "'"), pos_);
        }
    }

    NodePtr expr()
    {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make_node(Op::add, {lhs, term()});
            else if (accept('-')) lhs = make_node(Op::sub, {lhs, term()});
            else return lhs;
        }
    }

    NodePtr term()
    {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make_node(Op::mul, {lhs, unary()});
            else if (accept('/')) lhs = make_node(Op::div, {lhs, unary()});
            else return lhs;
        }
    }

    NodePtr unary()
    {
        if (accept('-')) return make_node(Op::neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power()
    {
        NodePtr base = primary();
        while (accept('^')) {
            std::size_t at = pos_;
            bool negate = false;
            while (true) {
                if (accept('-')) negate = !negate;
                else if (!accept('+')) break;
            }
            NodePtr ex = primary();
            if (has_variable(*ex))
                throw ParseError("exponent must be constant at position " + std::to_string(at), at);
            double p;
            try {
                p = eval(*ex, {});
            } catch (const std::exception&) {
                throw ParseError(err("invalid constant exponent"), at);
            }
            if (!std::isfinite(p)) throw ParseError(err("invalid constant exponent"), at);
            base = make_node(Op::pow, {base}, negate ? -p : p);
        }
        return base;
    }

    static bool has_variable(const Expression::Node& n)
    {
        if (n.op == Op::variable) return true;
        for (const auto& a : n.args)
            if (has_variable(*a)) return true;
        return false;
    }

    NodePtr primary()
    {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(err("unexpected end of input"), pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError(err("unexpected '" + std::string(1, c) + "'"), pos_);
    }

    NodePtr number()
    {
        std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) digits();
            else pos_ = save;
        }
        std::string text(src_.substr(start, pos_ - start));
        double v = 0.0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || p != text.data() + text.size())
            throw ParseError("malformed number '" + text + "' at position " + std::to_string(start), start);
        return make_node(Op::constant, {}, v);
    }

    NodePtr identifier()
    {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));

        if (name.size() > 1 && name[0] == 'x' &&
            name.find_first_not_of("0123456789", 1) == std::string::npos) {
            std::size_t idx = std::stoul(name.substr(1));
            if (idx == 0 || idx > dim_)
                throw ParseError("variable " + name + " out of range for dimension " +
                                     std::to_string(dim_) + " at position " + std::to_string(start),
                                 start);
            return make_node(Op::variable, {}, 0.0, idx - 1);
        }
        if (name == "pi") return make_node(Op::constant, {}, std::numbers::pi);

        struct Fn {
            const char* name;
            Op op;
            std::size_t arity;
        };
        static constexpr Fn table[] = {
            {"sin", Op::sin, 1}, {"cos", Op::cos, 1}, {"exp", Op::exp, 1},
            {"log", Op::log, 1}, {"abs", Op::abs, 1}, {"min", Op::min, 2},
            {"max", Op::max, 2}, {"if0", Op::if0, 3},
        };
        for (const auto& fn : table) {
            if (name != fn.name) continue;
            skip_ws();
            if (!accept('('))
                throw ParseError(err("expected '(' after function " + name), pos_);
            std::vector<NodePtr> args;
            if (!accept(')')) {
                args.push_back(expr());
                while (accept(',')) args.push_back(expr());
                expect(')');
            }
            if (args.size() != fn.arity)
                throw ParseError("arity mismatch: " + name + " expects " + std::to_string(fn.arity) +
                                     " argument(s), got " + std::to_string(args.size()) +
                                     " at position " + std::to_string(start),
                                 start);
            return make_node(fn.op, std::move(args));
        }
        throw ParseError("unknown identifier '" + name + "' at position " + std::to_string(start), start);
    }

    std::string_view src_;
    std::size_t dim_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::shared_ptr<const Node> root, std::size_t dim)
    : root_(std::move(root)), dim_(dim)
{
}

Expression Expression::parse(std::string_view source, std::size_t dimension)
{
    return Expression(Parser(source, dimension).run(), dimension);
}

Expression Expression::constant(double value, std::size_t dimension)
{
    return Expression(make_node(Op::constant, {}, value), dimension);
}

Expression Expression::variable(std::size_t index, std::size_t dimension)
{
    if (index >= dimension) throw std::out_of_range("variable index out of range");
    return Expression(make_node(Op::variable, {}, 0.0, index), dimension);
}

double Expression::evaluate(std::span<const double> x) const
{
    if (x.size() != dim_)
        throw std::invalid_argument("point has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(dim_));
    double v = eval(*root_, x);
    if (!std::isfinite(v)) throw DomainError("non-finite result");
    return v;
}

std::optional<double> Expression::exact_directional(std::span<const double> x,
                                                    std::span<const double> v) const
{
    if (x.size() != dim_ || v.size() != dim_)
        throw std::invalid_argument("dimension mismatch in exact_directional");
    if (!root_->smooth) return std::nullopt;
    Dual out{};
    if (!eval_dual(*root_, x, v, out)) return std::nullopt;
    if (!std::isfinite(out.v)) throw DomainError("non-finite result");
    if (!std::isfinite(out.d)) return std::nullopt;
    return out.d;
}

std::optional<Vector> Expression::exact_gradient(std::span<const double> x) const
{
    Vector grad(dim_), e(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        e[i] = 1.0;
        auto d = exact_directional(x, e);
        e[i] = 0.0;
        if (!d) return std::nullopt;
        grad[i] = *d;
    }
    return grad;
}

bool Expression::smooth() const noexcept { return root_->smooth; }

std::string Expression::print() const
{
    std::string out;
    print_node(*root_, out);
    return out;
}

Expression Expression::operator-() const { return Expression(make_node(Op::neg, {root_}), dim_); }

namespace {
std::size_t common_dim(const Expression& a, const Expression& b)
{
    if (a.dimension() != b.dimension()) throw std::invalid_argument("dimension mismatch");
    return a.dimension();
}
}  // namespace

Expression operator+(const Expression& a, const Expression& b)
{
    return Expression(make_node(Op::add, {a.root_, b.root_}), common_dim(a, b));
}

Expression operator-(const Expression& a, const Expression& b)
{
    return Expression(make_node(Op::sub, {a.root_, b.root_}), common_dim(a, b));
}

Expression operator*(const Expression& a, const Expression& b)
{
    return Expression(make_node(Op::mul, {a.root_, b.root_}), common_dim(a, b));
}

Expression operator/(const Expression& a, const Expression& b)
{
    return Expression(make_node(Op::div, {a.root_, b.root_}), common_dim(a, b));
}

Expression operator*(double c, const Expression& e)
{
    return Expression::constant(c, e.dimension()) * e;
}

Expression weighted_sum(std::span<const Expression> terms, std::span<const double> weights,
                        std::size_t dimension)
{
    if (terms.size() != weights.size()) throw std::invalid_argument("weights/terms size mismatch");
    std::optional<Expression> sum;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (weights[i] == 0.0) continue;
        Expression t = weights[i] == 1.0 ? terms[i] : weights[i] * terms[i];
        sum = sum ? *sum + t : t;
    }
    return sum ? *sum : Expression::constant(0.0, dimension);
}

}  // namespace nmfp
