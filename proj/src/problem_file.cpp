#include "nmfp/problem_file.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace nmfp {

namespace {

struct Value;
using Array = std::vector<Value>;

struct Value {
    std::variant<double, bool, std::string, Array> data;
    std::size_t line = 0;
};

struct Entry {
    Value value;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

// Strips a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted && c == '\\') {
            ++i;
            continue;
        }
        if (c == '"') quoted = !quoted;
        if (c == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::string trim(std::string_view s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

bool valid_key(const std::string& k)
{
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

// Net bracket depth outside strings.
int bracket_balance(const std::string& s)
{
    int depth = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (quoted && c == '\\') {
            ++i;
            continue;
        }
        if (c == '"') quoted = !quoted;
        else if (!quoted && c == '[') ++depth;
        else if (!quoted && c == ']') --depth;
    }
    return depth;
}

class ValueParser {
public:
    ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

    Value parse()
    {
        Value v = value();
        skip_space();
        if (pos_ != s_.size()) fail("unexpected trailing characters");
        return v;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_;

    [[noreturn]] void fail(const std::string& what) const { throw InputError(what, line_); }

    void skip_space()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    Value value()
    {
        skip_space();
        if (pos_ >= s_.size()) fail("missing value");
        char c = s_[pos_];
        if (c == '"') return {string(), line_};
        if (c == '[') return {array(), line_};
        if (s_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return {true, line_};
        }
        if (s_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return {false, line_};
        }
        return {number(), line_};
    }

    std::string string()
    {
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\\') {
                if (pos_ >= s_.size()) break;
                char e = s_[pos_++];
                if (e == 'n') out += '\n';
                else if (e == 't') out += '\t';
                else if (e == '"' || e == '\\') out += e;
                else fail(std::string("unknown escape \\") + e);
            } else {
                out += c;
            }
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    Array array()
    {
        ++pos_;
        Array out;
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return out;
        }
        for (;;) {
            out.push_back(value());
            skip_space();
            if (pos_ >= s_.size()) fail("unterminated array");
            if (s_[pos_] == ',') {
                ++pos_;
                skip_space();
                if (pos_ < s_.size() && s_[pos_] == ']') {  // trailing comma
                    ++pos_;
                    return out;
                }
                continue;
            }
            if (s_[pos_] == ']') {
                ++pos_;
                return out;
            }
            fail("expected ',' or ']' in array");
        }
    }

    double number()
    {
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                    s_[pos_] == '+' || s_[pos_] == '-' || s_[pos_] == '_'))
            ++pos_;
        std::string tok;
        for (char c : s_.substr(start, pos_ - start))
            if (c != '_') tok += c;
        if (tok.empty()) fail("expected a value");
        if (tok[0] == '+') tok.erase(0, 1);
        if (tok == "inf" || tok == "-inf" || tok == "nan" || tok == "-nan") fail("non-finite number " + tok);
        double x = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
        if (ec != std::errc() || p != tok.data() + tok.size()) fail("malformed number '" + tok + "'");
        return x;
    }
};

std::map<std::string, Section> tokenize(std::string_view text)
{
    static const std::set<std::string> known{"problem", "candidate", "multipliers", "dual", "estimator"};
    std::map<std::string, Section> out;
    std::istringstream in{std::string(text)};
    std::string raw, current;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
            current = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!known.count(current)) throw InputError("unknown section [" + current + "]", lineno);
            if (out.count(current)) throw InputError("duplicate section [" + current + "]", lineno);
            out[current];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw InputError("expected key = value", lineno);
        if (current.empty()) throw InputError("key outside any section", lineno);
        std::string key = trim(std::string_view(line).substr(0, eq));
        if (!valid_key(key)) throw InputError("invalid key '" + key + "'", lineno);
        std::string val = line.substr(eq + 1);
        std::size_t start = lineno;
        while (bracket_balance(val) > 0) {
            if (!std::getline(in, raw)) throw InputError("unterminated array", start);
            ++lineno;
            val += '\n' + strip_comment(raw);
        }
        auto& sec = out[current];
        if (sec.count(key)) throw InputError("duplicate key '" + key + "'", start);
        sec[key] = Entry{ValueParser(val, start).parse(), false};
    }
    return out;
}

class Reader {
public:
    Reader(Section& sec, std::string name) : sec_(sec), name_(std::move(name)) {}

    bool has(const std::string& key) const { return sec_.count(key) > 0; }

    const Value* find(const std::string& key)
    {
        auto it = sec_.find(key);
        if (it == sec_.end()) return nullptr;
        it->second.used = true;
        return &it->second.value;
    }

    const Value& require(const std::string& key)
    {
        const Value* v = find(key);
        if (!v) throw InputError("[" + name_ + "] is missing '" + key + "'");
        return *v;
    }

    double number(const Value& v, const std::string& key) const
    {
        if (auto d = std::get_if<double>(&v.data)) return *d;
        throw InputError("'" + key + "' must be a number", v.line);
    }

    long integer(const Value& v, const std::string& key) const
    {
        double d = number(v, key);
        if (d != std::floor(d) || std::abs(d) > 1e15)
            throw InputError("'" + key + "' must be an integer", v.line);
        return static_cast<long>(d);
    }

    Vector vector(const Value& v, const std::string& key) const
    {
        auto a = std::get_if<Array>(&v.data);
        if (!a) throw InputError("'" + key + "' must be an array of numbers", v.line);
        Vector out;
        for (const auto& e : *a) out.push_back(number(e, key));
        return out;
    }

    std::vector<std::string> strings(const Value& v, const std::string& key) const
    {
        auto a = std::get_if<Array>(&v.data);
        if (!a) throw InputError("'" + key + "' must be an array of strings", v.line);
        std::vector<std::string> out;
        for (const auto& e : *a) {
            auto s = std::get_if<std::string>(&e.data);
            if (!s) throw InputError("'" + key + "' must contain strings", v.line);
            out.push_back(*s);
        }
        return out;
    }

    void finish() const
    {
        for (const auto& [k, e] : sec_)
            if (!e.used) throw InputError("unknown key '" + k + "' in [" + name_ + "]", e.value.line);
    }

private:
    Section& sec_;
    std::string name_;
};

std::vector<ScalarFunction> functions(Reader& r, const std::string& key, const std::string& prefix,
                                      std::size_t n)
{
    std::vector<ScalarFunction> out;
    const Value* v = r.find(key);
    if (!v) return out;
    auto srcs = r.strings(*v, key);
    for (std::size_t i = 0; i < srcs.size(); ++i) {
        std::string label = prefix + std::to_string(i + 1);
        try {
            out.push_back({label, Expression::parse(srcs[i], n)});
        } catch (const ParseError& e) {
            throw InputError(label + ": " + e.what() + " at offset " + std::to_string(e.position()), v->line);
        }
    }
    return out;
}

void check_length(const Vector& x, std::size_t n, const std::string& what)
{
    if (x.size() != n)
        throw InputError(what + " has " + std::to_string(x.size()) + " entries, expected " + std::to_string(n));
}

MultiplierVector read_multipliers(Reader& r, const FractionalProblem& P, const std::string& sec)
{
    MultiplierVector m;
    m.lambda = r.vector(r.require("lambda"), "lambda");
    if (const Value* v = r.find("mu")) m.mu = r.vector(*v, "mu");
    if (const Value* v = r.find("nu")) m.nu = r.vector(*v, "nu");
    check_length(m.lambda, P.p(), "[" + sec + "] lambda");
    check_length(m.mu, P.m(), "[" + sec + "] mu");
    check_length(m.nu, P.l(), "[" + sec + "] nu");
    return m;
}

}  // namespace

ProblemFile parse_problem_file(std::string_view text)
{
    auto sections = tokenize(text);
    if (!sections.count("problem")) throw InputError("missing [problem] section");

    ProblemFile out;
    FractionalProblem& P = out.problem;
    {
        Reader r(sections["problem"], "problem");
        if (const Value* v = r.find("name")) {
            auto s = std::get_if<std::string>(&v->data);
            if (!s) throw InputError("'name' must be a string", v->line);
            out.name = *s;
        }
        long n = r.integer(r.require("dimension"), "dimension");
        if (n < 1 || n > 64) throw InputError("dimension must lie in 1..64");
        P.n = static_cast<std::size_t>(n);
        P.box.lower = r.vector(r.require("lower"), "lower");
        P.box.upper = r.vector(r.require("upper"), "upper");
        check_length(P.box.lower, P.n, "lower");
        check_length(P.box.upper, P.n, "upper");
        P.f = functions(r, "f", "f", P.n);
        P.F = functions(r, "F", "F", P.n);
        P.g = functions(r, "g", "g", P.n);
        P.h = functions(r, "h", "h", P.n);
        if (const Value* v = r.find("grid")) {
            long g = r.integer(*v, "grid");
            if (g < 2 || g > 100000) throw InputError("grid must lie in 2..100000", v->line);
            out.grid = static_cast<int>(g);
        }
        r.finish();
        try {
            P.validate();
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    }

    if (sections.count("candidate")) {
        Reader r(sections["candidate"], "candidate");
        if (const Value* v = r.find("point")) {
            out.point = r.vector(*v, "point");
            check_length(*out.point, P.n, "point");
        }
        if (const Value* v = r.find("direction")) {
            out.direction = r.vector(*v, "direction");
            check_length(*out.direction, P.n, "direction");
        }
        r.finish();
    }

    if (sections.count("multipliers")) {
        Reader r(sections["multipliers"], "multipliers");
        out.multipliers = read_multipliers(r, P, "multipliers");
        r.finish();
    }

    if (sections.count("dual")) {
        Reader r(sections["dual"], "dual");
        DualPoint d;
        d.u = r.vector(r.require("u"), "u");
        check_length(d.u, P.n, "[dual] u");
        d.mult = read_multipliers(r, P, "dual");
        r.finish();
        out.dual = std::move(d);
    }

    if (sections.count("estimator")) {
        Reader r(sections["estimator"], "estimator");
        EstimatorConfig& c = out.estimator;
        if (const Value* v = r.find("t0")) c.t0 = r.number(*v, "t0");
        if (const Value* v = r.find("gamma")) c.gamma = r.number(*v, "gamma");
        if (const Value* v = r.find("levels")) c.levels = static_cast<int>(r.integer(*v, "levels"));
        if (const Value* v = r.find("ball_samples"))
            c.ball_samples = static_cast<int>(r.integer(*v, "ball_samples"));
        if (const Value* v = r.find("phase_samples"))
            c.phase_samples = static_cast<int>(r.integer(*v, "phase_samples"));
        if (const Value* v = r.find("oscillation_threshold"))
            c.oscillation_threshold = r.number(*v, "oscillation_threshold");
        if (const Value* v = r.find("seed")) {
            long s = r.integer(*v, "seed");
            if (s < 0) throw InputError("seed must be nonnegative", v->line);
            c.seed = static_cast<std::uint64_t>(s);
        }
        if (const Value* v = r.find("exact_bypass")) {
            auto b = std::get_if<bool>(&v->data);
            if (!b) throw InputError("'exact_bypass' must be true or false", v->line);
            c.exact_bypass = *b;
        }
        r.finish();
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    }
    return out;
}

ProblemFile load_problem_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    ProblemFile pf = parse_problem_file(buf.str());
    if (pf.name.empty()) pf.name = path.stem().string();
    return pf;
}

}  // namespace nmfp
