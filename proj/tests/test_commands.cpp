#include <doctest.h>

#include "nmfp/commands.hpp"
#include "support.hpp"

using namespace nmfp;
using json = nlohmann::json;

namespace {

CommandResult run(const std::string& cmd, const std::string& file, CommandOptions opts = {})
{
    return run_command(cmd, load_problem_file(testing::corpus(file)), opts, file);
}

const json& verdict(const CommandResult& r, const std::string& check)
{
    for (const auto& v : r.report["verdicts"])
        if (v["check"] == check) return v;
    FAIL("no verdict " << check);
    static json none;
    return none;
}

const json& function_row(const CommandResult& r, const std::string& label)
{
    for (const auto& f : r.report["diagnostics"]["functions"])
        if (f["label"] == label) return f;
    FAIL("no row " << label);
    static json none;
    return none;
}

}  // namespace

TEST_CASE("commands: report schema")
{
    auto r = run("pareto", "quartic_fractional.toml");
    for (const char* key : {"command", "inputs", "verdicts", "tolerances", "seed", "timings"})
        CHECK(r.report.contains(key));
    CHECK(r.report["timings"].empty());
    CommandOptions t;
    t.timings = true;
    CHECK(run("pareto", "single_point.toml", t).report["timings"].contains("wall_ms"));
    for (const auto& v : r.report["verdicts"]) {
        CHECK(v.contains("check"));
        CHECK(v.contains("status"));
    }
}

TEST_CASE("commands: derivative tables")
{
    auto r = run("derivatives", "oscillating_quotient.toml");
    CHECK(r.exit_code == kExitPass);
    CHECK(function_row(r, "f1")["pales_zeidan"]["value"].get<double>() == doctest::Approx(2).epsilon(0.05));
    CHECK(function_row(r, "F1")["pales_zeidan"]["value"].get<double>() == doctest::Approx(2).epsilon(0.05));
    CHECK(function_row(r, "F1")["second"]["verdict"] == "nonexistent");
    const auto& ratio = function_row(r, "f1/F1");
    CHECK(ratio["pales_zeidan"]["value"].get<double>() == doctest::Approx(4).epsilon(0.05));
    CHECK(ratio["quotient_rule"]["pales_zeidan"].get<std::string>().rfind("inapplicable", 0) == 0);

    // Hessian [[2, 1], [1, 4]] at the minimizer.
    auto q = run("derivatives", "smooth_quadratic.toml");
    const auto& f = function_row(q, "f1");
    CHECK(f["gateaux"]["value"].get<double>() == doctest::Approx(0).scale(1));
    CHECK(f["pales_zeidan"]["value"].get<double>() == doctest::Approx(2));
    CommandOptions o;
    o.direction = Vector{1, 1};
    auto q2 = run("derivatives", "smooth_quadratic.toml", o);
    CHECK(function_row(q2, "f1")["second"]["value"].get<double>() == doctest::Approx(8));

    o.direction = Vector{0, 0};
    auto z = run("derivatives", "smooth_quadratic.toml", o);
    for (const auto& row : z.report["diagnostics"]["functions"]) {
        CHECK(row["gateaux"]["value"].get<double>() == 0.0);
        CHECK(row["clarke"]["value"].get<double>() == 0.0);
    }
}

TEST_CASE("commands: strong KKT")
{
    auto q = run("check-kkt", "quartic_fractional.toml");
    CHECK(q.exit_code == kExitPass);
    CHECK(verdict(q, "strong-kkt")["margin"].get<double>() > 1e-6);
    CHECK(verdict(q, "given-multipliers")["status"] == "pass");

    auto d = run("check-kkt", "degenerate_complementarity.toml");
    CHECK(d.exit_code == kExitRefuted);
    CHECK(verdict(d, "strong-kkt")["margin"].is_null());
    CHECK(verdict(d, "strong-kkt")["lp_status"] == "infeasible");

    auto s = run("check-kkt", "smooth_quadratic.toml");
    CHECK(s.exit_code == kExitPass);
    CHECK(verdict(s, "strong-kkt")["mode"] == "stationarity-only");

    auto o = run("check-kkt", "oscillating_quotient.toml");
    CHECK(o.exit_code == kExitInputError);
    CHECK(o.report["error"].get<std::string>().find("F1") != std::string::npos);

    CommandOptions sweep;
    sweep.sweep = true;
    CHECK(run("check-kkt", "quartic_fractional.toml", sweep).exit_code == kExitPass);
}

TEST_CASE("commands: sufficiency, duality and pareto on the quartic example")
{
    auto s = run("sufficiency", "quartic_fractional.toml");
    CHECK(s.exit_code == kExitPass);
    CHECK(verdict(s, "sufficiency")["pseudoconvex"]["result"] == "pareto-efficient");

    auto d = run("duality", "quartic_fractional.toml");
    CHECK(d.exit_code == kExitPass);
    CHECK(verdict(d, "weak-duality")["violation_count"] == 0);
    CHECK(verdict(d, "strong-duality")["status"] == "pass");

    CommandOptions g;
    g.grid = 41;
    auto p = run("pareto", "quartic_fractional.toml", g);
    CHECK(p.exit_code == kExitPass);
    bool origin = false;
    for (const auto& f : p.report["diagnostics"]["front"])
        if (f["value"] == json::array({0.0, -0.0}) || f["value"] == json::array({0.0, 0.0})) origin = true;
    CHECK(origin);
}

TEST_CASE("commands: other corpus verdicts")
{
    CHECK(run("pareto", "degenerate_complementarity.toml").exit_code == kExitPass);
    CHECK(run("duality", "nonconvex_constraint_dual.toml").exit_code == kExitRefuted);

    CommandOptions sweep;
    sweep.sweep = true;
    auto sp = run("pareto", "single_point.toml", sweep);
    CHECK(sp.exit_code == kExitPass);
    CHECK(sp.report["diagnostics"]["feasible_points"] == 1);
    CHECK(verdict(sp, "scalarization-sweep")["points"] == 1);
    CHECK(run("check-kkt", "single_point.toml").exit_code == kExitRefuted);

    CommandOptions dom;
    dom.point = Vector{0, 0};
    CHECK(run("pareto", "smooth_quadratic.toml", dom).exit_code == kExitRefuted);
}

TEST_CASE("commands: input errors")
{
    CHECK(run("frobnicate", "quartic_fractional.toml").exit_code == kExitInputError);
    CHECK(run("check-kkt", "nonconvex_constraint_dual.toml").exit_code == kExitInputError);
    CommandOptions o;
    o.point = Vector{0.5, 1};
    CHECK(run("sufficiency", "quartic_fractional.toml", o).exit_code == kExitInputError);
    o.point = Vector{0, 0, 0};
    CHECK(run("pareto", "quartic_fractional.toml", o).exit_code == kExitInputError);
}

TEST_CASE("commands: reports are reproducible and seed dependent only through sampling")
{
    for (const std::string cmd : {"check-kkt", "sufficiency"}) {
        auto a = run(cmd, "quartic_fractional.toml").report.dump();
        auto b = run(cmd, "quartic_fractional.toml").report.dump();
        CHECK(a == b);
    }
    CommandOptions s;
    s.seed = 99;
    auto r = run("check-kkt", "quartic_fractional.toml", s);
    CHECK(r.report["seed"] == 99);
    CHECK(verdict(r, "strong-kkt")["status"] == "pass");
}
