#include "nmfp/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>

#include "nmfp/cones.hpp"
#include "nmfp/deriv.hpp"
#include "nmfp/duality.hpp"
#include "nmfp/kkt.hpp"
#include "nmfp/problem.hpp"
#include "nmfp/sufficiency.hpp"

namespace nmfp {

namespace {

using json = nlohmann::json;

constexpr int kSphereSamples = 8;
constexpr std::size_t kListCap = 500;  // longest point list written to a report

enum class Status { pass, fail, inconclusive };

std::string name_of(Status s)
{
    switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
    }
    return "?";
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vec(const Vector& v)
{
    json out = json::array();
    for (double x : v) out.push_back(num(x));
    return out;
}

json opt_vec(const std::optional<Vector>& v) { return v ? vec(*v) : json(nullptr); }

json mat(const std::vector<Vector>& rows)
{
    json out = json::array();
    for (const auto& r : rows) out.push_back(vec(r));
    return out;
}

json labels(const std::string& prefix, const std::vector<std::size_t>& idx)
{
    json out = json::array();
    for (auto j : idx) out.push_back(prefix + std::to_string(j + 1));
    return out;
}

json estimate(const DerivativeEstimate& e)
{
    return {{"value", num(e.value)},
            {"error_band", num(e.error_band)},
            {"verdict", to_string(e.verdict)},
            {"method", to_string(e.method)},
            {"samples", e.samples}};
}

json multipliers(const MultiplierVector& m)
{
    return {{"lambda", vec(m.lambda)}, {"mu", vec(m.mu)}, {"nu", vec(m.nu)}};
}

struct Context {
    Context(const ProblemFile& f, const CommandOptions& o) : file(f), opts(o), P(f.problem), cfg(f.estimator) {}

    const ProblemFile& file;
    const CommandOptions& opts;
    const FractionalProblem& P;
    EstimatorConfig cfg;
    std::uint64_t seed = 0;
    int resolution = 0;
    std::optional<Vector> point;
    std::optional<Vector> direction;

    json verdicts = json::array();
    json diagnostics = json::object();

    void verdict(const std::string& check, Status s, json details = json::object())
    {
        details["check"] = check;
        details["status"] = name_of(s);
        verdicts.push_back(std::move(details));
    }

    const Vector& require_point() const
    {
        if (!point) throw InputError("a point is required ([candidate] point or --point)");
        return *point;
    }

    const Vector& require_direction() const
    {
        if (!direction) throw InputError("a direction is required ([candidate] direction or --direction)");
        return *direction;
    }

    const Vector& feasible_point() const
    {
        const Vector& x0 = require_point();
        if (!feasible(P, x0)) throw PreconditionError("the point is not feasible");
        return x0;
    }
};

// ---------------------------------------------------------------- derivatives

void run_derivatives(Context& c)
{
    const Vector& x0 = c.require_point();
    const Vector& v = c.require_direction();
    bool clean = true;
    json table = json::array();

    auto describe = [&](const std::string& label, const Expression& e) -> json {
        json j{{"label", label}, {"source", e.print()}};
        try {
            j["value"] = num(e(x0));
            j["gateaux"] = estimate(gateaux_dd(e, x0, v, c.cfg));
            j["clarke"] = estimate(clarke_dd(e, x0, v, c.cfg));
            j["second"] = estimate(second_dd(e, x0, v, c.cfg));
            j["pales_zeidan"] = estimate(pales_zeidan_dd2(e, x0, v, c.cfg));
        } catch (const DomainError& err) {
            j["error"] = err.what();
            clean = false;
        }
        return j;
    };

    const auto& P = c.P;
    for (const auto* group : {&P.f, &P.F, &P.g, &P.h})
        for (const auto& fn : *group) table.push_back(describe(fn.label, fn.expr));

    for (std::size_t i = 0; i < P.p(); ++i) {
        json j = describe(P.f[i].label + "/" + P.F[i].label, P.ratio_expression(i));
        if (j.contains("error")) {
            table.push_back(std::move(j));
            continue;
        }
        json rules = json::object();
        try {
            const double nv = P.f[i](x0), dv = P.F[i](x0);
            const auto nc = clarke_dd(P.f[i].expr, x0, v, c.cfg);
            const auto dg = gateaux_dd(P.F[i].expr, x0, v, c.cfg);
            if (dg.verdict == Verdict::converged)
                rules["clarke"] = num(quotient_clarke(nc.value, nv, dv, dg.value));
            else
                rules["clarke"] = "inapplicable: denominator has no directional derivative";
            const auto npz = pales_zeidan_dd2(P.f[i].expr, x0, v, c.cfg);
            const auto ds = second_dd(P.F[i].expr, x0, v, c.cfg);
            try {
                rules["pales_zeidan"] = num(quotient_pz2(npz.value, nv, dv, ds));
            } catch (const InapplicableRule& err) {
                rules["pales_zeidan"] = std::string("inapplicable: ") + err.what();
            }
        } catch (const DomainError& err) {
            rules["error"] = err.what();
            clean = false;
        }
        j["quotient_rule"] = std::move(rules);
        table.push_back(std::move(j));
    }
    c.diagnostics["functions"] = std::move(table);
    c.verdict("estimation", clean ? Status::pass : Status::inconclusive,
              {{"functions", P.p() * 3 + P.m() + P.l()}});
}

// ---------------------------------------------------------------- check-kkt

json system_json(const DualSystem& s)
{
    return {{"direction", vec(s.v)},
            {"s", vec(s.s)},
            {"B", mat(s.B)},
            {"C", mat(s.C)},
            {"D", mat(s.D)},
            {"active", labels("g", s.active)},
            {"active_second", labels("g", s.active_second)}};
}

json regularity_json(const RegularityReport& r)
{
    return {{"status", to_string(r.status)},
            {"witness_w", opt_vec(r.witness_w)},
            {"witness_r", r.witness_w ? num(r.witness_r) : json(nullptr)},
            {"pairs_tested", r.pairs_tested},
            {"pairs_sampled", r.pairs_sampled}};
}

void run_check_kkt(Context& c)
{
    const auto& P = c.P;
    const Vector& x0 = c.feasible_point();
    auto crit = critical_directions(P, x0, kSphereSamples, c.seed, c.cfg);

    std::vector<Vector> dirs;
    if (c.opts.sweep) {
        if (c.direction) dirs.push_back(*c.direction);
        for (const auto& d : crit.critical) dirs.push_back(d);
        if (dirs.empty()) dirs.push_back(Vector(P.n, 0.0));
    } else {
        dirs.push_back(c.require_direction());
    }

    KktOptions kopts;
    kopts.weak = c.opts.weak;
    KktResult kr = c.opts.sweep ? solve_strong_kkt_sweep(P, x0, dirs, c.cfg, kopts)
                                : solve_strong_kkt(P, x0, dirs.front(), c.cfg, kopts);

    json details{{"lp_status", to_string(kr.lp_status)},
                 {"margin", num(kr.margin)},
                 {"mode", P.m() + P.l() == 0 ? "stationarity-only" : "constrained"},
                 {"weak", c.opts.weak},
                 {"directions", mat(dirs)}};
    if (kr.certificate) {
        MultiplierVector m = kr.certificate->normalized();
        details["multipliers"] = multipliers(m);
        json slack = json::array();
        for (const auto& d : dirs)
            for (const auto& e : complementary_slackness_report(P, x0, d, m, c.cfg))
                slack.push_back({{"direction", vec(d)},
                                 {"constraint", "g" + std::to_string(e.index + 1)},
                                 {"value", num(e.value)},
                                 {"multiplier", num(e.multiplier)},
                                 {"directional", num(e.directional)},
                                 {"flagged", e.flagged}});
        details["slackness"] = std::move(slack);
    }
    json systems = json::array();
    for (const auto& s : kr.systems) systems.push_back(system_json(s));
    c.diagnostics["systems"] = std::move(systems);
    c.verdict("strong-kkt", kr.certificate ? Status::pass : Status::fail, std::move(details));

    if (c.file.multipliers) {
        bool all = true;
        json checks = json::array();
        for (const auto& d : dirs) {
            MultiplierCheck mc = verify_multipliers(P, x0, d, *c.file.multipliers, c.cfg, kopts);
            all = all && mc.holds;
            checks.push_back({{"direction", vec(d)},
                              {"stationarity_residual", num(mc.stationarity_residual)},
                              {"curvature_value", num(mc.curvature_value)},
                              {"signs_ok", mc.signs_ok},
                              {"slackness_ok", mc.slackness_ok},
                              {"holds", mc.holds}});
        }
        c.verdict("given-multipliers", all ? Status::pass : Status::fail,
                  {{"multipliers", multipliers(*c.file.multipliers)}, {"checks", std::move(checks)}});
    }

    json cd = json::array();
    for (const auto& s : crit.samples)
        cd.push_back({{"direction", vec(s.direction)},
                      {"tangent", to_string(s.tangent)},
                      {"linearizing", to_string(s.linearizing)},
                      {"critical", s.critical()}});
    c.diagnostics["critical_directions"] = {{"samples", std::move(cd)}, {"critical", mat(crit.critical)}};

    json per_dir = json::array();
    for (const auto& d : dirs) {
        json entry{{"direction", vec(d)}};
        json primal = json::array();
        for (double r : {0.0, 1.0}) {
            PrimalReport pr = primal_condition_check(P, x0, d, r, kSphereSamples, c.seed, c.cfg);
            primal.push_back({{"r", r},
                              {"status", to_string(pr.status)},
                              {"witness", opt_vec(pr.witness)},
                              {"linearization_exact", pr.linearization_exact},
                              {"linearization_solvable", pr.linearization_solvable},
                              {"samples_checked", pr.samples_checked}});
        }
        entry["primal_condition"] = std::move(primal);
        entry["abadie"] = regularity_json(second_order_abadie_probe(P, x0, d, kSphereSamples, c.seed, c.cfg));
        entry["guignard"] =
            regularity_json(second_order_guignard_probe(P, x0, d, kSphereSamples, c.seed, c.cfg));
        per_dir.push_back(std::move(entry));
    }
    c.diagnostics["directions"] = std::move(per_dir);
}

// ---------------------------------------------------------------- sufficiency

Status status_of(SufficiencyStatus s)
{
    switch (s) {
    case SufficiencyStatus::pareto_efficient:
    case SufficiencyStatus::weakly_efficient: return Status::pass;
    case SufficiencyStatus::not_certified: return Status::fail;
    case SufficiencyStatus::inconclusive: return Status::inconclusive;
    }
    return Status::inconclusive;
}

json joint_json(const JointCertificate& j)
{
    return {{"status", to_string(j.status)},
            {"counterexample", opt_vec(j.counterexample)},
            {"max_residual", num(j.max_residual)},
            {"samples", j.samples}};
}

json sufficiency_json(const SufficiencyVerdict& s)
{
    json premises = json::array();
    for (const auto& p : s.premises)
        premises.push_back({{"label", p.label},
                            {"notion", to_string(p.notion)},
                            {"status", to_string(p.status)},
                            {"counterexample", opt_vec(p.counterexample)}});
    const auto& k = s.conditions;
    return {{"result", to_string(s.status)},
            {"reason", s.reason},
            {"conditions",
             {{"equality_residual", num(k.equality_residual)},
              {"curvature_min", num(k.curvature_min)},
              {"slackness", num(k.slackness)},
              {"signs_ok", k.signs_ok},
              {"holds", k.holds},
              {"w_checked", k.w_checked},
              {"v_checked", k.v_checked}}},
            {"premises", std::move(premises)},
            {"joint", joint_json(s.joint)},
            {"oracle", to_string(s.oracle)},
            {"consistent", s.consistent},
            {"critical_directions", mat(s.critical)}};
}

void run_sufficiency(Context& c)
{
    const auto& P = c.P;
    const Vector& x0 = c.feasible_point();

    MultiplierVector mult;
    if (c.file.multipliers) {
        mult = *c.file.multipliers;
        c.diagnostics["multiplier_source"] = "file";
    } else {
        std::vector<Vector> dirs;
        if (c.direction) dirs.push_back(*c.direction);
        for (auto& d : critical_directions(P, x0, kSphereSamples, c.seed, c.cfg).critical)
            dirs.push_back(std::move(d));
        if (dirs.empty()) dirs.push_back(Vector(P.n, 0.0));
        KktOptions kopts;
        kopts.weak = c.opts.weak;
        KktResult kr = solve_strong_kkt_sweep(P, x0, dirs, c.cfg, kopts);
        c.diagnostics["multiplier_source"] = "strong-kkt";
        if (!kr.certificate) {
            c.verdict("multipliers", Status::fail,
                      {{"lp_status", to_string(kr.lp_status)}, {"margin", num(kr.margin)}});
            return;
        }
        mult = kr.certificate->normalized();
    }
    c.diagnostics["multipliers"] = multipliers(mult);

    SufficiencyOptions so;
    so.oracle_resolution = c.resolution;
    so.sphere_samples = kSphereSamples;
    so.seed = c.seed;
    so.weak = c.opts.weak;
    SufficiencyVerdict convex = convex_sufficiency_check(P, x0, mult, c.cfg, so);
    SufficiencyVerdict pseudo = pseudoconvex_sufficiency_check(P, x0, mult, c.cfg, so);

    const Status a = status_of(convex.status), b = status_of(pseudo.status);
    Status overall = Status::inconclusive;
    if (a == Status::pass || b == Status::pass) overall = Status::pass;
    else if (a == Status::fail && b == Status::fail) overall = Status::fail;
    c.verdict("sufficiency", overall,
              {{"convex", sufficiency_json(convex)}, {"pseudoconvex", sufficiency_json(pseudo)}});

    const bool consistent = convex.consistent && pseudo.consistent;
    c.verdict("oracle-agreement", consistent ? Status::pass : Status::fail,
              {{"oracle", to_string(convex.oracle)}, {"resolution", c.resolution}});
}

// ---------------------------------------------------------------- duality

json feasibility_json(const DualFeasibilityReport& r)
{
    return {{"status", to_string(r.status)},
            {"stationarity_residual", num(r.stationarity_residual)},
            {"curvature_min", num(r.curvature_min)},
            {"constraint_value", num(r.constraint_value)},
            {"signs_ok", r.signs_ok},
            {"normalized", r.normalized},
            {"directions", r.directions.size()},
            {"reason", r.reason}};
}

Status status_of(DualFeasibility s)
{
    switch (s) {
    case DualFeasibility::feasible: return Status::pass;
    case DualFeasibility::infeasible: return Status::fail;
    case DualFeasibility::inconclusive: return Status::inconclusive;
    }
    return Status::inconclusive;
}

json dual_point_json(const DualPoint& d) { return {{"u", vec(d.u)}, {"multipliers", multipliers(d.mult)}}; }

void run_duality(Context& c)
{
    const auto& P = c.P;
    if (!c.point && !c.file.dual)
        throw InputError("duality needs a point ([candidate] point or --point) or a [dual] section");

    DualityOptions dopts;
    dopts.weak = c.opts.weak;
    dopts.sphere_samples = kSphereSamples;
    dopts.seed = c.seed;

    std::vector<DualPoint> duals;
    std::vector<std::string> origins;

    if (c.point) {
        const Vector& x0 = c.feasible_point();
        const Vector v = c.direction ? *c.direction : Vector(P.n, 0.0);
        StrongDualityResult sd = strong_duality_construct(P, x0, v, c.cfg, dopts);
        json details{{"lp_status", to_string(sd.lp_status)},
                     {"margin", num(sd.margin)},
                     {"abadie", regularity_json(sd.abadie)}};
        Status st = Status::fail;
        if (sd.point) {
            details["dual_point"] = dual_point_json(*sd.point);
            details["feasibility"] = feasibility_json(*sd.feasibility);
            details["gap"] = opt_vec(sd.gap);
            double gap = 0.0;
            for (double g : *sd.gap) gap = std::max(gap, std::abs(g));
            st = status_of(sd.feasibility->status);
            if (st == Status::pass && gap > 1e-9) st = Status::fail;
            duals.push_back(*sd.point);
            origins.push_back("constructed");
        }
        c.verdict("strong-duality", st, std::move(details));
    }

    if (c.file.dual) {
        DualFeasibilityReport fr = mond_weir_feasible(P, *c.file.dual, c.cfg, dopts);
        c.verdict("dual-feasibility", status_of(fr.status),
                  {{"dual_point", dual_point_json(*c.file.dual)}, {"feasibility", feasibility_json(fr)}});
        duals.push_back(*c.file.dual);
        origins.push_back("file");
    }

    if (duals.empty()) return;

    const auto primal = feasible_grid(P, c.resolution);
    const auto domain = feasible_grid(P, default_sample_resolution(P.n));
    WeakDualityReport wr = weak_duality_sweep(P, primal, duals, domain, c.cfg, dopts);
    json premises = json::array();
    for (std::size_t d = 0; d < duals.size(); ++d) {
        const auto& pr = wr.premises[d];
        premises.push_back({{"dual", origins[d]},
                            {"objective", to_string(pr.objective)},
                            {"inequality", to_string(pr.inequality)},
                            {"equality", to_string(pr.equality)},
                            {"certified", pr.certified()},
                            {"counterexample", opt_vec(pr.counterexample)},
                            {"feasibility", to_string(wr.feasibility[d])}});
    }
    json violations = json::array();
    for (std::size_t k = 0; k < wr.violations.size() && k < kListCap; ++k) {
        const auto& v = wr.violations[k];
        violations.push_back({{"x", vec(v.x)},
                              {"dual", origins[v.dual_index]},
                              {"primal_value", vec(v.primal_value)},
                              {"dual_value", vec(v.dual_value)}});
    }
    c.verdict("weak-duality", wr.violations.empty() ? Status::pass : Status::fail,
              {{"pairs", wr.pairs},
               {"violation_count", wr.violations.size()},
               {"violations", std::move(violations)},
               {"premises", std::move(premises)},
               {"resolution", c.resolution}});

    for (std::size_t d = 0; d < duals.size(); ++d) {
        if (!feasible(P, duals[d].u)) continue;
        ConverseDualityReport cr = converse_duality_check(P, duals[d], c.cfg, dopts, 0, c.resolution);
        Status st = status_of(cr.theorem);
        if (!cr.consistent) st = Status::fail;
        c.verdict("converse-duality", st,
                  {{"dual", origins[d]},
                   {"result", to_string(cr.theorem)},
                   {"premises", joint_json(cr.premises)},
                   {"oracle", to_string(cr.oracle)},
                   {"consistent", cr.consistent},
                   {"feasibility", feasibility_json(cr.feasibility)}});
    }
}

// ---------------------------------------------------------------- pareto

void run_pareto(Context& c)
{
    const auto& P = c.P;
    json front = json::array();
    std::size_t front_size = 0, feasible_points = 0;

    if (c.point) {
        const Vector& x0 = c.feasible_point();
        ParetoVerdict pv = pareto_oracle(P, c.resolution, x0);
        feasible_points = pv.feasible_points;
        front_size = pv.front.size();
        for (std::size_t k = 0; k < pv.front.size() && k < kListCap; ++k)
            front.push_back({{"x", vec(pv.front[k])}, {"value", vec(pv.front_values[k])}});

        Status st = Status::inconclusive;
        switch (pv.status) {
        case ParetoStatus::efficient: st = Status::pass; break;
        case ParetoStatus::weakly_efficient_only: st = c.opts.weak ? Status::pass : Status::fail; break;
        case ParetoStatus::dominated: st = Status::fail; break;
        case ParetoStatus::inconclusive: st = Status::inconclusive; break;
        }
        c.verdict("pareto-status", st,
                  {{"result", to_string(pv.status)},
                   {"witness", opt_vec(pv.witness)},
                   {"witness_value", opt_vec(pv.witness_value)},
                   {"value", vec(ratio_objective(P, x0))}});

        const bool same = scalarization_equivalence_check(P, x0, c.resolution);
        c.verdict("scalarization", same ? Status::pass : Status::fail, {{"resolution", c.resolution}});

        BorweinProbe bp = borwein_probe(P, x0, c.resolution);
        c.diagnostics["proper_efficiency"] = {
            {"status", bp.status == BorweinStatus::consistent ? "consistent" : "violated"},
            {"witness", opt_vec(bp.witness)},
            {"direction", vec(bp.direction)},
            {"directions_checked", bp.directions_checked}};
    } else {
        auto pts = feasible_grid(P, c.resolution);
        feasible_points = pts.size();
        std::vector<Vector> vals;
        vals.reserve(pts.size());
        for (const auto& x : pts) vals.push_back(ratio_objective(P, x));
        auto idx = nondominated_indices(vals);
        front_size = idx.size();
        for (std::size_t k = 0; k < idx.size() && k < kListCap; ++k)
            front.push_back({{"x", vec(pts[idx[k]])}, {"value", vec(vals[idx[k]])}});
        c.verdict("front", feasible_points > 0 ? Status::pass : Status::inconclusive,
                  {{"front_size", front_size}});
    }
    c.diagnostics["feasible_points"] = feasible_points;
    c.diagnostics["front_size"] = front_size;
    c.diagnostics["front"] = std::move(front);

    if (c.opts.sweep) {
        const int res = std::min(c.resolution, default_sweep_resolution(P.n));
        ScalarizationSweep sw = scalarization_sweep(P, res);
        c.verdict("scalarization-sweep", sw.mismatches == 0 ? Status::pass : Status::fail,
                  {{"points", sw.points},
                   {"mismatches", sw.mismatches},
                   {"first_mismatch", opt_vec(sw.first_mismatch)},
                   {"resolution", res}});
    }
}

// ---------------------------------------------------------------- report

json tolerances_json(const EstimatorConfig& cfg)
{
    FeasibilityTolerances ft;
    ConeSearchConfig cc;
    return {{"feasibility_equality", ft.eq},
            {"feasibility_inequality", ft.ineq},
            {"active_constraint", ft.active},
            {"derivative_sign", kDerivTol},
            {"strict_multiplier", kStrictTol},
            {"residual", kResidualTol},
            {"dominance", kDominanceTol},
            {"slackness", kSlacknessTol},
            {"curve_feasibility", cc.feas_tol},
            {"estimator",
             {{"t0", cfg.t0},
              {"gamma", cfg.gamma},
              {"levels", cfg.levels},
              {"ball_samples", cfg.ball_samples},
              {"phase_samples", cfg.phase_samples},
              {"oscillation_threshold", cfg.oscillation_threshold},
              {"exact_bypass", cfg.exact_bypass}}}};
}

json inputs_json(const Context& c, const std::string& source)
{
    const auto& P = c.P;
    auto sources = [](const std::vector<ScalarFunction>& fs) {
        json out = json::array();
        for (const auto& f : fs) out.push_back(f.expr.print());
        return out;
    };
    return {{"source", source},
            {"name", c.file.name},
            {"dimension", P.n},
            {"box", {{"lower", vec(P.box.lower)}, {"upper", vec(P.box.upper)}}},
            {"functions", {{"f", sources(P.f)}, {"F", sources(P.F)}, {"g", sources(P.g)}, {"h", sources(P.h)}}},
            {"point", opt_vec(c.point)},
            {"direction", opt_vec(c.direction)},
            {"grid", c.resolution},
            {"weak", c.opts.weak},
            {"sweep", c.opts.sweep}};
}

int exit_code_of(const json& verdicts)
{
    bool unsure = false;
    for (const auto& v : verdicts) {
        if (v["status"] == "fail") return kExitRefuted;
        if (v["status"] == "inconclusive") unsure = true;
    }
    return unsure ? kExitInconclusive : kExitPass;
}

}  // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"derivatives", "check-kkt", "sufficiency", "duality", "pareto"};
    return names;
}

int default_sweep_resolution(std::size_t n)
{
    if (n <= 1) return 201;
    if (n == 2) return 51;
    if (n == 3) return 13;
    return 5;
}

CommandResult run_command(const std::string& command, const ProblemFile& file, const CommandOptions& opts,
                          const std::string& source)
{
    static const std::map<std::string, std::function<void(Context&)>> table{
        {"derivatives", run_derivatives},
        {"check-kkt", run_check_kkt},
        {"sufficiency", run_sufficiency},
        {"duality", run_duality},
        {"pareto", run_pareto}};

    const auto start = std::chrono::steady_clock::now();
    CommandResult out;
    json& rep = out.report;
    rep["command"] = command;

    Context c(file, opts);
    if (opts.seed) c.cfg.seed = *opts.seed;
    c.seed = c.cfg.seed;
    c.point = opts.point ? opts.point : file.point;
    c.direction = opts.direction ? opts.direction : file.direction;
    c.resolution = opts.grid > 0 ? opts.grid : (file.grid > 0 ? file.grid : default_grid_resolution(c.P.n));

    try {
        auto it = table.find(command);
        if (it == table.end()) throw InputError("unknown command '" + command + "'");
        if (c.point && c.point->size() != c.P.n) throw InputError("point has the wrong dimension");
        if (c.direction && c.direction->size() != c.P.n) throw InputError("direction has the wrong dimension");
        it->second(c);
        out.exit_code = exit_code_of(c.verdicts);
    } catch (const InputError& e) {
        rep["error"] = e.what();
        out.exit_code = kExitInputError;
    } catch (const PreconditionError& e) {
        rep["error"] = std::string("precondition: ") + e.what();
        out.exit_code = kExitInputError;
    } catch (const DomainError& e) {
        rep["error"] = std::string("domain: ") + e.what();
        out.exit_code = kExitInputError;
    } catch (const std::invalid_argument& e) {
        rep["error"] = e.what();
        out.exit_code = kExitInputError;
    } catch (const std::runtime_error& e) {
        rep["error"] = e.what();
        out.exit_code = kExitInconclusive;
    }

    rep["inputs"] = inputs_json(c, source);
    rep["verdicts"] = std::move(c.verdicts);
    rep["diagnostics"] = std::move(c.diagnostics);
    rep["tolerances"] = tolerances_json(c.cfg);
    rep["seed"] = c.seed;
    rep["exit_code"] = out.exit_code;
    rep["timings"] = json::object();
    if (opts.timings) {
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
        rep["timings"]["wall_ms"] = ms.count();
    }
    return out;
}

}  // namespace nmfp
