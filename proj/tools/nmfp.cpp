// nmfp: command-line front end for the fractional-programming checks.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmfp/commands.hpp"
#include "nmfp/problem_file.hpp"

namespace {

struct Args {
    std::string file;
    std::vector<double> point;
    std::vector<double> direction;
    int grid = 0;
    std::optional<std::uint64_t> seed;
    bool weak = false;
    bool sweep = false;
    std::string json_out;
    bool timings = false;
};

void add_common(CLI::App* sub, Args& a, bool with_sweep)
{
    sub->add_option("file", a.file, "problem file")->required();
    sub->add_option("--point", a.point, "candidate point, comma separated")->delimiter(',');
    sub->add_option("--direction", a.direction, "direction, comma separated")->delimiter(',');
    sub->add_option("--grid", a.grid, "grid points per axis")->check(CLI::Range(2, 100000));
    sub->add_option("--seed", a.seed, "random seed");
    sub->add_flag("--weak", a.weak, "weak variant (lambda >= 0, weak efficiency)");
    if (with_sweep) sub->add_flag("--sweep", a.sweep, "sweep all sampled directions or grid points");
    sub->add_option("--json", a.json_out, "write the JSON report to this path");
    sub->add_flag("--timings", a.timings, "include wall-clock time in the report");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Checks for nonsmooth multiobjective fractional programs"};
    app.require_subcommand(1);
    Args args;
    const std::map<std::string, std::string> blurbs{
        {"derivatives", "directional derivative table at a point"},
        {"check-kkt", "strong KKT multipliers and constraint qualifications"},
        {"sufficiency", "sufficient optimality under generalized convexity"},
        {"duality", "weak, strong and converse duality checks"},
        {"pareto", "grid efficiency oracle and scalarization"}};
    for (const auto& name : nmfp::command_names()) {
        auto* sub = app.add_subcommand(name, blurbs.at(name));
        add_common(sub, args, name == "check-kkt" || name == "pareto");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return nmfp::kExitInputError;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    nmfp::CommandOptions opts;
    if (!args.point.empty()) opts.point = args.point;
    if (!args.direction.empty()) opts.direction = args.direction;
    opts.grid = args.grid;
    opts.seed = args.seed;
    opts.weak = args.weak;
    opts.sweep = args.sweep;
    opts.timings = args.timings;

    nmfp::CommandResult result;
    try {
        result = nmfp::run_command(command, nmfp::load_problem_file(args.file), opts, args.file);
    } catch (const nmfp::InputError& e) {
        std::cerr << "nmfp: " << args.file << ": " << e.what() << '\n';
        return nmfp::kExitInputError;
    }

    const std::string text = result.report.dump(2) + "\n";
    if (args.json_out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(args.json_out, std::ios::binary);
        if (!out) {
            std::cerr << "nmfp: cannot write " << args.json_out << '\n';
            return nmfp::kExitInputError;
        }
        out << text;
        for (const auto& v : result.report["verdicts"])
            std::cout << v["check"].get<std::string>() << ": " << v["status"].get<std::string>() << '\n';
    }
    if (result.report.contains("error"))
        std::cerr << "nmfp: " << result.report["error"].get<std::string>() << '\n';
    return result.exit_code;
}
