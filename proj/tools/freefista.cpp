// Command-line front end: solve, compare, reference, list.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freefista/harness.hpp"

namespace fh = ffista::harness;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kBudget = 3, kParse = 4 };

struct Overrides {
    std::optional<std::string> config, problem, algo, trace, report, reference, out_dir;
    std::optional<double> rho, delta, eps, lmin, l0, C, ref_eps;
    std::optional<std::uint64_t> seed;
    std::optional<long> max_iters, ref_budget;
    std::vector<std::string> params;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "INI file with [problem], [solver], [output] sections");
    cmd->add_option("--problem", o.problem, "problem name (see `list`)");
    cmd->add_option("--seed", o.seed, "instance and start-point seed");
    cmd->add_option("-p,--param", o.params, "problem parameter key=value (repeatable)");
    cmd->add_option("--rho", o.rho, "backtracking shrink factor in (0,1)");
    cmd->add_option("--delta", o.delta, "step growth factor in (0,1]");
    cmd->add_option("--eps", o.eps, "gradient-mapping tolerance");
    cmd->add_option("--lmin", o.lmin, "lower bound on the Lipschitz estimate");
    cmd->add_option("--l0", o.l0, "initial Lipschitz estimate");
    cmd->add_option("--C", o.C, "doubling constant (default 6.38/sqrt(rho))");
    cmd->add_option("--max-iters", o.max_iters, "budget of accepted iterations");
}

fh::RunConfig effective_config(const Overrides& o) {
    fh::RunConfig cfg;
    if (o.config) cfg = fh::load_run_config(*o.config);
    if (o.problem) cfg.problem = *o.problem;
    if (o.seed) cfg.seed = *o.seed;
    for (const auto& kv : o.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ffista::ConfigError("--param expects key=value, got '" + kv + "'");
        cfg.params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (o.algo) cfg.algo = *o.algo;
    if (o.rho) cfg.solver.rho = *o.rho;
    if (o.delta) cfg.solver.delta = *o.delta;
    if (o.eps) cfg.solver.epsilon = *o.eps;
    if (o.lmin) cfg.solver.L_min = *o.lmin;
    if (o.l0) cfg.solver.L0 = *o.l0;
    if (o.C) cfg.solver.C = *o.C;
    if (o.max_iters) cfg.solver.max_total_iterations = *o.max_iters;
    if (o.trace) cfg.trace_path = *o.trace;
    if (o.report) cfg.report_path = *o.report;
    if (o.reference) cfg.reference_path = *o.reference;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.ref_budget) cfg.reference_budget = *o.ref_budget;
    if (o.ref_eps) cfg.reference_epsilon = *o.ref_eps;
    cfg.solver.validate();
    return cfg;
}

void print_line(const ffista::SolveReport& r) {
    std::printf("%-14s exit=%-16s iters=%-8ld backtracks=%-6ld restarts=%-4d F=%.12g |g|=%.3g time=%.3fs\n",
                r.algo.c_str(), to_string(r.exit), r.total_inner_iterations, r.total_backtracks, r.restarts, r.F_out,
                r.g_norm, r.elapsed_s);
}

int cmd_solve(const Overrides& o) {
    const auto cfg = effective_config(o);
    const auto res = fh::run(cfg);
    print_line(res.report);
    if (cfg.report_path.empty()) std::cout << res.summary.dump(2) << '\n';
    return res.report.exit == ffista::ExitReason::epsilon_reached ? kOk : kBudget;
}

int cmd_compare(const Overrides& o, const std::vector<std::string>& algos) {
    const auto cfg = effective_config(o);
    const auto res = fh::compare(cfg, algos.empty() ? fh::algorithm_names() : algos);
    bool all_reached = true;
    for (const auto& r : res.reports) {
        print_line(r);
        all_reached = all_reached && r.exit == ffista::ExitReason::epsilon_reached;
    }
    std::cout << "wrote " << cfg.out_dir << "/compare.json\n";
    return all_reached ? kOk : kBudget;
}

int cmd_reference(const Overrides& o, const std::optional<std::string>& check_csv) {
    const auto cfg = effective_config(o);
    if (cfg.reference_path.empty()) throw ffista::ConfigError("reference: --out (or [output] reference) is required");
    const auto setup = fh::build_problem(cfg);
    if (check_csv) {
        const auto ref = fh::load_reference(cfg.reference_path);
        std::ifstream in(*check_csv);
        if (!in) throw ffista::ConfigError("cannot open trace '" + *check_csv + "'");
        double min_F = ffista::kInf;
        for (const auto& row : ffista::read_trace(in)) min_F = std::min(min_F, row.F_value);
        fh::check_reference(ref, setup, min_F);
        std::printf("reference %s is valid for %s (F_hat=%.17g)\n", cfg.reference_path.c_str(), check_csv->c_str(),
                    ref.F_hat);
        return kOk;
    }
    const auto ref = fh::compute_reference(setup, cfg.reference_budget, cfg.reference_epsilon, cfg.solver);
    fh::save_reference(cfg.reference_path, ref);
    std::printf("F_hat=%.17g after %ld iterations (%s); hash %s -> %s\n", ref.F_hat, ref.iterations,
                ref.exit.c_str(), ref.problem_hash.c_str(), cfg.reference_path.c_str());
    return kOk;
}

int cmd_list() {
    std::cout << "problems:\n";
    for (const auto& e : fh::problem_registry()) {
        std::cout << "  " << e.name << ": " << e.summary << "\n   ";
        for (const auto& [k, v] : e.defaults) std::cout << ' ' << k << '=' << (v.empty() ? "\"\"" : v);
        std::cout << '\n';
    }
    std::cout << "algorithms:\n";
    for (const auto& a : fh::algorithm_names()) std::cout << "  " << a << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameter-free restarted FISTA solver and benchmark harness"};
    app.require_subcommand(1);

    Overrides solve_o, compare_o, ref_o;
    std::vector<std::string> compare_algos;
    std::optional<std::string> check_csv;

    auto* solve = app.add_subcommand("solve", "run one algorithm on one problem");
    add_common(solve, solve_o);
    solve->add_option("--algo", solve_o.algo, "free-fista | fista-adabt | fista-restart | fista");
    solve->add_option("--trace", solve_o.trace, "CSV trace output path");
    solve->add_option("--report", solve_o.report, "JSON summary output path");

    auto* cmp = app.add_subcommand("compare", "run several algorithms on one instance");
    add_common(cmp, compare_o);
    cmp->add_option("--algos", compare_algos, "subset of algorithms (default: all)");
    cmp->add_option("--out-dir", compare_o.out_dir, "directory for <algo>.csv and compare.json");

    auto* ref = app.add_subcommand("reference", "precompute F_hat with a long Free-FISTA run");
    add_common(ref, ref_o);
    ref->add_option("--out", ref_o.reference, "reference file path");
    ref->add_option("--budget", ref_o.ref_budget, "iteration budget of the reference run");
    ref->add_option("--ref-eps", ref_o.ref_eps, "stop the reference run below this gradient-mapping norm");
    ref->add_option("--check", check_csv, "validate an existing reference against a trace CSV");

    app.add_subcommand("list", "list problems, parameters and algorithms");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (solve->parsed()) return cmd_solve(solve_o);
        if (cmp->parsed()) return cmd_compare(compare_o, compare_algos);
        if (ref->parsed()) return cmd_reference(ref_o, check_csv);
        return cmd_list();
    } catch (const ffista::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const ffista::InvalidConditioning& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const ffista::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const ffista::StaleReference& e) {
        std::cerr << "stale reference: " << e.what() << '\n';
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
