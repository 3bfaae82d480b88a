#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "free_fista.hpp"
#include "io.hpp"
#include "problems.hpp"

// Configuration, problem registry, reference values and benchmark runs.
namespace ffista::harness {

using json = nlohmann::json;

inline const std::vector<std::string>& algorithm_names() {
    static const std::vector<std::string> names{"free-fista", "fista-adabt", "fista-restart", "fista"};
    return names;
}

struct RunConfig {
    std::string problem = "lasso";
    std::uint64_t seed = 0;
    /// Problem parameters by name; missing keys take the registry default.
    std::map<std::string, std::string> params;
    std::string algo = "free-fista";
    FreeFistaConfig solver;
    std::string trace_path;
    std::string report_path;
    std::string reference_path;
    std::string out_dir = ".";
    long reference_budget = 1'000'000;
    double reference_epsilon = 1e-12;
};

// ---------------------------------------------------------------------------
// Problem registry

/// A constructed instance with its start point and the step bound the
/// fixed-step baselines use.
struct ProblemSetup {
    CompositeProblem prob;
    Vector x0;
    double L_hat = 0;
    /// Canonical description; hashed to key reference files.
    std::string key;
    std::uint64_t seed = 0;
};

struct ParamView {
    const std::map<std::string, std::string>& values;
    const std::map<std::string, std::string>& defaults;

    const std::string& raw(const std::string& k) const {
        auto it = values.find(k);
        return it != values.end() ? it->second : defaults.at(k);
    }
    double real(const std::string& k) const {
        const std::string& s = raw(k);
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos == s.size()) return v;
        } catch (const std::logic_error&) {
        }
        throw ConfigError("parameter '" + k + "' is not a number: '" + s + "'");
    }
    long integer(const std::string& k) const {
        const double v = real(k);
        if (v != std::floor(v)) throw ConfigError("parameter '" + k + "' must be an integer");
        return static_cast<long>(v);
    }
};

struct ProblemEntry {
    std::string name;
    std::string summary;
    std::map<std::string, std::string> defaults;
    std::function<ProblemSetup(const ParamView&, std::uint64_t seed)> build;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Vector uniform_start(Eigen::Index n, double lo, double hi, std::uint64_t seed) {
    // offset keeps the start point independent of the instance's draws
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    return random_uniform(n, lo, hi, rng);
}

inline std::string setup_key(const std::string& name, const ParamView& p, std::uint64_t seed) {
    std::string key = "problem=" + name + ";seed=" + std::to_string(seed);
    for (const auto& [k, v] : p.defaults) key += ";" + k + "=" + p.raw(k);
    return key;
}

inline ProblemSetup build_quadratic(const std::string& name, const ParamView& p, std::uint64_t seed, bool l1) {
    auto prob = make_quadratic_growth_test(p.integer("dim"), p.real("L"), p.real("mu"), seed,
                                           l1 ? p.real("lambda") : 0.0);
    const double L = prob.ground_truth()->L_true;
    Vector x0 = uniform_start(prob.dim(), -1, 1, seed);
    return {std::move(prob), std::move(x0), L, setup_key(name, p, seed)};
}

inline ProblemSetup build_lasso(const ParamView& p, std::uint64_t seed) {
    auto inst = make_random_lasso(p.integer("m"), p.integer("n"), p.real("lambda"), seed);
    const double s = Eigen::BDCSVD<Matrix>(inst.A).singularValues()(0);
    auto prob = make_problem(std::move(inst));
    Vector x0 = uniform_start(prob.dim(), -1, 1, seed);
    return {std::move(prob), std::move(x0), s * s, setup_key("lasso", p, seed)};
}

inline ProblemSetup build_logistic(const ParamView& p, std::uint64_t seed) {
    const std::string& data = p.raw("data");
    std::string key = setup_key("logistic", p, seed);
    if (data.empty()) {
        auto inst = make_random_logistic(p.integer("m"), p.integer("n"), p.real("lambda1"), p.real("lambda2"), seed);
        const double L = logistic_lipschitz_estimate(inst);
        auto prob = make_problem(std::move(inst));
        Vector x0 = uniform_start(prob.dim(), -1, 1, seed);
        return {std::move(prob), std::move(x0), L, std::move(key)};
    }
    auto ds = load_sparse_dataset(data);
    key += ";data_fnv=" + std::to_string(fnv1a(read_file_bytes(data)));
    LogisticL2L1Instance<SparseMatrix> inst(std::move(ds.A), std::move(ds.b), p.real("lambda1"), p.real("lambda2"));
    const double L = logistic_lipschitz_estimate(inst);
    auto prob = make_problem(std::move(inst));
    Vector x0 = uniform_start(prob.dim(), -1, 1, seed);
    return {std::move(prob), std::move(x0), L, std::move(key)};
}

inline ProblemSetup build_inpainting(const ParamView& p, std::uint64_t seed) {
    const std::string& data = p.raw("data");
    const int levels = static_cast<int>(p.integer("levels"));
    std::string key = setup_key("inpainting", p, seed);
    InpaintingInstance inst = [&] {
        if (data.empty()) return make_synthetic_inpainting(p.integer("side"), levels, p.real("missing"),
                                                           p.real("lambda"), seed);
        const Matrix img = load_pgm(data);
        key += ";data_fnv=" + std::to_string(fnv1a(read_file_bytes(data)));
        Vector flat(img.size());
        for (Eigen::Index r = 0; r < img.rows(); ++r)
            for (Eigen::Index c = 0; c < img.cols(); ++c) flat[r * img.cols() + c] = img(r, c);
        Rng rng(seed);
        boost::random::bernoulli_distribution<double> keep(1.0 - p.real("missing"));
        Vector mask(flat.size());
        for (auto& m : mask) m = keep(rng) ? 1.0 : 0.0;
        return InpaintingInstance(mask, flat.cwiseProduct(mask), Haar2D(img.rows(), img.cols(), levels),
                                  p.real("lambda"));
    }();
    Vector x0 = inst.observed();
    auto prob = make_problem(std::move(inst));
    return {std::move(prob), std::move(x0), 1.0, std::move(key)};
}

inline ProblemSetup build_poisson(const ParamView& p, std::uint64_t seed) {
    auto inst = make_synthetic_poisson(p.integer("side"), static_cast<int>(p.integer("q")), p.real("b_bar"),
                                       p.real("lambda"), seed);
    const double L = kl_lipschitz_estimate(inst);
    auto prob = make_problem(std::move(inst));
    Vector x0 = uniform_start(prob.dim(), 0, 1, seed);
    return {std::move(prob), std::move(x0), L, setup_key("poisson", p, seed)};
}

} // namespace detail

inline const std::vector<ProblemEntry>& problem_registry() {
    static const std::vector<ProblemEntry> reg{
        {"quadratic", "diagonal quadratic with spectrum [mu, L], closed-form solution",
         {{"dim", "100"}, {"L", "1e4"}, {"mu", "1"}},
         [](const ParamView& p, std::uint64_t s) { return detail::build_quadratic("quadratic", p, s, false); }},
        {"quadratic-l1", "diagonal quadratic plus lambda |x|_1, closed-form solution",
         {{"dim", "100"}, {"L", "1e4"}, {"mu", "1"}, {"lambda", "0.1"}},
         [](const ParamView& p, std::uint64_t s) { return detail::build_quadratic("quadratic-l1", p, s, true); }},
        {"lasso", "Gaussian-design lasso 1/2 |Ax - b|^2 + lambda |x|_1",
         {{"m", "100"}, {"n", "50"}, {"lambda", "0.1"}}, detail::build_lasso},
        {"logistic", "l2-l1 logistic regression (synthetic, or a sparse dataset file via data=)",
         {{"m", "100"}, {"n", "2000"}, {"lambda1", "10"}, {"lambda2", "3"}, {"data", ""}}, detail::build_logistic},
        {"inpainting", "masked image recovery with l1 penalty on Haar coefficients (synthetic, or data=<pgm>)",
         {{"side", "64"}, {"levels", "3"}, {"missing", "0.5"}, {"lambda", "0.01"}, {"data", ""}},
         detail::build_inpainting},
        {"poisson", "Poisson super-resolution: KL data term, l1 penalty and nonnegativity",
         {{"side", "32"}, {"q", "2"}, {"b_bar", "1"}, {"lambda", "0.1"}}, detail::build_poisson},
    };
    return reg;
}

inline std::string joined(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out;
}

inline const ProblemEntry& find_problem(const std::string& name) {
    std::vector<std::string> names;
    for (const auto& e : problem_registry()) {
        if (e.name == name) return e;
        names.push_back(e.name);
    }
    throw ConfigError("unknown problem '" + name + "'; valid problems: " + joined(names));
}

inline void check_algorithm(const std::string& algo) {
    for (const auto& a : algorithm_names())
        if (a == algo) return;
    throw ConfigError("unknown algorithm '" + algo + "'; valid algorithms: " + joined(algorithm_names()));
}

inline ProblemSetup build_problem(const RunConfig& cfg) {
    const ProblemEntry& e = find_problem(cfg.problem);
    for (const auto& [k, v] : cfg.params)
        if (!e.defaults.count(k))
            throw ConfigError("problem '" + e.name + "' has no parameter '" + k + "'");
    ProblemSetup setup = e.build(ParamView{cfg.params, e.defaults}, cfg.seed);
    setup.seed = cfg.seed;
    return setup;
}

inline std::string hex64(std::uint64_t h) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

inline std::string problem_hash(const ProblemSetup& s) { return hex64(detail::fnv1a(s.key)); }

// ---------------------------------------------------------------------------
// Config files

/// Reads an INI file with [problem], [solver] and [output] sections.
///
/// [problem] takes name, seed and the problem's own parameters; [solver] takes
/// algo, rho, delta, epsilon, L_min, L0, C, max_iters, max_backtracks;
/// [output] takes trace, report, reference, out_dir, reference_budget,
/// reference_epsilon. Unknown sections or solver/output keys are errors.
inline RunConfig load_run_config(std::istream& in, RunConfig cfg = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError("config: " + e.message(), static_cast<long>(e.line()));
    }
    auto num = [](const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos == v.size()) return d;
        } catch (const std::logic_error&) {
        }
        throw ConfigError("config key '" + key + "' is not a number: '" + v + "'");
    };
    for (const auto& [section, body] : tree) {
        for (const auto& [key, node] : body) {
            const std::string v = node.get_value<std::string>();
            const std::string full = section + "." + key;
            if (section == "problem") {
                if (key == "name") cfg.problem = v;
                else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(num(full, v));
                else cfg.params[key] = v;
            } else if (section == "solver") {
                auto& s = cfg.solver;
                if (key == "algo") cfg.algo = v;
                else if (key == "rho") s.rho = num(full, v);
                else if (key == "delta") s.delta = num(full, v);
                else if (key == "epsilon") s.epsilon = num(full, v);
                else if (key == "L_min") s.L_min = num(full, v);
                else if (key == "L0") s.L0 = num(full, v);
                else if (key == "C") s.C = num(full, v);
                else if (key == "max_iters") s.max_total_iterations = static_cast<long>(num(full, v));
                else if (key == "max_backtracks") s.max_backtracks = static_cast<int>(num(full, v));
                else throw ConfigError("unknown config key '" + full + "'");
            } else if (section == "output") {
                if (key == "trace") cfg.trace_path = v;
                else if (key == "report") cfg.report_path = v;
                else if (key == "reference") cfg.reference_path = v;
                else if (key == "out_dir") cfg.out_dir = v;
                else if (key == "reference_budget") cfg.reference_budget = static_cast<long>(num(full, v));
                else if (key == "reference_epsilon") cfg.reference_epsilon = num(full, v);
                else throw ConfigError("unknown config key '" + full + "'");
            } else {
                throw ConfigError("unknown config section '" + section + "'");
            }
        }
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path, RunConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return load_run_config(in, std::move(cfg));
}

inline json config_to_json(const RunConfig& cfg, const ProblemSetup& setup) {
    const ProblemEntry& e = find_problem(cfg.problem);
    json params = json::object();
    for (const auto& [k, def] : e.defaults) {
        auto it = cfg.params.find(k);
        params[k] = it != cfg.params.end() ? it->second : def;
    }
    const auto& s = cfg.solver;
    return {{"problem", cfg.problem},
            {"problem_hash", problem_hash(setup)},
            {"seed", cfg.seed},
            {"params", params},
            {"algo", cfg.algo},
            {"rho", s.rho},
            {"delta", s.delta},
            {"epsilon", s.epsilon},
            {"L_min", s.L_min},
            {"L0", s.L0},
            {"C", s.doubling_constant()},
            {"max_iters", s.max_total_iterations},
            {"max_backtracks", s.max_backtracks},
            {"L_hat", setup.L_hat}};
}

// ---------------------------------------------------------------------------
// Runs

inline SolveReport run_algorithm(const std::string& algo, const ProblemSetup& setup, const FreeFistaConfig& cfg) {
    check_algorithm(algo);
    cfg.validate();
    if (algo == "free-fista") return free_fista(setup.prob, setup.x0, cfg);
    if (algo == "fista-adabt") return solve_fista_adabt(setup.prob, setup.x0, cfg);
    if (algo == "fista-restart") return restart_fista_fixed_step(setup.prob, setup.x0, setup.L_hat, cfg);
    return vanilla_fista(setup.prob, setup.x0, setup.L_hat, cfg.max_total_iterations, cfg.epsilon);
}

inline json report_to_json(const SolveReport& r) {
    auto real = [](double v) -> json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    return {{"algo", r.algo},
            {"exit", to_string(r.exit)},
            {"restarts", r.restarts},
            {"total_inner_iterations", r.total_inner_iterations},
            {"total_backtracks", r.total_backtracks},
            {"fb_backtracks", r.fb_backtracks},
            {"F_initial", real(r.F_initial)},
            {"F_out", real(r.F_out)},
            {"g_norm", real(r.g_norm)},
            {"L_final", r.trace.empty() ? json(nullptr) : real(r.trace.back().L_est)},
            {"elapsed_s", r.elapsed_s}};
}

inline void write_trace_file(const std::string& path, const std::vector<TraceRecord>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write trace '" + path + "'");
    write_trace(out, rows);
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

struct RunResult {
    SolveReport report;
    json summary;
};

/// Builds the problem, runs the configured algorithm and writes the trace
/// CSV and JSON summary when paths are set.
inline RunResult run(const RunConfig& cfg) {
    check_algorithm(cfg.algo);
    const ProblemSetup setup = build_problem(cfg);
    RunResult res{run_algorithm(cfg.algo, setup, cfg.solver), {}};
    res.summary = {{"config", config_to_json(cfg, setup)}, {"report", report_to_json(res.report)}};
    if (!cfg.trace_path.empty()) write_trace_file(cfg.trace_path, res.report.trace);
    if (!cfg.report_path.empty()) write_json_file(cfg.report_path, res.summary);
    return res;
}

/// First accepted iteration whose gradient-mapping test reached epsilon, or
/// nullopt when the run stopped on its budget.
inline std::optional<long> iterations_to_epsilon(const SolveReport& r) {
    if (r.exit != ExitReason::epsilon_reached) return std::nullopt;
    return r.total_inner_iterations;
}

struct CompareResult {
    std::vector<SolveReport> reports;
    json summary;
};

/// Runs every algorithm in turn on one instance, writing <out_dir>/<algo>.csv
/// and <out_dir>/compare.json.
inline CompareResult compare(const RunConfig& cfg, const std::vector<std::string>& algos = algorithm_names()) {
    for (const auto& a : algos) check_algorithm(a);
    const ProblemSetup setup = build_problem(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    CompareResult out;
    out.summary = {{"config", config_to_json(cfg, setup)}, {"runs", json::array()}};
    out.summary["config"].erase("algo");
    for (const auto& a : algos) {
        SolveReport r = run_algorithm(a, setup, cfg.solver);
        const std::string csv = (std::filesystem::path(cfg.out_dir) / (a + ".csv")).string();
        write_trace_file(csv, r.trace);
        json j = report_to_json(r);
        j["trace"] = csv;
        const auto it = iterations_to_epsilon(r);
        j["iterations_to_epsilon"] = it ? json(*it) : json(nullptr);
        out.summary["runs"].push_back(std::move(j));
        out.reports.push_back(std::move(r));
    }
    write_json_file((std::filesystem::path(cfg.out_dir) / "compare.json").string(), out.summary);
    return out;
}

// ---------------------------------------------------------------------------
// Reference values

struct Reference {
    std::string problem;
    std::string problem_hash;
    double F_hat = 0;
    long budget = 0;
    std::uint64_t seed = 0;
    double epsilon = 0;
    std::string exit;
    long iterations = 0;
    Vector x_hat;
};

/// Long Free-FISTA run from the problem's start point. Stops at the budget or
/// once the gradient mapping falls below epsilon.
inline Reference compute_reference(const ProblemSetup& setup, long budget, double epsilon,
                                   FreeFistaConfig cfg = {}) {
    if (budget < 1) throw ConfigError("reference budget must be positive");
    cfg.max_total_iterations = budget;
    cfg.epsilon = epsilon;
    const SolveReport r = free_fista(setup.prob, setup.x0, cfg);
    Reference ref;
    ref.problem = setup.prob.name();
    ref.problem_hash = problem_hash(setup);
    ref.budget = budget;
    ref.seed = setup.seed;
    ref.epsilon = epsilon;
    ref.exit = to_string(r.exit);
    ref.iterations = r.total_inner_iterations;
    // F_hat is the lowest value seen; inner iterates can sit below the
    // returned point by roundoff
    ref.x_hat = r.x_out;
    ref.F_hat = r.F_out;
    for (const auto& row : r.trace) ref.F_hat = std::min(ref.F_hat, row.F_value);
    return ref;
}

inline json reference_to_json(const Reference& ref) {
    return {{"problem", ref.problem}, {"problem_hash", ref.problem_hash},
            {"F_hat", ref.F_hat},     {"budget", ref.budget},
            {"seed", ref.seed},       {"epsilon", ref.epsilon},
            {"exit", ref.exit},       {"iterations", ref.iterations},
            {"x_hat", std::vector<double>(ref.x_hat.data(), ref.x_hat.data() + ref.x_hat.size())}};
}

inline Reference reference_from_json(const json& j) {
    try {
        Reference ref;
        ref.problem = j.at("problem").get<std::string>();
        ref.problem_hash = j.at("problem_hash").get<std::string>();
        ref.F_hat = j.at("F_hat").get<double>();
        ref.budget = j.at("budget").get<long>();
        ref.seed = j.at("seed").get<std::uint64_t>();
        ref.epsilon = j.at("epsilon").get<double>();
        ref.exit = j.at("exit").get<std::string>();
        ref.iterations = j.at("iterations").get<long>();
        const auto x = j.at("x_hat").get<std::vector<double>>();
        ref.x_hat = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
        return ref;
    } catch (const json::exception& e) {
        throw ParseError(std::string("reference file: ") + e.what());
    }
}

inline void save_reference(const std::string& path, const Reference& ref) {
    write_json_file(path, reference_to_json(ref));
}

inline Reference load_reference(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open reference '" + path + "'");
    try {
        return reference_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("reference file: ") + e.what());
    }
}

/// Throws StaleReference when the reference belongs to another problem or a
/// benchmark went below F_hat by more than roundoff.
inline void check_reference(const Reference& ref, const ProblemSetup& setup, double benchmark_min_F) {
    if (ref.problem_hash != problem_hash(setup))
        throw StaleReference("reference was computed for a different problem (hash " + ref.problem_hash +
                             ", expected " + problem_hash(setup) + ")");
    const double tol = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(ref.F_hat));
    if (benchmark_min_F < ref.F_hat - tol) {
        std::ostringstream ss;
        ss << std::setprecision(17) << "benchmark reached F = " << benchmark_min_F << " below reference F_hat = "
           << ref.F_hat << "; recompute the reference with a larger budget than " << ref.budget;
        throw StaleReference(ss.str());
    }
}

} // namespace ffista::harness
