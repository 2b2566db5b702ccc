#include "nlsob/cli.hpp"

#include "nlsob/gamma_limit.hpp"
#include "nlsob/parallel.hpp"
#include "nlsob/report_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace nlsob::cli {

namespace {

constexpr std::string_view kKnownKeys[] = {
    "command", "p", "d", "delta", "deltas", "grid_n", "scheme", "diagonal", "pair_rule",
    "exploration", "seed", "n_list", "constant",
    "polar.h_max", "polar.h_steps", "polar.angle_steps", "polar.tolerance", "polar.extend_bounded",
    "kernel.shape", "kernel.scale", "kernel.threshold", "kernel.lo", "kernel.hi", "kernel.a",
    "kernel.b", "kernel.q", "kernel.exponent", "kernel.cutoff", "kernel.knots", "kernel.values",
    "kernel.normalize",
    "function.kind", "function.slope", "function.offset", "function.value", "function.frequency",
    "function.amplitude", "function.center", "function.radius", "function.height",
    "function.jumps", "function.levels", "function.file", "function.format", "function.n",
    "domain.kind", "domain.lo", "domain.hi", "domain.padding",
    "kappa.side", "kappa.slope", "kappa.epsilon", "kappa.iterations", "kappa.restarts",
    "kappa.initial_step", "kappa.min_step_ratio",
};

struct Outcome {
    CsvTable csv;
    nlohmann::json report;
    std::string summary;
    int status = kExitOk;
};

Point point_of(const Config& cfg, const std::string& key, int d, double fallback)
{
    const auto v = cfg.numbers(key, std::vector<double>(static_cast<std::size_t>(d), fallback));
    if (static_cast<int>(v.size()) != d) {
        throw ConfigError("config key '" + key + "': expected " + std::to_string(d) + " value(s)", key);
    }
    return Point{v[0], d == 2 ? v[1] : 0.0};
}

Kernel make_kernel(const Config& cfg, double p, int d)
{
    const std::string shape = cfg.text("kernel.shape", "indicator");
    const double scale = cfg.number("kernel.scale", 1.0);
    Kernel k = Kernel::indicator();
    if (shape == "indicator") {
        k = Kernel::indicator(scale, cfg.number("kernel.threshold", 1.0));
    } else if (shape == "band") {
        k = Kernel::band(scale, cfg.number("kernel.lo", 1.0), cfg.number("kernel.hi", 2.0));
    } else if (shape == "envelope") {
        k = Kernel::envelope(cfg.number("kernel.a", 1.0), cfg.number("kernel.b", 1.0),
                             cfg.number("kernel.q", p))
                .with_scale(scale);
    } else if (shape == "power") {
        k = Kernel::power_cutoff(cfg.number("kernel.exponent", p + 1.0),
                                 cfg.number("kernel.cutoff", kInf), scale);
    } else if (shape == "tabulated") {
        k = Kernel::tabulated(cfg.numbers("kernel.knots", {}), cfg.numbers("kernel.values", {}), scale);
    } else {
        throw ConfigError("config key 'kernel.shape': unknown shape '" + shape + "'", "kernel.shape");
    }
    return cfg.flag("kernel.normalize", true) ? normalize(k, d, p) : k;
}

int dimension(const Config& cfg)
{
    const int d = cfg.integer("d", 1);
    if (d != 1 && d != 2) {
        throw ConfigError("config key 'd': must be 1 or 2", "d");
    }
    return d;
}

TestFunction make_function(const Config& cfg, int d, double delta_max)
{
    const std::string kind = cfg.text("function.kind", "affine");
    const Point lo = point_of(cfg, "domain.lo", d, 0.0);
    const Point hi = point_of(cfg, "domain.hi", d, 1.0);
    const Box box{d, lo, hi};
    const std::string domain_kind = cfg.text("domain.kind", "box");
    Domain domain;
    if (domain_kind == "box") {
        domain = d == 1 ? Domain::interval(lo[0], hi[0]) : Domain::rectangle(lo, hi);
    } else if (domain_kind == "whole-space") {
        domain = Domain::whole_space(box, cfg.number("domain.padding", default_padding(delta_max)));
    } else {
        throw ConfigError("config key 'domain.kind': expected box or whole-space, got '" + domain_kind + "'",
                          "domain.kind");
    }

    FunctionKind fk;
    if (kind == "affine") {
        fk = fn::Affine{point_of(cfg, "function.slope", d, 1.0), cfg.number("function.offset", 0.0)};
        if (d == 2 && !cfg.has("function.slope")) {
            std::get<fn::Affine>(fk).a = {1.0, 0.0};
        }
    } else if (kind == "constant") {
        fk = fn::Affine{{0.0, 0.0}, cfg.number("function.value", 1.0)};
    } else if (kind == "cube-profile") {
        fk = fn::CubeProfile{};
    } else if (kind == "sine") {
        fk = fn::Sine{cfg.number("function.frequency", 1.0), cfg.number("function.amplitude", 1.0)};
    } else if (kind == "tent") {
        const Point mid{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
        const double half = 0.5 * std::min(box.extent(0), d == 2 ? box.extent(1) : box.extent(0));
        fk = fn::Tent{cfg.has("function.center") ? point_of(cfg, "function.center", d, 0.0) : mid,
                      cfg.number("function.radius", half), cfg.number("function.height", 1.0)};
    } else if (kind == "step") {
        fk = fn::Step{cfg.numbers("function.jumps", {}), cfg.numbers("function.levels", {})};
    } else if (kind == "grid") {
        if (!cfg.has("function.file")) {
            throw ConfigError("config key 'function.file' is required for grid functions", "function.file");
        }
        const int n = cfg.integer("function.n", 0);
        if (n < 2) {
            throw ConfigError("config key 'function.n': need at least 2 points per axis", "function.n");
        }
        const std::string format = cfg.text("function.format", "csv");
        if (format != "csv" && format != "binary") {
            throw ConfigError("config key 'function.format': expected csv or binary", "function.format");
        }
        fn::Grid g;
        g.n = {n, d == 2 ? n : 1};
        g.origin = lo;
        g.spacing = {box.extent(0) / (n - 1), d == 2 ? box.extent(1) / (n - 1) : 1.0};
        const std::size_t count = static_cast<std::size_t>(n) * static_cast<std::size_t>(g.n[1]);
        g.values = load_lattice(cfg.text("function.file", ""), format == "binary", count);
        fk = std::move(g);
    } else {
        throw ConfigError("config key 'function.kind': unknown kind '" + kind + "'", "function.kind");
    }
    return TestFunction(std::move(fk), domain);
}

FunctionalParams make_params(const Config& cfg)
{
    FunctionalParams params;
    params.p = cfg.number("p", 2.0);
    params.delta = cfg.number("delta", 0.1);
    params.grid_n = cfg.integer("grid_n", 1024);
    params.exploration = cfg.flag("exploration", false);
    params.polar_h_max = cfg.number("polar.h_max", params.polar_h_max);
    params.polar_h_steps = cfg.integer("polar.h_steps", params.polar_h_steps);
    params.polar_angle_steps = cfg.integer("polar.angle_steps", params.polar_angle_steps);
    params.polar_tolerance = cfg.number("polar.tolerance", params.polar_tolerance);
    params.polar_extend_bounded = cfg.flag("polar.extend_bounded", false);

    const std::string diagonal = cfg.text("diagonal", "exclude-and-bound");
    if (diagonal == "exclude-and-bound") {
        params.diagonal = DiagonalPolicy::ExcludeAndBound;
    } else if (diagonal == "exclude-cell") {
        params.diagonal = DiagonalPolicy::ExcludeCell;
    } else {
        throw ConfigError("config key 'diagonal': expected exclude-cell or exclude-and-bound", "diagonal");
    }
    const std::string rule = cfg.text("pair_rule", "auto");
    if (rule == "midpoint") {
        params.pair_rule = PairRule::Midpoint;
    } else if (rule == "linearized") {
        params.pair_rule = PairRule::Linearized;
    } else if (rule != "auto") {
        throw ConfigError("config key 'pair_rule': expected auto, midpoint or linearized", "pair_rule");
    }
    return params;
}

Scheme make_scheme(const Config& cfg)
{
    const std::string s = cfg.text("scheme", "pair");
    if (s == "pair") {
        return Scheme::Pair;
    }
    if (s == "polar") {
        return Scheme::Polar;
    }
    throw ConfigError("config key 'scheme': expected pair or polar, got '" + s + "'", "scheme");
}

double largest(const std::vector<double>& v, double fallback)
{
    return v.empty() ? fallback : *std::max_element(v.begin(), v.end());
}

Outcome validate_kernel_cmd(const Config& cfg)
{
    const double p = cfg.number("p", 2.0);
    const int d = dimension(cfg);
    const Kernel k = make_kernel(cfg, p, d);
    const auto r = validate(k, p, d);
    std::string failed;
    auto note = [&](bool ok, const char* name) {
        if (!ok) {
            failed += failed.empty() ? name : std::string(", ") + name;
        }
    };
    note(r.cond_growth_ok, "growth");
    note(r.cond_bounded_ok, "boundedness");
    note(r.cond_monotone_ok, "monotonicity");
    note(r.normalized_ok, "normalization");
    Outcome o;
    o.csv = validation_table(r);
    o.report = to_json(r);
    o.report["kernel"] = k.name();
    o.summary = "validate-kernel " + k.name() + ": " + (r.all_ok() ? "PASS" : "FAIL (" + failed + ")");
    o.status = r.all_ok() ? kExitOk : kExitValidation;
    return o;
}

void check_resolution(const TestFunction& f, int grid_n, double delta)
{
    const Box window = f.domain().window();
    const Lattice lat = Lattice::cells(window, grid_n);
    if (lat.max_spacing() > delta / 8.0 * (1.0 + 1e-12)) {
        const int needed = required_grid_n(window, delta);
        throw ResolutionError("lattice too coarse for delta = " + format_number(delta), needed);
    }
}

Outcome eval_cmd(const Config& cfg)
{
    const FunctionalParams params = make_params(cfg);
    const int d = dimension(cfg);
    const Kernel k = make_kernel(cfg, params.p, d);
    const TestFunction f = make_function(cfg, d, params.delta);
    const Scheme scheme = make_scheme(cfg);
    check_resolution(f, params.grid_n, params.delta);
    const EvalResult r = scheme == Scheme::Pair ? lambda_pair(f, k, params) : lambda_polar(f, k, params);
    const double energy = sobolev_energy(f, params.p);
    const double ratio = std::isfinite(energy) && energy > 0.0 ? r.value / energy : kInf;

    Outcome o;
    o.csv = CsvTable{{"delta", "value", "tail_bound", "energy", "ratio"}, {}};
    o.csv.add({params.delta, r.value, r.tail_bound, energy, ratio});
    o.report = to_json(r);
    o.report["energy"] = json_number(energy);
    o.report["kernel"] = k.name();
    o.report["function"] = f.name();
    o.summary = "eval: value=" + format_number(r.value) + " tail_bound=" + format_number(r.tail_bound);
    if (r.diverging) {
        o.summary += " diverging (doubling ratio " + format_number(r.doubling_ratio) + ")";
    }
    if (!r.certified) {
        o.summary += " [not certified]";
    }
    return o;
}

Outcome sweep_cmd(const Config& cfg)
{
    const FunctionalParams params = make_params(cfg);
    const int d = dimension(cfg);
    const Kernel k = make_kernel(cfg, params.p, d);
    std::vector<double> deltas = cfg.numbers("deltas", {});
    const TestFunction f = make_function(cfg, d, largest(deltas, 0.4));
    if (deltas.empty()) {
        const Lattice lat = Lattice::cells(f.domain().window(), params.grid_n);
        deltas = default_delta_list(lat.max_spacing());
        if (deltas.empty()) {
            throw ResolutionError("grid too coarse for the default delta list",
                                  required_grid_n(f.domain().window(), 0.4));
        }
    }
    const SweepReport report = delta_sweep(f, k, params, deltas, make_scheme(cfg));
    Outcome o;
    o.csv = sweep_table(report);
    o.report = to_json(report);
    const auto& last = report.rows.back();
    o.summary = "sweep: " + std::to_string(report.rows.size()) + " rows, value(delta=" +
                format_number(last.delta) + ")=" + format_number(last.value) +
                " ratio=" + format_number(last.ratio) +
                " empirical_bound_ratio=" + format_number(report.empirical_bound_ratio);
    return o;
}

Outcome pathology_cmd(const Config& cfg)
{
    std::vector<double> deltas = cfg.numbers("deltas", {0.1, 0.25, 0.49, 0.75});
    if (cfg.has("delta")) {
        if (cfg.has("deltas")) {
            throw ConfigError("config keys 'delta' and 'deltas' are mutually exclusive", "delta");
        }
        deltas = {cfg.number("delta", 0.25)};
    }
    const SweepReport report = band_pathology(deltas, cfg.number("p", 2.0), cfg.integer("grid_n", 1536));
    Outcome o;
    o.csv = sweep_table(report);
    o.report = to_json(report);
    o.summary = "pathology:";
    for (const auto& r : report.rows) {
        o.summary += " value(delta=" + format_number(r.delta) + ")=" + format_number(r.value);
        if (r.value == 0.0) {
            o.summary += " (exactly 0)";
        }
        o.summary += ";";
    }
    o.summary.pop_back();
    return o;
}

Outcome step_divergence_cmd(const Config& cfg)
{
    const DivergenceTable table =
        step_divergence(cfg.number("p", 2.0), cfg.number("delta", 0.1),
                        cfg.integers("n_list", {1024, 2048, 4096, 8192}), cfg.flag("constant", false));
    Outcome o;
    o.csv = divergence_table(table);
    o.report = to_json(table);
    o.summary = "step-divergence: final ratio=" +
                (table.rows.size() > 1 ? format_number(table.rows.back().ratio) : std::string(kInfFlag)) +
                " threshold=" + format_number(table.threshold) +
                (table.diverging ? " diverging" : " not diverging") +
                (table.certified ? "" : " [not certified]");
    return o;
}

Outcome kappa_cmd(const Config& cfg, std::uint64_t seed)
{
    KappaProblem problem;
    problem.d = dimension(cfg);
    problem.p = cfg.number("p", 2.0);
    problem.delta = cfg.number("delta", problem.delta);
    problem.grid_n = cfg.integer("grid_n", problem.grid_n);
    problem.side = cfg.number("kappa.side", problem.side);
    problem.slope = cfg.number("kappa.slope", problem.slope);
    problem.epsilon = cfg.number("kappa.epsilon");
    problem.iterations = cfg.integer("kappa.iterations", problem.iterations);
    problem.restarts = cfg.integer("kappa.restarts", problem.restarts);
    problem.initial_step = cfg.number("kappa.initial_step", problem.initial_step);
    problem.min_step_ratio = cfg.number("kappa.min_step_ratio", problem.min_step_ratio);
    problem.seed = seed;
    problem.kernel = make_kernel(cfg, problem.p, problem.d);

    const KappaReport r = kappa_estimate(problem);
    Outcome o;
    o.csv = kappa_trace_table(r);
    o.report = to_json(r);
    o.report["kernel"] = problem.kernel.name();
    o.summary = "kappa: kappa_hat=" + format_number(r.kappa_hat) + " baseline=" + format_number(r.baseline) +
                " proximity=" + format_number(r.proximity) + "/" + format_number(r.epsilon) +
                (r.in_range ? " in range" : " OUT OF RANGE (discretization artifact)");
    o.status = r.in_range ? kExitOk : kExitValidation;
    return o;
}

Outcome cross_check_cmd(const Config& cfg)
{
    const FunctionalParams base = make_params(cfg);
    const int d = dimension(cfg);
    const Kernel k = make_kernel(cfg, base.p, d);
    const std::vector<double> deltas = cfg.numbers("deltas", {0.2, 0.1, 0.05});
    const TestFunction f = make_function(cfg, d, largest(deltas, 0.2));
    std::vector<CrossCheckRow> rows;
    bool all = true;
    for (double delta : deltas) {
        check_resolution(f, base.grid_n, delta);
        FunctionalParams params = base;
        params.delta = delta;
        CrossCheckRow row;
        row.delta = delta;
        row.pair = lambda_pair(f, k, params);
        row.polar = lambda_polar(f, k, params);
        row.difference = std::abs(row.pair.value - row.polar.value);
        row.allowance = row.pair.tail_bound + row.polar.tail_bound +
                        0.02 * std::max(row.pair.value, row.polar.value);
        row.agree = row.difference <= row.allowance;
        all = all && row.agree;
        rows.push_back(row);
    }
    Outcome o;
    o.csv = cross_check_table(rows);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
        j.push_back({{"delta", r.delta},
                     {"pair", to_json(r.pair)},
                     {"polar", to_json(r.polar)},
                     {"difference", json_number(r.difference)},
                     {"allowance", json_number(r.allowance)},
                     {"agree", r.agree}});
    }
    o.report = {{"rows", j}, {"all_agree", all}, {"function", f.name()}, {"kernel", k.name()}};
    o.summary = std::string("cross-check: ") + (all ? "PASS" : "FAIL") + " over " +
                std::to_string(rows.size()) + " deltas";
    o.status = all ? kExitOk : kExitValidation;
    return o;
}

const std::map<std::string, std::function<Outcome(const Config&, std::uint64_t)>>& commands()
{
    static const std::map<std::string, std::function<Outcome(const Config&, std::uint64_t)>> table = {
        {"validate-kernel", [](const Config& c, std::uint64_t) { return validate_kernel_cmd(c); }},
        {"eval", [](const Config& c, std::uint64_t) { return eval_cmd(c); }},
        {"sweep", [](const Config& c, std::uint64_t) { return sweep_cmd(c); }},
        {"pathology", [](const Config& c, std::uint64_t) { return pathology_cmd(c); }},
        {"step-divergence", [](const Config& c, std::uint64_t) { return step_divergence_cmd(c); }},
        {"kappa", [](const Config& c, std::uint64_t s) { return kappa_cmd(c, s); }},
        {"cross-check", [](const Config& c, std::uint64_t) { return cross_check_cmd(c); }},
    };
    return table;
}

} // namespace

int run(const Config& config, const RunOptions& options, std::ostream& out, std::ostream& err)
{
    try {
        config.reject_unknown(kKnownKeys);

        std::string command = options.command;
        if (config.has("command")) {
            const std::string in_file = config.text("command", "");
            if (!command.empty() && in_file != command) {
                throw ConfigError("config key 'command' (" + in_file + ") contradicts the subcommand '" +
                                      command + "'",
                                  "command");
            }
            command = in_file;
        }
        const auto it = commands().find(command);
        if (it == commands().end()) {
            throw ParameterError("unknown command '" + command + "'");
        }

        parallel::set_num_threads(options.threads.value_or(0));
        const std::uint64_t seed = options.seed ? *options.seed : config.u64("seed", 1);

        const auto start = std::chrono::steady_clock::now();
        Outcome outcome = it->second(config, seed);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const std::string prefix = options.out_prefix.empty() ? "nlsob_" + command : options.out_prefix;
        nlohmann::json echo = nlohmann::json::object();
        for (const auto& [key, value] : config.entries()) {
            echo[key] = value;
        }
        nlohmann::json meta = {{"command", command},
                               {"config", echo},
                               {"seed", seed},
                               {"threads", parallel::num_threads()},
                               {"versions", versions_json()},
                               {"wall_time_seconds", wall},
                               {"summary", outcome.summary},
                               {"exit_status", outcome.status},
                               {"report", outcome.report}};
        write_file(prefix + ".csv", outcome.csv.render());
        write_file(prefix + ".meta.json", meta.dump(2) + "\n");
        out << outcome.summary << '\n';
        return outcome.status;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitParameter;
    } catch (const ResolutionError& e) {
        err << "resolution error: " << e.what() << "; required grid_n = " << e.required_grid_n() << '\n';
        return kExitParameter;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitParameter;
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Non-local Sobolev functional experiments"};
    app.require_subcommand(1);
    std::string config_path;
    std::string prefix;
    std::size_t threads = 0;
    std::uint64_t seed = 0;
    std::vector<CLI::Option*> thread_opts;
    std::vector<CLI::Option*> seed_opts;

    for (const auto& [name, fn] : commands()) {
        static const std::map<std::string, std::string> blurbs = {
            {"validate-kernel", "check normalization, monotonicity and growth of a kernel"},
            {"eval", "evaluate Lambda_delta and the energy for one delta"},
            {"sweep", "Lambda_delta over a delta list with energy ratios"},
            {"pathology", "band kernel on the step function below delta = 1/2"},
            {"step-divergence", "mesh refinement of Lambda_delta on an indicator"},
            {"kappa", "pattern-search upper bound on the limit constant"},
            {"cross-check", "pair quadrature against the polar scheme"},
        };
        auto* sub = app.add_subcommand(name, blurbs.at(name));
        sub->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--out", prefix, "output prefix for <prefix>.csv and <prefix>.meta.json");
        thread_opts.push_back(sub->add_option("--threads", threads, "worker threads (default: all cores)"));
        seed_opts.push_back(sub->add_option("--seed", seed, "optimizer seed"));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitParameter;
    }

    RunOptions options;
    options.command = app.get_subcommands().front()->get_name();
    options.out_prefix = prefix;
    for (auto* o : thread_opts) {
        if (o->count() > 0) {
            options.threads = threads;
        }
    }
    for (auto* o : seed_opts) {
        if (o->count() > 0) {
            options.seed = seed;
        }
    }

    Config config;
    try {
        if (!config_path.empty()) {
            config = Config::load(config_path);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitParameter;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitParameter;
    }
    return run(config, options, out, err);
}

} // namespace nlsob::cli
