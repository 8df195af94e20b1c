#pragma once

// stiffstep command line: solve, converge, scan-stability.
//
// Exit codes: 0 success, 1 configuration error, 2 failed run (Newton
// divergence, overflow, or any failed convergence row).

#include "stiffstep/stiffstep.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace stiffstep::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitFailed = 2;

inline constexpr const char* kCacheEnv = "STIFFSTEP_CACHE_DIR";

struct RunConfig {
    std::string command;
    std::string problem = "linear";
    std::string solver = "tsfo-implicit";
    std::optional<double> t_end;
    double dt0 = 0.0;
    int levels = 1;
    std::optional<double> c_param;
    bool allow_unstable_c = false;
    double newton_atol = NewtonConfig{}.atol;
    double newton_rtol = NewtonConfig{}.rtol;
    int newton_maxit = NewtonConfig{}.max_iter;
    std::string ref_mode = "auto";
    std::string out_path;
    std::string format = "csv";
    std::string cache_dir = ".stiffstep-cache";
    std::string precision = "f64";

    double c_min = 0.0;
    double c_max = 0.1;
    int n_c = 5000;
    double y_min = 1e-8;
    double y_max = 1e4;
    int n_y = 25000;
    unsigned workers = 1;
};

/// Flag-level validation failure; the message starts with the flag name.
class FlagError : public ConfigError {
public:
    FlagError(const std::string& flag, const std::string& message) : ConfigError(flag + ": " + message) {}
};

[[nodiscard]] inline SchemeParams scheme_params(const RunConfig& cfg) {
    if (!cfg.c_param) return {};
    const double c = *cfg.c_param;
    if (!std::isfinite(c)) throw FlagError("--c-param", "must be finite");
    if (cfg.allow_unstable_c) return SchemeParams::general(c, -c);
    if (c < kAStableCMin || c > kAStableCMax)
        throw FlagError("--c-param", std::to_string(c) + " is outside the A-stable interval [" +
                                         std::to_string(kAStableCMin) + ", " + std::to_string(kAStableCMax) +
                                         "]; pass --allow-unstable-c to use it anyway");
    return SchemeParams::a_stable(c);
}

[[nodiscard]] inline NewtonConfig newton_config(const RunConfig& cfg) {
    NewtonConfig n{cfg.newton_atol, cfg.newton_rtol, cfg.newton_maxit};
    if (!(n.atol > 0.0)) throw FlagError("--newton-atol", "must be > 0");
    if (!(n.rtol >= 0.0)) throw FlagError("--newton-rtol", "must be >= 0");
    if (n.max_iter < 1) throw FlagError("--newton-maxit", "must be >= 1");
    return n;
}

[[nodiscard]] inline std::filesystem::path cache_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv(kCacheEnv); env && *env) return env;
    return cfg.cache_dir;
}

/// Opens --out (or falls back to `fallback` when no path is given).
class OutputSink {
public:
    OutputSink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
        if (!*file_) throw FlagError("--out", "cannot open '" + path + "' for writing");
        stream_ = file_.get();
    }
    std::ostream& stream() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

template <typename T>
[[nodiscard]] double resolve_t_end(const RunConfig& cfg, const BenchmarkProblem<T>& problem) {
    const double t_end = cfg.t_end ? *cfg.t_end : static_cast<double>(problem.default_t_end());
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw FlagError("--tend", "must be a positive number");
    return t_end;
}

template <typename T>
[[nodiscard]] BenchmarkProblem<T> resolve_problem(const RunConfig& cfg) {
    try {
        return problem_by_name<T>(cfg.problem);
    } catch (const ConfigError& e) {
        throw FlagError("--problem", e.what());
    }
}

[[nodiscard]] inline SolverId resolve_solver(const RunConfig& cfg) {
    try {
        return parse_solver(cfg.solver);
    } catch (const ConfigError& e) {
        throw FlagError("--solver", e.what());
    }
}

template <typename T>
[[nodiscard]] ReferenceSolution<T> resolve_reference(const RunConfig& cfg, const BenchmarkProblem<T>& problem,
                                                     double t_end) {
    const std::string& mode = cfg.ref_mode;
    if (mode.rfind("file:", 0) == 0) {
        ReferenceSolution<T> ref;
        try {
            ref = load_reference_file<T>(mode.substr(5));
        } catch (const Error& e) {
            throw FlagError("--ref", e.what());
        }
        if (ref.values.size() != problem.system.dim) throw FlagError("--ref", "reference dimension mismatch");
        ref.provenance = Provenance::file;
        return ref;
    }
    ReferenceMode m = ReferenceMode::automatic;
    if (mode == "exact") m = ReferenceMode::exact;
    else if (mode == "rk4-refined") m = ReferenceMode::rk4_refined;
    else if (mode != "auto") throw FlagError("--ref", "expected exact, rk4-refined or file:<path>");
    try {
        return reference_solution<T>(problem, t_end, cache_dir(cfg), m);
    } catch (const ConfigError& e) {
        throw FlagError("--ref", e.what());
    }
}

template <typename T>
int cmd_converge(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto problem = resolve_problem<T>(cfg);
    StudyConfig study;
    study.solver = resolve_solver(cfg);
    study.t_end = resolve_t_end(cfg, problem);
    study.dt0 = cfg.dt0;
    study.levels = cfg.levels;
    study.params = scheme_params(cfg);
    study.newton = newton_config(cfg);
    if (!(study.dt0 > 0.0)) throw FlagError("--dt0", "must be > 0");
    if (study.levels < 1) throw FlagError("--levels", "must be >= 1");
    if (cfg.format != "csv" && cfg.format != "md") throw FlagError("--format", "expected csv or md");

    const auto reference = resolve_reference(cfg, problem, study.t_end);
    const auto rows = convergence_study(problem, study, reference);

    OutputSink sink(cfg.out_path, out);
    if (cfg.format == "md") {
        char caption[256];
        std::snprintf(caption, sizeof caption, "Error and convergence order: %s, %s, t_end = %.10g (reference: %s)",
                      problem.name.c_str(), cfg.solver.c_str(), study.t_end,
                      std::string(provenance_name(reference.provenance)).c_str());
        write_convergence_markdown(sink.stream(), rows, caption);
    } else {
        write_convergence_csv(sink.stream(), rows);
    }
    sink.stream().flush();

    int status = kExitOk;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].failed) continue;
        err << "row " << i + 1 << " (dt = " << format_dt(rows[i].dt) << ") failed: " << rows[i].failure << '\n';
        status = kExitFailed;
    }
    return status;
}

template <typename T>
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto problem = resolve_problem<T>(cfg);
    const SolverId solver = resolve_solver(cfg);
    const double t_end = resolve_t_end(cfg, problem);
    if (!(cfg.dt0 > 0.0)) throw FlagError("--dt", "must be > 0");
    const auto stepper = make_stepper<T>(solver, scheme_params(cfg), newton_config(cfg));
    const auto step = effective_dt(t_end, cfg.dt0);

    OutputSink sink(cfg.out_path, out);
    std::ostream& os = sink.stream();
    const std::size_t n = problem.system.dim;
    os << 't';
    for (std::size_t i = 1; i <= n; ++i) os << ",u" << i;
    os << '\n';
    auto write_row = [&](double t, const Vector<T>& u) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.16e", t);
        os << buf;
        for (const T& v : u) {
            std::snprintf(buf, sizeof buf, "%.16e", static_cast<double>(v));
            os << ',' << buf;
        }
        os << '\n';
    };
    write_row(0.0, problem.u0);
    try {
        (void)integrate<T>(problem.system, problem.u0, T(t_end), step.n_steps, stepper,
                           [&](std::int64_t k, T, const Vector<T>& u) {
                               write_row(step.dt * static_cast<double>(k), u);
                           });
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        os.flush();
        err << "solve failed: " << e.what() << '\n';
        return kExitFailed;
    }
    os.flush();
    return kExitOk;
}

inline int cmd_scan_stability(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!std::isfinite(cfg.c_min) || !std::isfinite(cfg.c_max)) throw FlagError("--cmin/--cmax", "must be finite");
    if (cfg.c_min > cfg.c_max) throw FlagError("--cmin", "must not exceed --cmax");
    if (cfg.n_c < 2) throw FlagError("--nc", "must be >= 2");
    if (cfg.n_y < 2) throw FlagError("--ny", "must be >= 2");
    if (!(cfg.y_min > 0.0)) throw FlagError("--ymin", "must be > 0");
    if (!(cfg.y_min < cfg.y_max)) throw FlagError("--ymax", "must exceed --ymin");

    const auto scan = scan_a_stability(cfg.c_min, cfg.c_max, cfg.n_c, cfg.y_min, cfg.y_max, cfg.n_y, cfg.workers);
    {
        OutputSink sink(cfg.out_path, out);
        write_scan_csv(sink.stream(), scan);
        sink.stream().flush();
    }
    // The summary goes to stderr when the CSV occupies stdout.
    std::ostream& info = (cfg.out_path.empty() || cfg.out_path == "-") ? err : out;
    const double c_default = SchemeParams{}.c_param;
    if (!scan.valid_interval) {
        info << "warning: no A-stable C found on this grid\n";
        info << "default C = " << c_default << " inside: no\n";
        return kExitOk;
    }
    const auto [lo, hi] = *scan.valid_interval;
    char buf[160];
    std::snprintf(buf, sizeof buf, "valid C interval: [%.7f, %.7f]\n", lo, hi);
    info << buf;
    info << "default C = " << c_default << " inside: " << (c_default >= lo && c_default <= hi ? "yes" : "no") << '\n';
    return kExitOk;
}

template <typename T>
int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.command == "converge") return cmd_converge<T>(cfg, out, err);
    if (cfg.command == "solve") return cmd_solve<T>(cfg, out, err);
    return cmd_scan_stability(cfg, out, err);
}

inline void add_run_flags(CLI::App& sub, RunConfig& cfg) {
    sub.add_option("--problem", cfg.problem, "linear | robertson | ozone | vdp")->capture_default_str();
    sub.add_option("--solver", cfg.solver, "tsfo-implicit | tsfo-explicit | rk4-explicit | irk4-gauss")
        ->capture_default_str();
    sub.add_option("--tend", cfg.t_end, "final time (default: the problem's first t_end option)");
    sub.add_option("--c-param", cfg.c_param, "scheme parameter C (D = -C)");
    sub.add_flag("--allow-unstable-c", cfg.allow_unstable_c, "accept C outside the A-stable interval");
    sub.add_option("--newton-atol", cfg.newton_atol, "Newton absolute update tolerance")->capture_default_str();
    sub.add_option("--newton-rtol", cfg.newton_rtol, "Newton relative update tolerance")->capture_default_str();
    sub.add_option("--newton-maxit", cfg.newton_maxit, "Newton iteration limit")->capture_default_str();
    sub.add_option("--out", cfg.out_path, "output file (default: stdout)");
    sub.add_option("--precision", cfg.precision, "scalar type: f64 (double) or f80 (long double)")
        ->check(CLI::IsMember({"f64", "f80"}))
        ->capture_default_str();
}

/// Parses `args` (without the program name) and runs the selected command.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Implicit two-stage fourth-order time stepping for stiff ODEs", "stiffstep"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* solve = app.add_subcommand("solve", "integrate one problem and write the trajectory as CSV");
    add_run_flags(*solve, cfg);
    solve->add_option("--dt,--dt0", cfg.dt0, "step size (rounded so that t_end is hit exactly)")->required();

    auto* converge = app.add_subcommand("converge", "convergence study at dt0, dt0/2, ...");
    add_run_flags(*converge, cfg);
    converge->add_option("--dt0", cfg.dt0, "coarsest step size")->required();
    converge->add_option("--levels", cfg.levels, "number of rows: dt0, dt0/2, ...")->capture_default_str();
    converge->add_option("--ref", cfg.ref_mode, "exact | rk4-refined | file:<path> (default: exact when available)");
    converge->add_option("--format", cfg.format, "csv | md")->capture_default_str();
    converge->add_option("--cache-dir", cfg.cache_dir, "reference cache directory (env STIFFSTEP_CACHE_DIR wins)")
        ->capture_default_str();

    auto* scan = app.add_subcommand("scan-stability", "scan max |G(iy)| over C with D = -C");
    scan->add_option("--cmin", cfg.c_min)->capture_default_str();
    scan->add_option("--cmax", cfg.c_max)->capture_default_str();
    scan->add_option("--nc", cfg.n_c, "number of C grid points")->capture_default_str();
    scan->add_option("--ymin", cfg.y_min)->capture_default_str();
    scan->add_option("--ymax", cfg.y_max)->capture_default_str();
    scan->add_option("--ny", cfg.n_y, "number of log-spaced y points")->capture_default_str();
    scan->add_option("--workers", cfg.workers, "threads for the C grid (0: hardware concurrency)")
        ->capture_default_str();
    scan->add_option("--out", cfg.out_path, "CSV output file (default: stdout)");

    std::vector<const char*> argv{"stiffstep"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.workers == 0) cfg.workers = std::max(1u, std::thread::hardware_concurrency());

    try {
        return cfg.precision == "f80" ? dispatch<long double>(cfg, out, err) : dispatch<double>(cfg, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailed;
    }
}

}  // namespace stiffstep::cli
