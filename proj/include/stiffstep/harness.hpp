#pragma once

// Convergence studies: fixed-step runs at dt0, dt0/2, ..., terminal errors
// against an exact or refined-RK4 reference, and observed orders
// ln(e1/e2) / ln(dt1/dt2) between consecutive rows.

#include "stiffstep/baselines.hpp"
#include "stiffstep/errors.hpp"
#include "stiffstep/linalg.hpp"
#include "stiffstep/problems.hpp"
#include "stiffstep/solvers.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace stiffstep {

/// Step used for refined RK4 reference solutions.
inline constexpr double kReferenceDt = 1e-6;

struct EffectiveStep {
    double dt = 0.0;
    std::int64_t n_steps = 0;
};

/// Rounds t_end / dt_requested to an integer step count (at least 1) and
/// returns the step that hits t_end exactly.
[[nodiscard]] inline EffectiveStep effective_dt(double t_end, double dt_requested) {
    if (!(t_end > 0.0) || !(dt_requested > 0.0)) throw ConfigError("effective_dt: t_end and dt must be > 0");
    // largest n with t_end / n >= dt, so the step is never shrunk below the request
    const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(t_end / dt_requested * (1 + 1e-12))));
    return {t_end / static_cast<double>(n), n};
}

struct ErrorNorms {
    double l2 = 0.0;
    double linf = 0.0;
};

template <typename T>
[[nodiscard]] ErrorNorms terminal_error(const Vector<T>& u_num, const Vector<T>& u_ref) {
    if (u_num.size() != u_ref.size()) throw ConfigError("terminal_error: dimension mismatch");
    const Vector<T> diff = u_num - u_ref;
    return {static_cast<double>(norm_l2(diff)), static_cast<double>(norm_linf(diff))};
}

/// Observed order between a coarse and a fine run; empty when either error
/// is zero/non-finite or the ratio is non-positive.
[[nodiscard]] inline std::optional<double> convergence_order(double err_coarse, double err_fine, double dt_ratio) {
    if (!(dt_ratio > 1.0) || !std::isfinite(dt_ratio)) return std::nullopt;
    if (!std::isfinite(err_coarse) || !std::isfinite(err_fine)) return std::nullopt;
    if (!(err_coarse > 0.0) || !(err_fine > 0.0)) return std::nullopt;
    const double order = std::log(err_coarse / err_fine) / std::log(dt_ratio);
    if (!std::isfinite(order)) return std::nullopt;
    return order;
}

enum class Provenance { exact, rk4_refined, file };

[[nodiscard]] inline std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::exact: return "exact";
        case Provenance::rk4_refined: return "rk4_refined";
        case Provenance::file: return "file";
    }
    return "unknown";
}

template <typename T = double>
struct ReferenceSolution {
    std::string problem_name;
    double t_end = 0.0;
    double dt_ref = 0.0;  // 0 unless provenance is rk4_refined
    Vector<T> values;
    Provenance provenance = Provenance::exact;
    bool loaded_from_cache = false;
};

/// Short tag written into cache records so different scalar types never mix.
template <typename T>
[[nodiscard]] constexpr std::string_view precision_tag() {
    if constexpr (std::is_same_v<T, double>) return "f64";
    else if constexpr (std::is_same_v<T, long double>) return "f80";
    else if constexpr (std::is_same_v<T, float>) return "f32";
    else return "custom";
}

namespace detail {

inline std::string key_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

template <typename T>
std::string format_full(T x) {
    std::ostringstream os;
    os.precision(std::numeric_limits<T>::max_digits10);
    os << std::scientific << x;
    return os.str();
}

template <typename T>
T parse_scalar(const std::string& text) {
    char* end = nullptr;
    T v;
    if constexpr (std::is_same_v<T, long double>) v = std::strtold(text.c_str(), &end);
    else v = static_cast<T>(std::strtod(text.c_str(), &end));
    if (end == text.c_str() || *end != '\0') throw CacheCorrupt("unparsable value '" + text + "'");
    return v;
}

}  // namespace detail

/// <cache_dir>/<problem>_<t_end>_<dt_ref>.ref for double precision; other
/// scalar types insert their precision tag before the extension.
template <typename T = double>
[[nodiscard]] std::filesystem::path reference_cache_path(const std::filesystem::path& cache_dir,
                                                         std::string_view problem, double t_end, double dt_ref) {
    std::string name = std::string(problem) + "_" + detail::key_number(t_end) + "_" + detail::key_number(dt_ref);
    if constexpr (!std::is_same_v<T, double>) name += "." + std::string(precision_tag<T>());
    return cache_dir / (name + ".ref");
}

/// Serializes a reference record: "key value" header lines, one "value" line
/// per component, then a checksum over everything before it.
template <typename T>
[[nodiscard]] std::string serialize_reference(const ReferenceSolution<T>& ref) {
    std::ostringstream body;
    body << "# stiffstep reference solution v1\n";
    body << "problem " << ref.problem_name << '\n';
    body << "t_end " << detail::format_full(ref.t_end) << '\n';
    body << "dt_ref " << detail::format_full(ref.dt_ref) << '\n';
    body << "precision " << precision_tag<T>() << '\n';
    body << "provenance " << provenance_name(ref.provenance) << '\n';
    body << "dim " << ref.values.size() << '\n';
    for (const T& v : ref.values) body << "value " << detail::format_full(v) << '\n';
    const std::string text = body.str();
    return text + "checksum " + detail::hex64(detail::fnv1a(text)) + '\n';
}

template <typename T>
[[nodiscard]] ReferenceSolution<T> parse_reference(const std::string& text) {
    const auto pos = text.rfind("checksum ");
    if (pos == std::string::npos) throw CacheCorrupt("reference record has no checksum line");
    const std::string body = text.substr(0, pos);
    std::string stored = text.substr(pos + 9);
    while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
    if (stored != detail::hex64(detail::fnv1a(body))) throw CacheCorrupt("reference record checksum mismatch");

    ReferenceSolution<T> ref;
    ref.provenance = Provenance::file;
    std::istringstream in(body);
    std::string line;
    std::size_t dim = 0;
    std::vector<T> values;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto space = line.find(' ');
        if (space == std::string::npos) throw CacheCorrupt("malformed line '" + line + "'");
        const std::string key = line.substr(0, space);
        const std::string value = line.substr(space + 1);
        if (key == "problem") ref.problem_name = value;
        else if (key == "t_end") ref.t_end = detail::parse_scalar<double>(value);
        else if (key == "dt_ref") ref.dt_ref = detail::parse_scalar<double>(value);
        else if (key == "precision") {
            if (value != precision_tag<T>()) throw CacheCorrupt("precision tag '" + value + "' does not match");
        } else if (key == "provenance") {
            if (value == "exact") ref.provenance = Provenance::exact;
            else if (value == "rk4_refined") ref.provenance = Provenance::rk4_refined;
            else ref.provenance = Provenance::file;
        } else if (key == "dim") dim = static_cast<std::size_t>(std::stoul(value));
        else if (key == "value") values.push_back(detail::parse_scalar<T>(value));
        else throw CacheCorrupt("unknown key '" + key + "'");
    }
    if (values.empty() || values.size() != dim) throw CacheCorrupt("reference record dimension mismatch");
    ref.values = Vector<T>(std::move(values));
    return ref;
}

template <typename T>
[[nodiscard]] ReferenceSolution<T> load_reference_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open reference file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_reference<T>(ss.str());
}

/// Writes through a temporary file and an atomic rename so concurrent
/// readers never observe a partial record.
template <typename T>
void store_reference_file(const ReferenceSolution<T>& ref, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp" + std::to_string(detail::fnv1a(path.string() + std::to_string(std::rand())));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write reference cache " + tmp.string());
        out << serialize_reference(ref);
    }
    std::filesystem::rename(tmp, path);
}

enum class ReferenceMode { automatic, exact, rk4_refined };

/// Exact solution when the problem has one (and mode allows); otherwise
/// classical RK4 at dt_ref, cached under cache_dir (an empty cache_dir
/// disables the cache).
template <typename T = double>
[[nodiscard]] ReferenceSolution<T> reference_solution(const BenchmarkProblem<T>& problem, double t_end,
                                                      const std::filesystem::path& cache_dir,
                                                      ReferenceMode mode = ReferenceMode::automatic,
                                                      double dt_ref = kReferenceDt) {
    if (!(t_end > 0.0)) throw ConfigError("reference_solution: t_end must be > 0");
    if (mode != ReferenceMode::rk4_refined && problem.has_exact()) {
        return {problem.name, t_end, 0.0, problem.exact(T(t_end)), Provenance::exact, false};
    }
    if (mode == ReferenceMode::exact) throw ConfigError("problem '" + problem.name + "' has no exact solution");

    const auto step = effective_dt(t_end, dt_ref);
    const auto path = reference_cache_path<T>(cache_dir, problem.name, t_end, step.dt);
    if (!cache_dir.empty() && std::filesystem::exists(path)) {
        try {
            auto cached = load_reference_file<T>(path);
            if (cached.problem_name == problem.name && cached.values.size() == problem.system.dim) {
                cached.provenance = Provenance::rk4_refined;
                cached.loaded_from_cache = true;
                return cached;
            }
        } catch (const CacheCorrupt&) {
            // fall through and recompute
        }
    }

    ReferenceSolution<T> ref{problem.name, t_end, step.dt, {}, Provenance::rk4_refined, false};
    try {
        ref.values = integrate_rk4_compensated(problem.system, problem.u0, T(t_end), step.n_steps);
    } catch (Error& e) {
        e.add_context("reference solution for " + problem.name);
        throw;
    }
    if (!cache_dir.empty()) store_reference_file(ref, path);
    return ref;
}

struct ConvergenceRow {
    double dt = 0.0;
    std::int64_t n_steps = 0;
    double error_l2 = 0.0;
    double error_linf = 0.0;
    std::optional<double> order_l2;
    std::optional<double> order_linf;
    double avg_newton_iters = 0.0;
    bool failed = false;
    std::string failure;
};

struct StudyConfig {
    SolverId solver = SolverId::tsfo_implicit;
    double t_end = 0.0;
    double dt0 = 0.0;
    int levels = 1;
    SchemeParams params{};
    NewtonConfig newton{};
};

/// Runs levels rows at dt0 / 2^k. A failed row (divergence, overflow) is
/// kept with NaN errors and the study continues.
template <typename T = double>
[[nodiscard]] std::vector<ConvergenceRow> convergence_study(const BenchmarkProblem<T>& problem,
                                                            const StudyConfig& cfg,
                                                            const ReferenceSolution<T>& reference) {
    if (cfg.levels < 1) throw ConfigError("convergence_study: levels must be >= 1");
    if (reference.values.size() != problem.system.dim) throw ConfigError("reference dimension mismatch");
    cfg.newton.validate();
    cfg.params.validate();
    const Stepper<T> stepper = make_stepper<T>(cfg.solver, cfg.params, cfg.newton);

    std::vector<ConvergenceRow> rows;
    for (int k = 0; k < cfg.levels; ++k) {
        const auto step = effective_dt(cfg.t_end, cfg.dt0 / std::ldexp(1.0, k));
        ConvergenceRow row;
        row.dt = step.dt;
        row.n_steps = step.n_steps;
        try {
            const auto res = integrate(problem.system, problem.u0, T(cfg.t_end), step.n_steps, stepper);
            const auto err = terminal_error(res.state, reference.values);
            row.error_l2 = err.l2;
            row.error_linf = err.linf;
            row.avg_newton_iters = static_cast<double>(res.newton_iters) / static_cast<double>(step.n_steps);
        } catch (const Error& e) {
            row.failed = true;
            row.failure = e.what();
            row.error_l2 = row.error_linf = std::numeric_limits<double>::quiet_NaN();
        }
        if (!rows.empty()) {
            const auto& prev = rows.back();
            row.order_l2 = convergence_order(prev.error_l2, row.error_l2, prev.dt / row.dt);
            row.order_linf = convergence_order(prev.error_linf, row.error_linf, prev.dt / row.dt);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace stiffstep
