#pragma once

// Linear stability of the implicit two-stage scheme on u' = lambda u, z = lambda dt:
//
//   u_half = R(z) u_n,  R(z) = (1 + z/4 + z^2/48) / (1 - z/4 + z^2/48)
//   u_next = G(z) u_n,  G(z) = (1 + z [a3 + a4 R] + z^2 [b3 + b4 R]) / (1 - a5 z - b5 z^2)
//
// Multiplying through by the denominator of R turns G into a single
// polynomial ratio P/Q, which the scan and the series code work with.

#include "stiffstep/errors.hpp"
#include "stiffstep/linalg.hpp"
#include "stiffstep/order_conditions.hpp"
#include "stiffstep/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace stiffstep {

struct AmplificationParams {
    double c_param = kOptimalC;
    double d_param = -kOptimalC;

    [[nodiscard]] static AmplificationParams from(const SchemeParams& p) { return {p.c_param, p.d_param}; }
    [[nodiscard]] static AmplificationParams l_stable(double c) { return {c, -c}; }
};

/// |denominator| below this times (1 + |z|^2) counts as a pole hit.
inline constexpr double kPoleTolerance = 1e-14;
/// Slack on |G(iy)| <= 1 that absorbs rounding where |G| -> 1 (y -> 0).
inline constexpr double kStabilitySlack = 1e-12;

struct AmplificationRational {
    Polynomial numerator;        // P
    Polynomial denominator;      // Q = stage1_denominator * stage2_denominator
    Polynomial stage1_numerator;
    Polynomial stage1_denominator;
    Polynomial stage2_denominator;
};

[[nodiscard]] inline AmplificationRational amplification_rational(const Stage1Coefficients<double>& s1,
                                                                  const Stage2Coefficients<double>& s2) {
    AmplificationRational r;
    r.stage1_numerator = Polynomial{1.0, s1.a1, s1.b1};
    r.stage1_denominator = Polynomial{1.0, -s1.a2, -s1.b2};
    r.stage2_denominator = Polynomial{1.0, -s2.a5, -s2.b5};
    const Polynomial& nr = r.stage1_numerator;
    const Polynomial& dr = r.stage1_denominator;
    const Polynomial z{0.0, 1.0};
    const Polynomial z2{0.0, 0.0, 1.0};
    r.numerator = dr + z * (s2.a3 * dr + s2.a4 * nr) + z2 * (s2.b3 * dr + s2.b4 * nr);
    r.denominator = dr * r.stage2_denominator;
    return r;
}

[[nodiscard]] inline AmplificationRational amplification_rational(const AmplificationParams& p) {
    return amplification_rational(solve_stage1<double>(), stage2_family<double>(p.c_param, p.d_param));
}

namespace detail {

inline void check_pole(ComplexScalar denominator, ComplexScalar z, const char* what) {
    if (std::abs(denominator) < kPoleTolerance * (1.0 + std::norm(z)))
        throw PoleEvaluation(std::string(what) + " evaluated at a pole, z = (" + std::to_string(z.real()) + ", " +
                             std::to_string(z.imag()) + ")");
}

}  // namespace detail

/// Stage-1 amplification factor R(z); poles at 6 +- 2i sqrt(3).
[[nodiscard]] inline ComplexScalar amplification_r(ComplexScalar z) {
    const ComplexScalar num = 1.0 + z / 4.0 + z * z / 48.0;
    const ComplexScalar den = 1.0 - z / 4.0 + z * z / 48.0;
    detail::check_pole(den, z, "R(z)");
    return num / den;
}

/// Full-step amplification factor G(z; C, D), evaluated as the composite
/// with R(z).
[[nodiscard]] inline ComplexScalar amplification_g(ComplexScalar z, const AmplificationParams& p) {
    const auto s = stage2_family<double>(p.c_param, p.d_param);
    const ComplexScalar r = amplification_r(z);
    const ComplexScalar num = 1.0 + z * (s.a3 + s.a4 * r) + z * z * (s.b3 + s.b4 * r);
    const ComplexScalar den = 1.0 - s.a5 * z - s.b5 * z * z;
    detail::check_pole(den, z, "G(z)");
    return num / den;
}

/// lim G(z) as |z| -> infinity; +inf when the numerator outgrows the denominator.
[[nodiscard]] inline double amplification_g_infinity(const AmplificationParams& p) {
    const auto r = amplification_rational(p);
    const int dp = r.numerator.degree();
    const int dq = r.denominator.degree();
    if (dp < dq) return 0.0;
    if (dp > dq) return std::numeric_limits<double>::infinity();
    return r.numerator.coefficient(static_cast<std::size_t>(dp)) / r.denominator.coefficient(static_cast<std::size_t>(dq));
}

/// Maclaurin coefficients 0..order of G for arbitrary coefficient sets.
[[nodiscard]] inline std::vector<double> amplification_series(const Stage1Coefficients<double>& s1,
                                                              const Stage2Coefficients<double>& s2, int order) {
    const auto r = amplification_rational(s1, s2);
    return power_series_quotient(r.numerator, r.denominator, static_cast<std::size_t>(order) + 1);
}

/// |g_k - 1/k!| for k = 0..order, where g_k are the Maclaurin coefficients of G.
[[nodiscard]] inline std::vector<double> taylor_defect(const Stage1Coefficients<double>& s1,
                                                       const Stage2Coefficients<double>& s2, int order) {
    if (order < 0 || order > 8) throw ConfigError("taylor_defect: order must be in [0, 8]");
    auto g = amplification_series(s1, s2, order);
    double inv_factorial = 1.0;
    for (int k = 0; k <= order; ++k) {
        if (k > 0) inv_factorial /= k;
        g[static_cast<std::size_t>(k)] = std::abs(g[static_cast<std::size_t>(k)] - inv_factorial);
    }
    return g;
}

[[nodiscard]] inline std::vector<double> taylor_defect(const AmplificationParams& p, int order) {
    return taylor_defect(solve_stage1<double>(), stage2_family<double>(p.c_param, p.d_param), order);
}

struct PoleReport {
    bool analytic_in_left_half_plane = false;
    /// Real parts of the roots of 1 - (1/6 + 13C/2) z + (3C/2) z^2 followed by
    /// those of the stage-1 denominator (always 6, 6).
    std::vector<double> root_real_parts;
};

/// Poles of G for D = -C. For C < 0 the stage-2 quadratic has real roots of
/// opposite sign (their product is 2/(3C) < 0), so a pole always sits in the
/// left half-plane; only C >= 0 yields a G analytic there.
[[nodiscard]] inline PoleReport pole_analysis(double c) {
    PoleReport rep;
    const double b = 1.0 / 6.0 + 6.5 * c;  // 1 - b z + a z^2
    const double a = 1.5 * c;
    if (a == 0.0) {
        if (b != 0.0) rep.root_real_parts.push_back(1.0 / b);
    } else {
        const double disc = b * b - 4.0 * a;
        if (disc >= 0.0) {
            const double q = 0.5 * (b + std::copysign(std::sqrt(disc), b));
            rep.root_real_parts.push_back(q / a);
            rep.root_real_parts.push_back(1.0 / q);
        } else {
            rep.root_real_parts.push_back(b / (2.0 * a));
            rep.root_real_parts.push_back(b / (2.0 * a));
        }
    }
    rep.root_real_parts.push_back(6.0);
    rep.root_real_parts.push_back(6.0);
    rep.analytic_in_left_half_plane =
        std::all_of(rep.root_real_parts.begin(), rep.root_real_parts.end(), [](double re) { return re > 0.0; });
    return rep;
}

struct StabilityScanResult {
    std::vector<double> c_values;
    std::vector<double> max_abs_g;
    std::vector<bool> valid_mask;
    std::optional<std::pair<double, double>> valid_interval;
};

namespace detail {

/// |p(iy)|^2 with even/odd powers split so only real arithmetic is used.
inline double abs2_on_imaginary_axis(const std::vector<double>& p, double y, double y2) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = p.size(); k-- > 0;) {
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) re = re * y2 + sign * p[k];
        else im = im * y2 + sign * p[k];
    }
    // re accumulated even powers in y^2, im accumulated odd powers / y.
    im *= y;
    return re * re + im * im;
}

}  // namespace detail

/// sup over the sampled y of |G(iy)| for D = -C.
[[nodiscard]] inline double max_abs_g_on_axis(double c, const std::vector<double>& ys) {
    const auto r = amplification_rational(AmplificationParams::l_stable(c));
    const auto& p = r.numerator.coefficients();
    const auto& q = r.denominator.coefficients();
    double best = 0.0;
    for (const double y : ys) {
        const double y2 = y * y;
        const double ratio = detail::abs2_on_imaginary_axis(p, y, y2) / detail::abs2_on_imaginary_axis(q, y, y2);
        if (!(ratio <= best)) best = std::isnan(ratio) ? std::numeric_limits<double>::infinity() : ratio;
    }
    return std::sqrt(best);
}

/// A-stability verdict for one C with D = -C.
[[nodiscard]] inline bool is_a_stable(double c, double max_abs_g) {
    return max_abs_g <= 1.0 + kStabilitySlack && pole_analysis(c).analytic_in_left_half_plane &&
           std::abs(amplification_g_infinity(AmplificationParams::l_stable(c))) <= 1.0;
}

[[nodiscard]] inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    const double a = std::log10(lo), b = std::log10(hi);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = (n == 1) ? lo : std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
    return out;
}

[[nodiscard]] inline std::vector<double> lin_spaced(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = (n == 1) ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    return out;
}

/// Scans C in [c_min, c_max] (D = -C) against |G(iy)| on log-spaced y.
/// The C grid may be split across `workers` threads; output keeps C order.
[[nodiscard]] inline StabilityScanResult scan_a_stability(double c_min, double c_max, int n_c, double y_min,
                                                          double y_max, int n_y, unsigned workers = 1) {
    if (!(y_min > 0.0) || !(y_min < y_max)) throw ConfigError("scan: require 0 < y_min < y_max");
    if (n_c < 2 || n_y < 2) throw ConfigError("scan: grids need at least 2 points");
    if (!(c_min <= c_max)) throw ConfigError("scan: require c_min <= c_max");

    StabilityScanResult res;
    res.c_values = lin_spaced(c_min, c_max, static_cast<std::size_t>(n_c));
    res.max_abs_g.assign(res.c_values.size(), 0.0);
    const std::vector<double> ys = log_spaced(y_min, y_max, static_cast<std::size_t>(n_y));

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) res.max_abs_g[i] = max_abs_g_on_axis(res.c_values[i], ys);
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(res.c_values.size())));
    if (workers == 1) {
        work(0, res.c_values.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (res.c_values.size() + workers - 1) / workers;
        for (std::size_t begin = 0; begin < res.c_values.size(); begin += chunk)
            pool.emplace_back(work, begin, std::min(res.c_values.size(), begin + chunk));
    }

    res.valid_mask.resize(res.c_values.size());
    std::size_t best_begin = 0, best_len = 0, run_begin = 0, run_len = 0;
    for (std::size_t i = 0; i < res.c_values.size(); ++i) {
        const bool ok = is_a_stable(res.c_values[i], res.max_abs_g[i]);
        res.valid_mask[i] = ok;
        if (ok) {
            if (run_len == 0) run_begin = i;
            if (++run_len > best_len) {
                best_len = run_len;
                best_begin = run_begin;
            }
        } else {
            run_len = 0;
        }
    }
    if (best_len > 0)
        res.valid_interval = std::make_pair(res.c_values[best_begin], res.c_values[best_begin + best_len - 1]);
    return res;
}

}  // namespace stiffstep
