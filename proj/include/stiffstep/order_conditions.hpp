#pragma once

// Coefficients of the two-stage fourth-order implicit scheme
//
//   stage 1: u_half = u_n + dt [a1 L(u_n) + a2 L(u_half)] + dt^2 [b1 G(u_n) + b2 G(u_half)]
//   stage 2: u_next = u_n + dt [a3 L(u_n) + a4 L(u_half) + a5 L(u_next)]
//                         + dt^2 [b3 G(u_n) + b4 G(u_half) + b5 G(u_next)]
//
// with G = dL/dt = L_u L. Matching Taylor expansions through dt^4 fixes stage 1
// uniquely and leaves stage 2 as a two-parameter (C, D) family.

#include "stiffstep/errors.hpp"

#include <array>
#include <cmath>
#include <string>

namespace stiffstep {

/// Lower/upper end of the published A-stable range for C (with D = -C).
inline constexpr double kAStableCMin = 0.018824;
inline constexpr double kAStableCMax = 0.045589;
/// Published optimal damping parameter.
inline constexpr double kOptimalC = 0.018924;

template <typename T = double>
struct Stage1Coefficients {
    T a1{}, a2{}, b1{}, b2{};
};

template <typename T = double>
struct Stage2Coefficients {
    T a3{}, a4{}, a5{}, b3{}, b4{}, b5{};
    T c_param{}, d_param{};
};

struct SchemeParams {
    double c_param = kOptimalC;
    double d_param = -kOptimalC;
    bool a_stable_mode = true;

    /// D = -C with the A-stable range enforced.
    [[nodiscard]] static SchemeParams a_stable(double c) { return SchemeParams{c, -c, true}; }

    /// Arbitrary (C, D); no stability restriction.
    [[nodiscard]] static SchemeParams general(double c, double d) { return SchemeParams{c, d, false}; }

    void validate() const {
        if (!std::isfinite(c_param) || !std::isfinite(d_param))
            throw ConfigError("scheme parameters must be finite");
        if (!a_stable_mode) return;
        if (d_param != -c_param)
            throw ConfigError("A-stable mode requires D = -C");
        if (c_param < kAStableCMin || c_param > kAStableCMax)
            throw ConfigError("C = " + std::to_string(c_param) + " outside the A-stable interval [" +
                              std::to_string(kAStableCMin) + ", " + std::to_string(kAStableCMax) + "]");
    }
};

/// Residuals of the four stage-1 order conditions.
template <typename T>
[[nodiscard]] std::array<T, 4> stage1_residuals(const Stage1Coefficients<T>& s) {
    return {
        s.a1 + s.a2 - T(1) / T(2),
        s.a2 / T(2) + s.b1 + s.b2 - T(1) / T(8),
        s.a2 / T(8) + s.b2 / T(2) - T(1) / T(48),
        s.a2 / T(48) + s.b2 / T(8) - T(1) / T(384),
    };
}

/// Residuals of the four stage-2 order conditions.
template <typename T>
[[nodiscard]] std::array<T, 4> stage2_residuals(const Stage2Coefficients<T>& s) {
    return {
        s.a3 + s.a4 + s.a5 - T(1),
        s.a4 / T(2) + s.a5 + s.b3 + s.b4 + s.b5 - T(1) / T(2),
        s.a4 / T(8) + s.a5 / T(2) + s.b4 / T(2) + s.b5 - T(1) / T(6),
        s.a4 / T(48) + s.a5 / T(6) + s.b4 / T(8) + s.b5 / T(2) - T(1) / T(24),
    };
}

/// Solves the stage-1 system. Conditions 3 and 4 involve only (a2, b2);
/// back-substitution then gives b1 and a1.
template <typename T = double>
[[nodiscard]] Stage1Coefficients<T> solve_stage1() {
    // [1/8  1/2] [a2]   [1/48 ]
    // [1/48 1/8] [b2] = [1/384]
    const T m11 = T(1) / T(8), m12 = T(1) / T(2), r1 = T(1) / T(48);
    const T m21 = T(1) / T(48), m22 = T(1) / T(8), r2 = T(1) / T(384);
    const T det = m11 * m22 - m12 * m21;
    Stage1Coefficients<T> s;
    s.a2 = (r1 * m22 - m12 * r2) / det;
    s.b2 = (m11 * r2 - r1 * m21) / det;
    s.b1 = T(1) / T(8) - s.a2 / T(2) - s.b2;
    s.a1 = T(1) / T(2) - s.a2;
    return s;
}

/// Closed-form solution of the stage-2 order conditions for free (C, D).
template <typename T = double>
[[nodiscard]] Stage2Coefficients<T> stage2_family(T c, T d) {
    Stage2Coefficients<T> s;
    s.a3 = T(1) / T(6) + T(4) * c + d / T(2);
    s.a4 = T(2) / T(3) - T(8) * c + T(2) * d;
    s.a5 = T(1) / T(6) + T(4) * c - T(5) * d / T(2);
    s.b3 = c;
    s.b4 = d;
    s.b5 = d / T(2) - c;
    s.c_param = c;
    s.d_param = d;
    return s;
}

template <typename T = double>
[[nodiscard]] Stage2Coefficients<T> stage2_family(const SchemeParams& p) {
    return stage2_family<T>(T(p.c_param), T(p.d_param));
}

}  // namespace stiffstep
