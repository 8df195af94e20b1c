#pragma once

// Two-stage fourth-order (TSFO) steppers built on L and its time derivative
// G = L_u L.
//
// Implicit step:
//   1. predict u_half with the explicit half step, Newton-solve stage 1
//        F1(u) = u_n + dt [a1 L_n + a2 L(u)] + dt^2 [b1 G_n + b2 G(u)] - u
//        J1(u) = a2 dt L_u(u) + b2 dt^2 G_u(u) - I
//   2. predict u_next with the explicit full step, Newton-solve stage 2
//        F2(u) = u_n + dt [a3 L_n + a4 L_half + a5 L(u)]
//                    + dt^2 [b3 G_n + b4 G_half + b5 G(u)] - u
//        J2(u) = a5 dt L_u(u) + b5 dt^2 G_u(u) - I
// With D = -C: a5 = 1/6 + 13C/2, b5 = -3C/2.

#include "stiffstep/errors.hpp"
#include "stiffstep/linalg.hpp"
#include "stiffstep/model.hpp"
#include "stiffstep/newton.hpp"
#include "stiffstep/order_conditions.hpp"

#include <utility>

namespace stiffstep {

struct StepStats {
    int stage1_iters = 0;
    int stage2_iters = 0;
    double final_update_norm_stage1 = 0.0;
    double final_update_norm_stage2 = 0.0;
    int restarts = 0;  // stage solves retried from u_n after the predictor start failed
};

template <typename T>
struct TsfoStep {
    Vector<T> state;
    StepStats stats;
};

namespace detail {

template <typename T>
Vector<T> predict_half(const Vector<T>& u_n, const StateDerivatives<T>& dn, T dt) {
    Vector<T> out = u_n;
    out.axpy(dt / T(2), dn.rhs).axpy(dt * dt / T(8), dn.temporal);
    require_finite(out, "stage-1 predictor");
    return out;
}

template <typename T>
Vector<T> predict_full(const Vector<T>& u_n, const StateDerivatives<T>& dn, const Vector<T>& g_half, T dt) {
    Vector<T> out = u_n;
    out.axpy(dt, dn.rhs).axpy(dt * dt / T(6), dn.temporal).axpy(dt * dt / T(3), g_half);
    require_finite(out, "stage-2 predictor");
    return out;
}

/// Residual/Jacobian pair for u = base + dt*alpha*L(u) + dt^2*beta*G(u).
template <typename T>
class ImplicitStageSystem {
public:
    ImplicitStageSystem(const OdeSystem<T>& sys, Vector<T> base, T dt, T alpha, T beta)
        : sys_(sys), base_(std::move(base)), dt_(dt), alpha_(alpha), beta_(beta) {}

    Vector<T> residual(const Vector<T>& u) {
        derivs_ = evaluate_derivatives(sys_, u);
        Vector<T> f = base_;
        f.axpy(dt_ * alpha_, derivs_.rhs).axpy(dt_ * dt_ * beta_, derivs_.temporal);
        f -= u;
        return f;
    }

    Matrix<T> jacobian(const Vector<T>& u) {
        Matrix<T> j = temporal_jacobian_from(sys_, u, derivs_);
        j *= dt_ * dt_ * beta_;
        const T scale = dt_ * alpha_;
        const std::size_t n = sys_.dim;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) j(r, c) += scale * derivs_.jac(r, c);
            j(r, r) -= T(1);
        }
        return j;
    }

private:
    const OdeSystem<T>& sys_;
    Vector<T> base_;
    T dt_, alpha_, beta_;
    StateDerivatives<T> derivs_;
};

template <typename T>
NewtonResult<T> solve_half_stage(const OdeSystem<T>& sys, const Vector<T>& u_n, const StateDerivatives<T>& dn,
                             T dt, const NewtonConfig& cfg, Vector<T> guess) {
    const auto s = stiffstep::solve_stage1<T>();
    Vector<T> base = u_n;
    base.axpy(dt * s.a1, dn.rhs).axpy(dt * dt * s.b1, dn.temporal);
    ImplicitStageSystem<T> stage(sys, std::move(base), dt, s.a2, s.b2);
    return newton_solve<T>(stage, std::move(guess), cfg);
}

template <typename T>
NewtonResult<T> solve_full_stage(const OdeSystem<T>& sys, const Vector<T>& u_n, const StateDerivatives<T>& dn,
                             const StateDerivatives<T>& dh, T dt, const SchemeParams& params,
                             const NewtonConfig& cfg, Vector<T> guess) {
    const auto s = stage2_family<T>(params);
    Vector<T> base = u_n;
    base.axpy(dt * s.a3, dn.rhs).axpy(dt * s.a4, dh.rhs);
    base.axpy(dt * dt * s.b3, dn.temporal).axpy(dt * dt * s.b4, dh.temporal);
    ImplicitStageSystem<T> stage(sys, std::move(base), dt, s.a5, s.b5);
    return newton_solve<T>(stage, std::move(guess), cfg);
}

/// Runs `solve(guess)` from the predictor; if that Newton solve fails, runs it
/// once more from u_n. Iterations of both attempts are counted.
template <typename T, typename Solve>
NewtonResult<T> solve_from_predictor(Solve&& solve, Vector<T> predictor, const Vector<T>& u_n, int& restarts) {
    int spent = 0;
    try {
        return solve(std::move(predictor));
    } catch (const NewtonDiverged& e) {
        spent = e.iterations();
    } catch (const SingularMatrix&) {
    }
    ++restarts;
    auto res = solve(u_n);
    res.iterations += spent;
    return res;
}

}  // namespace detail

/// Explicit half step u_n + dt/2 L(u_n) + dt^2/8 G(u_n).
template <typename T>
[[nodiscard]] Vector<T> predict_stage1(const OdeSystem<T>& sys, const Vector<T>& u_n, T dt) {
    return detail::predict_half(u_n, evaluate_derivatives(sys, u_n), dt);
}

/// Explicit full step u_n + dt L(u_n) + dt^2/6 [G(u_n) + 2 G(u_half)].
template <typename T>
[[nodiscard]] Vector<T> predict_stage2(const OdeSystem<T>& sys, const Vector<T>& u_n, const Vector<T>& u_half,
                                       T dt) {
    return detail::predict_full(u_n, evaluate_derivatives(sys, u_n), temporal_derivative(sys, u_half), dt);
}

template <typename T>
[[nodiscard]] NewtonResult<T> newton_stage1(const OdeSystem<T>& sys, const Vector<T>& u_n, T dt,
                                            const NewtonConfig& cfg, Vector<T> initial_guess) {
    cfg.validate();
    return detail::solve_half_stage(sys, u_n, evaluate_derivatives(sys, u_n), dt, cfg, std::move(initial_guess));
}

/// Stage-1 solve started from the explicit predictor.
template <typename T>
[[nodiscard]] NewtonResult<T> newton_stage1(const OdeSystem<T>& sys, const Vector<T>& u_n, T dt,
                                            const NewtonConfig& cfg) {
    cfg.validate();
    const auto dn = evaluate_derivatives(sys, u_n);
    return detail::solve_half_stage(sys, u_n, dn, dt, cfg, detail::predict_half(u_n, dn, dt));
}

template <typename T>
[[nodiscard]] NewtonResult<T> newton_stage2(const OdeSystem<T>& sys, const Vector<T>& u_n, const Vector<T>& u_half,
                                            T dt, const SchemeParams& params, const NewtonConfig& cfg,
                                            Vector<T> initial_guess) {
    cfg.validate();
    params.validate();
    return detail::solve_full_stage(sys, u_n, evaluate_derivatives(sys, u_n), evaluate_derivatives(sys, u_half), dt,
                                params, cfg, std::move(initial_guess));
}

/// Stage-2 solve started from the explicit predictor.
template <typename T>
[[nodiscard]] NewtonResult<T> newton_stage2(const OdeSystem<T>& sys, const Vector<T>& u_n, const Vector<T>& u_half,
                                            T dt, const SchemeParams& params, const NewtonConfig& cfg) {
    cfg.validate();
    params.validate();
    const auto dn = evaluate_derivatives(sys, u_n);
    const auto dh = evaluate_derivatives(sys, u_half);
    return detail::solve_full_stage(sys, u_n, dn, dh, dt, params, cfg, detail::predict_full(u_n, dn, dh.temporal, dt));
}

/// One step of the implicit two-stage fourth-order scheme.
template <typename T>
[[nodiscard]] TsfoStep<T> step_implicit_tsfo(const OdeSystem<T>& sys, const Vector<T>& u_n, T dt,
                                             const SchemeParams& params = {}, const NewtonConfig& cfg = {}) {
    if (!(dt > T(0))) throw ConfigError("implicit TSFO step requires dt > 0");
    cfg.validate();
    params.validate();

    const auto dn = evaluate_derivatives(sys, u_n);
    TsfoStep<T> out;

    NewtonResult<T> half;
    try {
        half = detail::solve_from_predictor<T>(
            [&](Vector<T> guess) { return detail::solve_half_stage(sys, u_n, dn, dt, cfg, std::move(guess)); },
            detail::predict_half(u_n, dn, dt), u_n, out.stats.restarts);
    } catch (Error& e) {
        e.add_context("stage 1");
        throw;
    }
    out.stats.stage1_iters = half.iterations;
    out.stats.final_update_norm_stage1 = static_cast<double>(half.final_update_norm);

    try {
        const auto dh = evaluate_derivatives(sys, half.solution);
        auto next = detail::solve_from_predictor<T>(
            [&](Vector<T> guess) {
                return detail::solve_full_stage(sys, u_n, dn, dh, dt, params, cfg, std::move(guess));
            },
            detail::predict_full(u_n, dn, dh.temporal, dt), u_n, out.stats.restarts);
        out.stats.stage2_iters = next.iterations;
        out.stats.final_update_norm_stage2 = static_cast<double>(next.final_update_norm);
        out.state = std::move(next.solution);
    } catch (Error& e) {
        e.add_context("stage 2");
        throw;
    }
    return out;
}

/// The explicit two-stage fourth-order scheme (the predictors composed).
template <typename T>
[[nodiscard]] Vector<T> step_explicit_tsfo(const OdeSystem<T>& sys, const Vector<T>& u_n, T dt) {
    const auto dn = evaluate_derivatives(sys, u_n);
    const Vector<T> u_half = detail::predict_half(u_n, dn, dt);
    Vector<T> out = detail::predict_full(u_n, dn, temporal_derivative(sys, u_half), dt);
    require_finite(out, "explicit TSFO step");
    return out;
}

}  // namespace stiffstep
