#pragma once

// Comparator integrators: classical explicit RK4 and the 2-stage
// Gauss-Legendre implicit Runge-Kutta method (order 4), plus the fixed-step
// driver shared by every stepper.

#include "stiffstep/errors.hpp"
#include "stiffstep/linalg.hpp"
#include "stiffstep/model.hpp"
#include "stiffstep/newton.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace stiffstep {

template <typename T = double>
struct ButcherTableau {
    int stage_count = 0;
    Matrix<T> a;
    std::vector<T> b;
    std::vector<T> c;
};

template <typename T = double>
[[nodiscard]] ButcherTableau<T> classical_rk4_tableau() {
    ButcherTableau<T> t{4, Matrix<T>(4), {T(1) / T(6), T(1) / T(3), T(1) / T(3), T(1) / T(6)},
                        {T(0), T(1) / T(2), T(1) / T(2), T(1)}};
    t.a(1, 0) = T(1) / T(2);
    t.a(2, 1) = T(1) / T(2);
    t.a(3, 2) = T(1);
    return t;
}

template <typename T = double>
[[nodiscard]] ButcherTableau<T> gauss_legendre2_tableau() {
    using std::sqrt;
    const T s3 = sqrt(T(3));
    const T q = T(1) / T(4);
    ButcherTableau<T> t{2, Matrix<T>{{q, q - s3 / T(6)}, {q + s3 / T(6), q}}, {T(1) / T(2), T(1) / T(2)},
                        {T(1) / T(2) - s3 / T(6), T(1) / T(2) + s3 / T(6)}};
    return t;
}

/// Any explicit (strictly lower-triangular) tableau.
template <typename T>
[[nodiscard]] Vector<T> step_explicit_rk(const ButcherTableau<T>& tab, const OdeSystem<T>& sys,
                                         const Vector<T>& u_n, T dt) {
    const auto s = static_cast<std::size_t>(tab.stage_count);
    std::vector<Vector<T>> k(s);
    Vector<T> stage;
    for (std::size_t i = 0; i < s; ++i) {
        stage = u_n;
        for (std::size_t j = 0; j < i; ++j)
            if (tab.a(i, j) != T(0)) stage.axpy(dt * tab.a(i, j), k[j]);
        sys.rhs(stage, k[i]);
    }
    Vector<T> out = u_n;
    for (std::size_t i = 0; i < s; ++i) out.axpy(dt * tab.b[i], k[i]);
    require_finite(out, "explicit Runge-Kutta step");
    return out;
}

template <typename T>
[[nodiscard]] Vector<T> step_rk4_explicit(const OdeSystem<T>& sys, const Vector<T>& u_n, T dt) {
    static const ButcherTableau<T> tab = classical_rk4_tableau<T>();
    return step_explicit_rk(tab, sys, u_n, dt);
}

namespace detail {

/// Stacked stage equations H_i(K) = K_i - L(u_n + dt sum_j a_ij K_j) for an
/// implicit tableau; unknowns are the stage slopes K.
template <typename T>
class ImplicitRkStages {
public:
    ImplicitRkStages(const ButcherTableau<T>& tab, const OdeSystem<T>& sys, const Vector<T>& u_n, T dt)
        : tab_(tab), sys_(sys), u_n_(u_n), dt_(dt), s_(static_cast<std::size_t>(tab.stage_count)), n_(sys.dim),
          stage_jac_(s_) {}

    Vector<T> residual(const Vector<T>& k) {
        Vector<T> h(s_ * n_);
        Vector<T> y, l;
        for (std::size_t i = 0; i < s_; ++i) {
            stage_value(k, i, y);
            sys_.rhs(y, l);
            require_finite(l, "right-hand side");
            sys_.jac(y, stage_jac_[i]);
            for (std::size_t r = 0; r < n_; ++r) h[i * n_ + r] = k[i * n_ + r] - l[r];
        }
        return h;
    }

    /// dH_i/dK_j = delta_ij I - dt a_ij L_u(Y_i)
    Matrix<T> jacobian(const Vector<T>&) const {
        Matrix<T> j(s_ * n_);
        for (std::size_t bi = 0; bi < s_; ++bi)
            for (std::size_t bj = 0; bj < s_; ++bj) {
                const T w = dt_ * tab_.a(bi, bj);
                for (std::size_t r = 0; r < n_; ++r)
                    for (std::size_t c = 0; c < n_; ++c)
                        j(bi * n_ + r, bj * n_ + c) = -w * stage_jac_[bi](r, c);
            }
        for (std::size_t d = 0; d < s_ * n_; ++d) j(d, d) += T(1);
        return j;
    }

    void stage_value(const Vector<T>& k, std::size_t i, Vector<T>& y) const {
        y = u_n_;
        for (std::size_t j = 0; j < s_; ++j) {
            const T w = dt_ * tab_.a(i, j);
            for (std::size_t r = 0; r < n_; ++r) y[r] += w * k[j * n_ + r];
        }
    }

private:
    const ButcherTableau<T>& tab_;
    const OdeSystem<T>& sys_;
    const Vector<T>& u_n_;
    T dt_;
    std::size_t s_, n_;
    std::vector<Matrix<T>> stage_jac_;
};

}  // namespace detail

template <typename T>
struct ImplicitRkStep {
    Vector<T> state;
    int iterations = 0;
};

/// Implicit RK step; Newton on the stacked s*n stage system, all stage
/// slopes initialised with L(u_n).
template <typename T>
[[nodiscard]] ImplicitRkStep<T> step_implicit_rk(const ButcherTableau<T>& tab, const OdeSystem<T>& sys,
                                                 const Vector<T>& u_n, T dt, const NewtonConfig& cfg) {
    if (!(dt > T(0))) throw ConfigError("implicit Runge-Kutta step requires dt > 0");
    cfg.validate();
    const std::size_t s = static_cast<std::size_t>(tab.stage_count);
    const std::size_t n = sys.dim;
    const Vector<T> l0 = sys.rhs(u_n);
    require_finite(l0, "right-hand side");
    Vector<T> k0(s * n);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t r = 0; r < n; ++r) k0[i * n + r] = l0[r];

    detail::ImplicitRkStages<T> stages(tab, sys, u_n, dt);
    auto solved = newton_solve<T>(stages, std::move(k0), cfg);

    ImplicitRkStep<T> out{u_n, solved.iterations};
    for (std::size_t i = 0; i < s; ++i) {
        const T w = dt * tab.b[i];
        for (std::size_t r = 0; r < n; ++r) out.state[r] += w * solved.solution[i * n + r];
    }
    require_finite(out.state, "implicit Runge-Kutta step");
    return out;
}

template <typename T>
[[nodiscard]] ImplicitRkStep<T> step_irk4_gauss(const OdeSystem<T>& sys, const Vector<T>& u_n, T dt,
                                                const NewtonConfig& cfg = {}) {
    static const ButcherTableau<T> tab = gauss_legendre2_tableau<T>();
    return step_implicit_rk(tab, sys, u_n, dt, cfg);
}

/// Uniform result of one step of any integrator.
template <typename T>
struct StepOutcome {
    Vector<T> state;
    int newton_iters = 0;
};

template <typename T>
using Stepper = std::function<StepOutcome<T>(const OdeSystem<T>&, const Vector<T>&, T)>;

template <typename T>
struct IntegrationResult {
    Vector<T> state;
    std::int64_t steps = 0;
    std::int64_t newton_iters = 0;
};

/// Called after every accepted step with (step index starting at 1, t, state).
template <typename T>
using StepObserver = std::function<void(std::int64_t, T, const Vector<T>&)>;

/// Applies `stepper` exactly n_steps times with dt = t_end / n_steps.
/// Errors carry the failing step index and time.
template <typename T>
[[nodiscard]] IntegrationResult<T> integrate(const OdeSystem<T>& sys, Vector<T> u0, T t_end, std::int64_t n_steps,
                                             const Stepper<T>& stepper, const StepObserver<T>& observer = {}) {
    if (n_steps < 1) throw ConfigError("integrate: n_steps must be >= 1");
    if (u0.size() != sys.dim) throw ConfigError("integrate: initial state dimension mismatch");
    const T dt = t_end / static_cast<T>(n_steps);
    IntegrationResult<T> res{std::move(u0), 0, 0};
    for (std::int64_t k = 1; k <= n_steps; ++k) {
        try {
            StepOutcome<T> out = stepper(sys, res.state, dt);
            res.state = std::move(out.state);
            res.newton_iters += out.newton_iters;
        } catch (Error& e) {
            e.add_context("step " + std::to_string(k) + " (t = " +
                          std::to_string(static_cast<double>(dt * static_cast<T>(k - 1))) + ")");
            throw;
        }
        res.steps = k;
        if (observer) observer(k, dt * static_cast<T>(k), res.state);
    }
    return res;
}

template <typename T>
[[nodiscard]] Vector<T> integrate_fixed(const OdeSystem<T>& sys, Vector<T> u0, T t_end, std::int64_t n_steps,
                                        const Stepper<T>& stepper) {
    return integrate(sys, std::move(u0), t_end, n_steps, stepper).state;
}

/// Classical RK4 over n_steps with reused buffers and compensated (Kahan)
/// accumulation of the state; used for long reference runs where the plain
/// update u += dt*k would accumulate ~n_steps * eps of rounding drift.
template <typename T>
[[nodiscard]] Vector<T> integrate_rk4_compensated(const OdeSystem<T>& sys, Vector<T> u, T t_end,
                                                  std::int64_t n_steps) {
    if (n_steps < 1) throw ConfigError("integrate: n_steps must be >= 1");
    const std::size_t n = sys.dim;
    const T dt = t_end / static_cast<T>(n_steps);
    const T half = dt / T(2);
    const T sixth = dt / T(6);
    Vector<T> k1(n), k2(n), k3(n), k4(n), stage(n), carry(n, T(0));
    for (std::int64_t step = 1; step <= n_steps; ++step) {
        sys.rhs_fn(u, k1);
        for (std::size_t i = 0; i < n; ++i) stage[i] = u[i] + half * k1[i];
        sys.rhs_fn(stage, k2);
        for (std::size_t i = 0; i < n; ++i) stage[i] = u[i] + half * k2[i];
        sys.rhs_fn(stage, k3);
        for (std::size_t i = 0; i < n; ++i) stage[i] = u[i] + dt * k3[i];
        sys.rhs_fn(stage, k4);
        for (std::size_t i = 0; i < n; ++i) {
            const T inc = sixth * (k1[i] + T(2) * (k2[i] + k3[i]) + k4[i]) - carry[i];
            const T next = u[i] + inc;
            carry[i] = (next - u[i]) - inc;
            u[i] = next;
        }
        if ((step & 0xFFFF) == 0 || step == n_steps) {
            if (!all_finite(u))
                throw DomainError("reference RK4 run overflowed at step " + std::to_string(step));
        }
    }
    return u;
}

}  // namespace stiffstep
