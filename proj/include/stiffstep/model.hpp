#pragma once

#include "stiffstep/errors.hpp"
#include "stiffstep/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>

namespace stiffstep {

/// Autonomous system du/dt = L(u).
///
/// Callbacks write into caller-owned outputs so hot loops (the 10^7-step
/// reference runs) can reuse buffers. `second_contraction`, when present,
/// fills M(u, w) with M_ij = sum_k d^2 L_i / (du_j du_k) * w_k.
template <typename T = double>
struct OdeSystem {
    using Vec = Vector<T>;
    using Mat = Matrix<T>;
    using RhsFn = std::function<void(const Vec& u, Vec& out)>;
    using JacFn = std::function<void(const Vec& u, Mat& out)>;
    using SecondContractionFn = std::function<void(const Vec& u, const Vec& w, Mat& out)>;

    std::size_t dim = 0;
    RhsFn rhs_fn;
    JacFn jac_fn;
    SecondContractionFn second_contraction;

    [[nodiscard]] bool has_second_contraction() const noexcept { return static_cast<bool>(second_contraction); }

    void rhs(const Vec& u, Vec& out) const {
        out.assign(dim, T(0));
        rhs_fn(u, out);
    }
    [[nodiscard]] Vec rhs(const Vec& u) const {
        Vec out;
        rhs(u, out);
        return out;
    }

    void jac(const Vec& u, Mat& out) const {
        if (out.dim() != dim) out = Mat(dim);
        else out.fill(T(0));
        jac_fn(u, out);
    }
    [[nodiscard]] Mat jac(const Vec& u) const {
        Mat out(dim);
        jac_fn(u, out);
        return out;
    }
};

template <typename T>
void require_finite(const Vector<T>& v, const char* what) {
    if (!all_finite(v)) throw DomainError(std::string(what) + " produced a non-finite value");
}

/// G(u) = L_u(u) L(u), the time derivative of L along the flow.
template <typename T>
[[nodiscard]] Vector<T> temporal_derivative(const OdeSystem<T>& sys, const Vector<T>& u) {
    const Vector<T> l = sys.rhs(u);
    require_finite(l, "right-hand side");
    Vector<T> g = sys.jac(u) * l;
    require_finite(g, "temporal derivative");
    return g;
}

template <typename T>
[[nodiscard]] T default_fd_step() {
    using std::sqrt;
    return sqrt(std::numeric_limits<T>::epsilon());
}

namespace detail {

template <typename T>
Matrix<T> forward_difference_temporal_jacobian(const OdeSystem<T>& sys, const Vector<T>& u,
                                               const Vector<T>& g0, T fd_step) {
    using std::abs;
    const std::size_t n = sys.dim;
    Matrix<T> out(n);
    Vector<T> shifted = u;
    for (std::size_t j = 0; j < n; ++j) {
        const T h = fd_step * (T(1) + abs(u[j]));
        shifted[j] = u[j] + h;
        const T actual_h = shifted[j] - u[j];
        const Vector<T> g1 = temporal_derivative(sys, shifted);
        for (std::size_t i = 0; i < n; ++i) out(i, j) = (g1[i] - g0[i]) / actual_h;
        shifted[j] = u[j];
    }
    return out;
}

}  // namespace detail

/// G_u(u) = L_uu L + L_u^2.
///
/// Uses the analytic second contraction when the system provides one,
/// otherwise column-wise forward differences of G with step
/// fd_step * (1 + |u_j|).
template <typename T>
[[nodiscard]] Matrix<T> temporal_derivative_jacobian(const OdeSystem<T>& sys, const Vector<T>& u,
                                                     T fd_step = default_fd_step<T>()) {
    const Vector<T> l = sys.rhs(u);
    require_finite(l, "right-hand side");
    const Matrix<T> lu = sys.jac(u);
    if (sys.has_second_contraction()) {
        Matrix<T> m(sys.dim);
        sys.second_contraction(u, l, m);
        m += lu * lu;
        return m;
    }
    return detail::forward_difference_temporal_jacobian(sys, u, lu * l, fd_step);
}

/// Everything a Newton iteration needs at one state, each piece computed once.
template <typename T>
struct StateDerivatives {
    Vector<T> rhs;            // L(u)
    Matrix<T> jac;            // L_u(u)
    Vector<T> temporal;       // G(u)
};

template <typename T>
[[nodiscard]] StateDerivatives<T> evaluate_derivatives(const OdeSystem<T>& sys, const Vector<T>& u) {
    StateDerivatives<T> d;
    sys.rhs(u, d.rhs);
    require_finite(d.rhs, "right-hand side");
    sys.jac(u, d.jac);
    d.temporal = d.jac * d.rhs;
    require_finite(d.temporal, "temporal derivative");
    return d;
}

/// G_u from already-evaluated derivatives at u.
template <typename T>
[[nodiscard]] Matrix<T> temporal_jacobian_from(const OdeSystem<T>& sys, const Vector<T>& u,
                                               const StateDerivatives<T>& d,
                                               T fd_step = default_fd_step<T>()) {
    if (sys.has_second_contraction()) {
        Matrix<T> m(sys.dim);
        sys.second_contraction(u, d.rhs, m);
        m += d.jac * d.jac;
        return m;
    }
    return detail::forward_difference_temporal_jacobian(sys, u, d.temporal, fd_step);
}

}  // namespace stiffstep
