#pragma once

// Stiff benchmark systems with analytic Jacobians and second contractions.

#include "stiffstep/errors.hpp"
#include "stiffstep/linalg.hpp"
#include "stiffstep/model.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stiffstep {

template <typename T = double>
struct BenchmarkProblem {
    std::string name;
    OdeSystem<T> system;
    Vector<T> u0;
    std::vector<T> t_end_options;
    std::function<Vector<T>(T)> exact;  // empty when no closed form exists

    [[nodiscard]] T default_t_end() const { return t_end_options.front(); }
    [[nodiscard]] bool has_exact() const { return static_cast<bool>(exact); }
};

/// du1/dt = -1000 u1 + 1, du2/dt = -u2 + 1; eigenvalues -1000 and -1.
template <typename T = double>
[[nodiscard]] BenchmarkProblem<T> linear_separated() {
    OdeSystem<T> sys;
    sys.dim = 2;
    sys.rhs_fn = [](const Vector<T>& u, Vector<T>& out) {
        out[0] = T(-1000) * u[0] + T(1);
        out[1] = -u[1] + T(1);
    };
    sys.jac_fn = [](const Vector<T>&, Matrix<T>& j) {
        j(0, 0) = T(-1000);
        j(0, 1) = T(0);
        j(1, 0) = T(0);
        j(1, 1) = T(-1);
    };
    sys.second_contraction = [](const Vector<T>&, const Vector<T>&, Matrix<T>& m) { m.fill(T(0)); };
    auto exact = [](T t) {
        using std::expm1;
        return Vector<T>{T(-0.001) * expm1(T(-1000) * t), -expm1(-t)};
    };
    return {"linear", std::move(sys), Vector<T>{T(0), T(0)}, {T(10)}, exact};
}

/// Robertson kinetics: k1 = 0.04, k2 = 1e4, k3 = 3e7.
template <typename T = double>
[[nodiscard]] BenchmarkProblem<T> robertson() {
    const T k1(0.04), k2(1e4), k3(3e7);
    OdeSystem<T> sys;
    sys.dim = 3;
    sys.rhs_fn = [=](const Vector<T>& u, Vector<T>& out) {
        const T slow = k1 * u[0];
        const T mid = k2 * u[1] * u[2];
        const T fast = k3 * u[1] * u[1];
        out[0] = -slow + mid;
        out[1] = slow - mid - fast;
        out[2] = fast;
    };
    sys.jac_fn = [=](const Vector<T>& u, Matrix<T>& j) {
        j(0, 0) = -k1;
        j(0, 1) = k2 * u[2];
        j(0, 2) = k2 * u[1];
        j(1, 0) = k1;
        j(1, 1) = -k2 * u[2] - T(2) * k3 * u[1];
        j(1, 2) = -k2 * u[1];
        j(2, 0) = T(0);
        j(2, 1) = T(2) * k3 * u[1];
        j(2, 2) = T(0);
    };
    sys.second_contraction = [=](const Vector<T>&, const Vector<T>& w, Matrix<T>& m) {
        m.fill(T(0));
        m(0, 1) = k2 * w[2];
        m(0, 2) = k2 * w[1];
        m(1, 1) = -T(2) * k3 * w[1] - k2 * w[2];
        m(1, 2) = -k2 * w[1];
        m(2, 1) = T(2) * k3 * w[1];
    };
    return {"robertson", std::move(sys), Vector<T>{T(1), T(0), T(0)}, {T(10)}, {}};
}

/// Eight-species ozone decomposition network. The only nonlinearity is the
/// 280 u6 u8 term in rows 6-8. u7(0) is not given for this network and is
/// set to 0 like the other radicals.
template <typename T = double>
[[nodiscard]] BenchmarkProblem<T> ozone() {
    const T kq(280);
    OdeSystem<T> sys;
    sys.dim = 8;
    sys.rhs_fn = [=](const Vector<T>& u, Vector<T>& out) {
        const T q = kq * u[5] * u[7];
        out[0] = T(-1.71) * u[0] + T(0.43) * u[1] + T(8.32) * u[2] + T(0.0007);
        out[1] = T(1.71) * u[0] - T(8.75) * u[1];
        out[2] = T(-10.03) * u[2] + T(0.43) * u[3] + T(0.035) * u[4];
        out[3] = T(8.32) * u[1] + T(1.71) * u[2] - T(1.12) * u[3];
        out[4] = T(-1.745) * u[4] + T(0.43) * u[5] + T(0.43) * u[6];
        out[5] = -q + T(0.69) * u[3] + T(1.71) * u[4] - T(0.43) * u[5] + T(0.69) * u[6];
        out[6] = q - T(1.81) * u[6];
        out[7] = -q + T(1.81) * u[6];
    };
    sys.jac_fn = [=](const Vector<T>& u, Matrix<T>& j) {
        j.fill(T(0));
        j(0, 0) = T(-1.71);
        j(0, 1) = T(0.43);
        j(0, 2) = T(8.32);
        j(1, 0) = T(1.71);
        j(1, 1) = T(-8.75);
        j(2, 2) = T(-10.03);
        j(2, 3) = T(0.43);
        j(2, 4) = T(0.035);
        j(3, 1) = T(8.32);
        j(3, 2) = T(1.71);
        j(3, 3) = T(-1.12);
        j(4, 4) = T(-1.745);
        j(4, 5) = T(0.43);
        j(4, 6) = T(0.43);
        j(5, 3) = T(0.69);
        j(5, 4) = T(1.71);
        j(5, 5) = -kq * u[7] - T(0.43);
        j(5, 6) = T(0.69);
        j(5, 7) = -kq * u[5];
        j(6, 5) = kq * u[7];
        j(6, 6) = T(-1.81);
        j(6, 7) = kq * u[5];
        j(7, 5) = -kq * u[7];
        j(7, 6) = T(1.81);
        j(7, 7) = -kq * u[5];
    };
    sys.second_contraction = [=](const Vector<T>&, const Vector<T>& w, Matrix<T>& m) {
        m.fill(T(0));
        constexpr std::array<int, 3> rows = {5, 6, 7};
        constexpr std::array<int, 3> sign = {-1, 1, -1};
        for (std::size_t r = 0; r < rows.size(); ++r) {
            m(rows[r], 5) = T(sign[r]) * kq * w[7];
            m(rows[r], 7) = T(sign[r]) * kq * w[5];
        }
    };
    Vector<T> u0(8, T(0));
    u0[0] = T(1);
    u0[7] = T(0.0057);
    return {"ozone", std::move(sys), std::move(u0), {T(1.0), T(10.0), T(321.8122)}, {}};
}

/// Van der Pol oscillator du1/dt = u2, du2/dt = nu (1 - u1^2) u2 - u1.
template <typename T = double>
[[nodiscard]] BenchmarkProblem<T> van_der_pol(T nu = T(100)) {
    OdeSystem<T> sys;
    sys.dim = 2;
    sys.rhs_fn = [=](const Vector<T>& u, Vector<T>& out) {
        out[0] = u[1];
        out[1] = nu * (T(1) - u[0] * u[0]) * u[1] - u[0];
    };
    sys.jac_fn = [=](const Vector<T>& u, Matrix<T>& j) {
        j(0, 0) = T(0);
        j(0, 1) = T(1);
        j(1, 0) = T(-2) * nu * u[0] * u[1] - T(1);
        j(1, 1) = nu * (T(1) - u[0] * u[0]);
    };
    sys.second_contraction = [=](const Vector<T>& u, const Vector<T>& w, Matrix<T>& m) {
        m(0, 0) = T(0);
        m(0, 1) = T(0);
        m(1, 0) = T(-2) * nu * (u[1] * w[0] + u[0] * w[1]);
        m(1, 1) = T(-2) * nu * u[0] * w[0];
    };
    return {"vdp", std::move(sys), Vector<T>{T(2), T(0)}, {T(100)}, {}};
}

inline constexpr std::array<std::string_view, 4> kProblemNames = {"linear", "robertson", "ozone", "vdp"};

template <typename T = double>
[[nodiscard]] BenchmarkProblem<T> problem_by_name(std::string_view name) {
    if (name == "linear") return linear_separated<T>();
    if (name == "robertson") return robertson<T>();
    if (name == "ozone") return ozone<T>();
    if (name == "vdp") return van_der_pol<T>();
    throw ConfigError("unknown problem '" + std::string(name) + "'");
}

}  // namespace stiffstep
