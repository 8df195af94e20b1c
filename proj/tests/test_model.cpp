#include "stiffstep/model.hpp"
#include "stiffstep/problems.hpp"

#include <gtest/gtest.h>

using namespace stiffstep;

TEST(Model, TemporalDerivativeIsJacobianTimesRhs) {
    // Robertson at u0: L = (-0.04, 0.04, 0), G = L_u L = (1.6e-3, -1.6e-3, 0)
    const auto p = robertson<double>();
    const auto l = p.system.rhs(p.u0);
    EXPECT_DOUBLE_EQ(l[0], -0.04);
    EXPECT_DOUBLE_EQ(l[1], 0.04);
    EXPECT_DOUBLE_EQ(l[2], 0.0);
    const auto g = temporal_derivative(p.system, p.u0);
    EXPECT_NEAR(g[0], 1.6e-3, 1e-18);
    EXPECT_NEAR(g[1], -1.6e-3, 1e-18);
    EXPECT_EQ(g[2], 0.0);
}

TEST(Model, EvaluateDerivativesBundlesAllThree) {
    const auto p = van_der_pol<double>();
    const Vector<double> u{1.5, -0.3};
    const auto d = evaluate_derivatives(p.system, u);
    EXPECT_EQ(d.rhs, p.system.rhs(u));
    EXPECT_EQ(d.jac, p.system.jac(u));
    EXPECT_EQ(d.temporal, d.jac * d.rhs);
}

class TemporalJacobian : public ::testing::TestWithParam<const char*> {};

// G_u = L_uu[L] + L_u^2 from the analytic contraction agrees with central
// differences of G = L_u L, and the built-in forward-difference path
// agrees to first order.
TEST_P(TemporalJacobian, AnalyticMatchesFiniteDifference) {
    auto p = problem_by_name<double>(GetParam());
    Vector<double> u = p.u0;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += 1e-3 * static_cast<double>(i + 1);
    const auto analytic = temporal_derivative_jacobian(p.system, u, default_fd_step<double>());
    const std::size_t n = u.size();
    auto g = [&](const Vector<double>& x) { return p.system.jac(x) * p.system.rhs(x); };
    Matrix<double> central(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double h = 1e-6 * (1 + std::abs(u[j]));
        auto up = u, dn = u;
        up[j] += h;
        dn[j] -= h;
        const auto col = (1 / (2 * h)) * (g(up) - g(dn));
        for (std::size_t i = 0; i < n; ++i) central(i, j) = col[i];
    }
    auto fd_sys = p.system;
    fd_sys.second_contraction = nullptr;
    ASSERT_FALSE(fd_sys.has_second_contraction());
    const auto forward = temporal_derivative_jacobian(fd_sys, u, 1e-7);
    double scale = 0.0;
    for (double v : analytic.values()) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < analytic.values().size(); ++k) {
        EXPECT_NEAR(analytic.values()[k], central.values()[k], 1e-7 * scale) << "entry " << k;
        EXPECT_NEAR(analytic.values()[k], forward.values()[k], 1e-4 * scale) << "entry " << k;
    }
}

INSTANTIATE_TEST_SUITE_P(Problems, TemporalJacobian, ::testing::Values("linear", "robertson", "ozone", "vdp"));

TEST(Model, RequireFiniteThrowsDomainError) {
    EXPECT_NO_THROW(require_finite(Vector<double>{1.0}, "x"));
    EXPECT_THROW(require_finite(Vector<double>{std::nan("")}, "x"), DomainError);
}
