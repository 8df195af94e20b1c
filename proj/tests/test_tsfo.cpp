#include "stiffstep/tsfo.hpp"
#include "stiffstep/problems.hpp"
#include "stiffstep/stability.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace stiffstep;
using stiffstep::testing::complex_linear;
using stiffstep::testing::riccati;
using stiffstep::testing::scalar_linear;

TEST(Tsfo, PredictStage1ScalarMultiplier) {
    const double lambda = -3.0, dt = 0.2, z = lambda * dt;
    const auto u = predict_stage1(scalar_linear(lambda), Vector<double>{2.0}, dt);
    EXPECT_NEAR(u[0], 2.0 * (1 + z / 2 + z * z / 8), 1e-15);
    EXPECT_EQ(predict_stage1(scalar_linear(lambda), Vector<double>{2.0}, 0.0)[0], 2.0);
}

TEST(Tsfo, PredictStage1Robertson) {
    const auto p = robertson<double>();
    const double dt = 1e-2;
    const auto u = predict_stage1(p.system, p.u0, dt);
    EXPECT_NEAR(u[0], 1.0 + dt / 2 * -0.04 + dt * dt / 8 * 1.6e-3, 1e-17);
    EXPECT_NEAR(u[1], dt / 2 * 0.04 + dt * dt / 8 * -1.6e-3, 1e-17);
    EXPECT_EQ(u[2], 0.0);
}

TEST(Tsfo, PredictStage2IsQuarticTaylorPolynomial) {
    const double lambda = -2.0, dt = 0.3, z = lambda * dt;
    const auto sys = scalar_linear(lambda);
    const Vector<double> un{1.0};
    const Vector<double> uh{1 + z / 2 + z * z / 8};
    const auto u = predict_stage2(sys, un, uh, dt);
    EXPECT_NEAR(u[0], 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24, 1e-15);
    EXPECT_EQ(predict_stage2(sys, un, uh, 0.0)[0], 1.0);
}

TEST(Tsfo, PredictStage2LinearSystemMatchesMatrixPolynomial) {
    const Matrix<double> a{{-2.0, 1.0}, {0.5, -3.0}};
    OdeSystem<double> sys;
    sys.dim = 2;
    sys.rhs_fn = [a](const Vector<double>& u, Vector<double>& out) { out = a * u; };
    sys.jac_fn = [a](const Vector<double>&, Matrix<double>& j) { j = a; };
    const double dt = 0.1;
    const Vector<double> un{1.0, -1.0};
    const auto uh = predict_stage1(sys, un, dt);
    const auto u = predict_stage2(sys, un, uh, dt);
    // (I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24) u_n
    Matrix<double> ha = dt * a;
    Vector<double> term = un, expected = un;
    for (int k = 1; k <= 4; ++k) {
        term = ha * term;
        term *= 1.0 / k;
        expected += term;
    }
    EXPECT_NEAR(u[0], expected[0], 1e-15);
    EXPECT_NEAR(u[1], expected[1], 1e-15);
}

TEST(Tsfo, Stage1SolveMatchesR) {
    const double z = -1000.0;
    const auto res = newton_stage1(scalar_linear(z), Vector<double>{1.0}, 1.0, NewtonConfig{});
    EXPECT_NEAR(res.solution[0], amplification_r(z).real(), 1e-12 * std::abs(amplification_r(z).real()));
}

TEST(Tsfo, AffineStagesFinishAfterOneUpdate) {
    // the second Newton iteration only confirms convergence
    const auto step = step_implicit_tsfo(scalar_linear(-1.0), Vector<double>{1.0}, 0.5);
    EXPECT_EQ(step.stats.stage1_iters, 2);
    EXPECT_EQ(step.stats.stage2_iters, 2);
    EXPECT_LT(step.stats.final_update_norm_stage1, 1e-14);
    EXPECT_EQ(step.stats.restarts, 0);
}

TEST(Tsfo, Stage1ResidualWithinTolerance) {
    const auto p = robertson<double>();
    const NewtonConfig cfg{};
    const double dt = 1e-2;
    const auto res = newton_stage1(p.system, p.u0, dt, cfg);
    EXPECT_LE(res.iterations, 10);
    const auto s = solve_stage1<double>();
    const auto dn = evaluate_derivatives(p.system, p.u0);
    const auto dh = evaluate_derivatives(p.system, res.solution);
    Vector<double> f = p.u0;
    f.axpy(dt * s.a1, dn.rhs).axpy(dt * s.a2, dh.rhs).axpy(dt * dt * s.b1, dn.temporal);
    f.axpy(dt * dt * s.b2, dh.temporal);
    f -= res.solution;
    EXPECT_LE(norm_linf(f), 10 * (cfg.atol + cfg.rtol * norm_linf(res.solution)));
}

TEST(Tsfo, ScalarStepMatchesAmplificationFactor) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> log_mod(-2.0, 4.0);
    std::uniform_real_distribution<double> angle(M_PI / 2, 3 * M_PI / 2);
    for (int i = 0; i < 50; ++i) {
        const auto z = std::polar(std::pow(10.0, log_mod(rng)), angle(rng));
        const auto step = step_implicit_tsfo(complex_linear(z), Vector<double>{1.0, 0.0}, 1.0);
        const auto g = amplification_g(z, AmplificationParams{});
        EXPECT_LE(std::abs(std::complex<double>(step.state[0], step.state[1]) - g), 1e-12 * std::abs(g))
            << "z = " << z;
    }
}

TEST(Tsfo, StiffScalarStepIsDamped) {
    const auto step = step_implicit_tsfo(scalar_linear(-1000.0), Vector<double>{1.0}, 1.0);
    // oracle: G(-1000) evaluated with mpmath at 40 digits
    EXPECT_NEAR(step.state[0], -0.0086912548521904935588, 1e-12 * 0.00869);
}

TEST(Tsfo, ScalarLocalErrorIsSmall) {
    const auto step = step_implicit_tsfo(scalar_linear(-1.0), Vector<double>{1.0}, 0.1);
    EXPECT_LE(std::abs(step.state[0] - std::exp(-0.1)), 2e-8);
}

TEST(Tsfo, EquilibriumIsFixedPoint) {
    // linear problem equilibrium (1e-3, 1)
    const auto p = linear_separated<double>();
    const Vector<double> eq{1e-3, 1.0};
    const auto step = step_implicit_tsfo(p.system, eq, 0.5);
    EXPECT_EQ(step.state, eq);
}

TEST(Tsfo, FifthOrderLocalError) {
    // u' = u^2, u(0) = -1, exact -1/(1+t)
    const auto sys = riccati();
    std::vector<double> errs;
    for (double dt : {1e-2, 5e-3, 2.5e-3}) {
        const auto step = step_implicit_tsfo(sys, Vector<double>{-1.0}, dt);
        errs.push_back(std::abs(step.state[0] + 1.0 / (1.0 + dt)));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double ratio = errs[i - 1] / errs[i] / 32.0;
        EXPECT_GE(ratio, 0.4);
        EXPECT_LE(ratio, 2.5);
    }
}

TEST(Tsfo, DeterministicSteps) {
    const auto p = ozone<double>();
    const auto a = step_implicit_tsfo(p.system, p.u0, 0.25);
    const auto b = step_implicit_tsfo(p.system, p.u0, 0.25);
    EXPECT_EQ(a.state, b.state);
    EXPECT_EQ(a.stats.stage1_iters, b.stats.stage1_iters);
}

TEST(Tsfo, PredictorOutsideBasinRestartsFromPreviousState) {
    // Robertson, dt = 1e-2: the stage-1 predictor of the second step has
    // u2 < 0 and full Newton from it wanders; the restart from u_n converges
    const auto p = robertson<double>();
    const auto first = step_implicit_tsfo(p.system, p.u0, 1e-2);
    const auto second = step_implicit_tsfo(p.system, first.state, 1e-2);
    EXPECT_GE(second.stats.restarts, 1);
    EXPECT_GT(second.state[1], 0.0);
    EXPECT_NEAR(second.state[0] + second.state[1] + second.state[2], 1.0, 1e-13);
}

TEST(Tsfo, ErrorsNameTheStage) {
    const auto p = robertson<double>();
    try {
        (void)step_implicit_tsfo(p.system, p.u0, 10.0, SchemeParams{}, NewtonConfig{1e-14, 1e-14, 1});
        FAIL() << "expected NewtonDiverged";
    } catch (const NewtonDiverged& e) {
        EXPECT_NE(std::string(e.what()).find("stage 1"), std::string::npos) << e.what();
    }
}

TEST(Tsfo, RejectsNonPositiveStep) {
    EXPECT_THROW((void)step_implicit_tsfo(scalar_linear(-1.0), Vector<double>{1.0}, 0.0), ConfigError);
}

TEST(Tsfo, ExplicitAmplificationIsQuarticTaylor) {
    for (double z : {-0.5, -2.78, -3.0}) {
        const double u = step_explicit_tsfo(scalar_linear(z), Vector<double>{1.0}, 1.0)[0];
        EXPECT_NEAR(u, 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24, 1e-15);
    }
    EXPECT_LE(std::abs(step_explicit_tsfo(scalar_linear(-2.78), Vector<double>{1.0}, 1.0)[0]), 1.0);
    EXPECT_GT(std::abs(step_explicit_tsfo(scalar_linear(-3.0), Vector<double>{1.0}, 1.0)[0]), 1.0);
}

TEST(Tsfo, ExplicitOverflowIsDomainError) {
    auto sys = scalar_linear(-1e200);
    EXPECT_THROW((void)step_explicit_tsfo(sys, Vector<double>{1e200}, 1e100), DomainError);
}
