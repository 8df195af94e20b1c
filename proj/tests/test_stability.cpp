#include "stiffstep/stability.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace stiffstep;

namespace {
// oracles: mpmath at 40 digits, C = 0.018924, D = -C
constexpr double kG1000 = -0.0086912548521904935588;
const std::complex<double> kGm1p2i(-0.15570597143192232777, 0.3358121740893524455);
const std::complex<double> kGhalfI(0.87758473431412829441, 0.47942155917217629792);
}  // namespace

TEST(Stability, StageOneFactor) {
    EXPECT_NEAR(amplification_r(-2.0).real(), 0.36842105263157894737, 1e-16);
    EXPECT_EQ(amplification_r(0.0), ComplexScalar(1.0));
}

TEST(Stability, AmplificationMatchesHighPrecisionOracle) {
    const AmplificationParams p{};
    EXPECT_NEAR(amplification_g(-1000.0, p).real(), kG1000, 1e-15);
    EXPECT_NEAR(std::abs(amplification_g({-1.0, 2.0}, p) - kGm1p2i), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(amplification_g({0.0, 0.5}, p) - kGhalfI), 0.0, 1e-15);
    EXPECT_EQ(amplification_g(0.0, p), ComplexScalar(1.0));
}

TEST(Stability, RationalFormAgreesWithComposite) {
    const AmplificationParams p{0.03, -0.03};
    const auto r = amplification_rational(p);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> re(-50.0, 0.0), im(-50.0, 50.0);
    for (int i = 0; i < 100; ++i) {
        const ComplexScalar z(re(rng), im(rng));
        const auto g = amplification_g(z, p);
        EXPECT_LE(std::abs(r.numerator(z) / r.denominator(z) - g), 1e-13) << z;
    }
}

TEST(Stability, LimitAtInfinity) {
    EXPECT_NEAR(amplification_g_infinity(AmplificationParams{0.018924, -0.018924}), 0.0, 1e-15);
    EXPECT_NEAR(amplification_g_infinity(AmplificationParams{0.03, 0.0}), 1.0, 1e-15);
    EXPECT_LE(std::abs(amplification_g(-1e12, AmplificationParams{})), 1e-6);
}

TEST(Stability, PoleIsReported) {
    // 1 - z/4 + z^2/48 vanishes at z = 6 +- i sqrt(12)
    const ComplexScalar pole(6.0, std::sqrt(12.0));
    EXPECT_THROW((void)amplification_r(pole), PoleEvaluation);
}

TEST(Stability, TaylorDefectFourthOrder) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    for (int i = 0; i < 20; ++i) {
        const double c = dist(rng), d = dist(rng);
        const auto defect = taylor_defect(AmplificationParams{c, d}, 5);
        for (int k = 0; k <= 4; ++k) EXPECT_LE(defect[static_cast<std::size_t>(k)], 1e-12);
        // sympy: coefficient 5 of G - e^z is 1/2880 - C/48 + D/192
        EXPECT_NEAR(defect[5], std::abs(1.0 / 2880 - c / 48 + d / 192), 1e-15);
    }
}

TEST(Stability, TaylorDefectAtDefaults) {
    const auto defect = taylor_defect(AmplificationParams{}, 7);
    EXPECT_NEAR(defect[5], 0.00014559027777777778, 1e-16);
    EXPECT_NEAR(defect[6], 0.00014554655641203704, 1e-16);
    EXPECT_THROW((void)taylor_defect(AmplificationParams{}, 9), ConfigError);
}

TEST(Stability, TaylorDefectDetectsWrongCoefficient) {
    auto s2 = stage2_family<double>(0.018924, -0.018924);
    s2.a4 += 1e-3;
    const auto defect = taylor_defect(solve_stage1<double>(), s2, 4);
    EXPECT_NEAR(defect[1], 1e-3, 1e-12);
    EXPECT_GT(defect[2], 1e-4);
}

TEST(Stability, PoleAnalysis) {
    EXPECT_TRUE(pole_analysis(0.0).analytic_in_left_half_plane);
    const auto rep = pole_analysis(0.018924);
    EXPECT_TRUE(rep.analytic_in_left_half_plane);
    ASSERT_GE(rep.root_real_parts.size(), 2u);
    // numpy.roots: 5.10238615 +- 3.03220866i
    EXPECT_NEAR(rep.root_real_parts[0], 5.10238615, 1e-7);
    EXPECT_TRUE(pole_analysis(0.05).analytic_in_left_half_plane);
    // C < 0: real roots of opposite sign (numpy.roots: 4.8565, -2.7454 at C = -0.05)
    EXPECT_FALSE(pole_analysis(-0.01).analytic_in_left_half_plane);
    EXPECT_FALSE(pole_analysis(-0.05).analytic_in_left_half_plane);
}

TEST(Stability, ImaginaryAxisMaximum) {
    const auto ys = log_spaced(1e-8, 1e4, 25000);
    // excess of max |G(iy)| over 1 (numpy oracle on the same grid)
    EXPECT_LE(max_abs_g_on_axis(0.02, ys), 1.0 + 1e-12);
    EXPECT_LE(max_abs_g_on_axis(0.045, ys), 1.0 + 1e-12);
    EXPECT_GT(max_abs_g_on_axis(0.0189, ys), 1.0 + 1e-12);
    EXPECT_NEAR(max_abs_g_on_axis(0.05, ys) - 1.0, 4.9e-3, 2e-4);
    EXPECT_GT(max_abs_g_on_axis(0.045589, ys) - 1.0, 5e-7);
}

TEST(Stability, ScanFindsInterval) {
    // coarse grids keep this quick; the full default grid runs in the acceptance suite
    const auto scan = scan_a_stability(0.0, 0.1, 1001, 1e-8, 1e4, 4000, 2);
    ASSERT_TRUE(scan.valid_interval);
    EXPECT_NEAR(scan.valid_interval->first, 0.0189, 1e-4 + 1e-9);
    EXPECT_NEAR(scan.valid_interval->second, 0.0452, 1e-4 + 1e-9);
    EXPECT_EQ(scan.c_values.size(), 1001u);
    EXPECT_EQ(scan.valid_mask.size(), 1001u);
}

TEST(Stability, ScanIsThreadCountInvariant) {
    const auto a = scan_a_stability(0.01, 0.06, 64, 1e-3, 1e3, 500, 1);
    const auto b = scan_a_stability(0.01, 0.06, 64, 1e-3, 1e3, 500, 3);
    EXPECT_EQ(a.max_abs_g, b.max_abs_g);
    EXPECT_EQ(a.valid_mask, b.valid_mask);
}

TEST(Stability, ScanDegenerateAndInvalidGrids) {
    const auto scan = scan_a_stability(0.0, 0.1, 2, 1e-8, 1e4, 100);
    EXPECT_FALSE(scan.valid_interval);
    EXPECT_THROW((void)scan_a_stability(0.1, 0.0, 10, 1e-8, 1e4, 100), ConfigError);
    EXPECT_THROW((void)scan_a_stability(0.0, 0.1, 10, 0.0, 1e4, 100), ConfigError);
}

TEST(Stability, SpacedGrids) {
    const auto ys = log_spaced(1e-2, 1e2, 5);
    EXPECT_DOUBLE_EQ(ys[0], 1e-2);
    EXPECT_DOUBLE_EQ(ys[2], 1.0);
    EXPECT_DOUBLE_EQ(ys[4], 1e2);
    const auto cs = lin_spaced(0.0, 0.1, 5001);
    EXPECT_DOUBLE_EQ(cs[1], 2e-5);
}
