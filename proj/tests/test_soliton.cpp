#include <cmath>

#include <gtest/gtest.h>

#include "gkdv/soliton.hpp"

using namespace gkdv;

TEST(Soliton, GroundStateSolvesProfileEquation) {
    const GridSpec g(1024, 80.0);
    EXPECT_LT(euler_lagrange_residual({}, g), 1e-9);
    EXPECT_LT(euler_lagrange_residual({2.0, 3.0, 4}, GridSpec(2048, 80.0)), 1e-8);
}

TEST(Soliton, PeakValue) {
    EXPECT_NEAR(ground_state(0.0, 4), std::cbrt(2.5), 1e-15);
    EXPECT_NEAR(soliton::at({}, 0.0).q, std::cbrt(2.5), 1e-15);
}

TEST(Soliton, MassFormulaMatchesQuadrature) {
    EXPECT_NEAR(mass_numeric(GridSpec(1024, 80.0)), mass_formula(), 1e-8);
}

TEST(Soliton, ScalingLaws) {
    const GridSpec g(2048, 120.0);
    const double n1 = l2_norm(profile({}, g));
    for (double c : {0.5, 2.0}) {
        const SolitonParams p{c, 0.0, 4};
        const Field q = profile(p, g);
        EXPECT_NEAR(l2_norm(q), std::pow(c, 1.0 / 6.0) * n1, 1e-10);
        EXPECT_NEAR(inner_product(tilde_profile(p, g), q), inner_product(q, q) / 6.0, 1e-10);
    }
}

TEST(Soliton, DerivativesAgreeWithSpectral) {
    const GridSpec g(1024, 80.0);
    const SolitonParams p{1.3, 2.0, 4};
    EXPECT_LT(l2_norm(derivative(profile(p, g), 1) - profile_dx(p, g)), 1e-9);
    EXPECT_LT(l2_norm(derivative(profile(p, g), 2) - profile_dxx(p, g)), 1e-8);
    EXPECT_LT(l2_norm(derivative(tilde_profile(p, g), 1) - tilde_profile_dx(p, g)), 1e-8);
}

TEST(Soliton, TildeIsScaleDerivative) {
    const GridSpec g(1024, 80.0);
    const double c = 1.2, h = 1e-5;
    Field fd = profile({c + h, 0.0, 4}, g) - profile({c - h, 0.0, 4}, g);
    fd *= c / (2.0 * h);
    EXPECT_LT(l2_norm(fd - tilde_profile({c, 0.0, 4}, g)), 1e-8);
}

TEST(Soliton, RejectsInvalidParameters) {
    EXPECT_THROW((SolitonParams{-1.0, 0.0, 4}.validate()), InvalidArgument);
    EXPECT_THROW((SolitonParams{1.0, 0.0, 3}.validate()), InvalidArgument);
    EXPECT_THROW(profile({0.0, 0.0, 4}, GridSpec(64, 10.0)), InvalidArgument);
}
