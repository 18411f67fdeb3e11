#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gkdv/grid.hpp"

using namespace gkdv;

TEST(GridSpec, RejectsBadSizes) {
    EXPECT_THROW(GridSpec(100, 10.0), InvalidArgument);
    EXPECT_THROW(GridSpec(4, 10.0), InvalidArgument);
    EXPECT_THROW(GridSpec(64, -1.0), InvalidArgument);
    EXPECT_NO_THROW(GridSpec(64, 10.0));
}

TEST(GridSpec, CoordinatesAndWavenumbers) {
    const GridSpec g(64, 2.0 * std::numbers::pi);
    EXPECT_DOUBLE_EQ(g.x(0), -std::numbers::pi);
    EXPECT_NEAR(g.wavenumber(3), 3.0, 1e-14);
    EXPECT_NEAR(g.nyquist(), 32.0, 1e-12);
    EXPECT_EQ(g.half_size(), 33u);
}

TEST(Transforms, RoundTrip) {
    const GridSpec g(128, 20.0);
    const Field f = sample(g, [](double x) { return std::exp(-x * x) * std::cos(3.0 * x); });
    const Field back = irfft(g, rfft(f));
    EXPECT_LT(l2_norm(back - f), 1e-14);
    EXPECT_LT(l2_norm(inverse_transform(forward_transform(f)) - f), 1e-14);
}

TEST(Derivatives, ExactOnTrigonometricModes) {
    const GridSpec g(64, 2.0 * std::numbers::pi);
    const Field f = sample(g, [](double x) { return std::sin(5.0 * x); });
    const Field d1 = derivative(f, 1);
    const Field d3 = derivative(f, 3);
    EXPECT_LT(sup_norm(d1 - sample(g, [](double x) { return 5.0 * std::cos(5.0 * x); })), 1e-12);
    EXPECT_LT(sup_norm(d3 - sample(g, [](double x) { return -125.0 * std::cos(5.0 * x); })), 1e-10);
    EXPECT_THROW(derivative(f, 5), InvalidArgument);
}

TEST(Derivatives, NyquistModeIsDropped) {
    const GridSpec g(16, 2.0 * std::numbers::pi);
    const Field f = sample(g, [](double x) { return std::cos(8.0 * x); });
    EXPECT_LT(sup_norm(derivative(f, 1)), 1e-12);
}

TEST(Norms, InnerProductAndSobolev) {
    const GridSpec g(256, 40.0);
    const Field f = sample(g, [](double x) { return std::exp(-x * x / 2.0); });
    EXPECT_NEAR(integral(f), std::sqrt(2.0 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(inner_product(f, f), std::sqrt(std::numbers::pi), 1e-12);
    EXPECT_NEAR(sobolev_norm(f, 0.0), l2_norm(f), 1e-13);
    const double h1 = std::sqrt(inner_product(f, f) + inner_product(derivative(f, 1), derivative(f, 1)));
    EXPECT_NEAR(sobolev_norm(f, 1.0), h1, 1e-12);
    EXPECT_NEAR(lp_norm(f, 2.0), l2_norm(f), 1e-13);
}

TEST(Fields, GridMismatchThrows) {
    const Field a(GridSpec(64, 10.0));
    const Field b(GridSpec(64, 11.0));
    EXPECT_THROW(inner_product(a, b), GridMismatch);
    EXPECT_THROW(a + b, GridMismatch);
}

TEST(Fields, RollShiftsSamples) {
    const GridSpec g(32, 10.0);
    Field f(g);
    f[3] = 1.0;
    const Field r = roll(f, 2);
    EXPECT_EQ(r[5], 1.0);
    EXPECT_EQ(roll(f, -4)[31], 1.0);
}

TEST(Weights, Gamma0Properties) {
    const double eps = 0.1;
    EXPECT_NEAR(gamma0(-1e6, eps), 1.0 + std::pow(1e6, -eps) / eps, 1e-6);
    EXPECT_GT(gamma0(1.0, eps), gamma0(0.0, eps));
    const double h = 1e-4;
    EXPECT_NEAR((gamma0(0.7 + h, eps) - gamma0(0.7 - h, eps)) / (2.0 * h), gamma0_prime(0.7, eps), 1e-7);
    EXPECT_NEAR(gamma0(0.0, eps), 1.0 + 0.5 * gamma0_total_mass(eps), 1e-14);
    EXPECT_THROW(gamma_weight(GridSpec(64, 10.0), 0.0), InvalidArgument);
}

TEST(Weights, EtaDerivativeIsClosedForm) {
    const GridSpec g(512, 40.0);
    const auto w = eta_weight(g);
    const double h = 1e-4;
    Field fd = eta_weight(g, -h).samples - eta_weight(g, h).samples;
    fd *= 1.0 / (2.0 * h);
    EXPECT_LT(sup_norm(fd - w.derivative), 1e-6);
}
