#include <gtest/gtest.h>

#include "gkdv/random.hpp"
#include "gkdv/virial.hpp"

using namespace gkdv;

TEST(Virial, IdentityDefects) {
    const auto d = virial_identity_defects(GridSpec(1024, 80.0));
    EXPECT_LT(d.eta1_equals_q3, 1e-9);
    EXPECT_LT(d.ratio2_corrected, 1e-9);
    EXPECT_LT(d.ratio3, 1e-9);
    EXPECT_LT(d.eta_squared, 1e-9);
    EXPECT_LT(d.q3eta_derivative, 1e-9);
    EXPECT_LT(d.a_assembled, 1e-9);
    // the 2/3 coefficient is off by an O(1) amount
    EXPECT_GT(d.ratio2_stated, 1.0);
}

TEST(Virial, RateIsMinusDissipation) {
    const GridSpec g(1024, 80.0);
    const LinearizedOperator op({}, g);
    const Field qt = tilde_profile({}, g), dq = profile_dx({}, g);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Field v = band_limited_noise(g, {1.0, 0.0, 3.0, 0.0, 3.0}, seed);
        v.axpy(-inner_product(v, qt) / inner_product(qt, qt), qt);
        v.axpy(-inner_product(v, dq) / inner_product(dq, dq), dq);
        const double rate = virial_rate(op, v);
        const double diss = virial_dissipation(op, v);
        EXPECT_LE(rate, 1e-7);
        EXPECT_GE(diss, 0.0);
        EXPECT_NEAR(rate + diss, 0.0, 1e-10);
        EXPECT_GT(sech_weighted_h1_squared(v), 0.0);
    }
}

TEST(Virial, SolitonIsStationary) {
    const GridSpec g(1024, 80.0);
    const LinearizedOperator op({}, g);
    EXPECT_NEAR(virial_rate(op, profile({}, g)), 0.0, 1e-10);
}

TEST(Virial, FunctionalSign) {
    const GridSpec g(256, 40.0);
    const Field right = sample(g, [](double x) { return std::exp(-(x - 5.0) * (x - 5.0)); });
    EXPECT_LT(virial_functional(right), 0.0);
    EXPECT_GT(virial_functional(right, 10.0), 0.0);
}
