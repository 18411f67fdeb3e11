#include <cmath>

#include <gtest/gtest.h>

#include "gkdv/random.hpp"
#include "gkdv/scattering.hpp"

using namespace gkdv;

namespace {
const GridSpec kGrid(512, 60.0);
}

TEST(ForwardScatter, PurelyLinearRunIsExact) {
    const Field w0 = band_limited_noise(kGrid, {1e-3, 0.5, 2.0, 0.0, 3.0}, 4);
    const auto traj = airy_evolve(w0, 4.0, 0.1);
    const auto rep = forward_scatter(traj, DyadicDecomposition(kGrid));
    EXPECT_LT(l2_norm(rep.z0 - w0), 1e-12);
    for (const auto& r : rep.residual_curve) EXPECT_LE(r.l2, 1e-12);
    EXPECT_GE(rep.window_samples, 10u);
}

TEST(ForwardScatter, WindowTooSmall) {
    const auto traj = airy_evolve(profile({}, kGrid), 1.0, 0.1);
    EXPECT_THROW(forward_scatter(traj, DyadicDecomposition(kGrid), 0.25), InvalidArgument);
    EXPECT_THROW(forward_scatter(traj, DyadicDecomposition(kGrid), 0.0), InvalidArgument);
}

TEST(InverseWave, PureSolitonConvergesAtOnce) {
    const auto r = inverse_wave(Field(kGrid), 1.0, -3.0, 5.0, 2e-3);
    EXPECT_NEAR(r.y_initial, -3.0, 1e-6);
    EXPECT_LE(r.history.size(), 3u);
    EXPECT_LT(l2_norm(r.psi0 - profile({1.0, -3.0, 4}, kGrid)), 1e-6);
    EXPECT_LT(r.mass_defect, 1e-7);
}

TEST(InverseWave, RejectsLargeData) {
    const Field big = band_limited_noise(kGrid, {5.0, 0.25, 1.0, -10.0, 4.0}, 1);
    EXPECT_THROW(inverse_wave(big, 1.0, 0.0, 5.0, 2e-3), InvalidArgument);
}

TEST(InverseWave, SmallDataMassIdentityAndMonotoneShots) {
    const Field v0 = band_limited_noise(kGrid, {1e-2, 0.25, 1.0, -10.0, 4.0}, 7);
    const auto r = inverse_wave(v0, 1.0, 0.0, 5.0, 2e-3);
    EXPECT_NEAR(r.y_initial, 0.0, 1e-6);
    EXPECT_LT(r.mass_defect, 1e-2);
    EXPECT_TRUE(r.monotone);
}
