#include <cmath>

#include <gtest/gtest.h>

#include "gkdv/modulation.hpp"
#include "gkdv/random.hpp"

using namespace gkdv;

namespace {
const GridSpec kGrid(512, 60.0);
}

TEST(Decompose, ExactOnPureSolitons) {
    for (const SolitonParams p : {SolitonParams{1.0, 0.0, 4}, SolitonParams{1.4, 3.0, 4}, SolitonParams{0.8, -5.0, 4}}) {
        const auto s = decompose(profile(p, kGrid));
        EXPECT_NEAR(s.c, p.c, 1e-10);
        EXPECT_NEAR(s.y, p.y, 1e-10);
        EXPECT_LT(l2_norm(s.w), 1e-10);
    }
}

TEST(Decompose, PerturbedSolitonIsOrthogonal) {
    const Field psi = profile({1.1, 2.0, 4}, kGrid) + band_limited_noise(kGrid, {1e-2, 0.5, 3.0, 2.0, 3.0}, 9);
    const auto s = decompose(psi);
    EXPECT_NEAR(s.ip_q, 0.0, 1e-12);
    EXPECT_NEAR(s.ip_dq, 0.0, 1e-12);
    EXPECT_LT(l2_norm(s.psi() - psi), 1e-13);
}

TEST(Decompose, FarFromSolitonManifoldFails) {
    const Field far = sample(kGrid, [](double x) { return 0.2 * std::exp(-x * x / 50.0); });
    EXPECT_THROW(decompose(far), NoConvergence);
}

TEST(Coupled, ReconstructsDirectSolution) {
    const Field psi = profile({}, kGrid) + band_limited_noise(kGrid, {1e-3, 0.5, 3.0, 0.0, 3.0}, 7);
    const auto s0 = decompose(psi);
    const auto run = coupled_evolve(s0, 1.0, 1e-3, {1000, {}, 0.5, 0.5});
    const auto direct = gkdv_evolve(psi, 1.0, 1e-3, {1000, {}, false, 0.0});
    EXPECT_LT(l2_norm(run.states.back().psi() - direct.back()), 1e-6);
    EXPECT_NEAR(run.states.back().mass, run.states.front().mass, 1e-8 * run.states.front().mass);
}

TEST(Coupled, InnerProductLaws) {
    const Field psi = profile({}, kGrid) + band_limited_noise(kGrid, {1e-3, 0.5, 3.0, 0.0, 3.0}, 7);
    const auto run = coupled_evolve(decompose(psi), 0.025, 2.5e-4);
    const auto rep = inner_product_dynamics_check(run);
    EXPECT_LT(rep.relative_q, 1e-5);
    EXPECT_LT(rep.relative_dq, 1e-5);
    EXPECT_GT(rep.samples, 90u);
}

TEST(Coupled, QprimeDecayTracksKappa) {
    const SolitonParams p{};
    for (double kappa : {10.0, 20.0}) {
        ModulationState s(1e-3 * profile_dx(p, kGrid));
        s.kappa = kappa;
        s.refresh();
        const auto run = coupled_evolve(s, 0.05, 5e-4);
        EXPECT_NEAR(qprime_decay_rate(run), kappa, 0.05 * kappa);
    }
}

TEST(Coupled, RejectsBadKappa) {
    ModulationState s{Field(kGrid)};
    s.kappa = 0.5;
    EXPECT_THROW(coupled_evolve(s, 0.1, 1e-3), InvalidArgument);
}

TEST(Coupled, LeavingTheSmallRegimeAborts) {
    ModulationState s(0.3 * profile({}, kGrid));
    s.refresh();
    CoupledOptions opts;
    opts.max_scale_deviation = 1e-3;
    EXPECT_THROW(coupled_evolve(s, 1.0, 1e-3, opts), NumericAbort);
}
