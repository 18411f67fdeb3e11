#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gkdv/flows.hpp"
#include "gkdv/random.hpp"

using namespace gkdv;

namespace {

const GridSpec kGrid(512, 60.0);

Field orthogonal_u_data() {
    Field f = sample(kGrid, [](double x) { return std::exp(-(x - 1.0) * (x - 1.0)) * (1.0 + 0.5 * x); });
    f = project_perp_qprime(f, {});
    const Field q = profile({}, kGrid);
    f.axpy(-inner_product(f, q) / inner_product(q, q), q);
    return f;
}

}  // namespace

TEST(Airy, PropagatorIsAGroup) {
    const Field f = sample(kGrid, [](double x) { return std::exp(-x * x); });
    EXPECT_LT(l2_norm(airy_propagate(airy_propagate(f, 0.7), 0.5) - airy_propagate(f, 1.2)), 1e-13);
    EXPECT_LT(l2_norm(airy_propagate(airy_propagate(f, 2.0), -2.0) - f), 1e-13);
    EXPECT_NEAR(l2_norm(airy_propagate(f, 3.0)), l2_norm(f), 1e-13);
}

TEST(Airy, SolvesTheAiryEquation) {
    const Field f = sample(kGrid, [](double x) { return std::exp(-x * x / 16.0); });
    const double t = 0.3, h = 1e-4;
    Field dt = airy_propagate(f, t + h) - airy_propagate(f, t - h);
    dt *= 1.0 / (2.0 * h);
    EXPECT_LT(l2_norm(dt + derivative(airy_propagate(f, t), 3)), 1e-6);
}

TEST(Airy, SpongeDampsOnlyNearTheEdges) {
    EvolveOptions opts;
    opts.sponge.enabled = true;
    const Field f = sample(kGrid, [](double x) { return std::cos(3.0 * x) * std::exp(-x * x / 16.0); });
    const auto early = airy_evolve(f, 0.25, 0.01, opts);
    EXPECT_LT(l2_norm(early.back() - airy_propagate(f, 0.25)), 1e-6 * l2_norm(f));
    const auto traj = airy_evolve(f, 10.0, 0.01, opts);
    EXPECT_LT(l2_norm(traj.back()), 0.5 * l2_norm(f));
    EXPECT_TRUE(traj.meta().sponge);
}

TEST(Gkdv, TravelingSolitonAndOrder) {
    const SolitonParams p{};
    const Field q0 = profile(p, kGrid);
    const Field exact = profile({1.0, 1.0, 4}, kGrid);
    std::vector<double> dts{0.01, 0.005, 0.0025, 0.00125};
    std::vector<double> errs;
    for (double dt : dts) errs.push_back(l2_norm(gkdv_evolve(q0, 1.0, dt).back() - exact));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        const double x = std::log(dts[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(dts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_GE(std::pow(2.0, slope), 12.0) << "slope " << slope;
    EXPECT_LT(errs.back(), 1e-7);
}

TEST(Gkdv, ConservesMassAndEnergy) {
    const Field psi = profile({}, kGrid) + band_limited_noise(kGrid, {1e-2, 0.5, 3.0, 0.0, 3.0}, 3);
    const auto traj = gkdv_evolve(psi, 1.0, 1e-3, {100, {}, false, 0.0});
    const auto& c = traj.conserved();
    for (const auto& s : c) {
        EXPECT_NEAR(s.mass, c.front().mass, 1e-8 * c.front().mass);
        EXPECT_NEAR(s.energy, c.front().energy, 1e-8 * std::abs(c.front().energy));
    }
}

TEST(Gkdv, BackwardStepperInvertsForward) {
    const Field psi = profile({}, kGrid) + band_limited_noise(kGrid, {1e-2, 0.25, 1.0, -5.0, 3.0}, 1);
    GkdvStepper fwd(kGrid, 1e-3), bwd(kGrid, -1e-3);
    const Field there = fwd.advance(psi, 0.0, 1000);
    const Field back = bwd.advance(there, 1.0, 1000);
    EXPECT_LT(l2_norm(back - psi), 1e-8 * l2_norm(psi));
}

TEST(Gkdv, BlowUpAbortsWithLastState) {
    const Field big = sample(kGrid, [](double x) { return 40.0 * std::exp(-x * x * 4.0); });
    EXPECT_THROW(gkdv_evolve(big, 1.0, 0.05), NumericAbort);
}

TEST(LinearFlows, ExplicitSolutions) {
    const SolitonParams p{};
    const auto u = u_flow_evolve(tilde_profile(p, kGrid), 1.0, 1e-3, p);
    EXPECT_LT(l2_norm(u.back() - (tilde_profile(p, kGrid) + 2.0 * profile_dx(p, kGrid))), 1e-6);
    const auto v = v_flow_evolve(profile(p, kGrid), 1.0, 1e-3, p);
    EXPECT_LT(l2_norm(v.back() - profile(p, kGrid)), 1e-8);
    const auto k = u_flow_evolve(profile_dx(p, kGrid), 1.0, 1e-3, p);
    EXPECT_LT(l2_norm(k.back() - profile_dx(p, kGrid)), 1e-8);
}

TEST(LinearFlows, TimeReversalUndoesTheFlow) {
    const Field f = orthogonal_u_data();
    EvolveOptions rev;
    rev.time_reversed = true;
    const auto fwd = u_flow_evolve(f, 0.5, 5e-4);
    const auto back = u_flow_evolve(fwd.back(), 0.5, 5e-4, {}, rev);
    EXPECT_LT(l2_norm(back.back() - f), 1e-8);
}

TEST(LinearFlows, DualityRelations) {
    const Field u0 = band_limited_noise(kGrid, {0.1, 0.5, 2.0, 0.0, 3.0}, 11);
    const Field v0 = band_limited_noise(kGrid, {0.1, 0.5, 2.0, 0.0, 3.0}, 12);
    const auto r = duality_relations_check(u0, v0, 0.5, 5e-4);
    EXPECT_LT(r.l_intertwining, 1e-7);
    EXPECT_LT(r.dx_intertwining, 1e-7);
    EXPECT_LT(r.pairing_drift, 1e-7);
    EXPECT_GT(r.reversed_dx_mismatch, 1e-3);
    EXPECT_GT(r.reversed_l_mismatch, 1e-3);
}

TEST(LinearFlows, PseudoInverseInvariant) {
    const Field v0 = project_perp_qprime(band_limited_noise(kGrid, {0.1, 0.5, 2.0, 0.0, 3.0}, 5), {});
    const auto v = v_flow_evolve(v0, 1.0, 1e-3, {}, {250, {}, false, 0.0});
    const auto inv = invariant_Linv(v);
    for (double x : inv) EXPECT_NEAR(x, inv.front(), 1e-8 * std::abs(inv.front()));
}

TEST(ForcedFlows, KeepOrthogonality) {
    const auto path = ModulationPath::steady({1.0, 0.0, 4});
    const auto traj = u_flow_evolve_forced(orthogonal_u_data(), 1.0, 1e-3, path);
    EXPECT_LT(traj.meta().max_orthogonality, 1e-8);
    EXPECT_TRUE(traj.meta().warnings.empty());
    EXPECT_EQ(traj.forcing().size(), traj.size());
}

TEST(ForcedFlows, MovingFrameWithSource) {
    ModulationPath path{[](double t) { return 1.0 + 0.01 * t; }, [](double) { return 0.01; },
                        [](double t) { return t + 0.005 * t * t; }, [](double t) { return 1.0 + 0.01 * t; }};
    const auto src = [](double t) {
        return sample(kGrid, [t](double x) { return 1e-3 * std::exp(-(x - t) * (x - t)); });
    };
    const auto traj = u_flow_evolve_forced(orthogonal_u_data(), 1.0, 1e-3, path, src);
    EXPECT_LT(traj.meta().max_orthogonality, 1e-7);
}

TEST(ForcedFlows, VProblemKeepsOrthogonality) {
    Field v0 = orthogonal_u_data();
    const Field qt = tilde_profile({}, kGrid);
    v0.axpy(-inner_product(v0, qt) / inner_product(qt, qt), qt);
    v0 = project_perp_qprime(v0, {});
    const auto traj = v_flow_evolve_forced(v0, 1.0, 1e-3, ModulationPath::steady({}));
    EXPECT_LT(traj.meta().max_orthogonality, 1e-8);
}

TEST(ForcedFlows, RejectNonOrthogonalData) {
    EXPECT_THROW(u_flow_evolve_forced(profile({}, kGrid), 1.0, 1e-3, ModulationPath::steady({})), InvalidArgument);
}

TEST(Trajectory, TimesMustIncrease) {
    Trajectory t(kGrid);
    t.push(0.0, Field(kGrid), {0.0, 0.0});
    EXPECT_THROW(t.push(0.0, Field(kGrid), {0.0, 0.0}), InvalidArgument);
    EXPECT_THROW(t.push(1.0, Field(GridSpec(64, 1.0)), {0.0, 0.0}), GridMismatch);
    t.push(1.0, Field(kGrid), {0.0, 0.0});
    EXPECT_EQ(t.window(0.5, 2.0).size(), 1u);
}

TEST(Etdrk4, IntegratesLinearOdeExactly) {
    // U' = -U + e^{-t} has U = (1 + t) e^{-t}; the aux unknown a' = -a gives e^{-t}
    Etdrk4 st({complex(-1.0, 0.0), complex(0.0, 0.0)}, 0.1);
    EtdState s{{complex(1.0, 0.0), complex(0.0, 0.0)}, {1.0}};
    const EtdRhs rhs = [](double t, const EtdState& in, EtdState& out) {
        out.spec[0] = std::exp(-t);
        out.spec[1] = 0.0;
        out.aux[0] = -in.aux[0];
    };
    double t = 0.0;
    for (int i = 0; i < 10; ++i, t += 0.1) st.step(t, s, rhs);
    EXPECT_NEAR(s.spec[0].real(), 2.0 * std::exp(-1.0), 1e-7);
    EXPECT_NEAR(s.aux[0], std::exp(-1.0), 1e-6);
}
