#pragma once

/// Virial functional I_eta(v) = -integral eta v^2 with eta = (5/3) tanh(3x/2)
/// and the algebra that turns its time derivative under the v-flow into the
/// quadratic form 3 [<L w, w> + (21/4) ||w||^2], w = v sqrt(eta').

#include <algorithm>
#include <cmath>

#include "gkdv/grid.hpp"
#include "gkdv/linearized.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {

/// eta and its derivatives for the unit soliton centered at y.  eta' is the
/// closed form (5/2) sech^2(3(x-y)/2); eta'' and eta''' are spectral
/// derivatives of eta' (which is periodic to machine precision on the grid).
struct VirialProfiles {
    Field eta, eta1, eta2, eta3;
    Field q3;      // Q^3
    Field q3_eta1; // (Q^3 eta)' with (Q^3)' spectral

    VirialProfiles(const GridSpec& grid, double y = 0.0)
        : eta(eta_weight(grid, y).samples),
          eta1(eta_weight(grid, y).derivative),
          eta2(derivative(eta1, 1)),
          eta3(derivative(eta1, 2)),
          q3(map(profile({1.0, y, 4}, grid), [](double q) { return q * q * q; })),
          q3_eta1(hadamard(derivative(q3, 1), eta) + hadamard(q3, eta1)) {}
};

/// Pointwise defects of the eta identities, each in a division-free form.
struct VirialIdentityDefects {
    double eta1_equals_q3;          // eta' = Q^3
    double ratio2_stated;           // eta''^2 = 9 eta'^2 (1 - (2/3) Q^3)
    double ratio2_corrected;        // eta''^2 = 9 eta'^2 (1 - (2/5) Q^3)
    double ratio3;                  // eta''' = 9 eta' (1 - (3/5) Q^3)
    double eta_squared;             // eta^2 = (25/9)(1 - (2/5) Q^3)
    double q3eta_derivative;        // (Q^3 eta)' = -5 Q^3 + 3 Q^6
    double a_assembled;             // A eta'^2 = (75/4 - 12 Q^3) eta'^2, A from its defining formula
};

inline VirialIdentityDefects virial_identity_defects(const GridSpec& grid) {
    const VirialProfiles v(grid);
    VirialIdentityDefects d{};
    for (std::size_t j = 0; j < grid.n(); ++j) {
        const double e = v.eta[j], e1 = v.eta1[j], e2 = v.eta2[j], e3 = v.eta3[j];
        const double q3 = v.q3[j];
        const double qe = v.q3_eta1[j];
        d.eta1_equals_q3 = std::max(d.eta1_equals_q3, std::abs(e1 - q3));
        d.ratio2_stated = std::max(d.ratio2_stated, std::abs(e2 * e2 - 9.0 * e1 * e1 * (1.0 - 2.0 / 3.0 * q3)));
        d.ratio2_corrected = std::max(d.ratio2_corrected, std::abs(e2 * e2 - 9.0 * e1 * e1 * (1.0 - 0.4 * q3)));
        d.ratio3 = std::max(d.ratio3, std::abs(e3 - 9.0 * e1 * (1.0 - 0.6 * q3)));
        d.eta_squared = std::max(d.eta_squared, std::abs(e * e - 25.0 / 9.0 * (1.0 - 0.4 * q3)));
        d.q3eta_derivative = std::max(d.q3eta_derivative, std::abs(qe - (-5.0 * q3 + 3.0 * q3 * q3)));
        // A = 1 + eta'''/(2 eta') - (3/4)(eta''/eta')^2 - 4 (Q^3 eta)'/eta', times eta'^2
        const double a_e1sq = e1 * e1 + 0.5 * e3 * e1 - 0.75 * e2 * e2 - 4.0 * qe * e1;
        d.a_assembled = std::max(d.a_assembled, std::abs(a_e1sq - (75.0 / 4.0 - 12.0 * q3) * e1 * e1));
    }
    return d;
}

/// I_eta(v) = -integral eta(x - y) v^2
inline double virial_functional(const Field& v, double y = 0.0) {
    const Field eta = eta_weight(v.grid(), y).samples;
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += eta[j] * v[j] * v[j];
    return -s * v.grid().dx();
}

/// d/dt I_eta(v) for v_t = -L v_x (unit soliton at the origin):
/// 2 integral eta v L v_x.
inline double virial_rate(const LinearizedOperator& op, const Field& v) {
    const Field eta = eta_weight(v.grid(), op.params().y).samples;
    const Field lvx = op.apply(derivative(v, 1));
    return 2.0 * inner_product(hadamard(eta, v), lvx);
}

/// 3 [<L w, w> + (21/4) ||w||^2] with w = v sqrt(eta'): the dissipation that
/// equals -d/dt I_eta.  Nonnegative because -21/4 is the bottom of the
/// spectrum of L.
inline double virial_dissipation(const LinearizedOperator& op, const Field& v) {
    const Field eta1 = eta_weight(v.grid(), op.params().y).derivative;
    const Field w = hadamard(v, map(eta1, [](double e) { return std::sqrt(e); }));
    return 3.0 * (inner_product(op.apply(w), w) + 21.0 / 4.0 * inner_product(w, w));
}

/// ||sech(3x/2) v||_{H^1}^2, the coercive lower bound of the dissipation.
inline double sech_weighted_h1_squared(const Field& v, double y = 0.0) {
    const Field s = sech_weight(v.grid(), 1.5, y).samples;
    return h1_norm_squared(hadamard(s, v));
}

}  // namespace gkdv
