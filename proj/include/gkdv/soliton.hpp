#pragma once

/// The quartic soliton family Q_{c,y}(x) = c^{2/3} Q(c (x - y)) with
/// Q(x) = (5/2)^{1/3} sech^{2/3}(3x/2), and its scale/translation derivatives.
/// All profiles are evaluated pointwise from closed forms.

#include <cmath>
#include <numbers>

#include "gkdv/errors.hpp"
#include "gkdv/grid.hpp"

namespace gkdv {

struct SolitonParams {
    double c = 1.0;  // scale, speed is c^2
    double y = 0.0;  // center
    int p = 4;       // nonlinearity power; only 4 is evolved

    void validate() const {
        if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("soliton scale c must be positive");
        if (!std::isfinite(y)) throw InvalidArgument("soliton center must be finite");
        if (p != 4) throw InvalidArgument("only the quartic nonlinearity p = 4 is supported");
    }
};

/// Q_p(x) = ((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1)x/2) for general p > 1.
inline double ground_state(double x, int p) {
    const double a = 1.0 / (p - 1.0);
    return std::pow(0.5 * (p + 1.0), a) * std::pow(1.0 / std::cosh(0.5 * (p - 1.0) * x), 2.0 * a);
}

/// ||Q_p||_{L^2}^2 = ((p+1)/2)^{2/(p-1)} Gamma((p+1)/(p-1)) sqrt(pi) / Gamma((p+3)/(2(p-1)))
inline double mass_formula(int p = 4) {
    if (p <= 1) throw InvalidArgument("mass formula needs p > 1");
    const double q = p - 1.0;
    return std::pow(0.5 * (p + 1.0), 2.0 / q) * std::tgamma((p + 1.0) / q) * std::sqrt(std::numbers::pi) /
           std::tgamma((p + 3.0) / (2.0 * q));
}

namespace soliton {

/// Pointwise values of Q_{c,y} and its x-derivatives up to third order,
/// with T = tanh(z), S = sech^2(z), z = 3c(x - y)/2:
///   Q'   = -c T Q
///   Q''  = c^2 Q (1 - 5S/2)
///   Q''' = c^3 T Q (10 S - 1)
struct Point {
    double q, dq, d2q, d3q;
};

inline Point at(const SolitonParams& s, double x) {
    const double z = 1.5 * s.c * (x - s.y);
    const double t = std::tanh(z);
    const double sech = 1.0 / std::cosh(z);
    const double S = sech * sech;
    const double q = std::cbrt(2.5 * s.c * s.c) * std::cbrt(S);
    const double c2 = s.c * s.c;
    return {q, -s.c * t * q, c2 * q * (1.0 - 2.5 * S), c2 * s.c * t * q * (10.0 * S - 1.0)};
}

}  // namespace soliton

inline Field profile(const SolitonParams& s, const GridSpec& grid) {
    s.validate();
    return sample(grid, [&](double x) { return soliton::at(s, x).q; });
}

inline Field profile_dx(const SolitonParams& s, const GridSpec& grid) {
    s.validate();
    return sample(grid, [&](double x) { return soliton::at(s, x).dq; });
}

inline Field profile_dxx(const SolitonParams& s, const GridSpec& grid) {
    s.validate();
    return sample(grid, [&](double x) { return soliton::at(s, x).d2q; });
}

/// Qtilde = c d/dc Q_{c,y} = (2/3) Q + (x - y) Q'
inline Field tilde_profile(const SolitonParams& s, const GridSpec& grid) {
    s.validate();
    return sample(grid, [&](double x) {
        const auto p = soliton::at(s, x);
        return 2.0 / 3.0 * p.q + (x - s.y) * p.dq;
    });
}

/// Qtilde' = (5/3) Q' + (x - y) Q''
inline Field tilde_profile_dx(const SolitonParams& s, const GridSpec& grid) {
    s.validate();
    return sample(grid, [&](double x) {
        const auto p = soliton::at(s, x);
        return 5.0 / 3.0 * p.dq + (x - s.y) * p.d2q;
    });
}

/// Qtilde'' = (8/3) Q'' + (x - y) Q'''
inline Field tilde_profile_dxx(const SolitonParams& s, const GridSpec& grid) {
    s.validate();
    return sample(grid, [&](double x) {
        const auto p = soliton::at(s, x);
        return 8.0 / 3.0 * p.d2q + (x - s.y) * p.d3q;
    });
}

/// Qtildetilde = (2/3) Qtilde + (x - y) Qtilde' = c d/dc Qtilde
inline Field tilde_tilde_profile(const SolitonParams& s, const GridSpec& grid) {
    s.validate();
    return sample(grid, [&](double x) {
        const auto p = soliton::at(s, x);
        const double r = x - s.y;
        const double qt = 2.0 / 3.0 * p.q + r * p.dq;
        const double dqt = 5.0 / 3.0 * p.dq + r * p.d2q;
        return 2.0 / 3.0 * qt + r * dqt;
    });
}

/// The quadrature value of ||Q_{1,0}||^2.
inline double mass_numeric(const GridSpec& grid) {
    const Field q = profile({}, grid);
    return inner_product(q, q);
}

/// ||Q'' - c^2 Q + Q^4||_{L^2} with Q'' computed spectrally.
inline double euler_lagrange_residual(const SolitonParams& s, const GridSpec& grid) {
    const Field q = profile(s, grid);
    Field r = derivative(q, 2);
    r.axpy(-s.c * s.c, q);
    r += map(q, [](double v) { return v * v * v * v; });
    return l2_norm(r);
}

/// Everything about one soliton that the flows and the modulation need,
/// sampled once.
struct SolitonFrame {
    SolitonParams params;
    Field q, dq, d2q;
    Field tilde, tilde_dx, tilde_dxx, tilde_tilde;
    Field l_d2q;  // L_{c,y} Q'' = 12 Q^2 Q'^2

    SolitonFrame(const SolitonParams& s, const GridSpec& grid)
        : params(s),
          q(profile(s, grid)),
          dq(profile_dx(s, grid)),
          d2q(profile_dxx(s, grid)),
          tilde(tilde_profile(s, grid)),
          tilde_dx(tilde_profile_dx(s, grid)),
          tilde_dxx(tilde_profile_dxx(s, grid)),
          tilde_tilde(tilde_tilde_profile(s, grid)),
          l_d2q(grid) {
        for (std::size_t j = 0; j < grid.n(); ++j) l_d2q[j] = 12.0 * q[j] * q[j] * dq[j] * dq[j];
    }
};

}  // namespace gkdv
