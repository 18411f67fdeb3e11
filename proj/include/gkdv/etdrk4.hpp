#pragma once

/// Fourth-order exponential time differencing (Cox-Matthews ETDRK4 with the
/// Kassam-Trefethen contour evaluation of the phi-functions) for
///
///     d/dt U = Lin * U + N(t, U, a),   d/dt a = A(t, U, a)
///
/// where U is a half spectrum of a real field, Lin is a diagonal Fourier
/// symbol, and a is a small vector of real ODE unknowns with no linear part
/// (they are advanced by the same stages, which reduces to classical RK4).

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "gkdv/errors.hpp"
#include "gkdv/grid.hpp"

namespace gkdv {

struct EtdState {
    std::vector<complex> spec;  // half spectrum, Nyquist entry held at zero
    std::vector<double> aux;    // ODE unknowns
};

/// Evaluates the non-stiff right-hand side at time t.  Must write into the
/// output vectors, which arrive sized like the state.
using EtdRhs = std::function<void(double t, const EtdState& state, EtdState& out)>;

class Etdrk4 {
public:
    /// symbol[k] is the linear multiplier at half-spectrum index k.
    Etdrk4(std::vector<complex> symbol, double dt) : dt_(dt) {
        if (!(dt != 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be finite and nonzero");
        const std::size_t m = symbol.size();
        e_.resize(m);
        e2_.resize(m);
        q_.resize(m);
        f1_.resize(m);
        f2_.resize(m);
        f3_.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            const complex z = dt * symbol[k];
            e_[k] = std::exp(z);
            e2_[k] = std::exp(0.5 * z);
            const auto c = coefficients(z);
            q_[k] = dt * c.q;
            f1_[k] = dt * c.f1;
            f2_[k] = dt * c.f2;
            f3_[k] = dt * c.f3;
        }
    }

    double dt() const noexcept { return dt_; }

    /// Advances state from t to t + dt in place.
    void step(double t, EtdState& s, const EtdRhs& rhs) {
        resize_like(s);
        const std::size_t m = s.spec.size();
        const std::size_t na = s.aux.size();
        const double h = dt_;

        rhs(t, s, nv_);
        for (std::size_t k = 0; k < m; ++k) a_.spec[k] = e2_[k] * s.spec[k] + q_[k] * nv_.spec[k];
        for (std::size_t i = 0; i < na; ++i) a_.aux[i] = s.aux[i] + 0.5 * h * nv_.aux[i];

        rhs(t + 0.5 * h, a_, na_);
        for (std::size_t k = 0; k < m; ++k) b_.spec[k] = e2_[k] * s.spec[k] + q_[k] * na_.spec[k];
        for (std::size_t i = 0; i < na; ++i) b_.aux[i] = s.aux[i] + 0.5 * h * na_.aux[i];

        rhs(t + 0.5 * h, b_, nb_);
        for (std::size_t k = 0; k < m; ++k) c_.spec[k] = e2_[k] * a_.spec[k] + q_[k] * (2.0 * nb_.spec[k] - nv_.spec[k]);
        for (std::size_t i = 0; i < na; ++i) c_.aux[i] = s.aux[i] + h * nb_.aux[i];

        rhs(t + h, c_, nc_);
        for (std::size_t k = 0; k < m; ++k) {
            s.spec[k] = e_[k] * s.spec[k] + f1_[k] * nv_.spec[k] + 2.0 * f2_[k] * (na_.spec[k] + nb_.spec[k]) +
                        f3_[k] * nc_.spec[k];
        }
        for (std::size_t i = 0; i < na; ++i) {
            s.aux[i] += h / 6.0 * (nv_.aux[i] + 2.0 * na_.aux[i] + 2.0 * nb_.aux[i] + nc_.aux[i]);
        }
        if (m > 0) s.spec.back() = 0.0;
    }

private:
    struct Coefficients {
        complex q, f1, f2, f3;
    };

    /// phi-type coefficients divided by dt:
    ///   q  = (e^{z/2} - 1)/z
    ///   f1 = (-4 - z + e^z (4 - 3z + z^2))/z^3
    ///   f2 = (2 + z + e^z (z - 2))/z^3
    ///   f3 = (-4 - 3z - z^2 + e^z (4 - z))/z^3
    /// Direct formulas for |z| >= 1/2, contour mean over a unit circle around z
    /// otherwise.
    static Coefficients coefficients(complex z) {
        auto direct = [](complex r) {
            const complex er = std::exp(r);
            const complex r3 = r * r * r;
            return Coefficients{(std::exp(0.5 * r) - 1.0) / r, (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3,
                                (2.0 + r + er * (r - 2.0)) / r3, (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3};
        };
        if (std::abs(z) >= 0.5) return direct(z);
        constexpr int kPoints = 64;
        Coefficients sum{0.0, 0.0, 0.0, 0.0};
        for (int j = 0; j < kPoints; ++j) {
            const complex r = z + std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / kPoints);
            const auto c = direct(r);
            sum.q += c.q;
            sum.f1 += c.f1;
            sum.f2 += c.f2;
            sum.f3 += c.f3;
        }
        const double inv = 1.0 / kPoints;
        return {sum.q * inv, sum.f1 * inv, sum.f2 * inv, sum.f3 * inv};
    }

    void resize_like(const EtdState& s) {
        for (EtdState* p : {&nv_, &na_, &nb_, &nc_, &a_, &b_, &c_}) {
            p->spec.resize(s.spec.size());
            p->aux.resize(s.aux.size());
        }
    }

    double dt_;
    std::vector<complex> e_, e2_, q_, f1_, f2_, f3_;
    EtdState nv_, na_, nb_, nc_, a_, b_, c_;
};

}  // namespace gkdv
