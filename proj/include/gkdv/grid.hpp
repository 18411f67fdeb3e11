#pragma once

/// Periodic spatial discretization on [-L/2, L/2).
///
/// Fields are sampled at x_j = -L/2 + j*dx, j = 0..n-1.  Spectral coefficients
/// are the plain DFT of the samples, F_k = sum_j f_j exp(-2 pi i j k / n), with
/// discrete frequencies xi_k = 2 pi k / L for k <= n/2 and 2 pi (k - n) / L
/// above.  The Nyquist mode is dropped by every derivative multiplier so that
/// derivative(f, a + b) == derivative(derivative(f, a), b) exactly.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fftw3.h>

#include "gkdv/errors.hpp"

namespace gkdv {

using complex = std::complex<double>;

class GridSpec {
public:
    GridSpec(std::size_t n, double length) : n_(n), length_(length) {
        if (n < 8 || (n & (n - 1)) != 0) {
            throw InvalidArgument("grid size must be a power of two >= 8, got " + std::to_string(n));
        }
        if (!(length > 0.0) || !std::isfinite(length)) {
            throw InvalidArgument("grid length must be positive and finite");
        }
    }

    std::size_t n() const noexcept { return n_; }
    double length() const noexcept { return length_; }
    double dx() const noexcept { return length_ / static_cast<double>(n_); }
    double x(std::size_t j) const noexcept { return -0.5 * length_ + static_cast<double>(j) * dx(); }

    /// Frequency of half-spectrum index k (0 <= k <= n/2).
    double wavenumber(std::size_t k) const noexcept {
        return 2.0 * std::numbers::pi * static_cast<double>(k) / length_;
    }
    /// Signed frequency of full-spectrum index k (0 <= k < n).
    double signed_wavenumber(std::size_t k) const noexcept {
        const auto kk = static_cast<long>(k);
        const auto nn = static_cast<long>(n_);
        return 2.0 * std::numbers::pi * static_cast<double>(k <= n_ / 2 ? kk : kk - nn) / length_;
    }
    double nyquist() const noexcept { return wavenumber(n_ / 2); }
    std::size_t half_size() const noexcept { return n_ / 2 + 1; }

    std::vector<double> coordinates() const {
        std::vector<double> xs(n_);
        for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
        return xs;
    }

    bool operator==(const GridSpec&) const = default;

private:
    std::size_t n_;
    double length_;
};

/// Real samples of a function on a GridSpec.
class Field {
public:
    explicit Field(const GridSpec& grid) : grid_(grid), values_(grid.n(), 0.0) {}

    Field(const GridSpec& grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.n()) {
            throw InvalidArgument("field has " + std::to_string(values_.size()) +
                                  " samples, grid has " + std::to_string(grid_.n()));
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw InvalidArgument("field sample is not finite");
        }
    }

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t j) const noexcept { return values_[j]; }
    double& operator[](std::size_t j) noexcept { return values_[j]; }

    Field& operator+=(const Field& o) {
        check_same(o);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_same(o);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
        return *this;
    }
    Field& operator*=(double a) {
        for (double& v : values_) v *= a;
        return *this;
    }
    /// y += a * x
    Field& axpy(double a, const Field& x) {
        check_same(x);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += a * x.values_[j];
        return *this;
    }

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }
    friend Field operator*(Field a, double s) { return a *= s; }
    friend Field operator-(Field a) { return a *= -1.0; }

    /// Pointwise product.
    friend Field hadamard(const Field& a, const Field& b) {
        a.check_same(b);
        Field out(a.grid_);
        for (std::size_t j = 0; j < a.size(); ++j) out.values_[j] = a.values_[j] * b.values_[j];
        return out;
    }

    bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    void check_same(const Field& o) const {
        if (!(grid_ == o.grid_)) throw GridMismatch();
    }

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// Full complex spectrum (length n) of a Field.
struct SpectralField {
    GridSpec grid;
    std::vector<complex> coefficients;
};

/// Samples fn(x_j).
template <class Fn>
Field sample(const GridSpec& grid, Fn&& fn) {
    std::vector<double> v(grid.n());
    for (std::size_t j = 0; j < grid.n(); ++j) v[j] = fn(grid.x(j));
    return Field(grid, std::move(v));
}

/// Pointwise map of a field.
template <class Fn>
Field map(const Field& f, Fn&& fn) {
    Field out(f.grid());
    for (std::size_t j = 0; j < f.size(); ++j) out[j] = fn(f[j]);
    return out;
}

namespace detail {

/// FFTW real-to-complex / complex-to-real pair for one size.  Plans are
/// created with FFTW_UNALIGNED so the new-array execute functions can be
/// called concurrently on caller-owned buffers.
class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n) {
        std::vector<double> r(n);
        std::vector<complex> c(n / 2 + 1);
        auto* cc = reinterpret_cast<fftw_complex*>(c.data());
        const int ni = static_cast<int>(n);
        forward_ = fftw_plan_dft_r2c_1d(ni, r.data(), cc, FFTW_ESTIMATE | FFTW_UNALIGNED);
        inverse_ = fftw_plan_dft_c2r_1d(ni, cc, r.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    ~RealFft() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
    }

    std::size_t size() const noexcept { return n_; }

    void forward(std::span<const double> in, std::span<complex> out) const {
        // r2c does not modify its input, the const_cast is safe
        fftw_execute_dft_r2c(forward_, const_cast<double*>(in.data()),
                             reinterpret_cast<fftw_complex*>(out.data()));
    }

    /// Unnormalized c2r.  `in` is clobbered by FFTW.
    void inverse_destroy(std::span<complex> in, std::span<double> out) const {
        fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
    }

private:
    std::size_t n_;
    fftw_plan forward_;
    fftw_plan inverse_;
};

inline const RealFft& real_fft(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<RealFft>(n);
    return *slot;
}

}  // namespace detail

/// Half spectrum (n/2 + 1 coefficients) of real samples.
inline std::vector<complex> rfft(std::span<const double> values) {
    std::vector<complex> out(values.size() / 2 + 1);
    detail::real_fft(values.size()).forward(values, out);
    return out;
}

/// Inverse of rfft including the 1/n normalization.
inline std::vector<double> irfft(std::vector<complex> half, std::size_t n) {
    std::vector<double> out(n);
    detail::real_fft(n).inverse_destroy(half, out);
    const double s = 1.0 / static_cast<double>(n);
    for (double& v : out) v *= s;
    return out;
}

inline std::vector<complex> rfft(const Field& f) { return rfft(f.values()); }

inline Field irfft(const GridSpec& grid, std::vector<complex> half) {
    auto v = irfft(std::move(half), grid.n());
    Field out(grid);
    std::copy(v.begin(), v.end(), out.values().begin());
    return out;
}

inline SpectralField forward_transform(const Field& f) {
    const auto& g = f.grid();
    const auto half = rfft(f);
    std::vector<complex> full(g.n());
    for (std::size_t k = 0; k < half.size(); ++k) full[k] = half[k];
    for (std::size_t k = half.size(); k < g.n(); ++k) full[k] = std::conj(half[g.n() - k]);
    return {g, std::move(full)};
}

/// Takes the real part of the inverse transform; only the non-negative half
/// of a conjugate-symmetric spectrum is read.
inline Field inverse_transform(const SpectralField& F) {
    const auto& g = F.grid;
    if (F.coefficients.size() != g.n()) throw InvalidArgument("spectrum length does not match grid");
    std::vector<complex> half(F.coefficients.begin(), F.coefficients.begin() + static_cast<long>(g.half_size()));
    half.front() = complex(half.front().real(), 0.0);
    half.back() = complex(half.back().real(), 0.0);
    return irfft(g, std::move(half));
}

/// Multiplies the half spectrum by m(xi), xi >= 0.  m must describe a real
/// operator, i.e. m(-xi) = conj(m(xi)); the Nyquist coefficient is kept real.
template <class Multiplier>
Field apply_multiplier(const Field& f, Multiplier&& m) {
    const auto& g = f.grid();
    auto half = rfft(f);
    for (std::size_t k = 0; k < half.size(); ++k) half[k] *= m(g.wavenumber(k));
    half.back() = complex(half.back().real(), 0.0);
    return irfft(g, std::move(half));
}

/// (i xi)^order on the half spectrum with the Nyquist entry removed.
inline complex derivative_symbol(double xi, int order) {
    const complex ixi(0.0, xi);
    complex s(1.0, 0.0);
    for (int i = 0; i < order; ++i) s *= ixi;
    return s;
}

inline Field derivative(const Field& f, int order = 1) {
    if (order < 1 || order > 4) {
        throw InvalidArgument("derivative order must be in 1..4, got " + std::to_string(order));
    }
    const auto& g = f.grid();
    auto half = rfft(f);
    for (std::size_t k = 0; k + 1 < half.size(); ++k) half[k] *= derivative_symbol(g.wavenumber(k), order);
    half.back() = 0.0;
    return irfft(g, std::move(half));
}

/// Periodic trapezoid rule for the integral of f * g.
inline double inner_product(const Field& f, const Field& g) {
    f.check_same(g);
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * g[j];
    return s * f.grid().dx();
}

inline double integral(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().dx();
}

inline double l2_norm(const Field& f) { return std::sqrt(inner_product(f, f)); }

inline double sup_norm(const Field& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

/// L^p norm by the trapezoid rule; p = infinity gives the max norm.
inline double lp_norm(const Field& f, double p) {
    if (std::isinf(p)) return sup_norm(f);
    if (p < 1.0) throw InvalidArgument("L^p norm needs p >= 1");
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid().dx(), 1.0 / p);
}

/// <D>^s f with <xi> = (1 + xi^2)^(1/2).
inline Field bessel_potential(const Field& f, double s) {
    return apply_multiplier(f, [s](double xi) { return complex(std::pow(1.0 + xi * xi, 0.5 * s), 0.0); });
}

/// ||<D>^s f||_{L^2}
inline double sobolev_norm(const Field& f, double s) { return l2_norm(bessel_potential(f, s)); }

/// (integral |<D>^s f|^2 rho^2 dx)^(1/2) for a strictly positive weight rho.
inline double weighted_sobolev_norm(const Field& f, double s, const Field& rho) {
    f.check_same(rho);
    for (double r : rho.values()) {
        if (!(r > 0.0)) throw InvalidArgument("weight must be strictly positive");
    }
    const Field g = hadamard(bessel_potential(f, s), rho);
    return l2_norm(g);
}

/// Circular shift by an integer number of grid cells: out(x) = f(x - shift*dx).
inline Field roll(const Field& f, long shift) {
    const auto n = static_cast<long>(f.size());
    Field out(f.grid());
    for (long j = 0; j < n; ++j) out[static_cast<std::size_t>(((j + shift) % n + n) % n)] = f[static_cast<std::size_t>(j)];
    return out;
}

// ---------------------------------------------------------------------------
// Weights

enum class WeightKind { gamma0, gamma0_shifted, eta, sech };

struct WeightProfile {
    WeightKind kind;
    double epsilon;  // decay parameter of gamma0, 0 for other kinds
    Field samples;
    Field derivative;  // closed-form first derivative
};

/// integral over R of (1 + y^2)^(-(1 + eps)/2) dy = sqrt(pi) Gamma(eps/2) / Gamma((1 + eps)/2)
inline double gamma0_total_mass(double epsilon) {
    return std::sqrt(std::numbers::pi) * boost::math::tgamma(0.5 * epsilon) /
           boost::math::tgamma(0.5 * (1.0 + epsilon));
}

/// gamma0'(x) = (1 + x^2)^(-(1 + eps)/2)
inline double gamma0_prime(double x, double epsilon) {
    return std::pow(1.0 + x * x, -0.5 * (1.0 + epsilon));
}

/// gamma0(x) = 1 + integral_{-inf}^x gamma0'(y) dy, using the closed-form total
/// mass for the half line and 20-point Gauss-Legendre on [0, |x|] split into
/// unit panels.
inline double gamma0(double x, double epsilon) {
    using boost::math::quadrature::gauss;
    const double ax = std::abs(x);
    auto f = [epsilon](double y) { return gamma0_prime(y, epsilon); };
    double partial = 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil(ax)));
    const double h = ax / panels;
    for (int i = 0; i < panels; ++i) partial += gauss<double, 20>::integrate(f, i * h, (i + 1) * h);
    const double half = 0.5 * gamma0_total_mass(epsilon);
    return 1.0 + half + (x >= 0.0 ? partial : -partial);
}

/// gamma0(x - shift) and its derivative on the grid.  The weight is not
/// periodized: it is evaluated at the raw coordinates x_j - shift.
inline WeightProfile gamma_weight(const GridSpec& grid, double epsilon, double shift = 0.0) {
    if (!(epsilon > 0.0) || epsilon > 1.0) throw InvalidArgument("gamma0 needs 0 < epsilon <= 1");
    Field g(grid), dg(grid);
    for (std::size_t j = 0; j < grid.n(); ++j) {
        const double x = grid.x(j) - shift;
        g[j] = gamma0(x, epsilon);
        dg[j] = gamma0_prime(x, epsilon);
    }
    return {shift == 0.0 ? WeightKind::gamma0 : WeightKind::gamma0_shifted, epsilon, std::move(g), std::move(dg)};
}

/// Virial weight eta(x - y) = (5/3) tanh(3(x - y)/2).
inline WeightProfile eta_weight(const GridSpec& grid, double y = 0.0) {
    Field e = sample(grid, [y](double x) { return 5.0 / 3.0 * std::tanh(1.5 * (x - y)); });
    Field de = sample(grid, [y](double x) {
        const double s = 1.0 / std::cosh(1.5 * (x - y));
        return 2.5 * s * s;
    });
    return {WeightKind::eta, 0.0, std::move(e), std::move(de)};
}

/// sech(a (x - y)).
inline WeightProfile sech_weight(const GridSpec& grid, double a = 1.5, double y = 0.0) {
    Field s = sample(grid, [a, y](double x) { return 1.0 / std::cosh(a * (x - y)); });
    Field ds = sample(grid, [a, y](double x) {
        const double z = a * (x - y);
        return -a * std::tanh(z) / std::cosh(z);
    });
    return {WeightKind::sech, 0.0, std::move(s), std::move(ds)};
}

}  // namespace gkdv
