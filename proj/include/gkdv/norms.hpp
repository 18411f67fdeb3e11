#pragma once

/// Littlewood-Paley bands, Besov norms, weighted local smoothing, Strichartz
/// norms, the discrete p-variation of a sampled path, the J functional and the
/// computable X^s surrogate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gkdv/errors.hpp"
#include "gkdv/flows.hpp"
#include "gkdv/grid.hpp"

namespace gkdv {

/// Smooth dyadic partition of unity on the resolved frequencies of a grid.
///
/// phi(r) = 1 for r <= 1, 0 for r >= base, with a C-infinity transition in
/// log r.  Band lambda = base^k has multiplier phi(|xi|/lambda) -
/// phi(|xi| base/lambda), supported in [lambda/base, lambda*base].  The band
/// set holds every base^k whose support meets (0, nyquist), so the bands sum
/// to one on every nonzero resolved frequency.  The inhomogeneous variant
/// replaces all bands with lambda < base by one low band labelled 1 with
/// multiplier phi(|xi|), which also covers xi = 0.
class DyadicDecomposition {
public:
    DyadicDecomposition(const GridSpec& grid, double base = 2.0, bool homogeneous = true)
        : grid_(grid), base_(base), homogeneous_(homogeneous) {
        if (!(base > 1.0) || !std::isfinite(base)) throw InvalidArgument("dyadic base must exceed 1");
        const double lo = grid.wavenumber(1);
        const double hi = grid.nyquist();
        const double lb = std::log(base);
        long k = static_cast<long>(std::floor(std::log(lo) / lb)) - 2;
        for (;; ++k) {
            const double lam = std::pow(base, static_cast<double>(k));
            if (lam / base >= hi) break;
            if (lam * base <= lo) continue;
            if (!homogeneous && k < 1) continue;
            bands_.push_back(lam);
        }
        if (!homogeneous) bands_.insert(bands_.begin(), 1.0);
    }

    const GridSpec& grid() const noexcept { return grid_; }
    double base() const noexcept { return base_; }
    bool homogeneous() const noexcept { return homogeneous_; }
    const std::vector<double>& bands() const noexcept { return bands_; }

    /// Transition function with phi(r) = 1 for r <= 1 and 0 for r >= base.
    double phi(double r) const {
        if (r <= 1.0) return 1.0;
        if (r >= base_) return 0.0;
        const double s = std::log(r) / std::log(base_);
        auto h = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
        return h(1.0 - s) / (h(1.0 - s) + h(s));
    }

    double multiplier(double lambda, double xi) const {
        const double a = std::abs(xi);
        if (!homogeneous_ && lambda == 1.0) return phi(a);
        return phi(a / lambda) - phi(a * base_ / lambda);
    }

    Field project(const Field& f, double lambda) const {
        if (!(f.grid() == grid_)) throw GridMismatch();
        if (std::find(bands_.begin(), bands_.end(), lambda) == bands_.end()) {
            throw InvalidArgument("frequency band " + std::to_string(lambda) + " is not resolved by this decomposition");
        }
        return apply_multiplier(f, [&](double xi) { return complex(multiplier(lambda, xi), 0.0); });
    }

private:
    GridSpec grid_;
    double base_;
    bool homogeneous_;
    std::vector<double> bands_;
};

inline Field lp_project(const Field& f, double lambda, const DyadicDecomposition& dec) { return dec.project(f, lambda); }

/// Per-band contributions of a norm.
struct BandValue {
    double lambda;
    double value;
};

struct NormReport {
    std::string name;
    double value = 0.0;
    std::vector<BandValue> per_band;
};

/// l^q over bands of omega(lambda) lambda^s ||f_lambda||_{L^p}.
inline NormReport besov_norm(const Field& f, double s, double p, double q, const DyadicDecomposition& dec,
                             const std::function<double(double)>& omega = {}) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw InvalidArgument("Besov indices need p, q >= 1");
    NormReport r{dec.homogeneous() ? "homogeneous_besov" : "besov", 0.0, {}};
    double acc = 0.0;
    for (double lam : dec.bands()) {
        const double w = omega ? omega(lam) : 1.0;
        const double v = w * std::pow(lam, s) * lp_norm(dec.project(f, lam), p);
        r.per_band.push_back({lam, v});
        if (std::isinf(q)) {
            acc = std::max(acc, v);
        } else {
            acc += std::pow(v, q);
        }
    }
    r.value = std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
    return r;
}

/// sup_lambda lambda^{-1/6} ||f_lambda||_{L^2}, the headline critical norm.
inline double critical_besov_norm(const Field& f, const DyadicDecomposition& dec) {
    return besov_norm(f, -1.0 / 6.0, 2.0, std::numeric_limits<double>::infinity(), dec).value;
}

namespace detail {

inline void check_path(const Trajectory& traj, const std::vector<double>& path) {
    if (path.size() != traj.size()) throw InvalidArgument("path must be sampled at the trajectory times");
}

/// Trapezoid rule in time over the stored samples.
inline double time_trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
    return s;
}

/// integral gamma0'(x - y) (u^2 + u_x^2) dx for s = 0, otherwise
/// ||<D>^{s+1} u||^2 in L^2 with weight gamma0'(x - y).
inline double local_energy_slice(const Field& u, double y, double s, double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1.0) throw InvalidArgument("gamma0 needs 0 < epsilon <= 1");
    const auto& g = u.grid();
    const Field w = sample(g, [&](double x) { return gamma0_prime(x - y, epsilon); });
    if (s == 0.0) {
        const Field ux = derivative(u, 1);
        double acc = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) acc += w[j] * (u[j] * u[j] + ux[j] * ux[j]);
        return acc * g.dx();
    }
    const Field rho = map(w, [](double v) { return std::sqrt(v); });
    const double n = weighted_sobolev_norm(u, s + 1.0, rho);
    return n * n;
}

/// u^2 + u_x^2 at every stored state.
inline std::vector<Field> energy_densities(const Trajectory& traj) {
    std::vector<Field> out;
    out.reserve(traj.size());
    for (const auto& u : traj.states()) {
        const Field ux = derivative(u, 1);
        Field e(u.grid());
        for (std::size_t j = 0; j < u.size(); ++j) e[j] = u[j] * u[j] + ux[j] * ux[j];
        out.push_back(std::move(e));
    }
    return out;
}

/// Trapezoid in t of integral gamma0'(x - y(t)) e(x, t) dx over samples idx.
inline double weighted_density_integral(const std::vector<double>& times, const std::vector<Field>& dens,
                                        const std::vector<double>& path, const std::vector<std::size_t>& idx,
                                        double epsilon) {
    std::vector<double> ts, vs;
    for (std::size_t i : idx) {
        const Field& e = dens[i];
        const auto& g = e.grid();
        double acc = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) acc += gamma0_prime(g.x(j) - path[i], epsilon) * e[j];
        ts.push_back(times[i]);
        vs.push_back(acc * g.dx());
    }
    return time_trapezoid(ts, vs);
}

}  // namespace detail

/// The space-time integral of the local energy density along y(t), before the
/// square root.
inline double local_smoothing_integral(const Trajectory& traj, const std::vector<double>& path, double s = 0.0,
                                       double epsilon = 0.1) {
    detail::check_path(traj, path);
    std::vector<double> v(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) v[i] = detail::local_energy_slice(traj.state(i), path[i], s, epsilon);
    return detail::time_trapezoid(traj.times(), v);
}

/// (integral dt integral gamma0'(x - y(t)) (u^2 + u_x^2) dx)^{1/2}
inline double local_smoothing_norm(const Trajectory& traj, const std::vector<double>& path, double s = 0.0,
                                   double epsilon = 0.1) {
    return std::sqrt(local_smoothing_integral(traj, path, s, epsilon));
}

/// Straight path y(t) = y0 + slope * t sampled at the trajectory times.
inline std::vector<double> straight_path(const Trajectory& traj, double slope, double y0 = 0.0) {
    std::vector<double> p(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) p[i] = y0 + slope * traj.time(i);
    return p;
}

inline bool strichartz_admissible(double p, double q) {
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    return std::abs(2.0 / p + inv_q - 0.5) < 1e-12;
}

/// ||u||_{L^p_t L^q_x} over the stored samples (trapezoid in t, q = inf the
/// spatial max).
inline double strichartz_norm(const Trajectory& traj, double p, double q, bool allow_inadmissible = false) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw InvalidArgument("Strichartz exponents need p, q >= 1");
    if (!allow_inadmissible && !strichartz_admissible(p, q)) {
        throw InvalidArgument("Strichartz pair is not admissible (2/p + 1/q = 1/2)");
    }
    std::vector<double> v(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) v[i] = std::pow(lp_norm(traj.state(i), q), p);
    return std::pow(detail::time_trapezoid(traj.times(), v), 1.0 / p);
}

/// Exact supremum over sub-partitions of sum d(x_{i_k}, x_{i_{k-1}})^p,
/// returned to the power 1/p.  best[j] is the largest sum over chains ending
/// at j; chains are summed left to right.
inline double p_variation_from_distance(std::size_t n, double p, const std::function<double(std::size_t, std::size_t)>& dist) {
    if (n == 0) throw InvalidArgument("p-variation of an empty series");
    if (!(p >= 1.0)) throw InvalidArgument("p-variation needs p >= 1");
    std::vector<double> best(n, 0.0);
    double top = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        double b = 0.0;
        for (std::size_t i = 0; i < j; ++i) b = std::max(b, best[i] + std::pow(dist(i, j), p));
        best[j] = b;
        top = std::max(top, b);
    }
    return std::pow(top, 1.0 / p);
}

/// Scalar series; with `endpoint` the value 0 is appended as v(infinity).
inline double p_variation(const std::vector<double>& series, double p, bool endpoint = false) {
    if (series.empty()) throw InvalidArgument("p-variation of an empty series");
    std::vector<double> x = series;
    if (endpoint) x.push_back(0.0);
    return p_variation_from_distance(x.size(), p, [&](std::size_t i, std::size_t j) { return std::abs(x[j] - x[i]); });
}

/// Field series in the L^2 metric; with `endpoint` the zero field is appended.
inline double p_variation(const std::vector<Field>& series, double p, bool endpoint = false) {
    if (series.empty()) throw InvalidArgument("p-variation of an empty series");
    std::vector<Field> x = series;
    if (endpoint) x.push_back(Field(series.front().grid()));
    const std::size_t n = x.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = l2_norm(x[j] - x[i]);
    }
    return p_variation_from_distance(n, p, [&](std::size_t i, std::size_t j) { return d[i * n + j]; });
}

struct JOptions {
    double epsilon = 0.1;
    std::size_t straight_paths = 21;
    double min_slope = 0.9;
    double max_slope = 1.1;
    bool greedy_path = true;
};

struct JBand {
    double lambda;
    double l6;           // ||v_lambda||_{L^6_{t,x}}
    double l4linf;       // lambda^{1/4 - 1/6} ||v_lambda||_{L^4_t L^inf_x}
    double smoothing;    // sup over paths of lambda^{-1/6} local energy integral
    double total;
};

struct JReport {
    double value = 0.0;
    std::vector<JBand> per_band;
};

namespace detail {

/// Path with y(t0) = 0 at the trajectory start that follows the running
/// argmax of a band's local energy, with slope clipped to [smin, smax].
inline std::vector<double> greedy_path(const Trajectory& band, double smin, double smax) {
    std::vector<double> y(band.size(), 0.0);
    for (std::size_t i = 1; i < band.size(); ++i) {
        const Field& u = band.state(i);
        const Field ux = derivative(u, 1);
        std::size_t jmax = 0;
        double emax = -1.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            const double e = u[j] * u[j] + ux[j] * ux[j];
            if (e > emax) {
                emax = e;
                jmax = j;
            }
        }
        const double dt = band.time(i) - band.time(i - 1);
        y[i] = std::clamp(band.grid().x(jmax), y[i - 1] + smin * dt, y[i - 1] + smax * dt);
    }
    return y;
}

}  // namespace detail

/// J over [t_begin, t_end] (paths start at y = 0 at the first stored time,
/// as in the admissible class {y(0) = 0, |ydot - 1| <= 1/10}).
inline JReport J_functional(const Trajectory& traj, const DyadicDecomposition& dec, double t_begin, double t_end,
                            const JOptions& opts = {}) {
    if (traj.size() < 2) throw InvalidArgument("J needs at least two stored states");
    JReport rep;
    const double t0 = traj.time(0);
    for (double lam : dec.bands()) {
        TrajectoryMeta meta = traj.meta();
        Trajectory band(traj.grid(), meta);
        for (std::size_t i = 0; i < traj.size(); ++i) band.push(traj.time(i), dec.project(traj.state(i), lam), {0.0, 0.0});

        std::vector<std::vector<double>> paths;
        for (std::size_t k = 0; k < opts.straight_paths; ++k) {
            const double s = opts.straight_paths == 1
                                 ? 0.5 * (opts.min_slope + opts.max_slope)
                                 : opts.min_slope + (opts.max_slope - opts.min_slope) * static_cast<double>(k) /
                                                        static_cast<double>(opts.straight_paths - 1);
            std::vector<double> p(band.size());
            for (std::size_t i = 0; i < band.size(); ++i) p[i] = s * (band.time(i) - t0);
            paths.push_back(std::move(p));
        }
        if (opts.greedy_path) paths.push_back(detail::greedy_path(band, opts.min_slope, opts.max_slope));

        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < band.size(); ++i) {
            if (band.time(i) >= t_begin && band.time(i) <= t_end) idx.push_back(i);
        }
        JBand b{lam, 0.0, 0.0, 0.0, 0.0};
        if (idx.size() >= 2) {
            const Trajectory win = band.window(t_begin, t_end);
            b.l6 = strichartz_norm(win, 6.0, 6.0);
            b.l4linf = std::pow(lam, 1.0 / 4.0 - 1.0 / 6.0) *
                       strichartz_norm(win, 4.0, std::numeric_limits<double>::infinity());
            const auto dens = detail::energy_densities(band);
            for (const auto& p : paths) {
                b.smoothing = std::max(b.smoothing, std::pow(lam, -1.0 / 6.0) * detail::weighted_density_integral(
                                                                                     band.times(), dens, p, idx, opts.epsilon));
            }
        }
        b.total = b.l6 + b.l4linf + b.smoothing;
        rep.value = std::max(rep.value, b.total);
        rep.per_band.push_back(b);
    }
    return rep;
}

/// sup_lambda lambda^s (||u_lambda||_{L^inf L^2} + local smoothing of
/// u_lambda along the path + 2-variation of the Airy pullback of u_lambda).
/// A computable stand-in for the X^s norm, labelled as such in outputs.
inline NormReport xs_surrogate(const Trajectory& traj, double s, const DyadicDecomposition& dec,
                               const std::vector<double>& path, double epsilon = 0.1) {
    detail::check_path(traj, path);
    NormReport r{"X^s surrogate", 0.0, {}};
    for (double lam : dec.bands()) {
        Trajectory band(traj.grid(), traj.meta());
        std::vector<Field> pulled;
        double linf = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            Field u = dec.project(traj.state(i), lam);
            linf = std::max(linf, l2_norm(u));
            pulled.push_back(airy_propagate(u, -traj.time(i)));
            band.push(traj.time(i), std::move(u), {0.0, 0.0});
        }
        const double v = std::pow(lam, s) * (linf + local_smoothing_norm(band, path, 0.0, epsilon) + p_variation(pulled, 2.0));
        r.per_band.push_back({lam, v});
        r.value = std::max(r.value, v);
    }
    return r;
}

}  // namespace gkdv
