#pragma once

/// Forward extraction of the free wave carried by the remainder w(t) of a
/// modulated run, and the backward construction of a solution that scatters
/// to a prescribed free wave plus a soliton.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gkdv/errors.hpp"
#include "gkdv/flows.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/norms.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {

struct ResidualSample {
    double t;
    double l2;      // ||w(t) - airy(z0, t)||_{L^2}
    double besov;   // same difference in the critical Besov norm
};

struct ScatterReport {
    Field z0;
    std::vector<ResidualSample> residual_curve;
    bool converged = false;
    std::string norm_used = "critical Besov B^{-1/6,2}_inf";
    double window_begin = 0.0;
    double window_end = 0.0;
    std::size_t window_samples = 0;

    explicit ScatterReport(Field z) : z0(std::move(z)) {}

    /// Residual in the critical norm at the stored time closest to t.
    double residual_at(double t) const {
        if (residual_curve.empty()) throw InvalidArgument("empty residual curve");
        auto best = residual_curve.front();
        for (const auto& r : residual_curve) {
            if (std::abs(r.t - t) < std::abs(best.t - t)) best = r;
        }
        return best.besov;
    }
};

/// z0 is the mean over the final `window` fraction of the run of the Airy
/// pullbacks airy(w(t), -t).  Converged when the final residual is below a
/// tenth of the initial one.
inline ScatterReport forward_scatter(const Trajectory& w, const DyadicDecomposition& dec, double window = 0.25) {
    if (!(window > 0.0) || window > 1.0) throw InvalidArgument("window fraction must be in (0, 1]");
    if (w.size() < 2) throw InvalidArgument("forward scattering needs a trajectory");
    const double t0 = w.time(0), t1 = w.time(w.size() - 1);
    const double tb = t1 - window * (t1 - t0);
    Field z(w.grid());
    std::size_t count = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w.time(i) >= tb - 1e-12) {
            z += airy_propagate(w.state(i), -w.time(i));
            ++count;
        }
    }
    if (count < 10) throw InvalidArgument("scattering window holds fewer than 10 snapshots");
    z *= 1.0 / static_cast<double>(count);
    ScatterReport rep(z);
    rep.window_begin = tb;
    rep.window_end = t1;
    rep.window_samples = count;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Field d = w.state(i) - airy_propagate(z, w.time(i));
        rep.residual_curve.push_back({w.time(i), l2_norm(d), critical_besov_norm(d, dec)});
    }
    rep.converged = rep.residual_curve.back().besov < 0.1 * rep.residual_curve.front().besov;
    return rep;
}

inline ScatterReport forward_scatter(const CoupledRun& run, const DyadicDecomposition& dec, double window = 0.25) {
    return forward_scatter(run.remainder_trajectory(), dec, window);
}

struct InverseWaveOptions {
    double tol = 1e-6;                 // on |y(0) - y0|
    int max_iterations = 40;
    double smallness_threshold = 0.1;  // on the critical Besov norm of v0
};

struct ShootSample {
    double y_terminal;
    double y_initial;
};

struct InverseWaveResult {
    Field psi0;
    double y_terminal = 0.0;   // y^S
    double y_initial = 0.0;    // y(0) of the decomposition of psi0
    double c_initial = 0.0;
    double data_norm = 0.0;    // critical Besov norm of v0
    double mass_defect = 0.0;  // |(||v0||^2 + ||Q_c||^2) - ||psi0||^2| / ||psi0||^2
    bool monotone = true;      // y(0) monotone in y^S over the sampled shots
    std::vector<ShootSample> history;

    explicit InverseWaveResult(Field p) : psi0(std::move(p)) {}
};

/// Backward solve from Psi(S) = airy(v0, S) + Q_{c_inf, y^S} to t = 0.
inline Field backward_from_terminal(const Field& v0, double c_inf, double y_terminal, double S, double dt) {
    const std::size_t steps = detail::step_count(S, dt);
    const double h = S / static_cast<double>(steps);
    const Field terminal = airy_propagate(v0, S) + profile({c_inf, y_terminal, 4}, v0.grid());
    GkdvStepper stepper(v0.grid(), -h);
    return stepper.advance(terminal, S, steps);
}

/// Shoots over the terminal center y^S until the decomposition of Psi(0) is
/// centered at y0.  A bracket around the root is found first; the root is
/// then refined by the Illinois variant of regula falsi, which never leaves
/// the bracket.
inline InverseWaveResult inverse_wave(const Field& v0, double c_inf, double y0, double S, double dt,
                                      const InverseWaveOptions& opts = {}) {
    const SolitonParams check{c_inf, y0, 4};
    check.validate();
    const DyadicDecomposition dec(v0.grid());
    const double small = critical_besov_norm(v0, dec);
    if (small > opts.smallness_threshold) {
        throw InvalidArgument("scattering datum is not small in the critical Besov norm (" + std::to_string(small) + ")");
    }
    std::vector<ShootSample> hist;
    Field last(v0.grid());
    ModulationState last_state(Field(v0.grid()));
    double last_ys = 0.0;
    auto shoot = [&](double ys) {
        Field psi = backward_from_terminal(v0, c_inf, ys, S, dt);
        DecomposeOptions dopt;
        dopt.tol = 1e-11;
        auto st = decompose(psi, SolitonParams{c_inf, ys - c_inf * c_inf * S, 4}, dopt);
        hist.push_back({ys, st.y});
        last = psi;
        last_state = st;
        last_ys = ys;
        return st.y - y0;
    };
    auto finish = [&]() {
        InverseWaveResult r(last);
        r.y_terminal = last_ys;
        r.y_initial = last_state.y;
        r.c_initial = last_state.c;
        r.data_norm = small;
        const double m = mass(last);
        r.mass_defect = std::abs(mass(v0) + mass(profile({c_inf, 0.0, 4}, v0.grid())) - m) / m;
        r.history = hist;
        auto sorted = hist;
        std::sort(sorted.begin(), sorted.end(),
                  [](const ShootSample& l, const ShootSample& rr) { return l.y_terminal < rr.y_terminal; });
        for (std::size_t i = 2; i < sorted.size(); ++i) {
            const double d1 = sorted[i - 1].y_initial - sorted[i - 2].y_initial;
            const double d2 = sorted[i].y_initial - sorted[i - 1].y_initial;
            if (d1 * d2 < 0.0) r.monotone = false;
        }
        return r;
    };

    double a = y0 + c_inf * c_inf * S;
    double fa = shoot(a);
    if (std::abs(fa) <= opts.tol) return finish();
    const double step = std::max(2.0 * std::abs(fa), 10.0 * opts.tol);
    double b = a, fb = fa;
    for (int k = 0; fa * fb > 0.0; ++k) {
        if (k >= 8) {
            throw NoConvergence("could not bracket the terminal center; y(0) - y0 stayed at sign of " +
                                    std::to_string(fa),
                                std::abs(fa));
        }
        const double d = step * std::ldexp(1.0, k);
        b = a - (fa > 0.0 ? d : -d);
        fb = shoot(b);
        if (fa * fb > 0.0 && std::abs(fb) > std::abs(fa)) {
            b = a + (fa > 0.0 ? d : -d);
            fb = shoot(b);
        }
    }
    if (std::abs(fb) <= opts.tol) return finish();
    int side = 0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const double c = (a * fb - b * fa) / (fb - fa);
        const double fc = shoot(c);
        if (std::abs(fc) <= opts.tol) return finish();
        if (fc * fb < 0.0) {
            a = b;
            fa = fb;
            side = 0;
        } else {
            if (side == -1) fa *= 0.5;
            side = -1;
        }
        b = c;
        fb = fc;
        if (std::abs(b - a) < 1e-14) break;
    }
    throw NoConvergence("terminal-center shooting did not converge", std::abs(fb));
}

struct CauchyReport {
    std::vector<double> horizons;
    std::vector<double> successive_l2;  // ||psi0(S_{k+1}) - psi0(S_k)|| / ||psi0(S_k)||
    std::vector<InverseWaveResult> results;
};

/// Repeats the construction over increasing horizons S and reports how far
/// successive Psi(0) move apart.
inline CauchyReport inverse_wave_cauchy(const Field& v0, double c_inf, double y0, const std::vector<double>& horizons,
                                        double dt, const InverseWaveOptions& opts = {}) {
    if (horizons.size() < 2) throw InvalidArgument("Cauchy check needs at least two horizons");
    if (!std::is_sorted(horizons.begin(), horizons.end())) throw InvalidArgument("horizons must increase");
    CauchyReport rep;
    rep.horizons = horizons;
    for (double S : horizons) {
        rep.results.push_back(inverse_wave(v0, c_inf, y0, S, dt, opts));
        if (rep.results.size() > 1) {
            const Field& a = rep.results[rep.results.size() - 2].psi0;
            const Field& b = rep.results.back().psi0;
            rep.successive_l2.push_back(l2_norm(b - a) / l2_norm(a));
        }
    }
    return rep;
}

}  // namespace gkdv
