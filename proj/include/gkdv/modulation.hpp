#pragma once

/// Modulation decomposition psi = Q_{c,y} + w with <w, Q_{c,y}> = <w, Q'_{c,y}> = 0
/// and the coupled evolution
///
///     w_t = -(w_xx + 4Q^3 w + 6Q^2 w^2 + 4Q w^3 + w^4)_x - (cdot/c) Qtilde + (ydot - c^2) Q'
///     cdot/c <Q, Qtilde> = <w, Q>
///     (ydot - c^2) <Q', Q'> = -kappa <w, Q'>
///
/// which reproduces psi_t + (psi_xx + psi^4)_x = 0 for psi = Q_{c,y} + w.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gkdv/errors.hpp"
#include "gkdv/etdrk4.hpp"
#include "gkdv/flows.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {

struct ModulationState {
    double t = 0.0;
    double c = 1.0;
    double y = 0.0;
    Field w;
    double kappa = 10.0;
    double ip_q = 0.0;   // <w, Q_{c,y}>
    double ip_dq = 0.0;  // <w, Q'_{c,y}>
    double cdot = 0.0;
    double ydot_minus_c2 = 0.0;
    double mass = 0.0;    // of Q_{c,y} + w
    double energy = 0.0;  // of Q_{c,y} + w

    explicit ModulationState(Field remainder) : w(std::move(remainder)) {}

    SolitonParams params() const { return {c, y, 4}; }
    Field psi() const { return profile(params(), w.grid()) + w; }

    /// Refreshes the inner products, the ODE right-hand sides and the
    /// conserved quantities from (c, y, w).
    void refresh() {
        const auto& g = w.grid();
        const SolitonParams p = params();
        const Field q = profile(p, g);
        const Field dq = profile_dx(p, g);
        const Field qt = tilde_profile(p, g);
        ip_q = inner_product(w, q);
        ip_dq = inner_product(w, dq);
        cdot = c * ip_q / inner_product(q, qt);
        ydot_minus_c2 = -kappa * ip_dq / inner_product(dq, dq);
        const Field full = q + w;
        mass = gkdv::mass(full);
        energy = gkdv::energy(full);
    }
};

struct DecomposeOptions {
    double tol = 1e-12;          // on both residuals, relative to ||psi||
    int max_iterations = 50;
    int max_halvings = 8;
    double max_remainder = 0.5;  // accept only ||w|| <= max_remainder * ||psi||
    double kappa = 10.0;
};

namespace detail {

struct OrthogonalityResidual {
    std::array<double, 2> f;
    std::array<double, 4> jac;  // row-major d(f1, f2)/d(c, y)
};

inline OrthogonalityResidual orthogonality_residual(const Field& psi, double c, double y) {
    const auto& g = psi.grid();
    const SolitonParams p{c, y, 4};
    const Field q = profile(p, g);
    const Field dq = profile_dx(p, g);
    const Field d2q = profile_dxx(p, g);
    const Field qt = tilde_profile(p, g);
    const Field qtx = tilde_profile_dx(p, g);
    const Field w = psi - q;
    OrthogonalityResidual r{};
    r.f = {inner_product(w, q), inner_product(w, dq)};
    // d/dc Q = Qtilde / c, d/dy Q = -Q', d/dc Q' = Qtilde' / c, d/dy Q' = -Q''
    r.jac[0] = (inner_product(psi, qt) - 2.0 * inner_product(q, qt)) / c;
    r.jac[1] = -inner_product(psi, dq) + 2.0 * inner_product(q, dq);
    r.jac[2] = (inner_product(psi, qtx) - inner_product(q, qtx) - inner_product(dq, qt)) / c;
    r.jac[3] = -inner_product(psi, d2q) + inner_product(q, d2q) + inner_product(dq, dq);
    return r;
}

}  // namespace detail

/// Default starting point: c from mass matching, y at the argmax of psi.
inline SolitonParams decompose_guess(const Field& psi) {
    const double ratio = mass(psi) / mass_formula();
    std::size_t jmax = 0;
    for (std::size_t j = 1; j < psi.size(); ++j) {
        if (psi[j] > psi[jmax]) jmax = j;
    }
    return {ratio * ratio * ratio, psi.grid().x(jmax), 4};
}

/// Newton iteration for (c, y) with <psi - Q_{c,y}, Q_{c,y}> = <psi - Q_{c,y}, Q'_{c,y}> = 0.
inline ModulationState decompose(const Field& psi, std::optional<SolitonParams> guess = {},
                                 const DecomposeOptions& opts = {}) {
    const SolitonParams start = guess ? *guess : decompose_guess(psi);
    double c = start.c, y = start.y;
    if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(y)) throw NoConvergence("invalid starting point", NAN);
    const double scale = std::max(l2_norm(psi), 1e-300);
    auto norm = [](const std::array<double, 2>& f) { return std::hypot(f[0], f[1]); };
    auto r = detail::orthogonality_residual(psi, c, y);
    bool converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (std::abs(r.f[0]) <= opts.tol * scale && std::abs(r.f[1]) <= opts.tol * scale) {
            converged = true;
            break;
        }
        const double det = r.jac[0] * r.jac[3] - r.jac[1] * r.jac[2];
        if (!(std::abs(det) > 0.0) || !std::isfinite(det)) throw NoConvergence("singular decomposition Jacobian", norm(r.f));
        const double dc = -(r.jac[3] * r.f[0] - r.jac[1] * r.f[1]) / det;
        const double dy = -(-r.jac[2] * r.f[0] + r.jac[0] * r.f[1]) / det;
        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
            const double cn = c + step * dc, yn = y + step * dy;
            if (!(cn > 0.0)) continue;
            auto rn = detail::orthogonality_residual(psi, cn, yn);
            if (norm(rn.f) < norm(r.f) || h == opts.max_halvings) {
                c = cn;
                y = yn;
                r = rn;
                accepted = true;
                break;
            }
        }
        if (!accepted) throw NoConvergence("decomposition drove the scale c to a nonpositive value", norm(r.f));
    }
    if (!converged) {
        if (std::abs(r.f[0]) <= opts.tol * scale && std::abs(r.f[1]) <= opts.tol * scale) {
            converged = true;
        } else {
            throw NoConvergence("decomposition did not converge", norm(r.f) / scale);
        }
    }
    ModulationState s(psi - profile({c, y, 4}, psi.grid()));
    s.c = c;
    s.y = y;
    s.kappa = opts.kappa;
    if (l2_norm(s.w) > opts.max_remainder * scale) {
        throw NoConvergence("field is too far from the soliton manifold", l2_norm(s.w) / scale);
    }
    s.refresh();
    return s;
}

struct CoupledOptions {
    std::size_t stride = 1;
    SpongeOptions sponge{};
    double max_scale_deviation = 0.5;  // abort when |c - c(0)| exceeds this
    double max_speed_deviation = 0.5;  // abort when |ydot - c^2| exceeds this
};

struct CoupledRun {
    GridSpec grid;
    double dt = 0.0;
    double kappa = 10.0;
    bool sponge = false;
    std::vector<ModulationState> states;

    Trajectory remainder_trajectory() const {
        TrajectoryMeta meta{"coupled", "etdrk4", dt, 1, sponge, false, {}, 0.0, {}};
        Trajectory out(grid, meta);
        for (const auto& s : states) out.push(s.t, s.w, {s.mass, s.energy});
        return out;
    }
};

/// Integrates (w, c, y) with ETDRK4; the two ODEs share the stages of the
/// w-equation.
inline CoupledRun coupled_evolve(const ModulationState& s0, double T, double dt, const CoupledOptions& opts = {}) {
    const auto& g = s0.w.grid();
    if (!(s0.kappa >= 1.0)) throw InvalidArgument("kappa must be at least 1");
    if (!(s0.c > 0.0)) throw InvalidArgument("soliton scale must be positive");
    const std::size_t steps = detail::step_count(T, dt);
    const double h = T / static_cast<double>(steps);
    const std::size_t n = g.n();
    constexpr std::size_t pad = GkdvStepper::kPad;
    const GridSpec fine(n * pad, g.length());
    const double kappa = s0.kappa;
    const double c_start = s0.c;

    Etdrk4 stepper(detail::symbol(g, [](double xi) { return complex(0.0, xi * xi * xi); }), h);
    EtdRhs rhs = [&](double, const EtdState& st, EtdState& out) {
        const SolitonParams p{st.aux[0], st.aux[1], 4};
        if (!(p.c > 0.0) || !std::isfinite(p.c)) {
            std::fill(out.spec.begin(), out.spec.end(), complex(NAN, NAN));
            out.aux = {NAN, NAN};
            return;
        }
        const Field w = detail::to_field(g, st.spec);
        const Field q = profile(p, g);
        const Field dq = profile_dx(p, g);
        const Field qt = tilde_profile(p, g);
        const double cdot = p.c * inner_product(w, q) / inner_product(q, qt);
        const double yrel = -kappa * inner_product(w, dq) / inner_product(dq, dq);

        auto wf = detail::pad_values(st.spec, n, pad);
        for (std::size_t j = 0; j < wf.size(); ++j) {
            const double qv = soliton::at(p, fine.x(j)).q;
            const double wv = wf[j];
            wf[j] = wv * (4.0 * qv * qv * qv + wv * (6.0 * qv * qv + wv * (4.0 * qv + wv)));
        }
        const auto nl = detail::unpad_spectrum(wf, n, pad);
        Field modal = (-cdot / p.c) * qt;
        modal.axpy(yrel, dq);
        const auto mh = detail::half_spectrum(modal);
        for (std::size_t k = 0; k + 1 < nl.size(); ++k) out.spec[k] = complex(0.0, -g.wavenumber(k)) * nl[k] + mh[k];
        out.spec.back() = 0.0;
        out.aux[0] = cdot;
        out.aux[1] = p.c * p.c + yrel;
    };

    std::optional<detail::Sponge> sponge;
    if (opts.sponge.enabled) sponge.emplace(g, opts.sponge, h);

    CoupledRun run{g, h, kappa, opts.sponge.enabled, {}};
    EtdState s{detail::half_spectrum(s0.w), {s0.c, s0.y}};
    std::function<void(double, EtdState&)> post;
    if (sponge) post = [&](double, EtdState& st) { sponge->apply(st.spec); };
    detail::march(g, s, s0.t, h, steps, opts.stride, stepper, rhs, post,
                  [&](std::size_t, double t, const EtdState& st) {
                      ModulationState m(detail::to_field(g, st.spec));
                      m.t = t;
                      m.c = st.aux[0];
                      m.y = st.aux[1];
                      m.kappa = kappa;
                      if (!(m.c > 0.0)) throw NumericAbort("soliton scale became nonpositive", t);
                      m.refresh();
                      if (std::abs(m.c - c_start) > opts.max_scale_deviation ||
                          std::abs(m.ydot_minus_c2) > opts.max_speed_deviation) {
                          throw NumericAbort("modulation parameters left the small-deviation regime", t);
                      }
                      run.states.push_back(std::move(m));
                  });
    return run;
}

/// Defects of the exact evolution laws of the modal inner products
///   d/dt<w,Q> + <w,Q> = kappa <w,Q'>^2/<Q',Q'> + <w,Q><w,Qtilde>/<Q,Qtilde> + <N,Q'>
///   d/dt<w,Q'> + kappa <w,Q'> + <w, L Q''> =
///        kappa <w,Q'><w,Q''>/<Q',Q'> + <w,Q><w,Qtilde'>/<Q,Qtilde> + <N,Q''>
/// with N = 6Q^2 w^2 + 4Q w^3 + w^4, time derivatives by fourth-order central
/// differences of the logged values.
struct InnerProductDynamicsReport {
    double defect_q = 0.0;        // max |lhs - rhs| of the first law
    double defect_dq = 0.0;       // of the second
    double scale_q = 0.0;         // max over time of the largest term magnitude
    double scale_dq = 0.0;
    double relative_q = 0.0;      // defect / scale (0 when the scale vanishes)
    double relative_dq = 0.0;
    std::size_t samples = 0;
};

inline InnerProductDynamicsReport inner_product_dynamics_check(const CoupledRun& run) {
    InnerProductDynamicsReport rep;
    const auto& st = run.states;
    if (st.size() < 5) throw InvalidArgument("inner-product dynamics check needs at least 5 logged states");
    for (std::size_t i = 1; i < st.size(); ++i) {
        const double h0 = st[1].t - st[0].t;
        if (std::abs((st[i].t - st[i - 1].t) - h0) > 1e-9 * h0) {
            throw InvalidArgument("inner-product dynamics check needs uniformly logged states");
        }
    }
    const double h = st[1].t - st[0].t;
    const auto& g = run.grid;
    for (std::size_t i = 2; i + 2 < st.size(); ++i) {
        const auto& s = st[i];
        const SolitonFrame fr(s.params(), g);
        const double dqdq = inner_product(fr.dq, fr.dq);
        const double qqt = inner_product(fr.q, fr.tilde);
        Field nl(g);
        for (std::size_t j = 0; j < g.n(); ++j) {
            const double q = fr.q[j], w = s.w[j];
            nl[j] = w * w * (6.0 * q * q + w * (4.0 * q + w));
        }
        const double a = s.ip_q, b = s.ip_dq;
        const double da = (st[i - 2].ip_q - 8.0 * st[i - 1].ip_q + 8.0 * st[i + 1].ip_q - st[i + 2].ip_q) / (12.0 * h);
        const double db = (st[i - 2].ip_dq - 8.0 * st[i - 1].ip_dq + 8.0 * st[i + 1].ip_dq - st[i + 2].ip_dq) / (12.0 * h);
        const double k = run.kappa;

        const std::array<double, 5> t1{da, a, k * b * b / dqdq, a * inner_product(s.w, fr.tilde) / qqt,
                                       inner_product(nl, fr.dq)};
        const double d1 = t1[0] + t1[1] - t1[2] - t1[3] - t1[4];
        const double wlq = inner_product(s.w, fr.l_d2q);
        const std::array<double, 6> t2{db, k * b, wlq, k * b * inner_product(s.w, fr.d2q) / dqdq,
                                       a * inner_product(s.w, fr.tilde_dx) / qqt, inner_product(nl, fr.d2q)};
        const double d2 = t2[0] + t2[1] + t2[2] - t2[3] - t2[4] - t2[5];
        rep.defect_q = std::max(rep.defect_q, std::abs(d1));
        rep.defect_dq = std::max(rep.defect_dq, std::abs(d2));
        for (double v : t1) rep.scale_q = std::max(rep.scale_q, std::abs(v));
        for (double v : t2) rep.scale_dq = std::max(rep.scale_dq, std::abs(v));
        ++rep.samples;
    }
    rep.relative_q = rep.scale_q > 0.0 ? rep.defect_q / rep.scale_q : 0.0;
    rep.relative_dq = rep.scale_dq > 0.0 ? rep.defect_dq / rep.scale_dq : 0.0;
    return rep;
}

/// Mean exponential decay rate of <w, Q'> over a run:
/// -log(|<w(T),Q'>| / |<w(0),Q'>|) / T.
inline double qprime_decay_rate(const CoupledRun& run) {
    const auto& a = run.states.front();
    const auto& b = run.states.back();
    if (a.ip_dq == 0.0 || b.ip_dq == 0.0) throw InvalidArgument("decay rate needs a nonzero <w, Q'>");
    return -std::log(std::abs(b.ip_dq / a.ip_dq)) / (b.t - a.t);
}

}  // namespace gkdv
