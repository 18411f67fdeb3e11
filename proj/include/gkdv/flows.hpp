#pragma once

/// Time evolution on the periodic grid: the exact Airy group, quartic gKdV
///
///     psi_t + (psi_xx + psi^4)_x = 0,
///
/// and the two linearized flows around a soliton.  Default conventions:
///
///     u-flow   u_t = -d_x L u          (Qtilde + 2t Q' and Q' are solutions)
///     v-flow   v_t = -L d_x v          (Q is stationary)
///
/// with L = -d_x^2 + c^2 - 4 Q^3 frozen at (c, y).  A time-reversal flag flips
/// both.  The forced flows live in the lab frame around a moving soliton
/// Q_{c(t), y(t)} and add alpha, beta multiples of the modal directions that
/// keep the solution orthogonal to them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gkdv/errors.hpp"
#include "gkdv/etdrk4.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/linearized.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {

/// Carries the last finite state of an aborted evolution.
class FlowAbort : public NumericAbort {
public:
    FlowAbort(const std::string& what, double last_time, Field last_state)
        : NumericAbort(what, last_time), last_state_(std::move(last_state)) {}
    const Field& last_state() const noexcept { return last_state_; }

private:
    Field last_state_;
};

struct ConservedSample {
    double mass;    // integral f^2
    double energy;  // E(f) for gKdV, <L f, f>/2 for the linear flows
};

/// Coefficients of the modal forcing alpha * (Qtilde or Q) + beta * Q'.
struct ModalForcing {
    enum class Source { u_problem, v_problem };
    double alpha = 0.0;
    double beta = 0.0;
    Source source = Source::u_problem;
};

struct SpongeOptions {
    bool enabled = false;
    double fraction = 0.1;  // width of each absorbing layer as a fraction of L
    double strength = 2.0;  // peak damping rate
};

struct EvolveOptions {
    std::size_t stride = 1;  // store every stride-th step (first and last always stored)
    SpongeOptions sponge{};
    bool time_reversed = false;  // linear unforced flows only
    double t0 = 0.0;
};

struct TrajectoryMeta {
    std::string flow;
    std::string integrator = "etdrk4";
    double dt = 0.0;
    std::size_t stride = 1;
    bool sponge = false;
    bool time_reversed = false;
    SolitonParams frame{};
    double max_orthogonality = 0.0;  // forced flows: largest modal inner product seen
    std::vector<std::string> warnings;
};

/// Time-stamped states on one grid with a conserved-quantity log.
class Trajectory {
public:
    explicit Trajectory(const GridSpec& grid, TrajectoryMeta meta = {}) : grid_(grid), meta_(std::move(meta)) {}

    void push(double t, Field state, ConservedSample conserved, std::optional<ModalForcing> forcing = {}) {
        if (!(state.grid() == grid_)) throw GridMismatch();
        if (!times_.empty() && !(t > times_.back())) throw InvalidArgument("trajectory times must increase");
        times_.push_back(t);
        states_.push_back(std::move(state));
        conserved_.push_back(conserved);
        if (forcing) forcing_.push_back(*forcing);
    }

    /// Concatenates a trajectory whose first time lies after this one's last.
    void append(const Trajectory& later) {
        for (std::size_t i = 0; i < later.size(); ++i) push(later.times_[i], later.states_[i], later.conserved_[i]);
    }

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }
    double time(std::size_t i) const { return times_.at(i); }
    const Field& state(std::size_t i) const { return states_.at(i); }
    const Field& back() const { return states_.back(); }
    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<Field>& states() const noexcept { return states_; }
    const std::vector<ConservedSample>& conserved() const noexcept { return conserved_; }
    const std::vector<ModalForcing>& forcing() const noexcept { return forcing_; }
    const TrajectoryMeta& meta() const noexcept { return meta_; }
    TrajectoryMeta& meta() noexcept { return meta_; }

    /// States with time in [t_begin, t_end].
    Trajectory window(double t_begin, double t_end) const {
        Trajectory out(grid_, meta_);
        for (std::size_t i = 0; i < size(); ++i) {
            if (times_[i] >= t_begin && times_[i] <= t_end) out.push(times_[i], states_[i], conserved_[i]);
        }
        return out;
    }

private:
    GridSpec grid_;
    TrajectoryMeta meta_;
    std::vector<double> times_;
    std::vector<Field> states_;
    std::vector<ConservedSample> conserved_;
    std::vector<ModalForcing> forcing_;
};

/// A soliton path (c(t), y(t)) with its time derivatives.
struct ModulationPath {
    std::function<double(double)> c, cdot, y, ydot;

    /// c constant, y = y0 + c^2 t.
    static ModulationPath steady(const SolitonParams& p) {
        const double c = p.c, y0 = p.y;
        return {[c](double) { return c; }, [](double) { return 0.0; }, [c, y0](double t) { return y0 + c * c * t; },
                [c](double) { return c * c; }};
    }

    SolitonParams at(double t) const { return {c(t), y(t), 4}; }
};

// ---------------------------------------------------------------------------
// Scalar functionals

inline double mass(const Field& f) { return inner_product(f, f); }

/// E(psi) = integral psi_x^2/2 - psi^5/5
inline double energy(const Field& psi) {
    const Field d = derivative(psi, 1);
    double s = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double p = psi[j];
        s += 0.5 * d[j] * d[j] - 0.2 * p * p * p * p * p;
    }
    return s * psi.grid().dx();
}

// ---------------------------------------------------------------------------
// Spectral helpers

namespace detail {

inline std::vector<complex> half_spectrum(const Field& f) {
    auto h = rfft(f);
    h.back() = 0.0;
    return h;
}

inline Field to_field(const GridSpec& g, const std::vector<complex>& half) { return irfft(g, half); }

/// Samples of the trigonometric interpolant on a grid `factor` times finer.
inline std::vector<double> pad_values(const std::vector<complex>& half, std::size_t n, std::size_t factor) {
    const std::size_t m = n * factor;
    std::vector<complex> big(m / 2 + 1, complex(0.0, 0.0));
    for (std::size_t k = 0; k < n / 2; ++k) big[k] = half[k] * static_cast<double>(factor);
    return irfft(std::move(big), m);
}

/// Half spectrum on the base grid of padded samples (modes above the base
/// Nyquist discarded).
inline std::vector<complex> unpad_spectrum(std::span<const double> values, std::size_t n, std::size_t factor) {
    const auto big = rfft(values);
    std::vector<complex> half(n / 2 + 1, complex(0.0, 0.0));
    const double inv = 1.0 / static_cast<double>(factor);
    for (std::size_t k = 0; k < n / 2; ++k) half[k] = big[k] * inv;
    return half;
}

inline std::vector<complex> symbol(const GridSpec& g, const std::function<complex(double)>& m) {
    std::vector<complex> s(g.half_size());
    for (std::size_t k = 0; k + 1 < s.size(); ++k) s[k] = m(g.wavenumber(k));
    s.back() = 0.0;
    return s;
}

inline std::size_t step_count(double T, double dt) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("final time must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
    return static_cast<std::size_t>(std::max(1.0, std::ceil(T / dt - 1e-9)));
}

inline bool finite(const EtdState& s) {
    for (const auto& z : s.spec) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    for (double a : s.aux) {
        if (!std::isfinite(a)) return false;
    }
    return true;
}

/// Damping profile in [0, 1]: zero in the interior, sin^2 ramp to one across
/// each outer layer.
inline Field sponge_profile(const GridSpec& g, double fraction) {
    if (!(fraction > 0.0) || fraction >= 0.5) throw InvalidArgument("sponge fraction must be in (0, 0.5)");
    const double half = 0.5 * g.length();
    const double width = fraction * g.length();
    return sample(g, [=](double x) {
        const double depth = std::abs(x) - (half - width);
        if (depth <= 0.0) return 0.0;
        const double s = std::sin(0.5 * std::numbers::pi * std::min(1.0, depth / width));
        return s * s;
    });
}

/// Multiplies the physical field by exp(-strength * profile * |dt|).
class Sponge {
public:
    Sponge(const GridSpec& g, const SpongeOptions& o, double dt) : grid_(g), factor_(g) {
        const Field p = sponge_profile(g, o.fraction);
        for (std::size_t j = 0; j < g.n(); ++j) factor_[j] = std::exp(-o.strength * p[j] * std::abs(dt));
    }
    void apply(std::vector<complex>& half) const {
        Field f = to_field(grid_, half);
        f = hadamard(f, factor_);
        half = half_spectrum(f);
    }
    Field apply(const Field& f) const { return hadamard(f, factor_); }

private:
    GridSpec grid_;
    Field factor_;
};

/// Steps an ETDRK4 system `steps` times, calling store at the initial state,
/// every stride-th step and the final step.  Non-finite states abort with the
/// last finite field.
inline void march(const GridSpec& g, EtdState& s, double t0, double dt, std::size_t steps, std::size_t stride,
                  Etdrk4& stepper, const EtdRhs& rhs, const std::function<void(double, EtdState&)>& post_step,
                  const std::function<void(std::size_t, double, const EtdState&)>& store) {
    if (stride == 0) throw InvalidArgument("snapshot stride must be positive");
    store(0, t0, s);
    EtdState last = s;
    for (std::size_t i = 1; i <= steps; ++i) {
        const double t = t0 + static_cast<double>(i - 1) * dt;
        stepper.step(t, s, rhs);
        const double tn = t0 + static_cast<double>(i) * dt;
        if (post_step) post_step(tn, s);
        if (!finite(s)) throw FlowAbort("non-finite state during time integration", t, to_field(g, last.spec));
        if (i % stride == 0 || i == steps) store(i, tn, s);
        last = s;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Airy group

/// Exact solution of v_t + v_xxx = 0: hat v(t, xi) = e^{i xi^3 t} hat f(xi).
inline Field airy_propagate(const Field& f, double t) {
    return apply_multiplier(f, [t](double xi) { return std::exp(complex(0.0, xi * xi * xi * t)); });
}

/// Airy evolution sampled every dt (with an optional sponge applied after each
/// step; without it the snapshots are exact).
inline Trajectory airy_evolve(const Field& f0, double T, double dt, const EvolveOptions& opts = {}) {
    const auto& g = f0.grid();
    const std::size_t steps = detail::step_count(T, dt);
    const double h = T / static_cast<double>(steps);
    TrajectoryMeta meta{"airy", "exact", h, opts.stride, opts.sponge.enabled, false, {}, 0.0, {}};
    Trajectory traj(g, meta);
    auto log = [](const Field& f) { return ConservedSample{mass(f), 0.5 * inner_product(derivative(f, 1), derivative(f, 1))}; };
    if (!opts.sponge.enabled) {
        for (std::size_t i = 0; i <= steps; i += opts.stride) {
            const double t = static_cast<double>(i) * h;
            Field f = airy_propagate(f0, t);
            const auto c = log(f);
            traj.push(opts.t0 + t, std::move(f), c);
            if (i + opts.stride > steps && i != steps) {
                Field last = airy_propagate(f0, T);
                const auto cl = log(last);
                traj.push(opts.t0 + T, std::move(last), cl);
            }
        }
        return traj;
    }
    const detail::Sponge sponge(g, opts.sponge, h);
    Field f = f0;
    traj.push(opts.t0, f, log(f));
    for (std::size_t i = 1; i <= steps; ++i) {
        f = sponge.apply(airy_propagate(f, h));
        if (i % opts.stride == 0 || i == steps) traj.push(opts.t0 + static_cast<double>(i) * h, f, log(f));
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Quartic gKdV

/// Reusable stepper for psi_t = -psi_xxx - (psi^4)_x; the quartic term is
/// evaluated on a 4x zero-padded grid.  A negative dt integrates backwards.
class GkdvStepper {
public:
    static constexpr std::size_t kPad = 4;

    GkdvStepper(const GridSpec& g, double dt, SpongeOptions sponge = {})
        : grid_(g),
          stepper_(detail::symbol(g, [](double xi) { return complex(0.0, xi * xi * xi); }), dt),
          sponge_(sponge.enabled ? std::optional<detail::Sponge>(detail::Sponge(g, sponge, dt)) : std::nullopt) {}

    double dt() const noexcept { return stepper_.dt(); }
    const GridSpec& grid() const noexcept { return grid_; }

    /// psi^4 -> -d_x (psi^4), dealiased.
    EtdRhs rhs() const {
        const GridSpec g = grid_;
        return [g](double, const EtdState& s, EtdState& out) {
            auto v = detail::pad_values(s.spec, g.n(), kPad);
            for (double& p : v) p = p * p * p * p;
            auto h = detail::unpad_spectrum(v, g.n(), kPad);
            for (std::size_t k = 0; k + 1 < h.size(); ++k) out.spec[k] = complex(0.0, -g.wavenumber(k)) * h[k];
            out.spec.back() = 0.0;
        };
    }

    Field advance(const Field& psi, double t0, std::size_t steps) {
        EtdState s{detail::half_spectrum(psi), {}};
        const auto f = rhs();
        detail::march(grid_, s, t0, dt(), steps, steps, stepper_, f, post_step(), [](std::size_t, double, const EtdState&) {});
        return detail::to_field(grid_, s.spec);
    }

    std::function<void(double, EtdState&)> post_step() const {
        if (!sponge_) return {};
        const auto sp = *sponge_;
        return [sp](double, EtdState& s) { sp.apply(s.spec); };
    }

    Etdrk4& integrator() noexcept { return stepper_; }

private:
    GridSpec grid_;
    Etdrk4 stepper_;
    std::optional<detail::Sponge> sponge_;
};

inline Trajectory gkdv_evolve(const Field& psi0, double T, double dt, const EvolveOptions& opts = {}) {
    const auto& g = psi0.grid();
    const std::size_t steps = detail::step_count(T, dt);
    const double h = T / static_cast<double>(steps);
    GkdvStepper stepper(g, h, opts.sponge);
    TrajectoryMeta meta{"gkdv", "etdrk4", h, opts.stride, opts.sponge.enabled, false, {}, 0.0, {}};
    Trajectory traj(g, meta);
    EtdState s{detail::half_spectrum(psi0), {}};
    detail::march(g, s, opts.t0, h, steps, opts.stride, stepper.integrator(), stepper.rhs(), stepper.post_step(),
                  [&](std::size_t, double t, const EtdState& st) {
                      Field f = detail::to_field(g, st.spec);
                      const ConservedSample c{mass(f), energy(f)};
                      traj.push(t, std::move(f), c);
                  });
    return traj;
}

// ---------------------------------------------------------------------------
// Linearized flows

enum class LinearFlow { u, v };

namespace detail {

/// Unforced frozen-frame flow: the linear part d_x^3 - c^2 d_x is exact, the
/// potential term is pseudospectral on the base grid.
inline Trajectory linear_evolve(LinearFlow kind, const Field& f0, double T, double dt, const SolitonParams& frame,
                                const EvolveOptions& opts) {
    const auto& g = f0.grid();
    frame.validate();
    const std::size_t steps = step_count(T, dt);
    const double h = T / static_cast<double>(steps);
    const double sgn = opts.time_reversed ? -1.0 : 1.0;
    const double c2 = frame.c * frame.c;
    // Fourier symbol of d_x^3 - c^2 d_x
    Etdrk4 stepper(symbol(g, [=](double xi) { return complex(0.0, -sgn * (xi * xi * xi + c2 * xi)); }), h);
    const LinearizedOperator op(frame, g);
    const Field pot = op.potential();
    EtdRhs rhs;
    if (kind == LinearFlow::u) {
        // +4 d_x (Q^3 u)
        rhs = [g, pot, sgn](double, const EtdState& s, EtdState& out) {
            const Field u = to_field(g, s.spec);
            const auto p = half_spectrum(hadamard(pot, u));
            for (std::size_t k = 0; k + 1 < p.size(); ++k) out.spec[k] = sgn * complex(0.0, g.wavenumber(k)) * p[k];
            out.spec.back() = 0.0;
        };
    } else {
        // +4 Q^3 v_x
        rhs = [g, pot, sgn](double, const EtdState& s, EtdState& out) {
            std::vector<complex> d(s.spec.size());
            for (std::size_t k = 0; k + 1 < d.size(); ++k) d[k] = complex(0.0, g.wavenumber(k)) * s.spec[k];
            d.back() = 0.0;
            const auto p = half_spectrum(hadamard(pot, to_field(g, d)));
            for (std::size_t k = 0; k < p.size(); ++k) out.spec[k] = sgn * p[k];
        };
    }
    TrajectoryMeta meta{kind == LinearFlow::u ? "u" : "v", "etdrk4", h, opts.stride, false, opts.time_reversed, frame, 0.0, {}};
    Trajectory traj(g, meta);
    EtdState s{half_spectrum(f0), {}};
    march(g, s, opts.t0, h, steps, opts.stride, stepper, rhs, {}, [&](std::size_t, double t, const EtdState& st) {
        Field f = to_field(g, st.spec);
        const ConservedSample c{mass(f), 0.5 * inner_product(op.apply(f), f)};
        traj.push(t, std::move(f), c);
    });
    return traj;
}

struct ForcedModes {
    double ip_a;  // <f, Q> (u) or <f, Qtilde> (v)
    double ip_b;  // <f, Q'>
};

/// Lab-frame linearization around Q_{c(t), y(t)} with modal forcing.
///   u: u_t = -u_xxx - 4 (Q^3 u)_x + alpha Qtilde + beta Q' + f
///   v: v_t = -v_xxx - 4 Q^3 v_x   + alpha Q      + beta Q'
inline ModalForcing forced_coefficients(LinearFlow kind, const Field& w, const SolitonFrame& fr, double cdot,
                                        double ydot, const Field* source) {
    const double c = fr.params.c;
    const double c2 = c * c;
    const double rc = cdot / c;
    const double yr = ydot - c2;
    const double qqt = inner_product(fr.q, fr.tilde);
    const double dqdq = inner_product(fr.dq, fr.dq);
    ModalForcing m;
    if (kind == LinearFlow::u) {
        const double fq = source ? inner_product(*source, fr.q) : 0.0;
        const double fdq = source ? inner_product(*source, fr.dq) : 0.0;
        m.alpha = -(rc * inner_product(w, fr.tilde) + fq - yr * inner_product(w, fr.dq)) / qqt;
        m.beta = (yr * inner_product(w, fr.d2q) + inner_product(w, fr.l_d2q) - rc * inner_product(w, fr.tilde_dx) - fdq) /
                 dqdq;
        m.source = ModalForcing::Source::u_problem;
    } else {
        m.alpha = (yr * inner_product(w, fr.tilde_dx) - 2.0 * c2 * inner_product(w, fr.dq) -
                   rc * inner_product(w, fr.tilde_tilde)) /
                  qqt;
        m.beta = (yr * inner_product(w, fr.d2q) - rc * inner_product(w, fr.tilde_dx)) / dqdq;
        m.source = ModalForcing::Source::v_problem;
    }
    return m;
}

inline ForcedModes modal_inner_products(LinearFlow kind, const Field& w, const SolitonFrame& fr) {
    return {inner_product(w, kind == LinearFlow::u ? fr.q : fr.tilde), inner_product(w, fr.dq)};
}

inline Trajectory forced_evolve(LinearFlow kind, const Field& f0, double T, double dt, const ModulationPath& path,
                                const std::function<Field(double)>& source, const EvolveOptions& opts) {
    const auto& g = f0.grid();
    const std::size_t steps = step_count(T, dt);
    const double h = T / static_cast<double>(steps);
    const double t0 = opts.t0;
    {
        const SolitonFrame fr(path.at(t0), g);
        const auto ip = modal_inner_products(kind, f0, fr);
        const double scale = std::max(l2_norm(f0), 1e-300);
        const double tol = 1e-10 * scale * std::max(l2_norm(fr.q), 1.0);
        if (std::abs(ip.ip_a) > tol || std::abs(ip.ip_b) > tol) {
            throw InvalidArgument("forced flow needs initial data orthogonal to the modal directions");
        }
    }
    Etdrk4 stepper(symbol(g, [](double xi) { return complex(0.0, xi * xi * xi); }), h);
    EtdRhs rhs = [&, kind](double t, const EtdState& s, EtdState& out) {
        const SolitonFrame fr(path.at(t), g);
        const Field w = to_field(g, s.spec);
        std::optional<Field> src;
        if (source) src = source(t);
        const auto m = forced_coefficients(kind, w, fr, path.cdot(t), path.ydot(t), src ? &*src : nullptr);
        Field q3(g);
        for (std::size_t j = 0; j < g.n(); ++j) q3[j] = 4.0 * fr.q[j] * fr.q[j] * fr.q[j];
        Field forcing = m.alpha * (kind == LinearFlow::u ? fr.tilde : fr.q);
        forcing.axpy(m.beta, fr.dq);
        if (src) forcing += *src;
        const auto fh = half_spectrum(forcing);
        if (kind == LinearFlow::u) {
            const auto p = half_spectrum(hadamard(q3, w));
            for (std::size_t k = 0; k + 1 < p.size(); ++k) out.spec[k] = complex(0.0, -g.wavenumber(k)) * p[k] + fh[k];
        } else {
            const Field wx = derivative(w, 1);
            const auto p = half_spectrum(hadamard(q3, wx));
            for (std::size_t k = 0; k + 1 < p.size(); ++k) out.spec[k] = -p[k] + fh[k];
        }
        out.spec.back() = 0.0;
    };
    TrajectoryMeta meta{kind == LinearFlow::u ? "u-forced" : "v-forced", "etdrk4", h, opts.stride, false, false,
                        path.at(t0), 0.0, {}};
    Trajectory traj(g, meta);
    double worst = 0.0;
    auto check = [&](double t, const EtdState& s) {
        const SolitonFrame fr(path.at(t), g);
        const auto ip = modal_inner_products(kind, to_field(g, s.spec), fr);
        worst = std::max({worst, std::abs(ip.ip_a), std::abs(ip.ip_b)});
    };
    EtdState s{half_spectrum(f0), {}};
    march(g, s, t0, h, steps, opts.stride, stepper, rhs, [&](double t, EtdState& st) { check(t, st); },
          [&](std::size_t, double t, const EtdState& st) {
              const SolitonFrame fr(path.at(t), g);
              Field f = to_field(g, st.spec);
              std::optional<Field> src;
              if (source) src = source(t);
              const auto m = forced_coefficients(kind, f, fr, path.cdot(t), path.ydot(t), src ? &*src : nullptr);
              const LinearizedOperator op(fr.params, g);
              const ConservedSample c{mass(f), 0.5 * inner_product(op.apply(f), f)};
              traj.push(t, std::move(f), c, m);
          });
    traj.meta().max_orthogonality = worst;
    if (worst > 1e-6) traj.meta().warnings.push_back("orthogonality drift exceeded 1e-6");
    return traj;
}

}  // namespace detail

/// Frozen-frame u-flow u_t = -d_x L u around Q_{c,y}.
inline Trajectory u_flow_evolve(const Field& u0, double T, double dt, const SolitonParams& frame = {},
                                const EvolveOptions& opts = {}) {
    return detail::linear_evolve(LinearFlow::u, u0, T, dt, frame, opts);
}

/// Frozen-frame v-flow v_t = -L d_x v around Q_{c,y}.
inline Trajectory v_flow_evolve(const Field& v0, double T, double dt, const SolitonParams& frame = {},
                                const EvolveOptions& opts = {}) {
    return detail::linear_evolve(LinearFlow::v, v0, T, dt, frame, opts);
}

/// u_t = -u_xxx - 4 (Q^3 u)_x + alpha Qtilde + beta Q' + f around the moving
/// soliton of `path`, with alpha, beta chosen each stage so that <u, Q> and
/// <u, Q'> stay at zero.  Needs <u0, Q> = <u0, Q'> = 0.
inline Trajectory u_flow_evolve_forced(const Field& u0, double T, double dt, const ModulationPath& path,
                                       const std::function<Field(double)>& source = {},
                                       const EvolveOptions& opts = {}) {
    return detail::forced_evolve(LinearFlow::u, u0, T, dt, path, source, opts);
}

/// v_t = -v_xxx - 4 Q^3 v_x + alpha Q + beta Q' keeping <v, Qtilde> and
/// <v, Q'> at zero.  Needs <v0, Qtilde> = <v0, Q'> = 0.
inline Trajectory v_flow_evolve_forced(const Field& v0, double T, double dt, const ModulationPath& path,
                                       const EvolveOptions& opts = {}) {
    return detail::forced_evolve(LinearFlow::v, v0, T, dt, path, {}, opts);
}

/// Largest L^2 mismatches of the intertwining relations between the two
/// frozen flows, and the drift of the pairing <u(t), v(t)>.
struct DualityReport {
    double l_intertwining;       // L u(t) vs v-flow(L u0)
    double dx_intertwining;      // d_x v(t) vs u-flow(d_x v0)
    double pairing_drift;        // max |<u(t), v(t)> - <u0, v0>|
    double reversed_dx_mismatch; // d_x u(t) vs v-flow(d_x u0), not an identity
    double reversed_l_mismatch;  // L v(t) vs u-flow(L v0), not an identity
};

/// u0 seeds the u-flow and v0 the v-flow.
inline DualityReport duality_relations_check(const Field& u0, const Field& v0, double T, double dt,
                                             const SolitonParams& frame = {}) {
    const LinearizedOperator op(frame, u0.grid());
    const auto u = u_flow_evolve(u0, T, dt, frame);
    const auto v = v_flow_evolve(v0, T, dt, frame);
    const auto v_from_lu = v_flow_evolve(op.apply(u0), T, dt, frame);
    const auto u_from_dv = u_flow_evolve(derivative(v0, 1), T, dt, frame);
    const auto v_from_du = v_flow_evolve(derivative(u0, 1), T, dt, frame);
    const auto u_from_lv = u_flow_evolve(op.apply(v0), T, dt, frame);
    DualityReport r{0.0, 0.0, 0.0, 0.0, 0.0};
    const double p0 = inner_product(u0, v0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        r.l_intertwining = std::max(r.l_intertwining, l2_norm(op.apply(u.state(i)) - v_from_lu.state(i)));
        r.dx_intertwining = std::max(r.dx_intertwining, l2_norm(derivative(v.state(i), 1) - u_from_dv.state(i)));
        r.pairing_drift = std::max(r.pairing_drift, std::abs(inner_product(u.state(i), v.state(i)) - p0));
        r.reversed_dx_mismatch = std::max(r.reversed_dx_mismatch, l2_norm(derivative(u.state(i), 1) - v_from_du.state(i)));
        r.reversed_l_mismatch = std::max(r.reversed_l_mismatch, l2_norm(op.apply(v.state(i)) - u_from_lv.state(i)));
    }
    return r;
}

/// <L^+ v(t), v(t)> at every stored state, L^+ the pseudo-inverse on the
/// complement of Q'.
inline std::vector<double> invariant_Linv(const Trajectory& v_traj, const SolitonParams& frame = {}) {
    const LinearizedOperator op(frame, v_traj.grid());
    std::vector<double> out;
    out.reserve(v_traj.size());
    for (const auto& v : v_traj.states()) out.push_back(inner_product(op.pinv_solve(v), v));
    return out;
}

}  // namespace gkdv
