#pragma once

/// Experiment recipes, run directories, reports and sweeps behind the
/// gkdv-lab command line.
///
/// A run directory holds meta.json (resolved configuration, versions,
/// status), checks.json (one entry per check) and recipe artifacts.  A
/// failed run holds error.json instead of checks.json.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/version.hpp>
#include <Eigen/Core>
#include <fftw3.h>

#include "json.hpp"

#include "gkdv/config.hpp"
#include "gkdv/errors.hpp"
#include "gkdv/flows.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/io.hpp"
#include "gkdv/linearized.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/norms.hpp"
#include "gkdv/random.hpp"
#include "gkdv/scattering.hpp"
#include "gkdv/soliton.hpp"
#include "gkdv/virial.hpp"

namespace gkdv::lab {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kUsageError = 2, kNumericAbort = 3 };

/// One measured quantity against its threshold.  Checks with gate = false
/// are reported but never fail a run.
struct Check {
    enum class Kind { at_most, at_least, near };
    std::string name;
    double measured = 0.0;
    double expected = 0.0;
    double tol = 0.0;
    Kind kind = Kind::at_most;
    bool gate = true;
    std::string note;

    bool pass() const {
        if (!std::isfinite(measured)) return false;
        switch (kind) {
            case Kind::at_most: return measured <= tol;
            case Kind::at_least: return measured >= tol;
            case Kind::near: return std::abs(measured - expected) <= tol;
        }
        return false;
    }

    json to_json() const {
        static const char* kinds[] = {"at_most", "at_least", "near"};
        return {{"name", name},   {"measured", measured},         {"expected", expected},
                {"tol", tol},     {"kind", kinds[static_cast<int>(kind)]}, {"gate", gate},
                {"pass", pass()}, {"note", note}};
    }
};

class CheckList {
public:
    void at_most(std::string name, double measured, double bound, std::string note = {}) {
        checks_.push_back({std::move(name), measured, 0.0, bound, Check::Kind::at_most, true, std::move(note)});
    }
    void at_least(std::string name, double measured, double bound, std::string note = {}) {
        checks_.push_back({std::move(name), measured, bound, bound, Check::Kind::at_least, true, std::move(note)});
    }
    void near(std::string name, double measured, double expected, double tol, std::string note = {}) {
        checks_.push_back({std::move(name), measured, expected, tol, Check::Kind::near, true, std::move(note)});
    }
    /// Marks the most recent check as informational.
    void info() { checks_.back().gate = false; }

    const std::vector<Check>& checks() const noexcept { return checks_; }
    bool all_gates_pass() const {
        return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return !c.gate || c.pass(); });
    }

private:
    std::vector<Check> checks_;
};

namespace detail {

inline GridSpec grid_of(const ExperimentConfig& cfg) { return {cfg.grid.n, cfg.grid.length}; }

inline double max_abs(const std::vector<double>& v, double ref) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x - ref));
    return m;
}

/// Field with <f, Qtilde> = <f, Q'> = 0 for the unit soliton at the origin.
inline Field orthogonal_to_modes(Field f) {
    const SolitonParams p{};
    const Field qt = tilde_profile(p, f.grid());
    const Field dq = profile_dx(p, f.grid());
    f.axpy(-inner_product(f, qt) / inner_product(qt, qt), qt);
    f.axpy(-inner_product(f, dq) / inner_product(dq, dq), dq);
    return f;
}

/// Maximal sum of |x_{i_k} - x_{i_{k-1}}|^p over every index subset, by
/// enumeration, to the power 1/p.
inline double brute_force_p_variation(const std::vector<double>& x, double p) {
    const std::size_t n = x.size();
    double best = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double s = 0.0;
        long prev = -1;
        for (std::size_t k = 0; k < n; ++k) {
            if (!(mask & (std::size_t{1} << k))) continue;
            if (prev >= 0) s += std::pow(std::abs(x[k] - x[static_cast<std::size_t>(prev)]), p);
            prev = static_cast<long>(k);
        }
        best = std::max(best, s);
    }
    return std::pow(best, 1.0 / p);
}

inline Field narrowband_packet(const GridSpec& g) {
    return sample(g, [](double x) { return std::cos(3.0 * x) * std::exp(-x * x / 4.0); });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Recipes

inline void recipe_spectrum(const ExperimentConfig& cfg, const fs::path& dir, CheckList& checks) {
    const GridSpec g = detail::grid_of(cfg);
    const SolitonParams p{cfg.soliton.c, 0.0, 4};
    const LinearizedOperator op(p, g);
    const auto pairs = op.spectrum(cfg.spectrum.count);
    io::write_spectrum(dir / "spectrum.csv", pairs);

    const double c2 = p.c * p.c;
    checks.near("ground eigenvalue", pairs[0].value, -5.25 * c2, 1e-6);
    Field shape = map(profile(p, g), [](double q) { return std::pow(q, 2.5); });
    shape *= 1.0 / l2_norm(shape);
    Field e0 = pairs[0].field;
    e0 *= (inner_product(e0, shape) < 0.0 ? -1.0 : 1.0) / l2_norm(e0);
    checks.at_most("ground state shape Q^(5/2)", l2_norm(e0 - shape), 1e-6);
    checks.near("kernel eigenvalue", pairs[1].value, 0.0, 1e-8);
    checks.at_most("||L Q'||", l2_norm(op.apply(profile_dx(p, g))), 1e-8);
    const Field lqt = op.apply(tilde_profile(p, g)) + (2.0 * c2) * profile(p, g);
    checks.at_most("||L Qtilde + 2c^2 Q||", l2_norm(lqt), 1e-8);
    double res = 0.0;
    for (const auto& e : pairs) res = std::max(res, e.residual);
    checks.at_most("max eigenpair residual", res, 1e-8);
    const Field pot = op.potential();
    const double box_shift = integral(pot) / g.length();
    checks.at_least("third eigenvalue above box-mode bound", pairs[2].value, c2 - 1.1 * box_shift,
                    "continuum bottom c^2 is approached as c^2 - (integral 4Q^3)/L on a periodic box");

    json j = json::array();
    for (const auto& e : pairs) j.push_back({{"eigenvalue", e.value}, {"residual", e.residual}});
    io::write_json(dir / "spectrum.json", {{"eigenpairs", j}, {"box_shift", box_shift}});
}

inline void recipe_identities(const ExperimentConfig& cfg, const fs::path& dir, CheckList& checks) {
    const GridSpec g = detail::grid_of(cfg);
    const double m_formula = mass_formula();
    const double m_numeric = mass_numeric(g);
    checks.near("soliton mass: quadrature vs Gamma formula", m_numeric, m_formula, 1e-8);
    checks.at_most("Euler-Lagrange residual", euler_lagrange_residual({}, g), 1e-8);
    const double n1 = l2_norm(profile({}, g));
    json scaling = json::array();
    for (double c : {0.5, 2.0}) {
        const SolitonParams p{c, 0.0, 4};
        const Field q = profile(p, g);
        const double nc = l2_norm(q);
        const double pair = inner_product(tilde_profile(p, g), q);
        checks.near("||Q_c|| = c^(1/6)||Q_1|| at c=" + io::fmt(c), nc, std::pow(c, 1.0 / 6.0) * n1, 1e-10);
        checks.near("<Qtilde_c, Q_c> = ||Q_c||^2/6 at c=" + io::fmt(c), pair, nc * nc / 6.0, 1e-10);
        scaling.push_back({{"c", c}, {"norm", nc}, {"pairing", pair}});
    }
    const auto d = virial_identity_defects(g);
    checks.at_most("eta' = Q^3", d.eta1_equals_q3, 1e-9);
    checks.at_most("(eta''/eta')^2 = 9(1 - (2/3)Q^3) as stated", d.ratio2_stated, 1e-9,
                   "known false; the coefficient is 2/5");
    checks.info();
    checks.at_most("(eta''/eta')^2 = 9(1 - (2/5)Q^3)", d.ratio2_corrected, 1e-9);
    checks.at_most("eta'''/eta' = 9(1 - (3/5)Q^3)", d.ratio3, 1e-9);
    checks.at_most("eta^2 = (25/9)(1 - (2/5)Q^3)", d.eta_squared, 1e-9);
    checks.at_most("(Q^3 eta)' = -5Q^3 + 3Q^6", d.q3eta_derivative, 1e-9);
    checks.at_most("A = 75/4 - 12Q^3 assembled", d.a_assembled, 1e-9);
    io::write_json(dir / "identities.json", {{"mass_formula", m_formula},
                                             {"mass_numeric", m_numeric},
                                             {"scaling", scaling},
                                             {"virial_defects",
                                              {{"eta1_equals_q3", d.eta1_equals_q3},
                                               {"ratio2_stated", d.ratio2_stated},
                                               {"ratio2_corrected", d.ratio2_corrected},
                                               {"ratio3", d.ratio3},
                                               {"eta_squared", d.eta_squared},
                                               {"q3eta_derivative", d.q3eta_derivative},
                                               {"a_assembled", d.a_assembled}}}});
}

inline void recipe_linear_flows(const ExperimentConfig& cfg, const fs::path& dir, CheckList& checks) {
    const GridSpec g = detail::grid_of(cfg);
    const SolitonParams p{};
    const double T = cfg.solver.T, dt = cfg.solver.dt;
    EvolveOptions eo;
    eo.stride = cfg.solver.snapshot_stride;

    const auto u = u_flow_evolve(tilde_profile(p, g), T, dt, p, eo);
    const double tu = u.time(u.size() - 1);
    const Field exact = tilde_profile(p, g) + (2.0 * tu) * profile_dx(p, g);
    checks.at_most("u-flow from Qtilde vs Qtilde + 2tQ'", l2_norm(u.back() - exact), 1e-6);
    io::write_trajectory(dir / "u_flow", u);

    const auto v = v_flow_evolve(profile(p, g), T, dt, p, eo);
    double vdrift = 0.0;
    for (const auto& s : v.states()) vdrift = std::max(vdrift, l2_norm(s - profile(p, g)));
    checks.at_most("v-flow fixes Q", vdrift, 1e-8);

    NoiseSpec ns{0.1, cfg.perturbation.k_min, cfg.perturbation.k_max, 0.0, cfg.perturbation.width};
    const Field u0 = band_limited_noise(g, ns, cfg.run.seed);
    const Field v0 = band_limited_noise(g, ns, cfg.run.seed + 1);
    const auto dual = duality_relations_check(u0, v0, T, dt, p);
    checks.at_most("L-intertwining (u-flow to v-flow)", dual.l_intertwining, 1e-7);
    checks.at_most("d_x-intertwining (v-flow to u-flow)", dual.dx_intertwining, 1e-7);
    checks.at_most("pairing <u, v> drift", dual.pairing_drift, 1e-7);
    checks.at_least("stated d_x direction is not an identity", dual.reversed_dx_mismatch, 0.0);
    checks.info();
    checks.at_least("stated L direction is not an identity", dual.reversed_l_mismatch, 0.0);
    checks.info();

    const Field vo = detail::orthogonal_to_modes(v0);
    EvolveOptions eo_inv = eo;
    eo_inv.stride = std::max<std::size_t>(1, gkdv::detail::step_count(T, dt) / 10);
    const auto vt = v_flow_evolve(vo, T, dt, p, eo_inv);
    const auto inv = invariant_Linv(vt, p);
    checks.at_most("<L^+ v, v> relative drift", detail::max_abs(inv, inv.front()) / std::abs(inv.front()), 1e-8);

    const LinearizedOperator op(p, g);
    checks.at_most("|d/dt I_eta(Q)| under the v-flow", std::abs(virial_rate(op, profile(p, g))), 1e-7);
    double worst_rate = -INFINITY, worst_identity = 0.0, min_diss = INFINITY;
    std::vector<std::vector<double>> rows;
    for (std::uint64_t k = 0; k < 20; ++k) {
        const Field vk = detail::orthogonal_to_modes(band_limited_noise(g, {1.0, 0.0, 3.0, 0.0, 3.0}, cfg.run.seed + 100 + k));
        const double rate = virial_rate(op, vk);
        const double diss = virial_dissipation(op, vk);
        worst_rate = std::max(worst_rate, rate);
        min_diss = std::min(min_diss, diss);
        worst_identity = std::max(worst_identity, std::abs(rate + diss));
        rows.push_back({static_cast<double>(k), rate, diss, sech_weighted_h1_squared(vk)});
    }
    io::write_csv(dir / "virial_samples.csv", {"sample", "rate", "dissipation", "sech_h1_squared"}, rows);
    checks.at_most("max d/dt I_eta over 20 orthogonal samples", worst_rate, 1e-7);
    checks.at_least("min dissipation over 20 orthogonal samples", min_diss, 0.0);
    checks.at_most("rate + dissipation", worst_identity, 1e-8);

    const Field vslow = detail::orthogonal_to_modes(band_limited_noise(g, {0.1, 0.0, 1.0, 0.0, 3.0}, cfg.run.seed + 2));
    const auto vs = v_flow_evolve(vslow, T, dt, p, eo);
    double max_rise = 0.0;
    std::vector<std::vector<double>> vir;
    double prev = NAN;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const double I = virial_functional(vs.state(i));
        if (i > 0) max_rise = std::max(max_rise, I - prev);
        prev = I;
        vir.push_back({vs.time(i), I});
    }
    io::write_csv(dir / "virial.csv", {"t", "I_eta"}, vir);
    checks.at_most("I_eta non-increasing along the v-flow", max_rise, 1e-7);

    io::write_json(dir / "linear_flows.json", {{"duality",
                                                {{"l_intertwining", dual.l_intertwining},
                                                 {"dx_intertwining", dual.dx_intertwining},
                                                 {"pairing_drift", dual.pairing_drift},
                                                 {"reversed_dx_mismatch", dual.reversed_dx_mismatch},
                                                 {"reversed_l_mismatch", dual.reversed_l_mismatch}}},
                                               {"Linv_invariant", inv}});
}

inline ModulationState initial_state(const ExperimentConfig& cfg, const GridSpec& g) {
    const SolitonParams p{cfg.soliton.c, cfg.soliton.y, 4};
    const NoiseSpec ns{cfg.perturbation.amplitude, cfg.perturbation.k_min, cfg.perturbation.k_max, cfg.soliton.y,
                       cfg.perturbation.width};
    const Field psi = profile(p, g) + band_limited_noise(g, ns, cfg.run.seed);
    DecomposeOptions dopt;
    dopt.tol = cfg.modulation.newton_tol;
    dopt.kappa = cfg.modulation.kappa;
    auto s = decompose(psi, p, dopt);
    return s;
}

inline void recipe_stability(const ExperimentConfig& cfg, const fs::path& dir, CheckList& checks) {
    const GridSpec g = detail::grid_of(cfg);
    const auto s0 = initial_state(cfg, g);
    CoupledOptions co;
    co.stride = cfg.solver.snapshot_stride;
    co.sponge.enabled = cfg.solver.sponge;
    const auto run = coupled_evolve(s0, cfg.solver.T, cfg.solver.dt, co);
    io::write_modulation_log(dir / "modulation.csv", run.states);
    const auto traj = run.remainder_trajectory();
    io::write_conserved(dir / "conserved.csv", traj);

    double dc = 0.0, dm = 0.0, de = 0.0;
    for (const auto& s : run.states) {
        dc = std::max(dc, std::abs(s.c - s0.c));
        dm = std::max(dm, std::abs(s.mass - s0.mass) / std::abs(s0.mass));
        de = std::max(de, std::abs(s.energy - s0.energy) / std::abs(s0.energy));
    }
    checks.at_most("sup |c - c0|", dc, 5e-3);
    checks.at_most("relative mass drift", dm, 1e-8);
    if (cfg.solver.sponge) checks.info();
    checks.at_most("relative energy drift", de, 1e-8);
    if (cfg.solver.sponge) checks.info();

    if (cfg.solver.T >= 1.0 && !cfg.solver.sponge) {
        const auto direct = gkdv_evolve(s0.psi(), 1.0, cfg.solver.dt, {1000000, {}, false, 0.0});
        const auto coupled = coupled_evolve(s0, 1.0, cfg.solver.dt, {1000000, {}, 0.5, 0.5});
        checks.at_most("coupled reconstruction vs direct gKdV at t=1",
                       l2_norm(coupled.states.back().psi() - direct.back()), 1e-6);
    }

    const double dt_m = std::min(cfg.solver.dt, 2.5e-4);
    const auto short_run = coupled_evolve(s0, 100 * dt_m, dt_m, {1, {}, 0.5, 0.5});
    const auto ip = inner_product_dynamics_check(short_run);
    checks.at_most("<w,Q> evolution law relative defect", ip.relative_q, 1e-5);
    checks.at_most("<w,Q'> evolution law relative defect", ip.relative_dq, 1e-5);

    std::vector<std::vector<double>> vir;
    double rises = 0.0, scale = 0.0, prev = NAN;
    for (std::size_t i = 0; i < run.states.size(); ++i) {
        const auto& s = run.states[i];
        const double I = virial_functional(s.w, s.y);
        scale = std::max(scale, std::abs(I));
        if (i > 0) rises = std::max(rises, I - prev);
        prev = I;
        vir.push_back({s.t, I});
    }
    io::write_csv(dir / "virial.csv", {"t", "I_eta"}, vir);
    checks.at_most("I_eta(w) monotone (largest rise / max |I_eta|)", scale > 0.0 ? rises / scale : 0.0, 1e-3,
                   "nonlinear and modulation terms enter; reported as a verdict only");
    checks.info();
    io::write_json(dir / "stability.json", {{"c0", s0.c},
                                            {"y0", s0.y},
                                            {"remainder_l2", l2_norm(s0.w)},
                                            {"sup_c_deviation", dc},
                                            {"mass_drift", dm},
                                            {"energy_drift", de},
                                            {"ip_defect_q", ip.relative_q},
                                            {"ip_defect_dq", ip.relative_dq}});
}

inline void recipe_scatter(const ExperimentConfig& cfg, const fs::path& dir, CheckList& checks) {
    const GridSpec g = detail::grid_of(cfg);
    const auto s0 = initial_state(cfg, g);
    CoupledOptions co;
    co.stride = cfg.solver.snapshot_stride;
    co.sponge.enabled = cfg.solver.sponge;
    const auto run = coupled_evolve(s0, cfg.solver.T, cfg.solver.dt, co);
    io::write_modulation_log(dir / "modulation.csv", run.states);
    const DyadicDecomposition dec(g, cfg.norms.dyadic_base);
    const auto traj = run.remainder_trajectory();
    const auto rep = forward_scatter(traj, dec, cfg.scatter.window);
    const auto wide = forward_scatter(traj, dec, std::min(1.0, 2.0 * cfg.scatter.window));
    io::write_residual_curve(dir / "residual_curve.csv", rep);
    io::write_field(dir / "z0.csv", rep.z0);
    json j = io::to_json(rep);
    const double T0 = run.states.front().t, T1 = run.states.back().t;
    const double quarter = rep.residual_at(T0 + 0.25 * (T1 - T0));
    const double last = rep.residual_at(T1);
    j["residual_quarter"] = quarter;
    j["residual_final"] = last;
    j["window_robustness"] = l2_norm(rep.z0 - wide.z0) / l2_norm(rep.z0);
    io::write_json(dir / "scatter.json", j);
    checks.at_most("Besov residual ratio T vs T/4", last / quarter, 0.2);
    checks.at_most("z0 window robustness (doubled window)", l2_norm(rep.z0 - wide.z0) / l2_norm(rep.z0), 0.05,
                   "absorbing layers remove outgoing radiation, so pullbacks drift");
    checks.info();
    checks.at_least("converged flag", rep.converged ? 1.0 : 0.0, 1.0);
    checks.info();
}

inline void recipe_inverse(const ExperimentConfig& cfg, const fs::path& dir, CheckList& checks) {
    const GridSpec g = detail::grid_of(cfg);
    const auto& sc = cfg.scatter;
    const Field v0 = band_limited_noise(
        g, {cfg.perturbation.amplitude, sc.data_k_min, sc.data_k_max, sc.data_center, sc.data_width}, cfg.run.seed);
    io::write_field(dir / "v0.csv", v0);
    InverseWaveOptions opts;
    opts.smallness_threshold = sc.smallness;
    const auto res = inverse_wave(v0, sc.c_inf, sc.y0, sc.horizon, cfg.solver.dt, opts);
    io::write_field(dir / "psi0.csv", res.psi0);
    checks.at_most("mass identity relative defect", res.mass_defect, 1e-2);
    checks.at_most("|y(0) - y0|", std::abs(res.y_initial - sc.y0), 1e-6);
    checks.at_least("shooting map monotone on sampled shots", res.monotone ? 1.0 : 0.0, 1.0);
    checks.at_most("data norm (critical Besov)", res.data_norm, sc.smallness);
    checks.info();
    json j{{"y_terminal", res.y_terminal}, {"y_initial", res.y_initial}, {"c_initial", res.c_initial},
           {"data_norm", res.data_norm},   {"mass_defect", res.mass_defect}, {"shots", res.history.size()}};

    if (sc.reversibility) {
        const Field terminal = airy_propagate(v0, sc.horizon) + profile({sc.c_inf, res.y_terminal, 4}, g);
        const auto steps = gkdv::detail::step_count(sc.horizon, sc.reversibility_dt);
        const double h = sc.horizon / static_cast<double>(steps);
        GkdvStepper bwd(g, -h), fwd(g, h);
        const Field again = fwd.advance(bwd.advance(terminal, sc.horizon, steps), 0.0, steps);
        const double err = l2_norm(again - terminal) / l2_norm(terminal);
        checks.at_most("backward-then-forward reproduces terminal data", err, 1e-8);
        j["reversibility"] = err;
        j["reversibility_dt"] = h;
    }
    if (sc.round_trip) {
        DecomposeOptions dopt;
        dopt.tol = cfg.modulation.newton_tol;
        dopt.kappa = cfg.modulation.kappa;
        const auto s0 = decompose(res.psi0, SolitonParams{sc.c_inf, sc.y0, 4}, dopt);
        const auto run = coupled_evolve(s0, sc.horizon, cfg.solver.dt, {cfg.solver.snapshot_stride, {}, 0.5, 0.5});
        const DyadicDecomposition dec(g, cfg.norms.dyadic_base);
        const auto rep = forward_scatter(run, dec, sc.window);
        const double rec = l2_norm(rep.z0 - v0) / l2_norm(v0);
        checks.at_most("forward scattering recovers v0 (relative L2)", rec, 0.05);
        io::write_field(dir / "z0.csv", rep.z0);
        io::write_residual_curve(dir / "residual_curve.csv", rep);
        j["recovery"] = rec;
    }
    if (sc.cauchy) {
        const auto cr = inverse_wave_cauchy(v0, sc.c_inf, sc.y0, {sc.horizon, 1.5 * sc.horizon, 2.0 * sc.horizon},
                                            cfg.solver.dt, opts);
        j["cauchy"] = {{"horizons", cr.horizons}, {"successive_l2", cr.successive_l2}};
        checks.at_most("Psi(0) change between the two largest horizons", cr.successive_l2.back(), 1e-2);
        checks.info();
    }
    io::write_json(dir / "inverse.json", j);
}

inline void recipe_norms(const ExperimentConfig& cfg, const fs::path& dir, CheckList& checks) {
    const GridSpec g = detail::grid_of(cfg);
    const auto& nc = cfg.norms;
    const DyadicDecomposition dec(g, nc.dyadic_base);
    json out;

    const Field q = profile({}, g);
    const auto bq = besov_norm(q, nc.besov_s, nc.besov_p, nc.besov_q, dec);
    out["besov_Q"] = io::to_json(bq);
    const GridSpec coarse(g.n() / 2, g.length());
    const double bq_coarse = critical_besov_norm(profile({}, coarse), DyadicDecomposition(coarse, nc.dyadic_base));
    const double bq_crit = critical_besov_norm(q, dec);
    checks.at_most("critical Besov of Q: refinement n/2 vs n", std::abs(bq_coarse - bq_crit) / bq_crit, 1e-3);
    const double bq2 = critical_besov_norm(profile({2.0, 0.0, 4}, g), dec);
    checks.at_most("critical Besov scaling invariance at c=2", std::abs(bq2 - bq_crit) / bq_crit, 2e-2);
    const Field packet = detail::narrowband_packet(g);
    const DyadicDecomposition fine(g, nc.compare_base);
    const double pb = critical_besov_norm(packet, dec), pf = critical_besov_norm(packet, fine);
    checks.at_most("base robustness on narrowband data", std::abs(pf - pb) / pb, 0.1);
    checks.at_most("base robustness on Q", std::abs(critical_besov_norm(q, fine) - bq_crit) / bq_crit, 0.1,
                   "broadband data weight the band edges differently");
    double band_energy = 0.0;
    for (double lam : dec.bands()) band_energy += mass(dec.project(q, lam));
    const double ratio = band_energy / mass(q);
    checks.at_most("almost orthogonality constant", std::max(ratio, 1.0 / ratio), 2.0);

    const double lam = 2.0;
    const Field u0 = dec.project(packet, lam);
    EvolveOptions eo;
    eo.stride = 1;
    const auto at = airy_evolve(u0, 10.0, 0.05, eo);
    const auto at_fine = airy_evolve(u0, 10.0, 0.025, eo);
    const double l6 = strichartz_norm(at, 6.0, 6.0);
    const double C = l6 / (std::pow(lam, -1.0 / 6.0) * l2_norm(u0));
    checks.at_most("Strichartz constant at lambda=2, T=10", C, 10.0);
    checks.at_most("L6 norm refinement in time", std::abs(strichartz_norm(at_fine, 6.0, 6.0) - l6) / l6, 1e-2);
    out["strichartz_constant"] = C;

    const auto aq = airy_evolve(q, 10.0, 0.05, eo);
    const double ls = local_smoothing_integral(aq, straight_path(aq, 1.0), 0.0, nc.epsilon);
    const Field gam = gamma_weight(g, nc.epsilon).samples;
    const Field qx = derivative(q, 1);
    const double e0 = integral(hadamard(gam, hadamard(q, q) + hadamard(qx, qx)));
    checks.at_most("local smoothing of Airy(Q) over initial weighted energy", ls / e0, 1.0);
    out["local_smoothing"] = {{"integral", ls}, {"initial_weighted_energy", e0}};

    std::mt19937_64 gen(cfg.run.seed);
    std::uniform_int_distribution<int> len(2, 12);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> pick(1.0, 4.0);
    double worst = 0.0;
    std::size_t mono_fail = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> x(static_cast<std::size_t>(len(gen)));
        for (double& v : x) v = normal(gen);
        const double p = pick(gen);
        const double dp = p_variation(x, p);
        const double bf = detail::brute_force_p_variation(x, p);
        worst = std::max(worst, std::abs(dp - bf) / std::max(bf, 1e-300));
        if (p_variation(x, p + 1.0) > dp * (1.0 + 1e-14)) ++mono_fail;
    }
    checks.at_most("p-variation DP vs brute force (1000 series)", worst, 1e-12);
    checks.at_most("V^p >= V^q for p < q failures", static_cast<double>(mono_fail), 0.0);

    EvolveOptions js;
    js.stride = 1;
    js.sponge.enabled = true;
    const Field jdata = dec.project(packet, 2.0) + dec.project(packet, 4.0);
    const auto jt = airy_evolve(jdata, 40.0, 0.1, js);
    const auto j0 = J_functional(jt, dec, 0.0, 40.0);
    const auto j20 = J_functional(jt, dec, 20.0, 40.0);
    checks.at_most("J tail ratio J[20,40] / J[0,40]", j20.value / j0.value, 0.1);
    JOptions single;
    single.straight_paths = 1;
    single.min_slope = single.max_slope = 1.0;
    single.greedy_path = false;
    const auto j_single = J_functional(jt, dec, 0.0, 40.0, single);
    checks.at_least("J with path family over J with y=t", j0.value / j_single.value, 1.0);
    out["J"] = {{"J_0", j0.value}, {"J_20", j20.value}, {"J_single_path", j_single.value}};
    io::write_json(dir / "norms.json", out);
}

// ---------------------------------------------------------------------------
// Runs

inline json versions() {
    return {{"gkdv_lab", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000)},
            {"fftw", std::string(fftw_version)}};
}

struct RunOutcome {
    int exit_code = kPass;
    fs::path dir;
    std::vector<Check> checks;
    std::string error;
};

/// Executes the configured recipe into cfg.run.output_dir.
inline RunOutcome run(ExperimentConfig cfg) {
    cfg.validate();
    RunOutcome out;
    out.dir = cfg.run.output_dir;
    fs::create_directories(out.dir);
    fs::remove(out.dir / "error.json");
    fs::remove(out.dir / "checks.json");
    json meta{{"experiment", cfg.run.experiment}, {"config", cfg.to_json()}, {"versions", versions()},
              {"status", "running"}};
    io::write_json(out.dir / "meta.json", meta);
    CheckList checks;
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto& e = cfg.run.experiment;
        if (e == "spectrum") recipe_spectrum(cfg, out.dir, checks);
        else if (e == "identities") recipe_identities(cfg, out.dir, checks);
        else if (e == "linear-flows") recipe_linear_flows(cfg, out.dir, checks);
        else if (e == "stability") recipe_stability(cfg, out.dir, checks);
        else if (e == "scatter") recipe_scatter(cfg, out.dir, checks);
        else if (e == "inverse") recipe_inverse(cfg, out.dir, checks);
        else recipe_norms(cfg, out.dir, checks);
        out.exit_code = checks.all_gates_pass() ? kPass : kCheckFailure;
    } catch (const InvalidArgument& e) {
        out.exit_code = kUsageError;
        out.error = e.what();
        io::write_json(out.dir / "error.json", io::error_json(e));
    } catch (const Error& e) {
        out.exit_code = kNumericAbort;
        out.error = e.what();
        io::write_json(out.dir / "error.json", io::error_json(e));
    }
    out.checks = checks.checks();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.error.empty()) {
        json cj = json::array();
        for (const auto& c : out.checks) cj.push_back(c.to_json());
        io::write_json(out.dir / "checks.json", cj);
    }
    meta["status"] = out.exit_code == kPass ? "pass" : out.exit_code == kCheckFailure ? "check-failure" : "error";
    meta["exit_code"] = out.exit_code;
    meta["wall_seconds"] = secs;
    io::write_json(out.dir / "meta.json", meta);
    return out;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string format_table(const std::vector<Check>& checks) {
    std::ostringstream os;
    os << std::left << std::setw(58) << "name" << std::setw(14) << "measured" << std::setw(14) << "expected"
       << std::setw(12) << "tol" << "result\n";
    for (const auto& c : checks) {
        std::string verdict = c.pass() ? "pass" : "FAIL";
        if (!c.gate) verdict += " (info)";
        const std::string expected = c.kind == Check::Kind::near ? io::fmt(c.expected).substr(0, 12)
                                     : c.kind == Check::Kind::at_most ? "<= bound" : ">= bound";
        std::ostringstream m, t;
        m << std::setprecision(6) << c.measured;
        t << std::setprecision(3) << c.tol;
        os << std::left << std::setw(58) << c.name.substr(0, 57) << std::setw(14) << m.str() << std::setw(14)
           << expected << std::setw(12) << t.str() << verdict << '\n';
    }
    return os.str();
}

struct ReportOutcome {
    int exit_code = kPass;
    json summary;
    std::string text;
};

inline Check check_from_json(const json& j) {
    Check c;
    c.name = j.at("name").get<std::string>();
    c.measured = j.at("measured").is_number() ? j.at("measured").get<double>() : NAN;
    c.expected = j.at("expected").get<double>();
    c.tol = j.at("tol").get<double>();
    const auto k = j.at("kind").get<std::string>();
    c.kind = k == "near" ? Check::Kind::near : k == "at_least" ? Check::Kind::at_least : Check::Kind::at_most;
    c.gate = j.at("gate").get<bool>();
    c.note = j.value("note", "");
    return c;
}

/// Collates a run directory: table of checks, summary.json and plot-ready
/// CSV files.  Throws io::ArtifactError on a missing or corrupt directory.
inline ReportOutcome report(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw io::ArtifactError("run directory not found: " + dir.string());
    const json meta = io::read_json(dir / "meta.json");
    ReportOutcome out;
    out.summary = {{"experiment", meta.value("experiment", "")}, {"status", meta.value("status", "")}};
    if (fs::exists(dir / "error.json")) {
        out.summary["error"] = io::read_json(dir / "error.json");
        out.text = "run failed: " + out.summary["error"].value("message", "") + "\n";
        out.exit_code = meta.value("exit_code", static_cast<int>(kNumericAbort));
        io::write_json(dir / "summary.json", out.summary);
        return out;
    }
    const json cj = io::read_json(dir / "checks.json");
    if (!cj.is_array()) throw io::ArtifactError("checks.json is not a list");
    std::vector<Check> checks;
    try {
        for (const auto& j : cj) checks.push_back(check_from_json(j));
    } catch (const json::exception& e) {
        throw io::ArtifactError(std::string("corrupt checks.json: ") + e.what());
    }
    json rows = json::array();
    bool ok = true;
    for (const auto& c : checks) {
        rows.push_back({{"name", c.name}, {"measured", c.measured}, {"expected", c.expected}, {"tol", c.tol},
                        {"pass", c.pass()}, {"gate", c.gate}});
        if (c.gate && !c.pass()) ok = false;
    }
    out.summary["checks"] = rows;
    out.exit_code = ok ? kPass : kCheckFailure;
    out.text = "experiment: " + meta.value("experiment", std::string("?")) + "\n" + format_table(checks);

    json plots = json::array();
    if (fs::exists(dir / "modulation.csv")) {
        const auto tab = io::read_csv(dir / "modulation.csv");
        const auto it = tab.column("t"), ic = tab.column("c"), iy = tab.column("y");
        const double y0 = tab.rows.empty() ? 0.0 : tab.rows.front()[iy];
        std::vector<std::vector<double>> r;
        for (const auto& row : tab.rows) {
            r.push_back({row[it], row[ic], row[iy] - y0 - row[ic] * row[ic] * (row[it] - tab.rows.front()[it])});
        }
        io::write_csv(dir / "plot_modulation.csv", {"t", "c", "y_minus_c2t"}, r);
        plots.push_back("plot_modulation.csv");
    }
    if (fs::exists(dir / "residual_curve.csv")) {
        const auto tab = io::read_csv(dir / "residual_curve.csv");
        io::write_csv(dir / "plot_residuals.csv", tab.header, tab.rows);
        plots.push_back("plot_residuals.csv");
    }
    if (fs::exists(dir / "virial.csv")) {
        const auto tab = io::read_csv(dir / "virial.csv");
        std::vector<std::vector<double>> r;
        bool monotone = true;
        for (std::size_t i = 0; i < tab.rows.size(); ++i) {
            double d = 0.0;
            if (i > 0) {
                d = (tab.rows[i][1] - tab.rows[i - 1][1]) / (tab.rows[i][0] - tab.rows[i - 1][0]);
                if (d > 1e-7) monotone = false;
            }
            r.push_back({tab.rows[i][0], tab.rows[i][1], d});
        }
        io::write_csv(dir / "plot_virial.csv", {"t", "I_eta", "dI_eta_dt"}, r);
        plots.push_back("plot_virial.csv");
        out.summary["virial_monotone"] = monotone;
        out.text += std::string("I_eta sequence: ") + (monotone ? "non-increasing" : "not monotone") + "\n";
    }
    out.summary["plots"] = plots;
    io::write_json(dir / "summary.json", out.summary);
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps

/// Worker count: GKDV_LAB_THREADS when set to a positive integer, else the
/// hardware concurrency, never more than the number of jobs.
inline std::size_t sweep_threads(std::size_t jobs) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GKDV_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) n = static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

/// "section.key=v1,v2,..." into one configuration per value, each writing to
/// <output_dir>/<key>=<value>.
inline std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("sweep '" + spec + "' is not of the form key=v1,v2,...");
    const std::string key = spec.substr(0, eq);
    const auto values = io::split(spec.substr(eq + 1));
    if (values.empty()) throw ConfigError("sweep '" + spec + "' lists no values");
    std::vector<ExperimentConfig> out;
    for (const auto& v : values) {
        ExperimentConfig c = base;
        c.set(key, v);
        c.run.output_dir = (fs::path(base.run.output_dir) / (key + "=" + v)).string();
        c.validate();
        out.push_back(std::move(c));
    }
    return out;
}

/// Runs independent configurations on a capped worker pool; returns the
/// largest exit code.
inline int sweep(const std::vector<ExperimentConfig>& configs, std::ostream& log) {
    std::vector<RunOutcome> outcomes(configs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            outcomes[i] = run(configs[i]);
            std::lock_guard lock(log_mutex);
            log << outcomes[i].dir.string() << ": exit " << outcomes[i].exit_code << '\n';
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n = sweep_threads(configs.size());
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    int code = kPass;
    json summary = json::array();
    for (const auto& o : outcomes) {
        code = std::max(code, o.exit_code);
        summary.push_back({{"dir", o.dir.string()}, {"exit_code", o.exit_code}});
    }
    if (!configs.empty()) {
        io::write_json(fs::path(configs.front().run.output_dir).parent_path() / "sweep.json",
                       {{"threads", n}, {"runs", summary}});
    }
    return code;
}

}  // namespace gkdv::lab
