/// Acceptance run: executes the shipped recipe configurations plus a few
/// direct measurements and prints one PASS/FAIL line per criterion.
///
/// usage: acceptance --configs <dir> --output <dir> [--expect-fail <id> ...]
///
/// A criterion listed with --expect-fail is still evaluated and printed; its
/// failure does not fail the run, but an unexpected pass is reported.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gkdv/gkdv.hpp"

using namespace gkdv;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Item {
    std::string label;
    double measured;
    double bound;
    bool pass;
};

struct Criterion {
    int id;
    std::string title;
    std::vector<Item> items;
    std::string error;

    bool pass() const {
        if (!error.empty() || items.empty()) return false;
        for (const auto& i : items) {
            if (!i.pass) return false;
        }
        return true;
    }
};

struct Recipe {
    lab::RunOutcome outcome;
    double seconds = 0.0;
};

class Acceptance {
public:
    Acceptance(fs::path configs, fs::path output) : configs_(std::move(configs)), output_(std::move(output)) {}

    Recipe run(const std::string& name) {
        auto cfg = lab::ExperimentConfig::from_file(configs_ / (name + ".ini"));
        cfg.run.output_dir = (output_ / name).string();
        const auto t0 = clock_type::now();
        Recipe r{lab::run(cfg), 0.0};
        r.seconds = seconds_since(t0);
        std::printf("  ran %-13s exit %d in %.1f s\n", name.c_str(), r.outcome.exit_code, r.seconds);
        std::fflush(stdout);
        return r;
    }

    /// Adds the named check of a recipe run, evaluated regardless of its gating flag.
    static void take(Criterion& c, const Recipe& r, const std::string& name) {
        for (const auto& k : r.outcome.checks) {
            if (k.name == name) {
                const bool near = k.kind == lab::Check::Kind::near;
                c.items.push_back({near ? k.name + " |defect|" : k.name,
                                   near ? std::abs(k.measured - k.expected) : k.measured, k.tol, k.pass()});
                return;
            }
        }
        c.error = "check '" + name + "' missing" + (r.outcome.error.empty() ? "" : ": " + r.outcome.error);
    }

    static void at_most(Criterion& c, const std::string& label, double v, double bound) {
        c.items.push_back({label, v, bound, std::isfinite(v) && v <= bound});
    }

    static void at_least(Criterion& c, const std::string& label, double v, double bound) {
        c.items.push_back({label, v, bound, std::isfinite(v) && v >= bound});
    }

private:
    fs::path configs_;
    fs::path output_;
};

/// Least-squares slope of log(error) against log(dt) for the traveling soliton.
double soliton_order(std::vector<double>& errs) {
    const GridSpec g(512, 60.0);
    const Field q0 = profile({}, g);
    const Field exact = profile({1.0, 1.0, 4}, g);
    const std::vector<double> dts{0.01, 0.005, 0.0025, 0.00125};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double dt : dts) {
        errs.push_back(l2_norm(gkdv_evolve(q0, 1.0, dt).back() - exact));
        const double x = std::log(dt), y = std::log(errs.back());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(dts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gkdv-lab acceptance"};
    std::string configs, output;
    std::vector<int> expect_fail;
    app.add_option("--configs", configs, "directory holding the recipe configurations")->required();
    app.add_option("--output", output, "scratch directory for run artifacts")->required();
    app.add_option("--expect-fail", expect_fail, "criteria whose failure is anticipated");
    CLI11_PARSE(app, argc, argv);
    const std::set<int> expected_failures(expect_fail.begin(), expect_fail.end());

    const auto t_all = clock_type::now();
    Acceptance acc(configs, output);
    std::vector<Criterion> crit;

    std::printf("running recipes\n");
    const Recipe spectrum = acc.run("spectrum");
    const Recipe identities = acc.run("identities");
    const Recipe linear = acc.run("linear-flows");
    const Recipe stability = acc.run("stability");
    const Recipe norms = acc.run("norms");
    const Recipe scatter = acc.run("scatter");
    const Recipe inverse = acc.run("inverse");

    {
        Criterion c{1, "ground state of L is -21/4 with eigenfield Q^(5/2)", {}, {}};
        Acceptance::take(c, spectrum, "ground eigenvalue");
        Acceptance::take(c, spectrum, "ground state shape Q^(5/2)");
        Acceptance::at_most(c, "spectrum runtime at n=1024 [s]", spectrum.seconds, 30.0);
        crit.push_back(c);
    }
    {
        Criterion c{2, "kernel L Q' = 0 and generalized kernel L Qtilde = -2Q", {}, {}};
        Acceptance::take(c, spectrum, "||L Q'||");
        Acceptance::take(c, spectrum, "||L Qtilde + 2c^2 Q||");
        crit.push_back(c);
    }
    {
        Criterion c{3, "soliton mass formula and scaling laws", {}, {}};
        Acceptance::take(c, identities, "soliton mass: quadrature vs Gamma formula");
        for (const char* cs : {"0.5", "2"}) {
            Acceptance::take(c, identities, std::string("||Q_c|| = c^(1/6)||Q_1|| at c=") + cs);
            Acceptance::take(c, identities, std::string("<Qtilde_c, Q_c> = ||Q_c||^2/6 at c=") + cs);
        }
        crit.push_back(c);
    }
    {
        Criterion c{4, "virial weight identities as stated and A = 75/4 - 12Q^3", {}, {}};
        Acceptance::take(c, identities, "eta' = Q^3");
        Acceptance::take(c, identities, "(eta''/eta')^2 = 9(1 - (2/3)Q^3) as stated");
        Acceptance::take(c, identities, "eta'''/eta' = 9(1 - (3/5)Q^3)");
        Acceptance::take(c, identities, "eta^2 = (25/9)(1 - (2/5)Q^3)");
        Acceptance::take(c, identities, "(Q^3 eta)' = -5Q^3 + 3Q^6");
        Acceptance::take(c, identities, "A = 75/4 - 12Q^3 assembled");
        crit.push_back(c);
    }
    {
        Criterion c{5, "virial monotonicity under the v-flow", {}, {}};
        Acceptance::take(c, linear, "|d/dt I_eta(Q)| under the v-flow");
        Acceptance::take(c, linear, "max d/dt I_eta over 20 orthogonal samples");
        Acceptance::take(c, linear, "min dissipation over 20 orthogonal samples");
        crit.push_back(c);
    }
    {
        Criterion c{6, "explicit linear solutions and duality", {}, {}};
        Acceptance::take(c, linear, "u-flow from Qtilde vs Qtilde + 2tQ'");
        Acceptance::take(c, linear, "v-flow fixes Q");
        Acceptance::take(c, linear, "L-intertwining (u-flow to v-flow)");
        Acceptance::take(c, linear, "d_x-intertwining (v-flow to u-flow)");
        Acceptance::take(c, linear, "pairing <u, v> drift");
        crit.push_back(c);
    }
    {
        Criterion c{7, "conservation and integrator order", {}, {}};
        Acceptance::take(c, linear, "<L^+ v, v> relative drift");
        try {
            const GridSpec g(1024, 80.0);
            const Field psi = profile({}, g) + band_limited_noise(g, {1e-3, 0.5, 3.0, 0.0, 3.0}, 7);
            const auto traj = gkdv_evolve(psi, 1.0, 1e-3, {100, {}, false, 0.0});
            const auto& cons = traj.conserved();
            double dm = 0.0, de = 0.0;
            for (const auto& s : cons) {
                dm = std::max(dm, std::abs(s.mass - cons.front().mass) / cons.front().mass);
                de = std::max(de, std::abs(s.energy - cons.front().energy) / std::abs(cons.front().energy));
            }
            Acceptance::at_most(c, "gKdV relative mass drift on [0,1], dt=1e-3", dm, 1e-8);
            Acceptance::at_most(c, "gKdV relative energy drift on [0,1], dt=1e-3", de, 1e-8);
            std::vector<double> errs;
            const double slope = soliton_order(errs);
            Acceptance::at_least(c, "error reduction per dt halving (least squares)", std::pow(2.0, slope), 12.0);
        } catch (const std::exception& e) {
            c.error = e.what();
        }
        crit.push_back(c);
    }
    {
        Criterion c{8, "modulation: exact decomposition, reconstruction, laws, stability", {}, {}};
        try {
            const GridSpec g(1024, 80.0);
            double worst = 0.0;
            for (const SolitonParams p : {SolitonParams{1.3, 2.1, 4}, SolitonParams{0.8, -4.0, 4}}) {
                const auto s = decompose(profile(p, g), SolitonParams{p.c * 0.97, p.y + 0.2, 4});
                worst = std::max({worst, std::abs(s.c - p.c), std::abs(s.y - p.y), l2_norm(s.w)});
            }
            Acceptance::at_most(c, "decompose on pure solitons", worst, 1e-10);
        } catch (const std::exception& e) {
            c.error = e.what();
        }
        Acceptance::take(c, stability, "coupled reconstruction vs direct gKdV at t=1");
        Acceptance::take(c, stability, "<w,Q> evolution law relative defect");
        Acceptance::take(c, stability, "<w,Q'> evolution law relative defect");
        Acceptance::take(c, stability, "sup |c - c0|");
        crit.push_back(c);
    }
    {
        Criterion c{9, "p-variation dynamic program and monotonicity in p", {}, {}};
        Acceptance::take(c, norms, "p-variation DP vs brute force (1000 series)");
        Acceptance::take(c, norms, "V^p >= V^q for p < q failures");
        crit.push_back(c);
    }
    {
        Criterion c{10, "scattering: forward decay, inverse mass identity, round trip", {}, {}};
        Acceptance::take(c, scatter, "Besov residual ratio T vs T/4");
        Acceptance::take(c, inverse, "mass identity relative defect");
        Acceptance::take(c, inverse, "forward scattering recovers v0 (relative L2)");
        Acceptance::at_most(c, "acceptance suite runtime [s]", seconds_since(t_all), 900.0);
        crit.push_back(c);
    }

    std::printf("\n");
    int unexpected = 0;
    for (const auto& c : crit) {
        const bool ok = c.pass();
        const bool anticipated = expected_failures.count(c.id) > 0;
        std::string verdict = ok ? "PASS" : "FAIL";
        if (anticipated) verdict += ok ? " (expected failure did not occur)" : " (expected)";
        if (!ok && !anticipated) ++unexpected;
        std::printf("criterion %2d %-4s %s\n", c.id, ok ? "PASS" : "FAIL", c.title.c_str());
        for (const auto& i : c.items) {
            std::printf("      %s %-58s %-13.6g bound %-10.3g\n", i.pass ? "ok  " : "FAIL", i.label.c_str(), i.measured,
                        i.bound);
        }
        if (!c.error.empty()) std::printf("      error: %s\n", c.error.c_str());
        if (anticipated) std::printf("      note: %s\n", verdict.c_str());
    }
    std::printf("\n%d unexpected failure(s); total %.0f s\n", unexpected, seconds_since(t_all));
    return unexpected == 0 ? 0 : 1;
}
