/// Perturbs a soliton, tracks (c, y) through the coupled modulation system
/// and prints the modulation log every unit of time.

#include <cstdio>

#include "gkdv/gkdv.hpp"

int main() {
    using namespace gkdv;
    const GridSpec grid(512, 60.0);
    const SolitonParams soliton{1.0, -10.0, 4};
    const Field noise = band_limited_noise(grid, {1e-3, 0.5, 3.0, soliton.y, 3.0}, 7);
    const ModulationState s0 = decompose(profile(soliton, grid) + noise, soliton);

    CoupledOptions opts;
    opts.stride = 500;
    const CoupledRun run = coupled_evolve(s0, 5.0, 2e-3, opts);
    std::printf("%6s %12s %12s %12s %12s\n", "t", "c", "y - t", "<w,Q>", "mass");
    for (const auto& s : run.states) {
        std::printf("%6.2f %12.8f %12.8f %12.3e %12.8f\n", s.t, s.c, s.y - soliton.y - s.t, s.ip_q, s.mass);
    }
    return 0;
}
