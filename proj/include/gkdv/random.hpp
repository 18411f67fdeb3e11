#pragma once

/// Reproducible random perturbations: band-limited noise under a Gaussian
/// envelope, normalized in L^2.
///
/// Spectrum: Fourier modes with k_min <= |xi| <= k_max receive independent
/// standard normal real and imaginary parts; all other modes are zero.  The
/// resulting field is multiplied by exp(-(x - center)^2 / (2 width^2)) and
/// scaled to the requested L^2 norm.

#include <cstdint>
#include <random>

#include "gkdv/errors.hpp"
#include "gkdv/grid.hpp"

namespace gkdv {

struct NoiseSpec {
    double amplitude = 1e-3;  // L^2 norm of the result
    double k_min = 0.5;
    double k_max = 4.0;
    double center = 0.0;
    double width = 4.0;
};

inline Field band_limited_noise(const GridSpec& grid, const NoiseSpec& spec, std::uint64_t seed) {
    if (!(spec.amplitude >= 0.0)) throw InvalidArgument("noise amplitude must be nonnegative");
    if (!(spec.k_min >= 0.0) || !(spec.k_max > spec.k_min)) throw InvalidArgument("noise band must satisfy 0 <= k_min < k_max");
    if (!(spec.width > 0.0)) throw InvalidArgument("noise envelope width must be positive");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<complex> half(grid.half_size(), complex(0.0, 0.0));
    bool any = false;
    for (std::size_t k = 1; k + 1 < half.size(); ++k) {
        const double re = normal(gen);
        const double im = normal(gen);
        const double xi = grid.wavenumber(k);
        if (xi >= spec.k_min && xi <= spec.k_max) {
            half[k] = complex(re, im);
            any = true;
        }
    }
    if (!any) throw InvalidArgument("noise band contains no resolved Fourier mode");
    Field f = irfft(grid, half);
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double z = (grid.x(j) - spec.center) / spec.width;
        f[j] *= std::exp(-0.5 * z * z);
    }
    const double norm = l2_norm(f);
    if (!(norm > 0.0)) throw InvalidArgument("noise vanished under the envelope");
    f *= spec.amplitude / norm;
    return f;
}

}  // namespace gkdv
