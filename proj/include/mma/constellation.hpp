#ifndef MMA_CONSTELLATION_HPP
#define MMA_CONSTELLATION_HPP

#include <complex>
#include <cstdint>
#include <vector>

namespace mma {

using cdouble = std::complex<double>;

/// Square-QAM alphabet together with its dispersion constant R_m.
struct Constellation {
    int order = 0;
    std::vector<cdouble> points;
    std::vector<double> levels;  // per-dimension amplitudes {±1, ±3, ...}
    double r_m = 0.0;

    /// Mean squared magnitude E[|s|^2] of a uniformly drawn point.
    double mean_power() const;
};

/// Builds the square QAM alphabet on the odd-integer lattice.
/// `order` must be an even power of two (4, 16, 64, ...).
Constellation make_square_qam(int order);

/// R_m = E[s_R^4] / E[s_R^2] with s_R uniform over the per-dimension levels.
double dispersion_constant(const Constellation& c);

/// i.i.d. uniform draws from c.points; identical (seed, count) gives an
/// identical sequence.
std::vector<cdouble> draw_symbols(const Constellation& c, std::size_t count,
                                  std::uint64_t seed);

}  // namespace mma

#endif
