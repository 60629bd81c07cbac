#include "mma/constellation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace mma {

double Constellation::mean_power() const {
    double acc = 0.0;
    for (const auto& p : points) acc += std::norm(p);
    return acc / static_cast<double>(points.size());
}

Constellation make_square_qam(int order) {
    if (order < 4) {
        throw std::invalid_argument("QAM order must be at least 4, got " +
                                    std::to_string(order));
    }
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (side * side != order || side % 2 != 0) {
        throw std::invalid_argument(
            "QAM order must be a square with even side (4, 16, 64, ...), got " +
            std::to_string(order));
    }

    Constellation c;
    c.order = order;
    c.levels.reserve(side);
    for (int k = 0; k < side; ++k) {
        c.levels.push_back(static_cast<double>(2 * k - (side - 1)));
    }
    c.points.reserve(order);
    for (double re : c.levels) {
        for (double im : c.levels) {
            c.points.emplace_back(re, im);
        }
    }
    c.r_m = dispersion_constant(c);
    return c;
}

double dispersion_constant(const Constellation& c) {
    double m2 = 0.0;
    double m4 = 0.0;
    for (double l : c.levels) {
        const double l2 = l * l;
        m2 += l2;
        m4 += l2 * l2;
    }
    return m4 / m2;
}

std::vector<cdouble> draw_symbols(const Constellation& c, std::size_t count,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, c.points.size() - 1);
    std::vector<cdouble> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(c.points[pick(rng)]);
    }
    return out;
}

}  // namespace mma
