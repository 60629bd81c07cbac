#include "mma/channel.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

namespace mma {

namespace {

using cd = std::complex<double>;

CVector from_list(std::initializer_list<cd> taps) {
    CVector v(static_cast<Eigen::Index>(taps.size()));
    Eigen::Index i = 0;
    for (const auto& t : taps) v(i++) = t;
    return v;
}

}  // namespace

ChannelModel builtin_channel(std::string_view id) {
    if (id == "channel-1") {
        // Voice-band telephone channel.
        return {from_list({{-0.005, -0.004},
                           {0.009, 0.03},
                           {-0.024, -0.104},
                           {0.854, 0.52},
                           {-0.218, 0.273},
                           {0.049, -0.074},
                           {-0.016, 0.02}}),
                "channel-1"};
    }
    if (id == "channel-2") {
        // Large eigen-spread channel.
        return {from_list({{-0.023, -0.0345},
                           {0.0804, -0.0804},
                           {0.2068, -0.1149},
                           {0.678, 0.1378},
                           {0.1277, 0.0345},
                           {-0.1232, -0.1103},
                           {-0.023, -0.021},
                           {0.0176, 0.1196},
                           {0.0115, 0.0118}}),
                "channel-2"};
    }
    if (id == "identity") {
        return {from_list({{1.0, 0.0}}), "identity"};
    }
    throw std::invalid_argument("unknown channel id: " + std::string(id));
}

CVector transmit(const CVector& symbols, const ChannelModel& ch,
                 const NoiseSpec& noise, double symbol_power) {
    if (symbols.size() == 0) {
        throw std::invalid_argument("transmit: empty symbol sequence");
    }
    const Eigen::Index n = symbols.size();
    const Eigen::Index nt = ch.taps.size();

    CVector out = CVector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        cd acc(0.0, 0.0);
        const Eigen::Index kmax = std::min(nt - 1, i);
        for (Eigen::Index k = 0; k <= kmax; ++k) {
            acc += ch.taps(k) * symbols(i - k);
        }
        out(i) = acc;
    }

    if (noise.enabled) {
        const double p_sig = symbol_power * ch.taps.squaredNorm();
        const double sigma2 = p_sig * std::pow(10.0, -noise.snr_db / 10.0);
        const double s = std::sqrt(sigma2 / 2.0);
        std::mt19937_64 rng(noise.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            out(i) += cd(s * re, s * im);
        }
    }
    return out;
}

CVector regressor(const CVector& received, Eigen::Index n, Eigen::Index N) {
    if (n < 0 || n >= received.size()) {
        throw std::out_of_range("regressor: index out of range");
    }
    CVector w = CVector::Zero(N);
    for (Eigen::Index i = 0; i < N && n - i >= 0; ++i) {
        w(i) = received(n - i);
    }
    return w;
}

}  // namespace mma
