#ifndef MMA_CHANNEL_HPP
#define MMA_CHANNEL_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>

namespace mma {

using CVector = Eigen::VectorXcd;

/// Baud-spaced FIR channel impulse response.
struct ChannelModel {
    CVector taps;
    std::string name;
};

/// Additive circular complex Gaussian noise at a given output-referred SNR.
struct NoiseSpec {
    bool enabled = false;
    double snr_db = 0.0;
    std::uint64_t seed = 0;

    static NoiseSpec off() { return {}; }
    static NoiseSpec at(double snr_db, std::uint64_t seed) {
        return {true, snr_db, seed};
    }
};

/// Returns one of the built-in channels: "channel-1" (7-tap voice-band
/// telephone channel), "channel-2" (9 taps, large eigen-spread) or "identity".
ChannelModel builtin_channel(std::string_view id);

/// Causal convolution of `symbols` with the channel taps (zero initial state)
/// plus AWGN. Noise variance is sigma^2 = P_sig / 10^(snr_db/10) with the
/// signal power P_sig = symbol_power * sum_k |h_k|^2 computed analytically;
/// the variance is split equally between real and imaginary parts.
CVector transmit(const CVector& symbols, const ChannelModel& ch,
                 const NoiseSpec& noise, double symbol_power);

/// Sliding observation window [x_n, x_{n-1}, ..., x_{n-N+1}], zero-filled
/// before the start of the sequence.
CVector regressor(const CVector& received, Eigen::Index n, Eigen::Index N);

}  // namespace mma

#endif
