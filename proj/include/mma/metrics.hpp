#ifndef MMA_METRICS_HPP
#define MMA_METRICS_HPP

#include <vector>

#include "mma/channel.hpp"

namespace mma {

/// Combined channel-equalizer impulse response t = h * conj(w) (linear
/// convolution; the conjugate matches the y = w^H x output convention).
CVector combined_response(const ChannelModel& h, const CVector& w);

/// (sum_i |t_i|^2 - max_i |t_i|^2) / max_i |t_i|^2.
double isi_ratio(const CVector& t);

/// 10 log10(mean of linear ratios), floored at -150 dB.
double isi_ensemble_db(const std::vector<double>& ratios);

inline constexpr double kIsiFloorDb = -150.0;

}  // namespace mma

#endif
