#include "mma/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace mma {

CVector combined_response(const ChannelModel& h, const CVector& w) {
    const Eigen::Index nh = h.taps.size();
    const Eigen::Index nw = w.size();
    if (nh == 0 || nw == 0) {
        throw std::invalid_argument("combined_response: empty operand");
    }
    CVector t = CVector::Zero(nh + nw - 1);
    for (Eigen::Index k = 0; k < nh; ++k) {
        for (Eigen::Index m = 0; m < nw; ++m) {
            t(k + m) += h.taps(k) * std::conj(w(m));
        }
    }
    return t;
}

double isi_ratio(const CVector& t) {
    double total = 0.0;
    double peak = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        const double a = std::norm(t(i));
        total += a;
        peak = std::max(peak, a);
    }
    if (peak == 0.0) {
        throw std::invalid_argument("isi_ratio: all-zero response");
    }
    return (total - peak) / peak;
}

double isi_ensemble_db(const std::vector<double>& ratios) {
    if (ratios.empty()) {
        throw std::invalid_argument("isi_ensemble_db: empty input");
    }
    double mean = 0.0;
    for (double r : ratios) mean += r;
    mean /= static_cast<double>(ratios.size());
    if (mean < 1e-15) return kIsiFloorDb;
    return 10.0 * std::log10(mean);
}

}  // namespace mma
