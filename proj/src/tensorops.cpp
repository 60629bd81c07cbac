#include "mma/tensorops.hpp"

namespace mma {

CVec nested_vec_h(const CVec& z) {
    const CVec inner = vec_of((z * z.adjoint()).eval());
    return vec_of((z * inner.transpose()).eval());
}

CVec nested_vec_t(const CVec& z) {
    const CVec inner = vec_of((z * z.transpose()).eval());
    return vec_of((z * inner.transpose()).eval());
}

CMatrix sample_stat_2(const CVec& x) { return x * nested_vec_h(x).adjoint(); }

CMatrix sample_stat_3(const CVec& x) { return x * nested_vec_t(x).transpose(); }

ForgettingPolicy ForgettingPolicy::fixed(double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("ForgettingPolicy: lambda must be in (0, 1]");
    }
    return {Mode::fixed, lambda};
}

void update_moments(MomentSet& m, const CVec& x, const ForgettingPolicy& policy) {
    const Eigen::Index N = m.dim();
    if (x.size() != N) {
        throw std::invalid_argument("update_moments: regressor length mismatch");
    }
    ++m.count;
    const double lam = policy.weight(m.count);
    const double keep = 1.0 - lam;

    const CVec u2 = nested_vec_h(x);
    const CVec u3 = nested_vec_t(x);

    m.s1 *= keep;
    m.s1.noalias() += lam * x * x.adjoint();
    m.s2 *= keep;
    m.s2.noalias() += lam * x * u2.adjoint();
    m.s3 *= keep;
    m.s3.noalias() += lam * x * u3.transpose();
}

MomentSet batch_moments(const std::vector<CVec>& regressors) {
    if (regressors.empty()) {
        throw std::invalid_argument("batch_moments: empty batch");
    }
    const Eigen::Index N = regressors.front().size();
    const Eigen::Index N3 = N * N * N;
    MomentSet m(N);
    m.count = static_cast<long>(regressors.size());

    // Chunked so the stacked per-sample N^3 statistics stay in memory bounds.
    const std::size_t chunk = 2048;
    CMatrix xs(N, 0), u2s(N3, 0), u3s(N3, 0);
    for (std::size_t start = 0; start < regressors.size(); start += chunk) {
        const Eigen::Index b = static_cast<Eigen::Index>(
            std::min(chunk, regressors.size() - start));
        xs.resize(N, b);
        u2s.resize(N3, b);
        u3s.resize(N3, b);
        for (Eigen::Index k = 0; k < b; ++k) {
            const CVec& x = regressors[start + k];
            if (x.size() != N) {
                throw std::invalid_argument("batch_moments: ragged batch");
            }
            xs.col(k) = x;
            u2s.col(k) = nested_vec_h(x);
            u3s.col(k) = nested_vec_t(x);
        }
        m.s1.noalias() += xs * xs.adjoint();
        m.s2.noalias() += xs * u2s.adjoint();
        m.s3.noalias() += xs * u3s.transpose();
    }
    const double inv = 1.0 / static_cast<double>(m.count);
    m.s1 *= inv;
    m.s2 *= inv;
    m.s3 *= inv;
    return m;
}

CMatrix fourth_moment_kron(const std::vector<CVec>& regressors) {
    if (regressors.empty()) {
        throw std::invalid_argument("fourth_moment_kron: empty batch");
    }
    const Eigen::Index N = regressors.front().size();
    CMatrix acc = CMatrix::Zero(N * N, N * N);
    for (const CVec& x : regressors) {
        const CMatrix outer = x * x.adjoint();
        acc += kron(outer.transpose(), outer);
    }
    return acc / static_cast<double>(regressors.size());
}

}  // namespace mma
