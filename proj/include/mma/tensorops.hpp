#ifndef MMA_TENSOROPS_HPP
#define MMA_TENSOROPS_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

namespace mma {

using CMatrix = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Column-major stacking: element (i,j) of m lands at position j*rows + i.
template <typename Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> vec_of(
    const Eigen::MatrixBase<Derived>& m) {
    return m.reshaped();
}

/// Inverse of vec_of for square targets: mat_of(vec_of(A), N) == A.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> mat_of(
    const Eigen::MatrixBase<Derived>& v, Eigen::Index N) {
    if (v.size() != N * N) {
        throw std::invalid_argument("mat_of: vector length does not equal N^2");
    }
    return v.reshaped(N, N);
}

/// Kronecker product: entry [p(i-1)+r, q(j-1)+s] equals a_ij * b_rs.
template <typename DA, typename DB>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    using Mat = Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index p = b.rows(), q = b.cols();
    Mat out(a.rows() * p, a.cols() * q);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * p, j * q, p, q) = a(i, j) * b.derived();
        }
    }
    return out;
}

/// N^3-vector vec[z vec[z z^H]^T] used by the 3/4-term statistic and its
/// equalizer-side contraction argument.
CVec nested_vec_h(const CVec& z);

/// N^3-vector vec[z vec[z z^T]^T] used by the cubic-term statistic.
CVec nested_vec_t(const CVec& z);

/// Per-sample statistic x vec[x vec[x x^H]^T]^H, an N x N^3 matrix.
CMatrix sample_stat_2(const CVec& x);

/// Per-sample statistic x vec[x vec[x x^T]^T]^T, an N x N^3 matrix.
CMatrix sample_stat_3(const CVec& x);

/// Exponential/harmonic forgetting for the running moment estimates.
struct ForgettingPolicy {
    enum class Mode { fixed, harmonic };
    Mode mode = Mode::harmonic;
    double lambda = 0.0;  // used in fixed mode only

    static ForgettingPolicy harmonic() { return {Mode::harmonic, 0.0}; }
    static ForgettingPolicy fixed(double lambda);

    /// Weight lambda_n applied to the n-th sample (1-indexed). Harmonic mode
    /// gives 1/n, which makes the estimate the exact running mean.
    double weight(long n) const {
        return mode == Mode::harmonic ? 1.0 / static_cast<double>(n) : lambda;
    }
};

/// Running estimates of E[x x^H] (s1, N x N) and the two fourth-order
/// statistics (s2, s3, each N x N^3).
struct MomentSet {
    CMatrix s1, s2, s3;
    long count = 0;

    explicit MomentSet(Eigen::Index N)
        : s1(CMatrix::Zero(N, N)),
          s2(CMatrix::Zero(N, N * N * N)),
          s3(CMatrix::Zero(N, N * N * N)) {}

    Eigen::Index dim() const { return s1.rows(); }
};

/// S <- (1 - lambda_n) S + lambda_n f(x) for all three statistics.
void update_moments(MomentSet& m, const CVec& x, const ForgettingPolicy& policy);

/// Sample means of the three statistics over a batch; equal to running
/// update_moments under the harmonic policy.
MomentSet batch_moments(const std::vector<CVec>& regressors);

/// Sample mean of kron((x x^H)^T, x x^H), an N^2 x N^2 matrix.
CMatrix fourth_moment_kron(const std::vector<CVec>& regressors);

}  // namespace mma

#endif
