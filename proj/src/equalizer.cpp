#include "mma/equalizer.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>

namespace mma {

using cd = std::complex<double>;

namespace {

void check_lengths(const CVec& w, const CVec& x, const char* where) {
    if (w.size() != x.size()) {
        throw std::invalid_argument(std::string(where) + ": length mismatch");
    }
}

void check_dims(const MomentSet& m, const CVec& w, const char* where) {
    if (m.dim() != w.size()) {
        throw std::invalid_argument(std::string(where) + ": dimension mismatch");
    }
}

}  // namespace

cd equalize(const CVec& w, const CVec& x) {
    check_lengths(w, x, "equalize");
    return w.dot(x);  // Eigen's dot conjugates the first operand
}

CVec mma_stochastic_step(const CVec& w, const CVec& x, double mu, double r_m) {
    if (!(mu > 0.0)) throw std::invalid_argument("mma_stochastic_step: mu must be > 0");
    const cd y = equalize(w, x);
    const double yr = y.real();
    const double yi = y.imag();
    const cd err = cd(mu * (r_m - yr * yr) * yr, 0.0) -
                   cd(0.0, mu * (r_m - yi * yi) * yi);
    CVec next = w + err * x;
    if (!next.allFinite()) {
        throw divergence_error("mma_stochastic_step: non-finite taps", -1);
    }
    return next;
}

CVec per_sample_identity_rhs(const CVec& w, const CVec& x, double r_m) {
    check_lengths(w, x, "per_sample_identity_rhs");
    const cd y = w.dot(x);       // w^H x
    const cd yc = std::conj(y);  // x^H w
    const cd scale = r_m * yc - 0.75 * yc * yc * y - 0.25 * y * y * y;
    return scale * x;
}

CVec sd_gradient(const MomentSet& m, const CVec& w, double r_m) {
    check_dims(m, w, "sd_gradient");
    CVec g = r_m * (m.s1 * w);
    g.noalias() -= 0.75 * (m.s2 * nested_vec_h(w));
    g.noalias() -= 0.25 * (m.s3 * nested_vec_t(w).conjugate());
    return g;
}

void sd_step(SdState& state, const CVec& x) {
    MomentSet& m = state.moments;
    const Eigen::Index N = m.dim();
    if (x.size() != N) {
        throw std::invalid_argument("sd_step: regressor length mismatch");
    }
    ++m.count;
    const double lam = state.policy.weight(m.count);
    const double keep = 1.0 - lam;

    m.s1 *= keep;
    m.s1.noalias() += lam * x * x.adjoint();

    // Single sweep per statistic: refresh each column and contract it with
    // the current taps in the same pass. The matrices are large enough that
    // separate update and matvec passes are memory-bound.
    const CVec u2 = nested_vec_h(x);
    const CVec u3 = nested_vec_t(x);
    const CVec v2 = nested_vec_h(state.taps);
    const CVec v3c = nested_vec_t(state.taps).conjugate();

    const Eigen::Index N3 = N * N * N;
    CVec g2 = CVec::Zero(N);
    CVec g3 = CVec::Zero(N);
    {
        const cd* xp = x.data();
        cd* s2p = m.s2.data();
        cd* s3p = m.s3.data();
        cd* g2p = g2.data();
        cd* g3p = g3.data();
        for (Eigen::Index c = 0; c < N3; ++c) {
            const cd a2 = lam * std::conj(u2(c));
            const cd a3 = lam * u3(c);
            const cd b2 = v2(c);
            const cd b3 = v3c(c);
            cd* col2 = s2p + c * N;
            cd* col3 = s3p + c * N;
            for (Eigen::Index i = 0; i < N; ++i) {
                const cd t2 = keep * col2[i] + a2 * xp[i];
                col2[i] = t2;
                g2p[i] += b2 * t2;
                const cd t3 = keep * col3[i] + a3 * xp[i];
                col3[i] = t3;
                g3p[i] += b3 * t3;
            }
        }
    }

    state.taps += state.mu * (state.r_m * (m.s1 * state.taps) - 0.75 * g2 - 0.25 * g3);
    if (!state.taps.allFinite()) {
        throw divergence_error(
            "sd_step: non-finite taps at symbol " + std::to_string(m.count), m.count);
    }
}

CVec kron_gradient_34(const CMatrix& k4, const CVec& w) {
    const Eigen::Index N = w.size();
    if (k4.rows() != N * N || k4.cols() != N * N) {
        throw std::invalid_argument("kron_gradient_34: dimension mismatch");
    }
    const CVec contracted = k4 * vec_of((w * w.adjoint()).eval());
    return mat_of(contracted, N) * w;
}

CVec fp_fixed_point_raw(const MomentSet& m, const CVec& w, double r_m) {
    check_dims(m, w, "fp_fixed_point_raw");
    Eigen::JacobiSVD<CMatrix> svd(m.s1);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(std::isfinite(cond) && cond < 1e12)) {
        throw std::invalid_argument(
            "fp_fixed_point_raw: S^I ill-conditioned (cond ~ " + std::to_string(cond) + ")");
    }
    const CVec rhs = 3.0 * (m.s2 * nested_vec_h(w)) +
                     m.s3 * nested_vec_t(w).conjugate();
    return m.s1.partialPivLu().solve(rhs) / (4.0 * r_m);
}

CVec fp_stabilized_step(const MomentSet& m, const CVec& w, double mu, double r_m) {
    if (!(mu > 0.0)) throw std::invalid_argument("fp_stabilized_step: mu must be > 0");
    CVec next = w + mu * sd_gradient(m, w, r_m);
    if (!next.allFinite()) {
        throw divergence_error("fp_stabilized_step: non-finite taps", -1);
    }
    return next;
}

FpResult fp_solve(const MomentSet& m, const CVec& w0, double mu, double r_m,
                  double tol, int max_iters,
                  const std::function<void(int, const CVec&)>& observer) {
    if (!(tol > 0.0)) throw std::invalid_argument("fp_solve: tol must be > 0");
    if (max_iters < 1) throw std::invalid_argument("fp_solve: max_iters must be >= 1");

    FpResult res;
    res.taps = w0;
    for (int it = 0; it < max_iters; ++it) {
        const CVec g = sd_gradient(m, res.taps, r_m);
        res.residual = g.norm() / std::max(res.taps.norm(), 1.0);
        if (res.residual < tol) {
            res.converged = true;
            return res;
        }
        res.taps += mu * g;
        if (!res.taps.allFinite()) {
            throw divergence_error("fp_solve: diverged at iteration " + std::to_string(it + 1),
                                   it + 1);
        }
        res.iterations = it + 1;
        if (observer) observer(res.iterations, res.taps);
    }
    const CVec g = sd_gradient(m, res.taps, r_m);
    res.residual = g.norm() / std::max(res.taps.norm(), 1.0);
    res.converged = res.residual < tol;
    return res;
}

}  // namespace mma
