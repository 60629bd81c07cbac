#ifndef MMA_EQUALIZER_HPP
#define MMA_EQUALIZER_HPP

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

#include "mma/tensorops.hpp"

namespace mma {

/// Thrown when an update produces non-finite equalizer taps.
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& what, long index)
        : std::runtime_error(what), index_(index) {}
    long index() const { return index_; }

private:
    long index_;
};

/// Equalizer output y = w^H x.
std::complex<double> equalize(const CVec& w, const CVec& x);

/// One stochastic MMA2-2 update:
/// w' = w + mu (R_m - y_R^2) y_R x - j mu (R_m - y_I^2) y_I x.
CVec mma_stochastic_step(const CVec& w, const CVec& x, double mu, double r_m);

/// Per-sample integrand of the expected-gradient form:
/// (R_m x^H w - (3/4)(x^H w)^2 w^H x - (1/4)(w^H x)^3) x.
/// Identically equal to the stochastic error term times x.
CVec per_sample_identity_rhs(const CVec& w, const CVec& x, double r_m);

/// Feedforward steepest-descent gradient from accumulated statistics:
/// g = R_m S1 w - (3/4) S2 vec[w vec[w w^H]^T]
///             - (1/4) S3 conj(vec[w vec[w w^T]^T]).
CVec sd_gradient(const MomentSet& m, const CVec& w, double r_m);

/// State of one SD-MMA2-2 run.
struct SdState {
    CVec taps;
    MomentSet moments;
    ForgettingPolicy policy;
    double mu;
    double r_m;
};

/// One SD-MMA2-2 symbol update: the statistics absorb x first, then
/// taps += mu * sd_gradient.
void sd_step(SdState& state, const CVec& x);

/// 3/4-term via the Kronecker route: mat[k4 vec[w w^H]] w, where k4 is the
/// fourth_moment_kron statistic.
CVec kron_gradient_34(const CMatrix& k4, const CVec& w);

/// Raw fixed-point map
/// w' = (S1)^-1 / (4 R_m) (3 S2 vec[w vec[w w^H]^T]
///                           + S3 conj(vec[w vec[w w^T]^T])).
/// Known to diverge when iterated; kept for fixed-point consistency checks.
CVec fp_fixed_point_raw(const MomentSet& m, const CVec& w, double r_m);

/// Stabilized fixed-point step w' = w + mu * sd_gradient(m, w, r_m) with
/// frozen (batch) moments.
CVec fp_stabilized_step(const MomentSet& m, const CVec& w, double mu, double r_m);

struct FpResult {
    CVec taps;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Iterates fp_stabilized_step until ||g|| / max(||w||, 1) < tol or max_iters.
/// Non-convergence is reported through the result, not as an error. The
/// optional observer sees (iteration, taps) after each step.
FpResult fp_solve(const MomentSet& m, const CVec& w0, double mu, double r_m,
                  double tol, int max_iters,
                  const std::function<void(int, const CVec&)>& observer = {});

}  // namespace mma

#endif
