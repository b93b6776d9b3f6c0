#pragma once

// Closed-form convergence and cost bounds, evaluated from the reference
// oracle's singular values. With alpha = 1 - 1/kappa_F^2:
//
//   ROP   E|z_k - b_perp|^2   <= alpha^k |b_range|^2
//   RK    E|x_k - x_LS|^2     <= alpha^k |x_0 - x_LS|^2          (consistent b)
//   RK    E|x_k - x*|^2       <= alpha^k |x*|^2 + |w|^2/sigma_min^2   (b = y + w)
//   REK   E|x_T - x_LS|^2     <= alpha^floor(T/2) (1 + 2 kappa^2) |x_LS|^2
//
// and REK terminates within
//   T* = 2 kappa_F^2 ln(32 (1 + 2 kappa^2) / (delta eps^2))
// iterations with probability at least 1 - delta.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "rek/errors.hpp"
#include "rek/matrix.hpp"
#include "rek/reference.hpp"

namespace rek {

struct TheoryBounds {
    double kappaFSq = 0.0;
    double condSq = 0.0;
    double ropRate = 0.0;  // alpha
    double rkRate = 0.0;   // alpha
    double tStar = 0.0;
    double forwardErrBound = 0.0;  // eps kappa_F (1 + kappa_F)
    double worstFlops = 0.0;       // 10 (m + n) rank kappa^2 ln(...)
    double expectedFlops = 0.0;    // 20 nnz kappa^2 ln(...)
    double xLsNormSq = 0.0;
    double bRangeNormSq = 0.0;
    double sigmaMinSq = 0.0;

    /// alpha^k, evaluated stably for alpha close to 1.
    double decay(double k) const { return std::exp(k * std::log1p(-1.0 / kappaFSq)); }

    double ropEnvelope(double k) const { return decay(k) * bRangeNormSq; }
    double rkEnvelope(double k, double initialErrSq) const { return decay(k) * initialErrSq; }
    double noisyRkEnvelope(double k, double initialErrSq, double noiseNormSq) const {
        return decay(k) * initialErrSq + noiseNormSq / sigmaMinSq;
    }
    double rekEnvelope(std::uint64_t T) const { return decay(double(T / 2)) * (1.0 + 2.0 * condSq) * xLsNormSq; }
};

/// The logarithmic factor ln(32 (1 + 2 kappa^2) / (delta eps^2)).
inline double iterationLog(double condSq, double eps, double delta) {
    return std::log(32.0 * (1.0 + 2.0 * condSq) / (delta * eps * eps));
}

inline TheoryBounds theoryBounds(const ReferenceSolution& ref, double eps, double delta) {
    if (!(eps > 0.0 && eps < 2.0)) throw InvalidRange("theoryBounds: eps must lie in (0, 2)");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidRange("theoryBounds: delta must lie in (0, 1)");
    TheoryBounds t;
    t.kappaFSq = ref.kappaFSq;
    t.condSq = ref.condSq;
    t.ropRate = 1.0 - 1.0 / ref.kappaFSq;
    t.rkRate = t.ropRate;
    const double lg = iterationLog(ref.condSq, eps, delta);
    t.tStar = 2.0 * ref.kappaFSq * lg;
    const double kappaF = std::sqrt(ref.kappaFSq);
    t.forwardErrBound = eps * kappaF * (1.0 + kappaF);
    t.worstFlops = 10.0 * double(ref.rows + ref.cols) * double(ref.rank) * ref.condSq * lg;
    t.expectedFlops = 20.0 * double(ref.nnz) * ref.condSq * lg;
    const double xn = norm2(ref.xLs);
    const double bn = norm2(ref.bRange);
    t.xLsNormSq = xn * xn;
    t.bRangeNormSq = bn * bn;
    t.sigmaMinSq = ref.sigmaMin() * ref.sigmaMin();
    return t;
}

/// Iteration cap used when none is given: ceil(2 T*), saturating.
inline std::uint64_t defaultMaxIters(const TheoryBounds& t) {
    const double cap = std::ceil(2.0 * t.tStar);
    if (!(cap < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return std::max<std::uint64_t>(1, std::uint64_t(cap));
}

}  // namespace rek
