#ifndef BNR_DIAGNOSTICS_HPP
#define BNR_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "bnr/core_types.hpp"
#include "bnr/kernels.hpp"

namespace bnr {

// Draw matrices here are iterations x chains: column c holds chain c.

/// Pooled average ranks mapped through the normal quantile of
/// (rank - 3/8) / (S + 1/4), S = total number of draws.
Matrix rank_normalize(const Matrix& draws);

/// Rank-normalized split R-hat. Each chain is halved (the middle draw is
/// dropped when the length is odd). Zero within-chain variance gives 1 when
/// every draw is identical and +inf when half-chains sit at different
/// constants. Values below 1 are reported as 1.
double split_rhat(const Matrix& draws);

/// split_rhat of |x - median(x)|, sensitive to differences in scale.
double folded_split_rhat(const Matrix& draws);

/// max(split_rhat, folded_split_rhat).
double rhat(const Matrix& draws);

struct ConvergenceReport {
    Vector rhat_gamma;
    Vector rhat_xi;
    double max_rhat = 1.0;
    double threshold = 1.2;
    bool converged = true;
    /// Set when only one chain was supplied; R-hat then compares its halves.
    bool single_chain = false;
};

ConvergenceReport assess_convergence(const PosteriorDraws& draws, double threshold = 1.2,
                                     Execution mode = Execution::Parallel);

}  // namespace bnr

#endif
