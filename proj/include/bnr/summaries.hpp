#ifndef BNR_SUMMARIES_HPP
#define BNR_SUMMARIES_HPP

#include <optional>
#include <vector>

#include "bnr/core_types.hpp"
#include "bnr/kernels.hpp"

namespace bnr {

/// Posterior probability that each node is influential: the pooled mean of xi.
Vector node_posterior_probability(const PosteriorDraws& draws,
                                  Execution mode = Execution::Parallel);

struct EdgeIntervals {
    Vector lower;
    Vector upper;
    /// True where the interval excludes zero.
    std::vector<bool> influential;
};

/// Equal-tailed pooled credible intervals for every gamma coordinate.
EdgeIntervals edge_credible_intervals(const PosteriorDraws& draws, double level = 0.95,
                                      Execution mode = Execution::Parallel);

/// B of the retained draw with the largest log joint density.
Matrix map_estimate_B(const PosteriorDraws& draws);

Vector posterior_mean_gamma(const PosteriorDraws& draws, Execution mode = Execution::Parallel);
Matrix posterior_mean_B(const PosteriorDraws& draws, Execution mode = Execution::Parallel);

/// Rates are empty when their denominator is zero.
struct ClassificationRates {
    std::optional<double> edge_fpr;
    std::optional<double> edge_fnr;
    std::optional<double> node_fpr;
    std::optional<double> node_fnr;
};

struct SummaryReport {
    Vector nodePP;
    EdgeIntervals edges;
    Matrix mapB;
    Matrix meanB;
    Vector meanGamma;
    double meanMu = 0.0;
    double level = 0.95;
    double ppThreshold = 0.5;
};

SummaryReport summarize(const PosteriorDraws& draws, double level = 0.95, double pp_threshold = 0.5,
                        Execution mode = Execution::Parallel);

/// Edge decisions from the credible-interval flags, node decisions from
/// PP > pp_threshold.
ClassificationRates classification_rates(const SummaryReport& summary,
                                         const std::vector<bool>& truth_edges,
                                         const std::vector<bool>& truth_nodes);

struct MseMetrics {
    double coefficient = 0.0;
    double response = 0.0;
};

/// Coefficient MSE compares meanGamma / 2 with the upper triangle of
/// truthB; response MSE compares meanMu + X meanGamma with y.
MseMetrics mse_metrics(const SummaryReport& summary, const Matrix& truthB, const NetworkDataset& data);

}  // namespace bnr

#endif
