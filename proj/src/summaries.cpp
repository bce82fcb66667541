#include "bnr/summaries.hpp"

#include <limits>

namespace bnr {

namespace {

void require_draws(const PosteriorDraws& draws) {
    draws.check_shape();
    if (draws.chains == 0 || draws.retained == 0) {
        throw std::invalid_argument("summaries need at least one retained draw");
    }
}

std::optional<double> rate(std::size_t errors, std::size_t total) {
    if (total == 0) return std::nullopt;
    return static_cast<double>(errors) / static_cast<double>(total);
}

}  // namespace

Vector node_posterior_probability(const PosteriorDraws& draws, Execution mode) {
    require_draws(draws);
    return kernels::column_means(draws.xi, mode);
}

EdgeIntervals edge_credible_intervals(const PosteriorDraws& draws, double level, Execution mode) {
    require_draws(draws);
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("credible level must lie in (0, 1)");
    const double tail = (1.0 - level) / 2.0;
    const double probs[2] = {tail, 1.0 - tail};
    const Matrix qs = kernels::column_quantiles(draws.gamma, probs, mode);
    EdgeIntervals out;
    out.lower = qs.row(0).transpose();
    out.upper = qs.row(1).transpose();
    out.influential.resize(static_cast<std::size_t>(qs.cols()));
    for (Eigen::Index e = 0; e < qs.cols(); ++e) {
        out.influential[static_cast<std::size_t>(e)] = out.lower(e) > 0.0 || out.upper(e) < 0.0;
    }
    return out;
}

Matrix map_estimate_B(const PosteriorDraws& draws) {
    require_draws(draws);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_chain = 0;
    Eigen::Index best_row = 0;
    bool found = false;
    for (std::size_t c = 0; c < draws.chains; ++c) {
        for (Eigen::Index t = 0; t < draws.log_joint[c].size(); ++t) {
            const double lp = draws.log_joint[c](t);
            if (!found || lp > best) {
                best = lp;
                best_chain = c;
                best_row = t;
                found = true;
            }
        }
    }
    return gamma_to_B(draws.gamma[best_chain].row(best_row).transpose());
}

Vector posterior_mean_gamma(const PosteriorDraws& draws, Execution mode) {
    require_draws(draws);
    return kernels::column_means(draws.gamma, mode);
}

Matrix posterior_mean_B(const PosteriorDraws& draws, Execution mode) {
    return gamma_to_B(posterior_mean_gamma(draws, mode));
}

SummaryReport summarize(const PosteriorDraws& draws, double level, double pp_threshold, Execution mode) {
    SummaryReport s;
    s.level = level;
    s.ppThreshold = pp_threshold;
    s.nodePP = node_posterior_probability(draws, mode);
    s.edges = edge_credible_intervals(draws, level, mode);
    s.mapB = map_estimate_B(draws);
    s.meanGamma = posterior_mean_gamma(draws, mode);
    s.meanB = gamma_to_B(s.meanGamma);
    double mu_sum = 0.0;
    for (const auto& m : draws.mu) mu_sum += m.sum();
    s.meanMu = mu_sum / static_cast<double>(draws.chains * draws.retained);
    return s;
}

ClassificationRates classification_rates(const SummaryReport& summary,
                                         const std::vector<bool>& truth_edges,
                                         const std::vector<bool>& truth_nodes) {
    if (truth_edges.size() != summary.edges.influential.size()) {
        throw std::invalid_argument("truth edge vector length does not match the summary");
    }
    if (truth_nodes.size() != static_cast<std::size_t>(summary.nodePP.size())) {
        throw std::invalid_argument("truth node vector length does not match the summary");
    }
    std::size_t neg = 0, pos = 0, fp = 0, fn = 0;
    for (std::size_t e = 0; e < truth_edges.size(); ++e) {
        const bool call = summary.edges.influential[e];
        if (truth_edges[e]) {
            ++pos;
            if (!call) ++fn;
        } else {
            ++neg;
            if (call) ++fp;
        }
    }
    ClassificationRates r;
    r.edge_fpr = rate(fp, neg);
    r.edge_fnr = rate(fn, pos);
    neg = pos = fp = fn = 0;
    for (std::size_t k = 0; k < truth_nodes.size(); ++k) {
        const bool call = summary.nodePP(static_cast<Eigen::Index>(k)) > summary.ppThreshold;
        if (truth_nodes[k]) {
            ++pos;
            if (!call) ++fn;
        } else {
            ++neg;
            if (call) ++fp;
        }
    }
    r.node_fpr = rate(fp, neg);
    r.node_fnr = rate(fn, pos);
    return r;
}

MseMetrics mse_metrics(const SummaryReport& summary, const Matrix& truthB, const NetworkDataset& data) {
    const auto V = static_cast<Eigen::Index>(data.V());
    if (truthB.rows() != V || truthB.cols() != V ||
        summary.meanGamma.size() != static_cast<Eigen::Index>(data.q())) {
        throw std::invalid_argument("mse_metrics: dimension mismatch");
    }
    MseMetrics m;
    double acc = 0.0;
    Eigen::Index e = 0;
    for (Eigen::Index k = 0; k < V; ++k) {
        for (Eigen::Index l = k + 1; l < V; ++l) {
            const double d = summary.meanGamma(e++) / 2.0 - truthB(k, l);
            acc += d * d;
        }
    }
    m.coefficient = e > 0 ? acc / static_cast<double>(e) : 0.0;
    const Vector fitted = (data.X() * summary.meanGamma).array() + summary.meanMu;
    m.response = (fitted - data.y()).squaredNorm() / static_cast<double>(data.n());
    return m;
}

}  // namespace bnr
