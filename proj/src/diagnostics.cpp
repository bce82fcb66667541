#include "bnr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

namespace bnr {

Matrix rank_normalize(const Matrix& draws) {
    const Eigen::Index S = draws.size();
    Matrix out(draws.rows(), draws.cols());
    if (S == 0) return out;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(S));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const double* x = draws.data();
    std::stable_sort(order.begin(), order.end(), [x](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });

    const boost::math::normal_distribution<double> standard;
    const double denom = static_cast<double>(S) + 0.25;
    double* z = out.data();
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        // ranks i+1 .. j+1 share their average
        const double rank = 0.5 * static_cast<double>(i + j + 2);
        const double value = boost::math::quantile(standard, (rank - 0.375) / denom);
        for (std::size_t t = i; t <= j; ++t) z[order[t]] = value;
        i = j + 1;
    }
    return out;
}

namespace {

Matrix split_chains(const Matrix& draws) {
    const Eigen::Index n = draws.rows();
    const Eigen::Index half = n / 2;
    if (half < 2) {
        throw std::invalid_argument("split R-hat needs at least 4 draws per chain");
    }
    const Eigen::Index m = draws.cols();
    Matrix split(half, 2 * m);
    for (Eigen::Index c = 0; c < m; ++c) {
        split.col(2 * c) = draws.col(c).head(half);
        split.col(2 * c + 1) = draws.col(c).tail(half);
    }
    return split;
}

double rhat_of_split(const Matrix& z) {
    const double N = static_cast<double>(z.rows());
    const Eigen::Index m = z.cols();
    const Vector means = z.colwise().mean().transpose();
    double W = 0.0;
    for (Eigen::Index c = 0; c < m; ++c) {
        W += (z.col(c).array() - means(c)).square().sum() / (N - 1.0);
    }
    W /= static_cast<double>(m);
    double B = 0.0;
    if (m > 1) {
        B = N * (means.array() - means.mean()).square().sum() / static_cast<double>(m - 1);
    }
    if (!(W > 0.0)) {
        return B > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    const double var_plus = (N - 1.0) / N * W + B / N;
    // the ratio dips below 1 when the half-chains agree better than chance
    return std::max(1.0, std::sqrt(var_plus / W));
}

double median_of(const Matrix& draws) {
    std::vector<double> v(draws.data(), draws.data() + draws.size());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

}  // namespace

double split_rhat(const Matrix& draws) {
    return rhat_of_split(rank_normalize(split_chains(draws)));
}

double folded_split_rhat(const Matrix& draws) {
    const double med = median_of(draws);
    const Matrix folded = (draws.array() - med).abs().matrix();
    return split_rhat(folded);
}

double rhat(const Matrix& draws) {
    return std::max(split_rhat(draws), folded_split_rhat(draws));
}

ConvergenceReport assess_convergence(const PosteriorDraws& draws, double threshold, Execution mode) {
    draws.check_shape();
    if (draws.chains == 0) throw std::invalid_argument("assess_convergence: no chains");
    ConvergenceReport report;
    report.threshold = threshold;
    report.single_chain = draws.chains == 1;
    report.rhat_gamma = kernels::rhat_columns(draws.gamma, mode);
    report.rhat_xi = kernels::rhat_columns(draws.xi, mode);
    double max_rhat = -std::numeric_limits<double>::infinity();
    bool any_nan = false;
    for (const Vector* v : {&report.rhat_gamma, &report.rhat_xi}) {
        for (Eigen::Index i = 0; i < v->size(); ++i) {
            if (std::isnan((*v)(i))) any_nan = true;
            else max_rhat = std::max(max_rhat, (*v)(i));
        }
    }
    if (any_nan) max_rhat = std::numeric_limits<double>::quiet_NaN();
    else if (!std::isfinite(max_rhat) && max_rhat < 0) max_rhat = 1.0;
    report.max_rhat = max_rhat;
    report.converged = !any_nan && max_rhat <= threshold;
    return report;
}

}  // namespace bnr
