#include "bnr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bnr/diagnostics.hpp"

namespace bnr::kernels {

void for_each_index(std::size_t n, Execution mode, const std::function<void(std::size_t)>& fn) {
    if (mode == Execution::Serial) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

Matrix gather_column(const std::vector<Matrix>& per_chain, Eigen::Index j) {
    if (per_chain.empty()) return Matrix();
    const Eigen::Index rows = per_chain.front().rows();
    Matrix out(rows, static_cast<Eigen::Index>(per_chain.size()));
    for (std::size_t c = 0; c < per_chain.size(); ++c) {
        if (per_chain[c].rows() != rows) {
            throw std::invalid_argument("chains have mismatched lengths");
        }
        out.col(static_cast<Eigen::Index>(c)) = per_chain[c].col(j);
    }
    return out;
}

Vector rhat_columns(const std::vector<Matrix>& per_chain, Execution mode) {
    if (per_chain.empty()) return Vector();
    const Eigen::Index cols = per_chain.front().cols();
    Vector out(cols);
    for_each_index(static_cast<std::size_t>(cols), mode, [&](std::size_t j) {
        const auto col = static_cast<Eigen::Index>(j);
        out(col) = rhat(gather_column(per_chain, col));
    });
    return out;
}

Matrix column_quantiles(const std::vector<Matrix>& per_chain, std::span<const double> probs,
                        Execution mode) {
    if (per_chain.empty()) throw std::invalid_argument("column_quantiles: no draws");
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
    }
    const Eigen::Index cols = per_chain.front().cols();
    Matrix out(static_cast<Eigen::Index>(probs.size()), cols);
    for_each_index(static_cast<std::size_t>(cols), mode, [&](std::size_t j) {
        const auto col = static_cast<Eigen::Index>(j);
        const Matrix pooled = gather_column(per_chain, col);
        std::vector<double> v(pooled.data(), pooled.data() + pooled.size());
        if (v.empty()) throw std::invalid_argument("column_quantiles: no draws");
        std::sort(v.begin(), v.end());
        const double last = static_cast<double>(v.size() - 1);
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const double h = last * probs[i];
            const auto lo = static_cast<std::size_t>(std::floor(h));
            const std::size_t hi = std::min(lo + 1, v.size() - 1);
            const double frac = h - static_cast<double>(lo);
            out(static_cast<Eigen::Index>(i), col) = frac == 0.0 ? v[lo] : v[lo] + frac * (v[hi] - v[lo]);
        }
    });
    return out;
}

Vector column_means(const std::vector<Matrix>& per_chain, Execution mode) {
    if (per_chain.empty()) throw std::invalid_argument("column_means: no draws");
    const Eigen::Index cols = per_chain.front().cols();
    Vector out(cols);
    for_each_index(static_cast<std::size_t>(cols), mode, [&](std::size_t j) {
        const auto col = static_cast<Eigen::Index>(j);
        double sum = 0.0;
        Eigen::Index count = 0;
        for (const auto& m : per_chain) {
            sum += m.col(col).sum();
            count += m.rows();
        }
        if (count == 0) throw std::invalid_argument("column_means: no draws");
        out(col) = sum / static_cast<double>(count);
    });
    return out;
}

}  // namespace bnr::kernels
