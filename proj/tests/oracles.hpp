// Independent reference computations used by the tests. Nothing here calls
// into the sampler's own density or weight code.
#ifndef BNR_TESTS_ORACLES_HPP
#define BNR_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "bnr/core_types.hpp"

namespace oracle {

using HP = boost::multiprecision::cpp_bin_float_50;
using HPMatrix = Eigen::Matrix<HP, Eigen::Dynamic, Eigen::Dynamic>;
using HPVector = Eigen::Matrix<HP, Eigen::Dynamic, 1>;

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double se_mean = 0.0;
    double se_var = 0.0;
};

inline Moments moments(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = (v - m.mean) * (v - m.mean);
        m2 += d;
        m4 += d * d;
    }
    m.var = m2 / (n - 1.0);
    m4 /= n;
    m.se_mean = std::sqrt(m.var / n);
    m.se_var = std::sqrt(std::max(m4 - m.var * m.var, 0.0) / n);
    return m;
}

/// |mean - truth| <= k se and |var - truth| <= k se, with the standard
/// errors taken from the sample itself.
inline bool moments_match(const Moments& m, double mean, double var, double k = 3.0) {
    return std::abs(m.mean - mean) <= k * m.se_mean && std::abs(m.var - var) <= k * m.se_var;
}

/// Kolmogorov limiting survival function Q(t) = 2 sum (-1)^{j-1} exp(-2 j^2 t^2).
inline double kolmogorov_q(double t) {
    if (t < 1e-3) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = std::exp(-2.0 * j * j * t * t);
        sum += (j % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double ks_pvalue(double D, double ne) {
    const double s = std::sqrt(ne);
    return kolmogorov_q((s + 0.12 + 0.11 / s) * D);
}

/// Two-sample Kolmogorov-Smirnov p-value.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double D = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        D = std::max(D, std::abs(i / na - j / nb));
    }
    return ks_pvalue(D, na * nb / (na + nb));
}

/// One-sample KS statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double D = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = cdf(x[i]);
        D = std::max({D, (i + 1) / n - F, F - i / n});
    }
    return D;
}

/// Edge means by explicit loops: W_kl = sum_r u_rk lambda_r u_rl.
inline bnr::Vector edge_means(const bnr::Matrix& u, const std::vector<int>& lambda) {
    const auto V = u.cols();
    bnr::Vector W(V * (V - 1) / 2);
    Eigen::Index e = 0;
    for (Eigen::Index k = 0; k < V; ++k) {
        for (Eigen::Index l = k + 1; l < V; ++l) {
            double acc = 0.0;
            for (Eigen::Index r = 0; r < u.rows(); ++r) acc += u(r, k) * lambda[static_cast<std::size_t>(r)] * u(r, l);
            W(e++) = acc;
        }
    }
    return W;
}

inline HPMatrix to_hp(const bnr::Matrix& m) { return m.cast<HP>(); }
inline HPVector to_hp(const bnr::Vector& v) { return v.cast<HP>(); }

/// log N(x; 0, cov) by LU determinant and solve in 50-digit arithmetic.
inline HP log_mvn_zero_mean(const HPVector& x, const HPMatrix& cov) {
    const auto lu = cov.fullPivLu();
    const HP det = lu.determinant();
    const HPVector z = lu.solve(x);
    const HP two_pi = 2 * boost::multiprecision::atan(HP(1)) * 4;
    return -HP(0.5) * (HP(static_cast<int>(x.size())) * log(two_pi) + log(det) + x.dot(z));
}

/// A random symmetric positive-definite matrix with eigenvalues bounded away from 0.
template <typename Gen>
bnr::Matrix random_spd(Eigen::Index n, Gen&& normal) {
    bnr::Matrix A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = normal();
    bnr::Matrix S = A * A.transpose();
    S.diagonal().array() += 0.5;
    return S;
}

}  // namespace oracle

#endif
