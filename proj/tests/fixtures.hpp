#ifndef BNR_TESTS_FIXTURES_HPP
#define BNR_TESTS_FIXTURES_HPP

#include <random>

#include "bnr/gibbs.hpp"

namespace fixture {

using bnr::Matrix;
using bnr::Vector;

/// n random networks on V nodes: each edge present with probability 1/2,
/// weight Uniform(0.5, 1.5). Responses standard normal.
inline bnr::NetworkDataset random_dataset(std::size_t n, std::size_t V, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N;
    std::vector<Matrix> A;
    Vector y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        Matrix a = Matrix::Zero(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(V));
        for (Eigen::Index k = 0; k < a.rows(); ++k)
            for (Eigen::Index l = k + 1; l < a.cols(); ++l)
                if (U(gen) < 0.5) a(k, l) = a(l, k) = 0.5 + U(gen);
        A.push_back(std::move(a));
        y(static_cast<Eigen::Index>(i)) = N(gen);
    }
    return bnr::NetworkDataset(std::move(y), std::move(A));
}

/// A valid state with every block drawn at random (some nodes inactive).
inline bnr::ChainState random_state(std::size_t V, int R, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N;
    const auto q = static_cast<Eigen::Index>(bnr::edge_count(V));
    bnr::ChainState st;
    st.gamma.resize(q);
    st.s.resize(q);
    for (Eigen::Index e = 0; e < q; ++e) {
        st.gamma(e) = 2.0 * N(gen);
        st.s(e) = 0.2 + 2.0 * U(gen);
    }
    st.u = Matrix::Zero(R, static_cast<Eigen::Index>(V));
    st.xi.assign(V, 0);
    for (std::size_t k = 0; k < V; ++k) {
        st.xi[k] = U(gen) < 0.7 ? 1 : 0;
        if (st.xi[k])
            for (int r = 0; r < R; ++r) st.u(r, static_cast<Eigen::Index>(k)) = N(gen);
    }
    st.lambda.resize(static_cast<std::size_t>(R));
    for (auto& l : st.lambda) l = static_cast<int>(std::floor(3.0 * U(gen))) - 1;
    st.piTilde.resize(R, 3);
    for (int r = 0; r < R; ++r) {
        Vector p(3);
        for (int j = 0; j < 3; ++j) p(j) = 0.05 + U(gen);
        st.piTilde.row(r) = (p / p.sum()).transpose();
    }
    Matrix G(R, R);
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j) G(i, j) = N(gen);
    st.M = G * G.transpose() + 0.5 * Matrix::Identity(R, R);
    st.Delta = 0.1 + 0.8 * U(gen);
    st.theta = 0.5 + U(gen);
    st.tau2 = 0.3 + U(gen);
    st.mu = N(gen);
    return st;
}

}  // namespace fixture

#endif
