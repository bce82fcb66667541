#include "bnr/core_types.hpp"

#include <cmath>
#include <sstream>

namespace bnr {

std::size_t node_count_from_edges(std::size_t q) {
    // V = (1 + sqrt(1 + 8q)) / 2
    auto V = static_cast<std::size_t>(
        std::llround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(q))) / 2.0));
    if (V < 2 || edge_count(V) != q) {
        throw std::invalid_argument("edge vector length " + std::to_string(q) +
                                    " is not of the form V(V-1)/2");
    }
    return V;
}

std::size_t pair_index(std::size_t k, std::size_t l, std::size_t V) {
    if (k >= l || l >= V) {
        std::ostringstream msg;
        msg << "invalid node pair (" << k << ", " << l << ") for V=" << V;
        throw std::out_of_range(msg.str());
    }
    // edges preceding row k: sum_{i<k} (V-1-i)
    return k * (2 * V - k - 1) / 2 + (l - k - 1);
}

std::pair<std::size_t, std::size_t> pair_from_index(std::size_t e, std::size_t V) {
    if (e >= edge_count(V)) {
        throw std::out_of_range("edge index " + std::to_string(e) + " out of range");
    }
    std::size_t k = 0;
    std::size_t row = V - 1;
    while (e >= row) {
        e -= row;
        ++k;
        --row;
    }
    return {k, k + 1 + e};
}

void require_network(const Matrix& A) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("adjacency matrix must be square");
    }
    const Eigen::Index V = A.rows();
    for (Eigen::Index i = 0; i < V; ++i) {
        if (A(i, i) != 0.0) {
            throw std::invalid_argument("adjacency matrix has a nonzero diagonal at node " +
                                        std::to_string(i + 1));
        }
        for (Eigen::Index j = i + 1; j < V; ++j) {
            if (A(i, j) != A(j, i)) {
                throw std::invalid_argument("adjacency matrix is not symmetric at (" +
                                            std::to_string(i + 1) + ", " +
                                            std::to_string(j + 1) + ")");
            }
        }
    }
}

Vector upper_triangle_vectorize(const Matrix& A) {
    require_network(A);
    const auto V = static_cast<std::size_t>(A.rows());
    Vector x(static_cast<Eigen::Index>(edge_count(V)));
    Eigen::Index e = 0;
    for (std::size_t k = 0; k < V; ++k) {
        for (std::size_t l = k + 1; l < V; ++l) {
            x(e++) = A(k, l);
        }
    }
    return x;
}

double frobenius_inner(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        throw std::invalid_argument("frobenius_inner: dimension mismatch");
    }
    return A.cwiseProduct(B).sum();
}

Matrix gamma_to_B(const Vector& gamma) {
    const std::size_t V = node_count_from_edges(static_cast<std::size_t>(gamma.size()));
    Matrix B = Matrix::Zero(V, V);
    Eigen::Index e = 0;
    for (std::size_t k = 0; k < V; ++k) {
        for (std::size_t l = k + 1; l < V; ++l) {
            B(k, l) = B(l, k) = gamma(e++) / 2.0;
        }
    }
    return B;
}

Vector B_to_gamma(const Matrix& B) {
    Matrix twice = 2.0 * B;
    return upper_triangle_vectorize(twice);
}

NetworkDataset::NetworkDataset(Vector y, std::vector<Matrix> A) : y_(std::move(y)) {
    if (static_cast<std::size_t>(y_.size()) != A.size()) {
        throw std::invalid_argument("response count does not match network count");
    }
    if (A.empty()) {
        throw std::invalid_argument("dataset must contain at least one sample");
    }
    V_ = static_cast<std::size_t>(A.front().rows());
    if (V_ < 2) {
        throw std::invalid_argument("networks need at least two nodes");
    }
    X_.resize(static_cast<Eigen::Index>(A.size()), static_cast<Eigen::Index>(q()));
    for (std::size_t i = 0; i < A.size(); ++i) {
        if (static_cast<std::size_t>(A[i].rows()) != V_) {
            throw std::invalid_argument("sample " + std::to_string(i + 1) +
                                        " has a different node count");
        }
        X_.row(static_cast<Eigen::Index>(i)) = upper_triangle_vectorize(A[i]).transpose();
    }
    precompute();
}

NetworkDataset NetworkDataset::from_design(Vector y, Matrix X) {
    if (y.size() != X.rows()) {
        throw std::invalid_argument("response count does not match design rows");
    }
    if (y.size() == 0) {
        throw std::invalid_argument("dataset must contain at least one sample");
    }
    NetworkDataset d;
    d.V_ = node_count_from_edges(static_cast<std::size_t>(X.cols()));
    d.y_ = std::move(y);
    d.X_ = std::move(X);
    d.precompute();
    return d;
}

void NetworkDataset::precompute() {
    XtX_ = Matrix::Zero(X_.cols(), X_.cols());
    XtX_.selfadjointView<Eigen::Lower>().rankUpdate(X_.transpose());
    XtX_ = XtX_.selfadjointView<Eigen::Lower>();
    Xty_ = X_.transpose() * y_;
    Xt1_ = X_.colwise().sum().transpose();
}

Matrix NetworkDataset::adjacency(std::size_t i) const {
    Matrix A = Matrix::Zero(V_, V_);
    Eigen::Index e = 0;
    for (std::size_t k = 0; k < V_; ++k) {
        for (std::size_t l = k + 1; l < V_; ++l) {
            A(k, l) = A(l, k) = X_(static_cast<Eigen::Index>(i), e++);
        }
    }
    return A;
}

Hyperparameters Hyperparameters::defaults_for(int R) {
    Hyperparameters h;
    h.R = R;
    h.nu = R + 2.0;
    return h;
}

void Hyperparameters::validate() const {
    if (R < 1) throw ConfigError("R must be a positive integer");
    if (!(eta > 1.0)) throw ConfigError("eta must exceed 1");
    if (!(nu > R - 1.0)) throw ConfigError("nu must exceed R - 1");
    if (!(aDelta > 0.0)) throw ConfigError("a_delta must be positive");
    if (!(bDelta > 0.0)) throw ConfigError("b_delta must be positive");
    if (!(zeta > 0.0)) throw ConfigError("zeta must be positive");
    if (!(iota > 0.0)) throw ConfigError("iota must be positive");
}

void ChainState::check_invariants() const {
    const std::size_t Vn = V();
    const int Rn = R();
    auto fail = [](const std::string& what) { throw std::logic_error(what); };
    if (xi.size() != Vn) fail("xi length mismatch");
    if (lambda.size() != static_cast<std::size_t>(Rn)) fail("lambda length mismatch");
    if (q() != edge_count(Vn) || static_cast<std::size_t>(s.size()) != q()) {
        fail("edge vector length mismatch");
    }
    if (!gamma.allFinite() || !u.allFinite() || !s.allFinite() || !M.allFinite() ||
        !piTilde.allFinite() || !std::isfinite(mu) || !std::isfinite(tau2) ||
        !std::isfinite(theta) || !std::isfinite(Delta)) {
        fail("non-finite value in chain state");
    }
    for (std::size_t k = 0; k < Vn; ++k) {
        const bool zero = u.col(static_cast<Eigen::Index>(k)).isZero(0.0);
        if (xi[k] == 0 && !zero) fail("xi_k = 0 but u_k is nonzero at node " + std::to_string(k + 1));
        if (xi[k] > 1) fail("xi entries must be binary");
    }
    for (int l : lambda) {
        if (l < -1 || l > 1) fail("lambda entries must be in {-1, 0, 1}");
    }
    for (Eigen::Index r = 0; r < piTilde.rows(); ++r) {
        if ((piTilde.row(r).array() < 0.0).any() ||
            std::abs(piTilde.row(r).sum() - 1.0) > 1e-9) {
            fail("piTilde row is not a probability vector");
        }
    }
    if (!(tau2 > 0.0) || !(theta > 0.0)) fail("variance parameters must be positive");
    if ((s.array() <= 0.0).any()) fail("scales must be positive");
    if (!(Delta >= 0.0 && Delta <= 1.0)) fail("Delta outside [0, 1]");
    if (!M.isApprox(M.transpose(), 1e-12) || M.llt().info() != Eigen::Success ||
        (M.diagonal().array() <= 0.0).any()) {
        fail("M is not symmetric positive definite");
    }
}

PosteriorDraws PosteriorDraws::allocate(std::size_t chains, std::size_t retained,
                                        std::size_t V) {
    PosteriorDraws d;
    d.chains = chains;
    d.retained = retained;
    d.V = V;
    d.q = edge_count(V);
    const auto m = static_cast<Eigen::Index>(retained);
    for (std::size_t c = 0; c < chains; ++c) {
        d.gamma.emplace_back(Matrix::Zero(m, static_cast<Eigen::Index>(d.q)));
        d.xi.emplace_back(Matrix::Zero(m, static_cast<Eigen::Index>(V)));
        d.mu.emplace_back(Vector::Zero(m));
        d.tau2.emplace_back(Vector::Zero(m));
        d.log_joint.emplace_back(Vector::Zero(m));
    }
    return d;
}

void PosteriorDraws::check_shape() const {
    if (gamma.size() != chains || xi.size() != chains || mu.size() != chains ||
        tau2.size() != chains || log_joint.size() != chains) {
        throw std::invalid_argument("posterior draws: chain count mismatch");
    }
    const auto m = static_cast<Eigen::Index>(retained);
    for (std::size_t c = 0; c < chains; ++c) {
        if (gamma[c].rows() != m || xi[c].rows() != m || mu[c].size() != m ||
            tau2[c].size() != m || log_joint[c].size() != m) {
            throw std::invalid_argument("posterior draws: chains have mismatched lengths");
        }
        if (static_cast<std::size_t>(gamma[c].cols()) != q ||
            static_cast<std::size_t>(xi[c].cols()) != V) {
            throw std::invalid_argument("posterior draws: dimension mismatch");
        }
    }
}

}  // namespace bnr
