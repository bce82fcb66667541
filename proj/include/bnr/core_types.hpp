#ifndef BNR_CORE_TYPES_HPP
#define BNR_CORE_TYPES_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace bnr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a factorization fails inside a sampler update. The message
/// names the update that produced the offending matrix.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for malformed configuration or input files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable, missing or malformed files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::size_t edge_count(std::size_t V) { return V * (V - 1) / 2; }

/// Recovers V from q = V(V-1)/2; throws if q has no such form.
std::size_t node_count_from_edges(std::size_t q);

/// 0-based position of the unordered pair (k, l), k < l, in the
/// lexicographic upper-triangle order (0,1),(0,2),...,(V-2,V-1).
std::size_t pair_index(std::size_t k, std::size_t l, std::size_t V);

/// Inverse of pair_index.
std::pair<std::size_t, std::size_t> pair_from_index(std::size_t e, std::size_t V);

/// Checks symmetry and a zero diagonal (exact comparison).
void require_network(const Matrix& A);

Vector upper_triangle_vectorize(const Matrix& A);

/// Elementwise sum of products.
double frobenius_inner(const Matrix& A, const Matrix& B);

/// b_kl = b_lk = gamma_kl / 2, zero diagonal.
Matrix gamma_to_B(const Vector& gamma);

/// Inverse of gamma_to_B: twice the upper triangle.
Vector B_to_gamma(const Matrix& B);

/// n responses against n symmetric V x V networks. The design matrix X
/// (row i = upper triangle of A_i) and the cross products the sampler
/// needs are materialized at construction.
class NetworkDataset {
public:
    NetworkDataset() = default;
    NetworkDataset(Vector y, std::vector<Matrix> A);
    /// Builds from an n x q design matrix directly; adjacency matrices are
    /// reconstructed on demand only.
    static NetworkDataset from_design(Vector y, Matrix X);

    std::size_t n() const { return static_cast<std::size_t>(y_.size()); }
    std::size_t V() const { return V_; }
    std::size_t q() const { return edge_count(V_); }

    const Vector& y() const { return y_; }
    const Matrix& X() const { return X_; }
    const Matrix& XtX() const { return XtX_; }
    const Vector& Xty() const { return Xty_; }
    /// Column sums of X.
    const Vector& Xt1() const { return Xt1_; }

    Matrix adjacency(std::size_t i) const;

private:
    void precompute();

    std::size_t V_ = 0;
    Vector y_;
    Matrix X_;
    Matrix XtX_;
    Vector Xty_;
    Vector Xt1_;
};

struct Hyperparameters {
    int R = 7;
    double eta = 1.01;
    double nu = 9.0;  // R + 2
    double aDelta = 1.0;
    double bDelta = 1.0;
    double zeta = 1.0;
    double iota = 1.0;

    static Hyperparameters defaults_for(int R);
    void validate() const;
};

/// One chain's current values of every latent parameter.
struct ChainState {
    Vector gamma;               // q
    Matrix u;                   // R x V, column k is u_k
    std::vector<std::uint8_t> xi;  // V
    std::vector<int> lambda;    // R, entries in {-1, 0, 1}
    Matrix piTilde;             // R x 3, columns: P(0), P(1), P(-1)
    double Delta = 0.5;
    Matrix M;                   // R x R SPD
    Vector s;                   // q
    double theta = 1.0;
    double tau2 = 1.0;
    double mu = 0.0;

    std::size_t V() const { return static_cast<std::size_t>(u.cols()); }
    int R() const { return static_cast<int>(u.rows()); }
    std::size_t q() const { return static_cast<std::size_t>(gamma.size()); }

    /// Throws std::logic_error describing the first violated invariant.
    void check_invariants() const;
};

/// Retained post-burn-in draws, laid out per chain.
struct PosteriorDraws {
    std::size_t chains = 0;
    std::size_t retained = 0;
    std::size_t V = 0;
    std::size_t q = 0;
    /// gamma[c] is retained x q.
    std::vector<Matrix> gamma;
    /// xi[c] is retained x V (0/1 stored as double for the diagnostics).
    std::vector<Matrix> xi;
    std::vector<Vector> mu;
    std::vector<Vector> tau2;
    /// Unnormalized log joint density of each retained state.
    std::vector<Vector> log_joint;

    static PosteriorDraws allocate(std::size_t chains, std::size_t retained,
                                   std::size_t V);
    void check_shape() const;
};

}  // namespace bnr

#endif
