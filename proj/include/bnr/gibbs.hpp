#ifndef BNR_GIBBS_HPP
#define BNR_GIBBS_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "bnr/core_types.hpp"
#include "bnr/rng.hpp"

namespace bnr {

/// Dataset plus fixed prior constants plus the node/edge incidence table
/// shared by every chain. Immutable once built.
class Model {
public:
    Model(const NetworkDataset& data, Hyperparameters hyper);

    const NetworkDataset& data() const { return *data_; }
    const Hyperparameters& hyper() const { return hyper_; }
    std::size_t V() const { return data_->V(); }
    std::size_t q() const { return data_->q(); }
    int R() const { return hyper_.R; }

    /// Edge indices incident to node k, ordered by the other endpoint.
    const std::vector<std::size_t>& incident_edges(std::size_t k) const { return incident_[k]; }
    /// The other endpoint for each entry of incident_edges(k).
    const std::vector<std::size_t>& neighbours(std::size_t k) const { return neighbours_[k]; }

    /// When true (q > n) the gamma update samples through the n x n
    /// Woodbury system instead of factorizing the q x q precision.
    bool low_rank_gamma() const { return low_rank_gamma_; }
    void set_low_rank_gamma(bool on) { low_rank_gamma_ = on; }

private:
    const NetworkDataset* data_;
    Hyperparameters hyper_;
    std::vector<std::vector<std::size_t>> incident_;
    std::vector<std::vector<std::size_t>> neighbours_;
    bool low_rank_gamma_ = false;
};

/// Per-node quantities for the joint (xi_k, u_k) update.
struct NodeUpdateWorkspace {
    Vector gamma_k;    // V-1 incident coefficients
    Vector h_k;        // V-1 incident scales (diagonal of H_k)
    Matrix U_star;     // (V-1) x R, rows u_j^T Lambda for j != k
    double log_w = 0.0;           // log of the spike weight w_uk
    double log_one_minus_w = 0.0; // log(1 - w_uk)
};

struct SweepConfig {
    std::size_t burn_in = 30000;
    std::size_t retained = 20000;
    std::size_t thinning = 1;
    std::size_t chains = 3;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Edge means W_kl = u_k^T Lambda u_l in vectorization order.
Vector assemble_W(const Matrix& u, const std::vector<int>& lambda);

/// Starting state: mu = mean(y), tau2 = var(y), gamma = 0, s = 1,
/// theta = zeta/iota, Delta = 0.5, xi = 1, u_k ~ N(0, I), lambda = 1,
/// piTilde rows uniform, M = I.
ChainState initial_state(const Model& model, Rng& rng);

// Full-conditional updates. Each writes the new value into `state` and
// returns it where that is a scalar.
double update_tau2(ChainState& state, const Model& model, Rng& rng);
NodeUpdateWorkspace node_workspace(std::size_t k, const ChainState& state, const Model& model);
/// Fills log_w / log_one_minus_w of `ws` from the current Delta, M and tau2.
void node_mixture_weight(NodeUpdateWorkspace& ws, const ChainState& state);
void update_node(std::size_t k, ChainState& state, const Model& model, Rng& rng);
void update_nodes(ChainState& state, const Model& model, Rng& rng);
void update_gamma(ChainState& state, const Model& model, Rng& rng);
void update_s(ChainState& state, Rng& rng);
double update_theta(ChainState& state, const Model& model, Rng& rng);
double update_delta(ChainState& state, const Model& model, Rng& rng);
void update_M(ChainState& state, const Model& model, Rng& rng);
double update_mu(ChainState& state, const Model& model, Rng& rng);
/// Normalized log probabilities of lambda_r = 0, 1, -1 (0-based r).
std::array<double, 3> lambda_log_probabilities(int r, const ChainState& state);
int update_lambda_r(int r, ChainState& state, Rng& rng);
/// Dirichlet parameters of the piTilde row r (0-based r, the prior uses r+1).
std::array<double, 3> pi_row_posterior(int r, const ChainState& state, const Model& model);
void update_pi_r(int r, ChainState& state, const Model& model, Rng& rng);

/// One sweep in the fixed order: tau2; (xi_k, u_k) for every node; gamma;
/// s; theta; Delta; M; mu; then lambda_r and piTilde_r for each r.
void gibbs_step(ChainState& state, const Model& model, Rng& rng);

/// Unnormalized log joint density of the state, with the spike at u_k = 0
/// counted as a unit point mass.
double log_joint_density(const ChainState& state, const Model& model);

/// Everything needed to continue a chain exactly where it stopped.
struct Checkpoint {
    ChainState state;
    Rng::State rng{};
    std::uint64_t iteration = 0;
};

/// A single Gibbs chain owning its state and random stream.
class Chain {
public:
    Chain(const Model& model, std::uint64_t seed, std::uint64_t stream);
    Chain(const Model& model, const Checkpoint& checkpoint);

    void step();
    void advance(std::size_t sweeps);

    const ChainState& state() const { return state_; }
    ChainState& state() { return state_; }
    std::uint64_t iteration() const { return iteration_; }
    Checkpoint checkpoint() const;

    /// Records `retained` draws, taking one every `thinning` sweeps, into
    /// chain slot `c` of `draws`.
    void sample(std::size_t retained, std::size_t thinning, PosteriorDraws& draws, std::size_t c);

private:
    const Model* model_;
    ChainState state_;
    Rng rng_;
    std::uint64_t iteration_ = 0;
};

/// Runs burn-in then retention for a single fresh chain.
PosteriorDraws run_chain(const Model& model, const SweepConfig& config, std::uint64_t stream = 0);

}  // namespace bnr

#endif
