#ifndef BNR_SIMGEN_HPP
#define BNR_SIMGEN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bnr/core_types.hpp"
#include "bnr/rng.hpp"

namespace bnr {

/// Rooted binary tree. Nodes 0..leaves-1 are the leaves; the rest are
/// internal. parent[root] == -1 and branch[root] == 0.
struct PhyloTree {
    std::size_t leaves = 0;
    std::vector<int> parent;
    std::vector<double> branch;

    std::size_t node_count() const { return parent.size(); }
    std::size_t root() const;
    std::size_t edge_count() const { return parent.size() - 1; }
    /// Root-to-node path length.
    double depth(std::size_t node) const;
};

/// Grows a tree from a cherry by repeatedly splitting a uniformly chosen
/// edge with a new leaf, then draws every branch length from
/// Uniform(branch_min, branch_max).
PhyloTree simulate_tree(std::size_t d, Rng& rng, double branch_min = 0.0, double branch_max = 1.0);

/// Leaf-to-leaf path lengths.
Matrix tree_distances(const PhyloTree& tree);

/// Brownian-motion covariance: entry (i, j) is the depth of the most recent
/// common ancestor of leaves i and j.
Matrix phylo_covariance(const PhyloTree& tree);

/// a_pq = 1 / d_pq for distinct p, q in the sampled set, zero elsewhere.
Matrix sample_adjacency(const Matrix& distances, const std::vector<std::size_t>& sampled);

enum class SimModel { Theoretical, Additive, Interaction, Redundant };
enum class CoefficientKind { Random, Phylogenetic };

std::string to_string(SimModel m);
std::string to_string(CoefficientKind c);
SimModel parse_sim_model(const std::string& s);
CoefficientKind parse_coefficient_kind(const std::string& s);

/// Response cap L for the redundancy model at the published (pi, mu) cells.
std::optional<double> published_redundancy_cap(double pi, double mu);

struct SimConfig {
    std::size_t n = 100;
    std::size_t d = 30;
    std::size_t k = 8;
    double pi = 0.8;
    double mu = 1.6;
    SimModel model = SimModel::Theoretical;
    CoefficientKind coefficients = CoefficientKind::Random;
    std::optional<double> L;
    /// Count each unordered pair once in the interaction double sum.
    bool pairs_once = false;
    double branch_min = 0.0;
    double branch_max = 1.0;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the offending field. Fills L from the
    /// published table for the redundancy model when unset.
    void validate();
};

struct SimTruth {
    std::vector<std::uint8_t> xi;
    /// Regression-scale coefficient matrix: y depends on the networks
    /// through <A_i, B>. Zero for the additive model.
    Matrix B;
    /// Per-node main effects (realistic models).
    Vector b_main;
    /// Interaction effects b_lj on the full grid (interaction/redundancy).
    Matrix b_pair;
    std::vector<std::vector<std::size_t>> sampled;
    Vector noise;
    PhyloTree tree;
    std::size_t capped = 0;

    std::vector<bool> truth_nodes() const;
    /// Edges with a nonzero entry of B, in vectorization order.
    std::vector<bool> truth_edges() const;
};

struct SimResult {
    NetworkDataset data;
    SimTruth truth;
};

/// Main effects b ~ N(mu 1, Sigma) with Sigma = I (random) or the tree's
/// Brownian-motion covariance (phylogenetic).
Vector sample_main_effects(const SimConfig& config, const PhyloTree& tree, Rng& rng);

SimResult gen_theoretical(const SimConfig& config, Rng& rng);
SimResult gen_additive(const SimConfig& config, Rng& rng);
SimResult gen_interaction(const SimConfig& config, Rng& rng);
SimResult gen_redundant(const SimConfig& config, Rng& rng);
/// Dispatches on config.model with a fresh stream from config.seed.
SimResult simulate(SimConfig config);

using PresenceMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Sample i keeps meta-network edge (k, l) iff both nodes are present.
std::vector<Matrix> build_sample_networks(const Matrix& meta, const PresenceMatrix& presence);

/// A dataset described by a meta-network plus per-sample presence.
struct PresenceDataset {
    Matrix meta;
    PresenceMatrix presence;  // n x V
    Vector y;

    NetworkDataset to_dataset() const;
};

/// Appends one augmented copy of every sample: response offset by
/// N(0, s^2/4) (s^2 the sample variance of y), replaced by a chi^2_3 / 15
/// draw when the result is not positive; presence kept with probability
/// 0.9 and gained with probability 0.1.
PresenceDataset augment_dataset(const PresenceDataset& data, Rng& rng);

}  // namespace bnr

#endif
