#include "bnr/simgen.hpp"

#include <algorithm>
#include <cmath>

#include <boost/random/uniform_int_distribution.hpp>

#include "bnr/samplers.hpp"

namespace bnr {

namespace {

std::size_t uniform_index(std::size_t n, Rng& rng) {
    boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(rng);
}

std::vector<std::size_t> sample_subset(std::size_t d, std::size_t k, Rng& rng) {
    std::vector<std::size_t> pool(d);
    for (std::size_t i = 0; i < d; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_index(d - i, rng);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<std::size_t> ancestors(const PhyloTree& tree, std::size_t node) {
    std::vector<std::size_t> path;
    for (int x = static_cast<int>(node); x >= 0; x = tree.parent[static_cast<std::size_t>(x)]) {
        path.push_back(static_cast<std::size_t>(x));
    }
    return path;
}

std::size_t mrca(const PhyloTree& tree, std::size_t a, std::size_t b) {
    const auto pa = ancestors(tree, a);
    const auto pb = ancestors(tree, b);
    for (std::size_t x : pa) {
        if (std::find(pb.begin(), pb.end(), x) != pb.end()) return x;
    }
    return tree.root();
}

struct Common {
    PhyloTree tree;
    Matrix distances;
    std::vector<std::uint8_t> xi;
};

Common draw_common(const SimConfig& cfg, Rng& rng) {
    Common c;
    c.tree = simulate_tree(cfg.d, rng, cfg.branch_min, cfg.branch_max);
    c.distances = tree_distances(c.tree);
    c.xi.resize(cfg.d);
    for (auto& x : c.xi) x = static_cast<std::uint8_t>(sample_bernoulli(cfg.pi, rng));
    return c;
}

Vector draw_main_effects(const SimConfig& cfg, const PhyloTree& tree, Rng& rng) {
    const auto d = static_cast<Eigen::Index>(cfg.d);
    Vector z(d);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = sample_normal(rng);
    if (cfg.coefficients == CoefficientKind::Random) {
        return z.array() + cfg.mu;
    }
    Eigen::LLT<Matrix> llt(phylo_covariance(tree));
    if (llt.info() != Eigen::Success) {
        throw NumericalError("phylogenetic covariance is not positive definite");
    }
    return (llt.matrixL() * z).array() + cfg.mu;
}

// Shared sample loop for the realistic models: per sample draw K*, build
// A_i, then the noise, and evaluate y from the drawn truth.
template <typename Response>
SimResult realistic(const SimConfig& cfg, Rng& rng, Common common, Vector b_main, Matrix b_pair,
                    Matrix B, Response response) {
    std::vector<Matrix> A(cfg.n);
    Vector y(static_cast<Eigen::Index>(cfg.n));
    SimTruth truth;
    truth.noise.resize(static_cast<Eigen::Index>(cfg.n));
    truth.sampled.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        truth.sampled[i] = sample_subset(cfg.d, cfg.k, rng);
        A[i] = sample_adjacency(common.distances, truth.sampled[i]);
        const double eps = sample_normal(rng);
        truth.noise(static_cast<Eigen::Index>(i)) = eps;
        y(static_cast<Eigen::Index>(i)) = response(A[i], truth.sampled[i], eps, truth.capped);
    }
    truth.xi = std::move(common.xi);
    truth.tree = std::move(common.tree);
    truth.b_main = std::move(b_main);
    truth.b_pair = std::move(b_pair);
    truth.B = std::move(B);
    return SimResult{NetworkDataset(std::move(y), std::move(A)), std::move(truth)};
}

double main_effect_sum(const Vector& b, const std::vector<std::uint8_t>& xi,
                       const std::vector<std::size_t>& sampled) {
    double acc = 0.0;
    for (std::size_t l : sampled) acc += b(static_cast<Eigen::Index>(l)) * xi[l];
    return acc;
}

double interaction_sum(const Matrix& b_pair, const Matrix& A, const std::vector<std::uint8_t>& xi,
                       bool pairs_once) {
    double acc = 0.0;
    const Eigen::Index d = A.rows();
    for (Eigen::Index l = 0; l < d; ++l) {
        if (!xi[static_cast<std::size_t>(l)]) continue;
        for (Eigen::Index j = pairs_once ? l + 1 : 0; j < d; ++j) {
            if (!xi[static_cast<std::size_t>(j)] || A(l, j) == 0.0) continue;
            acc += b_pair(l, j) * A(l, j);
        }
    }
    return acc;
}

Matrix draw_pair_effects(std::size_t d, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(d);
    Matrix b(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
        for (Eigen::Index j = 0; j < n; ++j) b(l, j) = sample_normal(rng, 0.4, 1.0);
    }
    return b;
}

// Regression-scale B equivalent to the interaction double sum.
Matrix interaction_B(const Matrix& b_pair, const std::vector<std::uint8_t>& xi, bool pairs_once) {
    const Eigen::Index d = b_pair.rows();
    Matrix B = Matrix::Zero(d, d);
    for (Eigen::Index l = 0; l < d; ++l) {
        for (Eigen::Index j = l + 1; j < d; ++j) {
            if (!xi[static_cast<std::size_t>(l)] || !xi[static_cast<std::size_t>(j)]) continue;
            const double v = pairs_once ? b_pair(l, j) / 2.0 : (b_pair(l, j) + b_pair(j, l)) / 2.0;
            B(l, j) = B(j, l) = v;
        }
    }
    return B;
}

}  // namespace

std::size_t PhyloTree::root() const {
    for (std::size_t i = 0; i < parent.size(); ++i) {
        if (parent[i] < 0) return i;
    }
    throw std::logic_error("tree has no root");
}

double PhyloTree::depth(std::size_t node) const {
    double acc = 0.0;
    for (int x = static_cast<int>(node); x >= 0; x = parent[static_cast<std::size_t>(x)]) {
        acc += branch[static_cast<std::size_t>(x)];
    }
    return acc;
}

PhyloTree simulate_tree(std::size_t d, Rng& rng, double branch_min, double branch_max) {
    if (d < 2) throw std::invalid_argument("simulate_tree: need at least two leaves");
    if (!(branch_min >= 0.0 && branch_max > branch_min)) {
        throw std::invalid_argument("simulate_tree: invalid branch length range");
    }
    PhyloTree t;
    t.leaves = d;
    // leaves 0..d-1, internal nodes d..2d-2; node d is the root
    t.parent.assign(2 * d - 1, -1);
    t.branch.assign(2 * d - 1, 0.0);
    const int root = static_cast<int>(d);
    t.parent[0] = root;
    t.parent[1] = root;
    std::vector<std::size_t> edges = {0, 1};  // child end of every edge
    std::size_t next_internal = d + 1;
    for (std::size_t leaf = 2; leaf < d; ++leaf) {
        const std::size_t child = edges[uniform_index(edges.size(), rng)];
        const std::size_t mid = next_internal++;
        t.parent[mid] = t.parent[child];
        t.parent[child] = static_cast<int>(mid);
        t.parent[leaf] = static_cast<int>(mid);
        edges.push_back(mid);
        edges.push_back(leaf);
    }
    for (std::size_t i = 0; i < t.parent.size(); ++i) {
        if (t.parent[i] >= 0) t.branch[i] = branch_min + (branch_max - branch_min) * rng.uniform();
    }
    return t;
}

Matrix tree_distances(const PhyloTree& tree) {
    const auto d = static_cast<Eigen::Index>(tree.leaves);
    Matrix D = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const std::size_t a = mrca(tree, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            D(i, j) = D(j, i) = tree.depth(static_cast<std::size_t>(i)) +
                                tree.depth(static_cast<std::size_t>(j)) - 2.0 * tree.depth(a);
        }
    }
    return D;
}

Matrix phylo_covariance(const PhyloTree& tree) {
    const auto d = static_cast<Eigen::Index>(tree.leaves);
    Matrix S(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        S(i, i) = tree.depth(static_cast<std::size_t>(i));
        for (Eigen::Index j = i + 1; j < d; ++j) {
            S(i, j) = S(j, i) =
                tree.depth(mrca(tree, static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
        }
    }
    return S;
}

Matrix sample_adjacency(const Matrix& distances, const std::vector<std::size_t>& sampled) {
    const Eigen::Index V = distances.rows();
    Matrix A = Matrix::Zero(V, V);
    for (std::size_t a = 0; a < sampled.size(); ++a) {
        for (std::size_t b = a + 1; b < sampled.size(); ++b) {
            const auto p = static_cast<Eigen::Index>(sampled[a]);
            const auto q = static_cast<Eigen::Index>(sampled[b]);
            if (p == q || !(distances(p, q) > 0.0)) {
                throw std::invalid_argument("sample_adjacency: duplicate or coincident leaves");
            }
            A(p, q) = A(q, p) = 1.0 / distances(p, q);
        }
    }
    return A;
}

std::string to_string(SimModel m) {
    switch (m) {
        case SimModel::Theoretical: return "theoretical";
        case SimModel::Additive: return "additive";
        case SimModel::Interaction: return "interaction";
        case SimModel::Redundant: return "redundant";
    }
    return "?";
}

std::string to_string(CoefficientKind c) {
    return c == CoefficientKind::Random ? "random" : "phylogenetic";
}

SimModel parse_sim_model(const std::string& s) {
    if (s == "theoretical") return SimModel::Theoretical;
    if (s == "additive") return SimModel::Additive;
    if (s == "interaction") return SimModel::Interaction;
    if (s == "redundant" || s == "redundancy") return SimModel::Redundant;
    throw ConfigError("model: unknown simulation model '" + s + "'");
}

CoefficientKind parse_coefficient_kind(const std::string& s) {
    if (s == "random") return CoefficientKind::Random;
    if (s == "phylogenetic" || s == "phylo") return CoefficientKind::Phylogenetic;
    throw ConfigError("coefficients: unknown coefficient kind '" + s + "'");
}

std::optional<double> published_redundancy_cap(double pi, double mu) {
    auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };
    if (near(pi, 0.3) && near(mu, 0.8)) return 3.0;
    if (near(pi, 0.3) && near(mu, 1.6)) return 7.0;
    if (near(pi, 0.8) && near(mu, 0.8)) return 22.0;
    if (near(pi, 0.8) && near(mu, 1.6)) return 30.0;
    return std::nullopt;
}

void SimConfig::validate() {
    if (n == 0) throw ConfigError("n: sample size must be positive");
    if (d < 2) throw ConfigError("d: need at least two microbes");
    if (k == 0 || k > d) throw ConfigError("k: sampled microbes must lie in [1, d]");
    if (!(pi >= 0.0 && pi <= 1.0)) throw ConfigError("pi: must lie in [0, 1]");
    if (!std::isfinite(mu)) throw ConfigError("mu: must be finite");
    if (!(branch_min >= 0.0 && branch_max > branch_min)) {
        throw ConfigError("branch_min/branch_max: invalid range");
    }
    if (model == SimModel::Redundant) {
        if (!L) L = published_redundancy_cap(pi, mu);
        if (!L) throw ConfigError("L: required for the redundancy model at this (pi, mu)");
    } else if (L) {
        throw ConfigError("L: only valid for the redundancy model");
    }
}

std::vector<bool> SimTruth::truth_nodes() const {
    return std::vector<bool>(xi.begin(), xi.end());
}

std::vector<bool> SimTruth::truth_edges() const {
    const auto V = static_cast<std::size_t>(B.rows());
    std::vector<bool> out;
    out.reserve(edge_count(V));
    for (std::size_t k = 0; k < V; ++k) {
        for (std::size_t l = k + 1; l < V; ++l) {
            out.push_back(B(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) != 0.0);
        }
    }
    return out;
}

Vector sample_main_effects(const SimConfig& config, const PhyloTree& tree, Rng& rng) {
    return draw_main_effects(config, tree, rng);
}

SimResult gen_theoretical(const SimConfig& config, Rng& rng) {
    Common common = draw_common(config, rng);
    const auto d = static_cast<Eigen::Index>(config.d);
    Matrix B = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const double draw = sample_normal(rng, config.mu, 1.0);
            B(i, j) = B(j, i) = common.xi[static_cast<std::size_t>(i)] *
                                common.xi[static_cast<std::size_t>(j)] * draw;
        }
    }
    const Matrix Bc = B;
    return realistic(config, rng, std::move(common), Vector(), Matrix(), B,
                     [&Bc](const Matrix& A, const std::vector<std::size_t>&, double eps, std::size_t&) {
                         return frobenius_inner(A, Bc) + eps;
                     });
}

SimResult gen_additive(const SimConfig& config, Rng& rng) {
    Common common = draw_common(config, rng);
    Vector b = draw_main_effects(config, common.tree, rng);
    const auto xi = common.xi;
    const auto d = static_cast<Eigen::Index>(config.d);
    return realistic(config, rng, std::move(common), b, Matrix(), Matrix::Zero(d, d),
                     [&b, &xi](const Matrix&, const std::vector<std::size_t>& sampled, double eps,
                               std::size_t&) { return main_effect_sum(b, xi, sampled) + eps; });
}

namespace {

SimResult interaction_like(const SimConfig& config, Rng& rng, std::optional<double> cap) {
    Common common = draw_common(config, rng);
    Vector b = draw_main_effects(config, common.tree, rng);
    Matrix bp = draw_pair_effects(config.d, rng);
    const auto xi = common.xi;
    Matrix B = interaction_B(bp, xi, config.pairs_once);
    const bool once = config.pairs_once;
    return realistic(config, rng, std::move(common), b, bp, std::move(B),
                     [&b, &bp, &xi, once, cap](const Matrix& A, const std::vector<std::size_t>& sampled,
                                               double eps, std::size_t& capped) {
                         const double y = main_effect_sum(b, xi, sampled) +
                                          interaction_sum(bp, A, xi, once) + eps;
                         if (cap && y > *cap) {
                             ++capped;
                             return *cap;
                         }
                         return y;
                     });
}

}  // namespace

SimResult gen_interaction(const SimConfig& config, Rng& rng) {
    return interaction_like(config, rng, std::nullopt);
}

SimResult gen_redundant(const SimConfig& config, Rng& rng) {
    SimConfig cfg = config;
    cfg.validate();
    return interaction_like(cfg, rng, cfg.L);
}

SimResult simulate(SimConfig config) {
    config.validate();
    Rng rng(config.seed, 0);
    switch (config.model) {
        case SimModel::Theoretical: return gen_theoretical(config, rng);
        case SimModel::Additive: return gen_additive(config, rng);
        case SimModel::Interaction: return gen_interaction(config, rng);
        case SimModel::Redundant: return gen_redundant(config, rng);
    }
    throw std::logic_error("unreachable");
}

std::vector<Matrix> build_sample_networks(const Matrix& meta, const PresenceMatrix& presence) {
    if (meta.rows() != meta.cols() || presence.cols() != meta.rows()) {
        throw std::invalid_argument("build_sample_networks: dimension mismatch");
    }
    require_network(meta);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(presence.rows()));
    const Eigen::Index V = meta.rows();
    for (Eigen::Index i = 0; i < presence.rows(); ++i) {
        Matrix A = Matrix::Zero(V, V);
        for (Eigen::Index k = 0; k < V; ++k) {
            if (!presence(i, k)) continue;
            for (Eigen::Index l = k + 1; l < V; ++l) {
                if (presence(i, l)) A(k, l) = A(l, k) = meta(k, l);
            }
        }
        out.push_back(std::move(A));
    }
    return out;
}

NetworkDataset PresenceDataset::to_dataset() const {
    return NetworkDataset(y, build_sample_networks(meta, presence));
}

PresenceDataset augment_dataset(const PresenceDataset& data, Rng& rng) {
    const Eigen::Index n = data.y.size();
    const Eigen::Index V = data.meta.rows();
    if (data.presence.rows() != n || data.presence.cols() != V) {
        throw std::invalid_argument("augment_dataset: presence matrix does not match the data");
    }
    double var = 0.0;
    if (n > 1) var = (data.y.array() - data.y.mean()).square().sum() / static_cast<double>(n - 1);
    const double sd = std::sqrt(var / 4.0);

    PresenceDataset out;
    out.meta = data.meta;
    out.y.resize(2 * n);
    out.presence.resize(2 * n, V);
    out.y.head(n) = data.y;
    out.presence.topRows(n) = data.presence;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double offset = sd > 0.0 ? sample_normal(rng, 0.0, sd) : 0.0;
        double y = data.y(i) + offset;
        if (y <= 0.0) y = sample_chi_squared(3.0, rng) / 15.0;
        out.y(n + i) = y;
        for (Eigen::Index k = 0; k < V; ++k) {
            const double p = data.presence(i, k) ? 0.9 : 0.1;
            out.presence(n + i, k) = rng.uniform() < p;
        }
    }
    return out;
}

}  // namespace bnr
