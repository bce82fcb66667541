#include "bnr/gibbs.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "bnr/samplers.hpp"

namespace bnr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// lambda value held by column j of piTilde
constexpr int kLambdaValue[3] = {0, 1, -1};

int lambda_column(int value) { return value == 0 ? 0 : (value == 1 ? 1 : 2); }

}  // namespace

Model::Model(const NetworkDataset& data, Hyperparameters hyper)
    : data_(&data), hyper_(hyper), incident_(data.V()), neighbours_(data.V()) {
    hyper_.validate();
    const std::size_t V = data.V();
    for (std::size_t k = 0; k < V; ++k) {
        incident_[k].reserve(V - 1);
        neighbours_[k].reserve(V - 1);
        for (std::size_t j = 0; j < V; ++j) {
            if (j == k) continue;
            incident_[k].push_back(j < k ? pair_index(j, k, V) : pair_index(k, j, V));
            neighbours_[k].push_back(j);
        }
    }
    low_rank_gamma_ = data.q() > data.n();
}

void SweepConfig::validate() const {
    if (retained == 0) throw ConfigError("retained must be positive");
    if (thinning == 0) throw ConfigError("thinning must be positive");
    if (chains == 0) throw ConfigError("chains must be positive");
}

Vector assemble_W(const Matrix& u, const std::vector<int>& lambda) {
    const auto V = static_cast<std::size_t>(u.cols());
    const Eigen::Index R = u.rows();
    Vector W(static_cast<Eigen::Index>(edge_count(V)));
    Vector lam(R);
    for (Eigen::Index r = 0; r < R; ++r) lam(r) = lambda[static_cast<std::size_t>(r)];
    const Matrix scaled = lam.asDiagonal() * u;
    Eigen::Index e = 0;
    for (std::size_t k = 0; k < V; ++k) {
        for (std::size_t l = k + 1; l < V; ++l) {
            W(e++) = scaled.col(static_cast<Eigen::Index>(k)).dot(u.col(static_cast<Eigen::Index>(l)));
        }
    }
    return W;
}

ChainState initial_state(const Model& model, Rng& rng) {
    const auto& data = model.data();
    const int R = model.R();
    const auto V = static_cast<Eigen::Index>(model.V());
    const auto q = static_cast<Eigen::Index>(model.q());
    ChainState st;
    st.mu = data.y().mean();
    const double n = static_cast<double>(data.n());
    double var = n > 1 ? (data.y().array() - st.mu).square().sum() / (n - 1.0) : 1.0;
    st.tau2 = var > 0.0 ? var : 1.0;
    st.gamma = Vector::Zero(q);
    st.s = Vector::Ones(q);
    st.theta = model.hyper().zeta / model.hyper().iota;
    st.Delta = 0.5;
    st.xi.assign(static_cast<std::size_t>(V), 1);
    st.u.resize(R, V);
    for (Eigen::Index k = 0; k < V; ++k) {
        for (int r = 0; r < R; ++r) st.u(r, k) = sample_normal(rng);
    }
    st.lambda.assign(static_cast<std::size_t>(R), 1);
    st.piTilde = Matrix::Constant(R, 3, 1.0 / 3.0);
    st.M = Matrix::Identity(R, R);
    return st;
}

double update_tau2(ChainState& state, const Model& model, Rng& rng) {
    const auto& data = model.data();
    const double n = static_cast<double>(data.n());
    const double V = static_cast<double>(model.V());
    const Vector resid = data.y() - data.X() * state.gamma - Vector::Constant(data.y().size(), state.mu);
    const Vector dev = state.gamma - assemble_W(state.u, state.lambda);
    const double rate =
        0.5 * resid.squaredNorm() + 0.5 * (dev.array().square() / state.s.array()).sum();
    const double shape = n / 2.0 + V * (V - 1.0) / 4.0;
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw NumericalError("update_tau2: degenerate rate " + std::to_string(rate) +
                             " (exact fit of responses and coefficients)");
    }
    state.tau2 = sample_inverse_gamma(shape, rate, rng);
    return state.tau2;
}

NodeUpdateWorkspace node_workspace(std::size_t k, const ChainState& state, const Model& model) {
    const auto& edges = model.incident_edges(k);
    const auto& others = model.neighbours(k);
    const auto m = static_cast<Eigen::Index>(edges.size());
    const int R = state.R();
    NodeUpdateWorkspace ws;
    ws.gamma_k.resize(m);
    ws.h_k.resize(m);
    ws.U_star.resize(m, R);
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t e = edges[static_cast<std::size_t>(i)];
        ws.gamma_k(i) = state.gamma(static_cast<Eigen::Index>(e));
        ws.h_k(i) = state.s(static_cast<Eigen::Index>(e));
        const auto j = static_cast<Eigen::Index>(others[static_cast<std::size_t>(i)]);
        for (int r = 0; r < R; ++r) {
            ws.U_star(i, r) = state.u(r, j) * state.lambda[static_cast<std::size_t>(r)];
        }
    }
    return ws;
}

void node_mixture_weight(NodeUpdateWorkspace& ws, const ChainState& state) {
    const Eigen::Index m = ws.gamma_k.size();
    const Vector zero = Vector::Zero(m);
    const double spike = log_mvn_density_diag(ws.gamma_k, zero, state.tau2 * ws.h_k);
    Matrix slab_cov = ws.U_star * state.M * ws.U_star.transpose();
    slab_cov.diagonal() += state.tau2 * ws.h_k;
    const double slab = log_mvn_density(ws.gamma_k, zero, slab_cov, "update_node");
    const double a = safe_log(1.0 - state.Delta) + spike;
    const double b = safe_log(state.Delta) + slab;
    const double terms[2] = {a, b};
    const double total = log_sum_exp(terms);
    ws.log_w = a - total;
    ws.log_one_minus_w = b - total;
}

namespace {

void update_node_with(std::size_t k, ChainState& state, const Model& model, const Matrix& M_inv,
                      Rng& rng) {
    NodeUpdateWorkspace ws = node_workspace(k, state, model);
    node_mixture_weight(ws, state);
    const auto col = static_cast<Eigen::Index>(k);
    const int xi = rng.uniform() < std::exp(ws.log_one_minus_w) ? 1 : 0;
    state.xi[k] = static_cast<std::uint8_t>(xi);
    if (xi == 0) {
        state.u.col(col).setZero();
        return;
    }
    const Vector inv_h = ws.h_k.cwiseInverse();
    const double inv_tau2 = 1.0 / state.tau2;
    Matrix P = inv_tau2 * (ws.U_star.transpose() * inv_h.asDiagonal() * ws.U_star) + M_inv;
    P = 0.5 * (P + P.transpose());
    const Vector b = inv_tau2 * (ws.U_star.transpose() * inv_h.cwiseProduct(ws.gamma_k));
    state.u.col(col) = sample_mvn_precision(b, P, 1.0, rng, "update_node");
}

Matrix spd_inverse(const Matrix& A, const char* what) {
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(what) + ": matrix is not positive definite");
    }
    Matrix inv = llt.solve(Matrix::Identity(A.rows(), A.cols()));
    return 0.5 * (inv + inv.transpose());
}

}  // namespace

void update_node(std::size_t k, ChainState& state, const Model& model, Rng& rng) {
    update_node_with(k, state, model, spd_inverse(state.M, "update_node (M)"), rng);
}

void update_nodes(ChainState& state, const Model& model, Rng& rng) {
    const Matrix M_inv = spd_inverse(state.M, "update_node (M)");
    for (std::size_t k = 0; k < model.V(); ++k) update_node_with(k, state, model, M_inv, rng);
}

void update_gamma(ChainState& state, const Model& model, Rng& rng) {
    const auto& data = model.data();
    const Vector W = assemble_W(state.u, state.lambda);
    if (!model.low_rank_gamma()) {
        Matrix P = data.XtX();
        P.diagonal() += state.s.cwiseInverse();
        const Vector b = data.Xty() - state.mu * data.Xt1() + W.cwiseQuotient(state.s);
        state.gamma = sample_mvn_precision(b, P, state.tau2, rng, "update_gamma");
        return;
    }
    // delta = gamma - W has prior N(0, tau2 D) and likelihood
    // z = y - mu - X W ~ N(X delta, tau2 I); sample via the n x n system
    // (X D X^T + I) as in Bhattacharya, Chakraborty & Mallick (2016).
    const Matrix& X = data.X();
    const auto n = X.rows();
    const auto q = X.cols();
    const double tau = std::sqrt(state.tau2);
    const Vector z = data.y() - Vector::Constant(n, state.mu) - X * W;
    Vector prior_draw(q);
    for (Eigen::Index e = 0; e < q; ++e) prior_draw(e) = tau * std::sqrt(state.s(e)) * sample_normal(rng);
    Vector v = X * prior_draw;
    for (Eigen::Index i = 0; i < n; ++i) v(i) += tau * sample_normal(rng);
    const Matrix XD = X * state.s.asDiagonal();
    Matrix G = XD * X.transpose();
    G.diagonal().array() += 1.0;
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("update_gamma: X D X^T + I is not positive definite");
    }
    const Vector w = llt.solve(z - v);
    state.gamma = W + prior_draw + XD.transpose() * w;
    if (!state.gamma.allFinite()) throw NumericalError("update_gamma: non-finite draw");
}

void update_s(ChainState& state, Rng& rng) {
    const Vector W = assemble_W(state.u, state.lambda);
    for (Eigen::Index e = 0; e < state.gamma.size(); ++e) {
        const double d = state.gamma(e) - W(e);
        const double chi = d * d / state.tau2;
        state.s(e) = sample_gig(0.5, chi, state.theta, rng);
        if (!(state.s(e) > 0.0) || !std::isfinite(state.s(e))) {
            throw NumericalError("update_s: scale draw is not a positive finite number");
        }
    }
}

double update_theta(ChainState& state, const Model& model, Rng& rng) {
    const auto& h = model.hyper();
    const double shape = h.zeta + static_cast<double>(model.q());
    const double rate = h.iota + state.s.sum() / 2.0;
    state.theta = sample_gamma(shape, rate, rng);
    return state.theta;
}

double update_delta(ChainState& state, const Model& model, Rng& rng) {
    const auto& h = model.hyper();
    double active = 0.0;
    for (auto x : state.xi) active += x;
    const double inactive = static_cast<double>(state.xi.size()) - active;
    state.Delta = sample_beta(h.aDelta + active, h.bDelta + inactive, rng);
    return state.Delta;
}

void update_M(ChainState& state, const Model& model, Rng& rng) {
    const int R = state.R();
    Matrix scale = Matrix::Identity(R, R);
    double active = 0.0;
    for (Eigen::Index k = 0; k < state.u.cols(); ++k) {
        if (state.u.col(k).isZero(0.0)) continue;
        scale.noalias() += state.u.col(k) * state.u.col(k).transpose();
        active += 1.0;
    }
    scale = 0.5 * (scale + scale.transpose());
    try {
        state.M = sample_inverse_wishart(scale, model.hyper().nu + active, rng);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("update_M: ") + e.what());
    }
}

double update_mu(ChainState& state, const Model& model, Rng& rng) {
    const auto& data = model.data();
    const double n = static_cast<double>(data.n());
    const double mean = (data.y().sum() - data.Xt1().dot(state.gamma)) / n;
    state.mu = sample_normal(rng, mean, std::sqrt(state.tau2 / n));
    return state.mu;
}

std::array<double, 3> lambda_log_probabilities(int r, const ChainState& state) {
    const auto V = static_cast<std::size_t>(state.u.cols());
    const auto ri = static_cast<std::size_t>(r);
    const Vector W = assemble_W(state.u, state.lambda);
    // contribution of slot r to each edge mean
    Vector slot(W.size());
    Eigen::Index e = 0;
    for (std::size_t k = 0; k < V; ++k) {
        for (std::size_t l = k + 1; l < V; ++l) {
            slot(e++) = state.u(r, static_cast<Eigen::Index>(k)) * state.u(r, static_cast<Eigen::Index>(l));
        }
    }
    const Vector base = W - state.lambda[ri] * slot;
    const Vector inv_var = (state.tau2 * state.s).cwiseInverse();
    std::array<double, 3> logp{};
    for (int j = 0; j < 3; ++j) {
        const Vector dev = state.gamma - (base + kLambdaValue[j] * slot);
        // normalizing constants are common to all three and cancel
        logp[static_cast<std::size_t>(j)] =
            safe_log(state.piTilde(r, j)) - 0.5 * dev.cwiseAbs2().dot(inv_var);
    }
    const double total = log_sum_exp(logp);
    for (auto& v : logp) v -= total;
    return logp;
}

int update_lambda_r(int r, ChainState& state, Rng& rng) {
    const auto logp = lambda_log_probabilities(r, state);
    const std::size_t j = sample_categorical_log(logp, rng);
    state.lambda[static_cast<std::size_t>(r)] = kLambdaValue[j];
    return kLambdaValue[j];
}

std::array<double, 3> pi_row_posterior(int r, const ChainState& state, const Model& model) {
    std::array<double, 3> alpha = {std::pow(static_cast<double>(r + 1), model.hyper().eta), 1.0, 1.0};
    for (int l : state.lambda) alpha[static_cast<std::size_t>(lambda_column(l))] += 1.0;
    return alpha;
}

void update_pi_r(int r, ChainState& state, const Model& model, Rng& rng) {
    const auto alpha = pi_row_posterior(r, state, model);
    state.piTilde.row(r) = sample_dirichlet(alpha, rng).transpose();
}

void gibbs_step(ChainState& state, const Model& model, Rng& rng) {
    update_tau2(state, model, rng);
    update_nodes(state, model, rng);
    update_gamma(state, model, rng);
    update_s(state, rng);
    update_theta(state, model, rng);
    update_delta(state, model, rng);
    update_M(state, model, rng);
    update_mu(state, model, rng);
    for (int r = 0; r < state.R(); ++r) {
        update_lambda_r(r, state, rng);
        update_pi_r(r, state, model, rng);
    }
}

double log_joint_density(const ChainState& state, const Model& model) {
    using boost::math::lgamma;
    const auto& data = model.data();
    const auto& h = model.hyper();
    const double log2pi = std::log(2.0 * std::numbers::pi);
    const double n = static_cast<double>(data.n());
    const int R = state.R();

    const Vector resid = data.y() - data.X() * state.gamma - Vector::Constant(data.y().size(), state.mu);
    double lp = -0.5 * (n * (log2pi + std::log(state.tau2)) + resid.squaredNorm() / state.tau2);

    const Vector W = assemble_W(state.u, state.lambda);
    lp += log_mvn_density_diag(state.gamma, W, state.tau2 * state.s);

    // s_kl ~ Exp(theta / 2), theta ~ Gamma(zeta, iota)
    const double q = static_cast<double>(state.q());
    lp += q * std::log(state.theta / 2.0) - state.theta / 2.0 * state.s.sum();
    lp += h.zeta * std::log(h.iota) - lgamma(h.zeta) + (h.zeta - 1.0) * std::log(state.theta) -
          h.iota * state.theta;

    Eigen::LLT<Matrix> m_llt(state.M);
    const double logdet_M = 2.0 * m_llt.matrixLLT().diagonal().array().log().sum();
    for (std::size_t k = 0; k < state.xi.size(); ++k) {
        if (state.xi[k]) {
            const Vector z = m_llt.matrixL().solve(state.u.col(static_cast<Eigen::Index>(k)));
            lp += safe_log(state.Delta) - 0.5 * (R * log2pi + logdet_M + z.squaredNorm());
        } else {
            lp += safe_log(1.0 - state.Delta);
        }
    }
    lp += (h.aDelta - 1.0) * safe_log(state.Delta) + (h.bDelta - 1.0) * safe_log(1.0 - state.Delta) +
          lgamma(h.aDelta + h.bDelta) - lgamma(h.aDelta) - lgamma(h.bDelta);

    // M ~ InverseWishart(nu, I_R)
    double log_multigamma = 0.25 * R * (R - 1) * std::log(std::numbers::pi);
    for (int j = 0; j < R; ++j) log_multigamma += lgamma(h.nu / 2.0 - j / 2.0);
    const Matrix M_inv = m_llt.solve(Matrix::Identity(R, R));
    lp += -0.5 * h.nu * R * std::log(2.0) - log_multigamma - 0.5 * (h.nu + R + 1.0) * logdet_M -
          0.5 * M_inv.trace();

    for (int r = 0; r < R; ++r) {
        lp += safe_log(state.piTilde(r, lambda_column(state.lambda[static_cast<std::size_t>(r)])));
        const double a0 = std::pow(static_cast<double>(r + 1), h.eta);
        lp += lgamma(a0 + 2.0) - lgamma(a0) + (a0 - 1.0) * safe_log(state.piTilde(r, 0));
    }
    // pi(mu, tau2) proportional to 1 / tau2
    lp -= std::log(state.tau2);
    return lp;
}

Chain::Chain(const Model& model, std::uint64_t seed, std::uint64_t stream)
    : model_(&model), rng_(seed, stream) {
    state_ = initial_state(model, rng_);
}

Chain::Chain(const Model& model, const Checkpoint& checkpoint)
    : model_(&model), state_(checkpoint.state), iteration_(checkpoint.iteration) {
    if (state_.V() != model.V() || state_.R() != model.R()) {
        throw ConfigError("checkpoint dimensions do not match the model");
    }
    rng_.set_state(checkpoint.rng);
}

void Chain::step() {
    try {
        gibbs_step(state_, *model_, rng_);
    } catch (const NumericalError& e) {
        throw NumericalError("iteration " + std::to_string(iteration_ + 1) + ": " + e.what());
    }
    ++iteration_;
}

void Chain::advance(std::size_t sweeps) {
    for (std::size_t i = 0; i < sweeps; ++i) step();
}

Checkpoint Chain::checkpoint() const {
    return Checkpoint{state_, rng_.state(), iteration_};
}

void Chain::sample(std::size_t retained, std::size_t thinning, PosteriorDraws& draws, std::size_t c) {
    for (std::size_t t = 0; t < retained; ++t) {
        advance(thinning);
        const auto row = static_cast<Eigen::Index>(t);
        draws.gamma[c].row(row) = state_.gamma.transpose();
        for (std::size_t k = 0; k < state_.xi.size(); ++k) {
            draws.xi[c](row, static_cast<Eigen::Index>(k)) = state_.xi[k];
        }
        draws.mu[c](row) = state_.mu;
        draws.tau2[c](row) = state_.tau2;
        draws.log_joint[c](row) = log_joint_density(state_, *model_);
    }
}

PosteriorDraws run_chain(const Model& model, const SweepConfig& config, std::uint64_t stream) {
    config.validate();
    Chain chain(model, config.seed, stream);
    chain.advance(config.burn_in);
    PosteriorDraws draws = PosteriorDraws::allocate(1, config.retained, model.V());
    chain.sample(config.retained, config.thinning, draws, 0);
    return draws;
}

}  // namespace bnr
