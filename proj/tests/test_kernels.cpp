#include <doctest.h>

#include <atomic>
#include <random>
#include <stdexcept>

#include "bnr/kernels.hpp"

using namespace bnr;

namespace {

std::vector<Matrix> random_chains(std::size_t chains, Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
    std::normal_distribution<double> N;
    std::vector<Matrix> out;
    for (std::size_t c = 0; c < chains; ++c) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = N(gen) + 0.2 * static_cast<double>(c);
        out.push_back(m);
    }
    return out;
}

}  // namespace

TEST_CASE("for_each_index visits every index once") {
    for (Execution mode : {Execution::Serial, Execution::Parallel}) {
        std::vector<std::atomic<int>> hits(257);
        kernels::for_each_index(hits.size(), mode, [&](std::size_t i) { ++hits[i]; });
        for (const auto& h : hits) CHECK(h.load() == 1);
    }
}

TEST_CASE("for_each_index rethrows the lowest failing index") {
    for (Execution mode : {Execution::Serial, Execution::Parallel}) {
        try {
            kernels::for_each_index(50, mode, [](std::size_t i) {
                if (i == 13 || i == 40) throw std::runtime_error("item " + std::to_string(i));
            });
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "item 13");
        }
    }
}

TEST_CASE("gather_column stacks chains side by side") {
    std::mt19937_64 gen(1);
    const auto chains = random_chains(3, 7, 4, gen);
    const Matrix g = kernels::gather_column(chains, 2);
    CHECK(g.rows() == 7);
    CHECK(g.cols() == 3);
    for (int c = 0; c < 3; ++c) CHECK(g.col(c) == chains[static_cast<std::size_t>(c)].col(2));
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
    std::mt19937_64 gen(2);
    const auto chains = random_chains(3, 400, 45, gen);
    CHECK(kernels::rhat_columns(chains, Execution::Serial) == kernels::rhat_columns(chains, Execution::Parallel));
    const double probs[3] = {0.025, 0.5, 0.975};
    CHECK(kernels::column_quantiles(chains, probs, Execution::Serial) ==
          kernels::column_quantiles(chains, probs, Execution::Parallel));
    CHECK(kernels::column_means(chains, Execution::Serial) == kernels::column_means(chains, Execution::Parallel));
}

TEST_CASE("column means and quantiles pool the chains") {
    std::vector<Matrix> chains = {Matrix(2, 1), Matrix(2, 1)};
    chains[0] << 1.0, 4.0;
    chains[1] << 2.0, 3.0;
    CHECK(kernels::column_means(chains, Execution::Serial)(0) == 2.5);
    const double probs[3] = {0.0, 0.5, 1.0};
    const Matrix q = kernels::column_quantiles(chains, probs, Execution::Serial);
    CHECK(q(0, 0) == 1.0);
    CHECK(q(1, 0) == 2.5);
    CHECK(q(2, 0) == 4.0);
}
