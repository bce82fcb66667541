#include <doctest.h>

#include <random>
#include <set>

#include "bnr/core_types.hpp"

using namespace bnr;

namespace {

Matrix random_network(Eigen::Index V, std::mt19937_64& gen) {
    std::normal_distribution<double> N;
    Matrix A = Matrix::Zero(V, V);
    for (Eigen::Index k = 0; k < V; ++k)
        for (Eigen::Index l = k + 1; l < V; ++l) A(k, l) = A(l, k) = N(gen);
    return A;
}

}  // namespace

TEST_CASE("upper triangle follows lexicographic pair order") {
    Matrix A = Matrix::Zero(3, 3);
    A(0, 1) = A(1, 0) = 1;
    A(0, 2) = A(2, 0) = 2;
    A(1, 2) = A(2, 1) = 3;
    CHECK(upper_triangle_vectorize(A) == Vector((Vector(3) << 1, 2, 3).finished()));

    const Vector z = upper_triangle_vectorize(Matrix::Zero(4, 4));
    CHECK(z.size() == 6);
    CHECK(z.isZero(0.0));

    std::mt19937_64 gen(5);
    const Matrix B = random_network(5, gen);
    const Vector x = upper_triangle_vectorize(B);
    std::size_t e = 0;
    for (Eigen::Index k = 0; k < 5; ++k)
        for (Eigen::Index l = k + 1; l < 5; ++l) CHECK(x(static_cast<Eigen::Index>(e++)) == B(k, l));
    CHECK(e == 10);
}

TEST_CASE("vectorizing rejects non-networks") {
    Matrix A = Matrix::Zero(3, 3);
    A(0, 1) = 1;
    CHECK_THROWS_AS(upper_triangle_vectorize(A), std::invalid_argument);
    Matrix D = Matrix::Zero(3, 3);
    D(1, 1) = 2;
    CHECK_THROWS_AS(upper_triangle_vectorize(D), std::invalid_argument);
    CHECK_THROWS_AS(upper_triangle_vectorize(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("pair index endpoints") {
    CHECK(pair_index(0, 1, 5) == 0);
    CHECK(pair_index(3, 4, 5) == 9);
    CHECK_THROWS_AS(pair_index(2, 2, 5), std::out_of_range);
    CHECK_THROWS_AS(pair_index(3, 1, 5), std::out_of_range);
    CHECK_THROWS_AS(pair_index(1, 5, 5), std::out_of_range);
}

TEST_CASE("pair index is a bijection that round-trips") {
    for (std::size_t V = 2; V <= 100; ++V) {
        std::set<std::size_t> seen;
        std::size_t expected = 0;
        for (std::size_t k = 0; k < V; ++k) {
            for (std::size_t l = k + 1; l < V; ++l) {
                const std::size_t e = pair_index(k, l, V);
                REQUIRE(e == expected++);
                seen.insert(e);
                const auto [kk, ll] = pair_from_index(e, V);
                REQUIRE(kk == k);
                REQUIRE(ll == l);
            }
        }
        REQUIRE(seen.size() == edge_count(V));
        REQUIRE(*seen.rbegin() == edge_count(V) - 1);
    }
}

TEST_CASE("frobenius inner product") {
    CHECK(frobenius_inner(Matrix::Identity(3, 3), Matrix::Identity(3, 3)) == 3.0);
    std::mt19937_64 gen(9);
    const Matrix B = random_network(4, gen);
    CHECK(frobenius_inner(Matrix::Zero(4, 4), B) == 0.0);
    CHECK_THROWS_AS(frobenius_inner(Matrix::Zero(3, 3), Matrix::Zero(4, 4)), std::invalid_argument);

    const Matrix A = random_network(6, gen);
    const Matrix C = random_network(6, gen);
    double direct = 0.0;
    for (int k = 0; k < 6; ++k)
        for (int l = k + 1; l < 6; ++l) direct += A(k, l) * C(k, l);
    CHECK(frobenius_inner(A, C) == doctest::Approx(2.0 * direct).epsilon(1e-14));
}

TEST_CASE("gamma to B halves every coefficient") {
    const Matrix B = gamma_to_B((Vector(3) << 2, 4, 6).finished());
    CHECK(B(0, 1) == 1.0);
    CHECK(B(0, 2) == 2.0);
    CHECK(B(1, 2) == 3.0);
    CHECK(B(2, 1) == 3.0);
    CHECK(B.diagonal().isZero(0.0));
    CHECK(gamma_to_B(Vector::Zero(6)).isZero(0.0));
    CHECK_THROWS_AS(gamma_to_B(Vector::Zero(4)), std::invalid_argument);
}

TEST_CASE("Frobenius product with B equals the design-row dot product") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> N;
    for (int rep = 0; rep < 50; ++rep) {
        Vector gamma(15);
        for (auto& g : gamma) g = N(gen);
        const Matrix A = random_network(6, gen);
        const Matrix B = gamma_to_B(gamma);
        CHECK(frobenius_inner(A, B) == doctest::Approx(upper_triangle_vectorize(A).dot(gamma)).epsilon(1e-13));
        // exact round trip
        CHECK(upper_triangle_vectorize(2.0 * B) == gamma);
        CHECK(B_to_gamma(B) == gamma);
    }
}

TEST_CASE("dataset materializes X and cross products") {
    std::mt19937_64 gen(3);
    std::vector<Matrix> A;
    Vector y(7);
    for (int i = 0; i < 7; ++i) {
        A.push_back(random_network(4, gen));
        y(i) = i * 0.5;
    }
    const NetworkDataset d(y, A);
    CHECK(d.n() == 7);
    CHECK(d.V() == 4);
    CHECK(d.q() == 6);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(d.X().row(static_cast<Eigen::Index>(i)).transpose() == upper_triangle_vectorize(A[i]));
        CHECK(d.adjacency(i) == A[i]);
    }
    CHECK(d.XtX().isApprox(d.X().transpose() * d.X(), 1e-13));
    CHECK(d.Xty().isApprox(d.X().transpose() * y, 1e-13));
    CHECK(d.Xt1().isApprox(d.X().colwise().sum().transpose(), 1e-13));

    // mu + <A_i, B> equals mu + x_i' gamma
    Vector gamma(6);
    for (auto& g : gamma) g = std::normal_distribution<double>()(gen);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(1.5 + frobenius_inner(A[i], gamma_to_B(gamma)) ==
              doctest::Approx(1.5 + d.X().row(static_cast<Eigen::Index>(i)).dot(gamma)).epsilon(1e-13));
    }

    const NetworkDataset e = NetworkDataset::from_design(y, d.X());
    CHECK(e.V() == 4);
    CHECK(e.XtX().isApprox(d.XtX(), 1e-14));

    CHECK_THROWS_AS(NetworkDataset(Vector(2), A), std::invalid_argument);
    CHECK_THROWS_AS(NetworkDataset::from_design(Vector(7), Matrix::Zero(7, 5)), std::invalid_argument);
}

TEST_CASE("hyperparameter validation") {
    Hyperparameters h = Hyperparameters::defaults_for(7);
    CHECK(h.nu == 9.0);
    CHECK(h.eta == doctest::Approx(1.01));
    CHECK_NOTHROW(h.validate());
    h.eta = 1.0;
    CHECK_THROWS_AS(h.validate(), ConfigError);
    h = Hyperparameters::defaults_for(3);
    h.nu = 2.0;
    CHECK_THROWS_AS(h.validate(), ConfigError);
    h = Hyperparameters::defaults_for(3);
    h.iota = 0.0;
    CHECK_THROWS_AS(h.validate(), ConfigError);
}

TEST_CASE("chain state invariants detect spike-slab violations") {
    ChainState s;
    s.gamma = Vector::Zero(3);
    s.s = Vector::Ones(3);
    s.u = Matrix::Zero(2, 3);
    s.xi = {1, 0, 0};
    s.u(0, 0) = 1.0;
    s.lambda = {1, 0};
    s.piTilde = Matrix::Constant(2, 3, 1.0 / 3.0);
    s.M = Matrix::Identity(2, 2);
    CHECK_NOTHROW(s.check_invariants());
    s.u(1, 2) = 0.1;
    CHECK_THROWS_AS(s.check_invariants(), std::logic_error);
    s.u(1, 2) = 0.0;
    s.tau2 = 0.0;
    CHECK_THROWS_AS(s.check_invariants(), std::logic_error);
    s.tau2 = 1.0;
    s.gamma(1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(s.check_invariants(), std::logic_error);
}
