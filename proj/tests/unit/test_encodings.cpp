#include "oracles.hpp"

#include "spe/chebyshev.hpp"
#include "spe/encodings.hpp"
#include "spe/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace spe;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = normal(rng);
    return m;
}

SpectralDecomposition full_of(const Graph& g) { return laplacian_spectrum(g, {}); }

}  // namespace

TEST_CASE("encoding shapes") {
    Graph k22 = oracle::complete_bipartite(2, 2);
    auto s = full_of(k22);
    CHECK(build_encoding(NoPE{}, k22, &s).matrix.cols() == 0);
    CHECK(build_encoding(NoPE{}, k22, nullptr).matrix.rows() == 4);
    CHECK(build_encoding(LpeFLK{1}, k22, &s).matrix.cols() == 2);
    CHECK(build_encoding(LpeFull{}, k22, &s).matrix.cols() == 4);
    CHECK(build_encoding(Rwse{3}, k22, nullptr).matrix.cols() == 3);
    CHECK(build_encoding(Llpe{5, 3}, k22, &s).matrix.cols() == 3);
}

TEST_CASE("LpeFK on K22 picks the smallest nonzero eigenvector") {
    Graph k22 = oracle::complete_bipartite(2, 2);
    auto s = full_of(k22);
    Eigen::MatrixXd p = build_encoding(LpeFK{1}, k22, &s).matrix;
    Eigen::MatrixXd l = oracle::dense_laplacian(k22);
    // spectrum is 0, 1, 1, 2: the vector lies in the λ = 1 eigenspace
    CHECK((l * p - p).norm() < 1e-12);
    CHECK(p.norm() == doctest::Approx(1.0));
    for (Eigen::Index r = 0; r < 4; ++r) {
        if (std::abs(p(r, 0)) > 1e-12) {
            CHECK(p(r, 0) > 0);
            break;
        }
    }
}

TEST_CASE("spectrum mismatch is a configuration error") {
    Graph g = oracle::cycle(12);
    auto ext = laplacian_spectrum(g, {.full = false, .k_small = 3, .k_large = 2});
    CHECK_THROWS_AS(build_encoding(LpeFull{}, g, &ext), ConfigurationError);
    CHECK_THROWS_AS(build_encoding(Llpe{4, 2}, g, &ext), ConfigurationError);
    CHECK_THROWS_AS(build_encoding(LpeFK{3}, g, &ext), ConfigurationError);
    CHECK_THROWS_AS(build_encoding(LlpeLarge{3, 4, 2}, g, &ext), ConfigurationError);
    CHECK_THROWS_AS(build_encoding(LpeFK{2}, g, nullptr), ConfigurationError);
    CHECK(build_encoding(LpeFK{2}, g, &ext).matrix.cols() == 2);
    CHECK_THROWS_AS(build_encoding(LpeFK{0}, g, &ext), ParameterError);
}

TEST_CASE("llpe forward closed forms") {
    Graph k2 = oracle::complete(2);
    auto s = full_of(k2);
    LlpeParams p;
    p.theta = Eigen::MatrixXd::Zero(4, 1);
    p.theta(0, 0) = 1.0;
    Eigen::MatrixXd out = llpe_forward(s, p).matrix;
    CHECK(out(0, 0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(std::abs(out(1, 0)) < 1e-15);
    p.theta.setZero();
    CHECK(llpe_forward(s, p).matrix.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("llpe with a sharp bump at zero isolates the kernel") {
    Graph g = oracle::connected_gnp(20, 0.3, 4);
    auto s = full_of(g);
    REQUIRE(s.eigenvalues[1] > 0.1);
    const double c = 2000.0;
    auto bump = cheb_fit([c](double x) { return std::exp(-(x + 1.0) * (x + 1.0) * c); }, 200);
    LlpeParams p;
    p.theta = bump.coeffs;
    Eigen::VectorXd col = llpe_forward(s, p).matrix.col(0);
    const Eigen::VectorXd u0 = s.eigenvectors.col(0);
    CHECK(std::abs(col.dot(u0)) / col.norm() >= 0.99);
}

TEST_CASE("llpe gradient reductions") {
    Graph g = oracle::connected_gnp(6, 0.6, 1);
    auto s = full_of(g);
    std::mt19937_64 rng(5);
    LlpeParams p;
    p.theta = random_matrix(3, 2, rng);
    CHECK(llpe_grad(s, p, Eigen::MatrixXd::Zero(6, 2)).cwiseAbs().maxCoeff() == 0.0);

    LlpeParams scalar;
    scalar.theta = Eigen::MatrixXd::Constant(1, 1, 0.7);
    Eigen::MatrixXd up = random_matrix(6, 1, rng);
    const double want = (Eigen::VectorXd::Ones(6).transpose() * s.eigenvectors.transpose() * up)(0, 0);
    CHECK(llpe_grad(s, scalar, up)(0, 0) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("llpe gradient matches finite differences") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const NodeId n = 5 + trial;
        Graph g = oracle::connected_gnp(n, 0.5, 100 + trial);
        auto s = full_of(g);
        const int order = 2 + trial % 7, width = 1 + trial % 3;
        LlpeParams p;
        p.theta = random_matrix(order + 1, width, rng);
        const Eigen::MatrixXd weights = random_matrix(n, width, rng);
        // loss = Σ weights ∘ P (sum(P) when weights are ones)
        auto loss = [&](const Eigen::MatrixXd& th) {
            LlpeParams q{th};
            return llpe_forward(s, q).matrix.cwiseProduct(weights).sum();
        };
        const Eigen::MatrixXd fd = oracle::finite_difference(loss, p.theta, 1e-5);
        CHECK(oracle::rel_error(llpe_grad(s, p, weights), fd) <= 1e-5);
    }
    Graph g5 = oracle::connected_gnp(5, 0.6, 9);
    auto s5 = full_of(g5);
    LlpeParams p5;
    p5.theta = random_matrix(4, 2, rng);
    auto sum_loss = [&](const Eigen::MatrixXd& th) { return llpe_forward(s5, LlpeParams{th}).matrix.sum(); };
    CHECK(oracle::rel_error(llpe_grad(s5, p5, Eigen::MatrixXd::Ones(5, 2)),
                            oracle::finite_difference(sum_loss, p5.theta, 1e-5)) <= 1e-5);
}

TEST_CASE("regularization penalty") {
    Eigen::MatrixXd basis(2, 1);
    basis << 1, 2;
    Eigen::MatrixXd theta = Eigen::MatrixXd::Ones(1, 1);
    CHECK(reg_penalty(theta, basis, 0.0, 1.0).value == doctest::Approx(5.0));
    CHECK(reg_penalty(theta, basis, 1.0, 0.0).value == doctest::Approx(3.0));
    auto zero = reg_penalty(Eigen::MatrixXd::Zero(1, 1), basis, 1.0, 1.0);
    CHECK(zero.value == 0.0);
    CHECK(zero.grad.cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        Graph g = oracle::connected_gnp(10 + trial, 0.4, 200 + trial);
        auto s = full_of(g);
        LlpeParams p;
        p.theta = random_matrix(5, 3, rng);
        auto pen = reg_penalty(p, s, 0.3, 0.7);
        auto f = [&](const Eigen::MatrixXd& th) { return reg_penalty(LlpeParams{th}, s, 0.3, 0.7).value; };
        CHECK(oracle::rel_error(pen.grad, oracle::finite_difference(f, p.theta, 1e-6)) <= 1e-5);
    }
}

TEST_CASE("rwse") {
    Eigen::MatrixXd k2 = rwse(oracle::complete(2), 2);
    CHECK(k2(0, 0) == 0.0);
    CHECK(k2(0, 1) == 1.0);
    CHECK(k2(1, 1) == 1.0);
    Eigen::MatrixXd tri = rwse(oracle::complete(3), 2);
    for (int i = 0; i < 3; ++i) CHECK(tri(i, 1) == doctest::Approx(0.5));

    Graph g = oracle::connected_gnp(300, 0.03, 3);
    Eigen::MatrixXd r = rwse(g, 4);
    CHECK(r.col(0).cwiseAbs().maxCoeff() == 0.0);
    // dense oracle for the return probabilities
    Eigen::MatrixXd walk = Eigen::MatrixXd(random_walk_matrix(g));
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(300, 300);
    for (int s = 0; s < 4; ++s) {
        power = power * walk;
        CHECK((r.col(s) - power.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
    }
    std::vector<Edge> e{{0, 1}};
    CHECK(rwse(Graph::from_edges(3, e), 3).row(2).cwiseAbs().sum() == 0.0);
}

TEST_CASE("llpe forward is linear in theta") {
    std::mt19937_64 rng(10);
    Graph g = oracle::connected_gnp(25, 0.3, 11);
    auto s = full_of(g);
    Eigen::MatrixXd a = random_matrix(9, 4, rng), b = random_matrix(9, 4, rng);
    Eigen::MatrixXd lhs = llpe_forward(s, LlpeParams{a + b}).matrix;
    Eigen::MatrixXd rhs = llpe_forward(s, LlpeParams{a}).matrix + llpe_forward(s, LlpeParams{b}).matrix;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("LlpeLarge on a full spectrum equals the extremal decomposition") {
    std::mt19937_64 rng(12);
    Graph g = oracle::connected_gnp(40, 0.2, 13);
    auto full = full_of(g);
    auto view = full.extremal_view(5, 5);
    LlpeParams p;
    p.theta = random_matrix(7, 3, rng);
    Eigen::MatrixXd a = build_encoding(LlpeLarge{5, 6, 3}, g, &full, &p).matrix;
    Eigen::MatrixXd b = llpe_forward(view, p).matrix;
    CHECK(a == b);
    auto ext = laplacian_spectrum(g, {.full = false, .k_small = 5, .k_large = 5, .tol = 1e-12});
    Eigen::MatrixXd c = build_encoding(LlpeLarge{5, 6, 3}, g, &ext, &p).matrix;
    CHECK((c - b).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("encodings are deterministic") {
    Graph g = oracle::connected_gnp(50, 0.1, 14);
    auto s1 = full_of(g), s2 = full_of(g);
    CHECK(build_encoding(LpeFK{4}, g, &s1).matrix == build_encoding(LpeFK{4}, g, &s2).matrix);
    auto p1 = init_llpe_params(8, 4, 3), p2 = init_llpe_params(8, 4, 3);
    CHECK(p1.theta == p2.theta);
    CHECK(build_encoding(Llpe{8, 4}, g, &s1, &p1).matrix == build_encoding(Llpe{8, 4}, g, &s2, &p2).matrix);
}

TEST_CASE("theta initialization scale and csv round trip") {
    auto p = init_llpe_params(63, 200, 1);
    const double sd = std::sqrt(p.theta.squaredNorm() / p.theta.size());
    CHECK(sd == doctest::Approx(0.1 / 8.0).epsilon(0.05));
    auto path = std::filesystem::temp_directory_path() / "spe_theta.csv";
    save_theta_csv(p, path);
    CHECK(load_theta_csv(path).theta == p.theta);
}
