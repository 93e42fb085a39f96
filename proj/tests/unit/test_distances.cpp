#include "oracles.hpp"

#include "spe/distances.hpp"
#include "spe/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace spe;

namespace {

SpectralDecomposition full_of(const Graph& g) { return laplacian_spectrum(g, {}); }

double max_bump_error(const SpectralDecomposition& s, const SpectralKernel& kernel, double c_max, int order) {
    const auto p = bump_llpe_construct(s, kernel, c_max, order);
    return squared_distance_error(llpe_forward(s, p).matrix, spectral_distance_matrix(s, kernel));
}

}  // namespace

TEST_CASE("K2 closed forms") {
    auto s = full_of(oracle::complete(2));
    auto bi = spectral_distance_matrix(s, Biharmonic{});
    CHECK(bi.values(0, 1) == doctest::Approx(1.0));
    auto ct = spectral_distance_matrix(s, Commute{});
    CHECK(ct.values(0, 1) * ct.values(0, 1) == doctest::Approx(0.5));
    CHECK(bi.values(0, 0) == 0.0);
    CHECK_FALSE(bi.approximate);
}

TEST_CASE("distance matrix matches the pairwise definition") {
    Graph g = oracle::connected_gnp(15, 0.3, 2);
    auto s = full_of(g);
    for (const SpectralKernel& k : {SpectralKernel{Diffusion{0.7}}, SpectralKernel{Biharmonic{}},
                                    SpectralKernel{Commute{}}, SpectralKernel{HighPass{0.5}}}) {
        auto d = spectral_distance_matrix(s, k);
        CHECK((d.values - d.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
        for (int i = 0; i < 15; ++i) {
            CHECK(d.values(i, i) == 0.0);
            for (int j = 0; j < 15; ++j) {
                double sum = 0.0;
                for (int m = 0; m < 15; ++m) {
                    const double lam = s.eigenvalues[m];
                    if (is_singular(k) && lam <= kLambdaFloor) continue;
                    const double diff = s.eigenvectors(i, m) - s.eigenvectors(j, m);
                    sum += kernel_value(k, lam) * diff * diff;
                }
                CHECK(d.values(i, j) * d.values(i, j) == doctest::Approx(sum).epsilon(1e-9).scale(1.0));
            }
        }
    }
}

TEST_CASE("negative kernel is rejected") {
    auto s = full_of(oracle::cycle(5));
    Custom neg;
    neg.series.coeffs = Eigen::VectorXd::Constant(1, -1.0);
    CHECK_THROWS_AS(spectral_distance_matrix(s, neg), KernelError);
    CHECK_THROWS_AS(spectral_distance_matrix(s, Diffusion{0.0}), KernelError);
}

TEST_CASE("invariance to sign flips and rotations in degenerate eigenspaces") {
    // the cycle has many doubly degenerate eigenvalues
    Graph g = oracle::cycle(12);
    auto s = full_of(g);
    auto base = spectral_distance_matrix(s, Diffusion{1.0});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
    auto mixed = s;
    for (Eigen::Index k = 0; k + 1 < mixed.size(); ++k) {
        if (std::abs(mixed.eigenvalues[k + 1] - mixed.eigenvalues[k]) < 1e-10) {
            const double a = angle(rng);
            const Eigen::VectorXd u = mixed.eigenvectors.col(k), v = mixed.eigenvectors.col(k + 1);
            mixed.eigenvectors.col(k) = std::cos(a) * u - std::sin(a) * v;
            mixed.eigenvectors.col(k + 1) = std::sin(a) * u + std::cos(a) * v;
            ++k;
        }
    }
    mixed.eigenvectors.col(3) *= -1.0;
    for (const SpectralKernel& k : {SpectralKernel{Diffusion{1.0}}, SpectralKernel{Commute{}}}) {
        auto a = spectral_distance_matrix(s, k), b = spectral_distance_matrix(mixed, k);
        CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-8);
    }
    CHECK((base.values - spectral_distance_matrix(mixed, Diffusion{1.0}).values).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("diffusion distance decreases in t") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto s = full_of(oracle::connected_gnp(20, 0.25, seed));
        Eigen::MatrixXd prev = spectral_distance_matrix(s, Diffusion{0.1}).values;
        for (double t : {0.2, 0.5, 1.0, 2.0, 5.0}) {
            Eigen::MatrixXd cur = spectral_distance_matrix(s, Diffusion{t}).values;
            CHECK((cur.array() <= prev.array() + 1e-12).all());
            prev = cur;
        }
    }
}

TEST_CASE("bump construction on K2") {
    auto s = full_of(oracle::complete(2));
    auto p = bump_llpe_construct(s, Biharmonic{}, 200.0, 64);
    Eigen::MatrixXd enc = llpe_forward(s, p).matrix;
    CHECK(std::abs((enc.row(0) - enc.row(1)).squaredNorm() - 1.0) <= 1e-2);
}

TEST_CASE("bump construction with a zero kernel") {
    auto s = full_of(oracle::cycle(6));
    Custom zero;
    zero.series.coeffs = Eigen::VectorXd::Zero(3);
    auto p = bump_llpe_construct(s, zero, 200.0, 16);
    Eigen::MatrixXd enc = llpe_forward(s, p).matrix;
    CHECK(enc.cwiseAbs().maxCoeff() == 0.0);
    CHECK(spectral_distance_matrix(s, zero).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bump construction converges on a well separated spectrum") {
    // path on 6 nodes: eigenvalues 1 − cos(πk/5) are at least 0.19 apart
    auto s = full_of(oracle::path(6));
    std::vector<std::string> warnings;
    bump_llpe_construct(s, Diffusion{1.0}, 400.0, 128, &warnings);
    CHECK(warnings.empty());
    const double e32 = max_bump_error(s, Diffusion{1.0}, 400.0, 32);
    const double e64 = max_bump_error(s, Diffusion{1.0}, 400.0, 64);
    const double e128 = max_bump_error(s, Diffusion{1.0}, 400.0, 128);
    CHECK(e64 < e32);
    CHECK(e128 <= e64);
    CHECK(e128 <= 1e-2);
    CHECK(max_bump_error(s, Biharmonic{}, 400.0, 128) <= 1e-2);
}

TEST_CASE("bump construction on random graphs hits the overlap floor") {
    // eigenvalue gaps below the bump width leave W far from diag(√r) for any M
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto s = full_of(oracle::connected_gnp(20, 0.25, 50 + seed));
        std::vector<std::string> warnings;
        bump_llpe_construct(s, Diffusion{1.0}, 200.0, 32, &warnings);
        CHECK_FALSE(warnings.empty());
        CHECK(max_bump_error(s, Diffusion{1.0}, 200.0, 128) > 1e-2);
    }
}

TEST_CASE("bump construction preconditions") {
    auto big = full_of(oracle::cycle(60));
    CHECK_THROWS_AS(bump_llpe_construct(big, Diffusion{}, 200.0, 8), ParameterError);
    Graph g = oracle::cycle(10);
    auto ext = laplacian_spectrum(g, {.full = false, .k_small = 2, .k_large = 2});
    CHECK_THROWS_AS(bump_llpe_construct(ext, Diffusion{}, 200.0, 8), ConfigurationError);
    CHECK(spectral_distance_matrix(ext, Diffusion{}).approximate);
}

TEST_CASE("commute time Monte Carlo") {
    auto k2 = commute_mc_oracle(oracle::complete(2), 0, 1, 50, 1000, 1);
    CHECK(k2.mean == 2.0);
    CHECK(k2.std_error == 0.0);

    Graph p3 = oracle::path(3);
    CHECK(oracle::commute_time(p3, 0, 2) == doctest::Approx(8.0));
    auto mc = commute_mc_oracle(p3, 0, 2, 20000, 100000, 2);
    CHECK(std::abs(mc.mean - 8.0) <= 4 * mc.std_error);

    Graph tri = oracle::complete(3);
    CHECK(oracle::commute_time(tri, 0, 1) == doctest::Approx(4.0));
    auto mt = commute_mc_oracle(tri, 0, 1, 20000, 100000, 3);
    CHECK(std::abs(mt.mean - 4.0) <= 4 * mt.std_error);

    auto trunc = commute_mc_oracle(oracle::path(30), 0, 29, 20, 5, 4);
    CHECK(trunc.truncated == 20);
    CHECK(trunc.completed == 0);

    std::vector<Edge> e{{0, 1}, {2, 3}};
    CHECK_THROWS_AS(commute_mc_oracle(Graph::from_edges(4, e), 0, 2, 10, 100, 0), ReachabilityError);
}

TEST_CASE("commute kernel ranks pairs like random-walk commute times") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Graph g = oracle::random_regular(15, 4, 10 + seed);
        auto d = spectral_distance_matrix(full_of(g), Commute{});
        std::vector<double> spectral, walk;
        for (NodeId i = 0; i < 15; ++i) {
            for (NodeId j = i + 1; j < 15; ++j) {
                spectral.push_back(d.values(i, j));
                walk.push_back(commute_mc_oracle(g, i, j, 4000, 1000000, 1000 * seed + 15 * i + j).mean);
            }
        }
        CHECK(oracle::spearman(spectral, walk) >= 0.9);
    }
}
