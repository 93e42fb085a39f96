#include "oracles.hpp"

#include "spe/errors.hpp"
#include "spe/generators.hpp"
#include "spe/graph.hpp"
#include "spe/graph_io.hpp"
#include "spe/homophily.hpp"
#include "spe/laplacian.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace spe;

namespace {

void check_structure(const Graph& g) {
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        auto nb = g.neighbors(u);
        for (std::size_t i = 0; i < nb.size(); ++i) {
            CHECK(nb[i] != u);
            if (i > 0) CHECK(nb[i - 1] < nb[i]);
            CHECK(g.has_edge(nb[i], u));
        }
    }
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("spe_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("graph construction dedups and rejects self loops") {
    std::vector<Edge> e{{0, 1}, {1, 0}, {1, 2}};
    std::size_t dup = 0;
    Graph g = Graph::from_edges(3, e, &dup);
    CHECK(g.num_edges() == 2);
    CHECK(dup == 1);
    check_structure(g);
    std::vector<Edge> loop{{1, 1}};
    CHECK_THROWS_AS(Graph::from_edges(3, loop), ParameterError);
    std::vector<Edge> out{{0, 3}};
    CHECK_THROWS_AS(Graph::from_edges(3, out), ParameterError);
}

TEST_CASE("labels outside range are rejected") {
    Graph g = oracle::path(3);
    CHECK_THROWS_AS(g.set_labels({0, 1, 2}, 2), ParameterError);
    CHECK_THROWS_AS(g.labels(), ConfigurationError);
}

TEST_CASE("sbm degenerate probabilities") {
    Graph two_cliques = sbm_generate({4, 2, 1.0, 0.0}, 1);
    CHECK(two_cliques.num_edges() == 2);
    CHECK(two_cliques.has_edge(0, 1));
    CHECK(two_cliques.has_edge(2, 3));
    CHECK(two_cliques.labels() == std::vector<int>{0, 0, 1, 1});

    Graph k22 = sbm_generate({4, 2, 0.0, 1.0}, 1);
    CHECK(k22.num_edges() == 4);
    CHECK(k22.has_edge(0, 2));
    CHECK(k22.has_edge(0, 3));
    CHECK(k22.has_edge(1, 2));
    CHECK(k22.has_edge(1, 3));
    CHECK_FALSE(k22.has_edge(0, 1));
}

TEST_CASE("sbm parameter validation") {
    CHECK_THROWS_AS(sbm_generate({5, 2, 0.5, 0.5}, 0), ParameterError);
    CHECK_THROWS_AS(sbm_generate({4, 2, 1.5, 0.5}, 0), ParameterError);
    CHECK_THROWS_AS(sbm_generate({4, 2, 0.5, -0.1}, 0), ParameterError);
}

TEST_CASE("sbm mean degree over seeds") {
    const SbmParams params = sbm_from_homophily(2000, 2, 10.0, 0.5);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Graph g = sbm_generate(params, seed);
        check_structure(g);
        CHECK(g.mean_degree() == doctest::Approx(10.0).epsilon(0.05));
    }
}

TEST_CASE("sbm determinism and pair-frequency oracle") {
    const SbmParams params{40, 2, 0.3, 0.1};
    CHECK(sbm_generate(params, 7).same_structure(sbm_generate(params, 7)));
    // empirical frequency of each pair type matches p and q
    double intra = 0, inter = 0;
    const int trials = 400;
    for (int s = 0; s < trials; ++s) {
        Graph g = sbm_generate(params, 1000 + s);
        for (auto [u, v] : g.edge_list()) (u / 20 == v / 20 ? intra : inter) += 1;
    }
    intra /= trials * 2.0 * (20 * 19 / 2);
    inter /= trials * 400.0;
    CHECK(intra == doctest::Approx(0.3).epsilon(0.03));
    CHECK(inter == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("sbm homophily extremes are exact") {
    Graph hom = sbm_generate(sbm_from_homophily(2000, 2, 10.0, 1.0), 3);
    CHECK(edge_homophily(hom) == 1.0);
    Graph het = sbm_generate(sbm_from_homophily(2000, 2, 10.0, 0.0), 3);
    CHECK(edge_homophily(het) == 0.0);
}

TEST_CASE("sbm_from_homophily closed forms") {
    auto a = sbm_from_homophily(2000, 2, 10.0, 1.0);
    CHECK(a.q == 0.0);
    CHECK(a.p == doctest::Approx(10.0 / 999.0));
    auto b = sbm_from_homophily(2000, 2, 10.0, 0.0);
    CHECK(b.p == 0.0);
    CHECK(b.q == doctest::Approx(10.0 / 1000.0));
    auto c = sbm_from_homophily(2000, 2, 10.0, 0.8);
    CHECK(c.p == doctest::Approx(8.0 / 999.0));
    CHECK(c.q == doctest::Approx(2.0 / 1000.0));
    CHECK_THROWS_AS(sbm_from_homophily(10, 2, 50.0, 0.5), ParameterError);
}

TEST_CASE("preferential attachment") {
    PaParams one{3, 1, 1, Eigen::MatrixXd::Ones(1, 1)};
    for (std::uint64_t s = 0; s < 20; ++s) {
        Graph g = pa_generate(one, {1.0}, s);
        NodeId count = 0;
        g.components(&count);
        CHECK(count == 1);
        CHECK(g.num_edges() == 2);
    }

    PaParams ident{5000, 2, 2, Eigen::MatrixXd::Identity(2, 2)};
    Graph gi = pa_generate(ident, {0.5, 0.5}, 11);
    check_structure(gi);
    CHECK(edge_homophily(gi) >= 0.95);

    Eigen::MatrixXd anti(2, 2);
    anti << 0, 1, 1, 0;
    PaParams a{5000, 2, 2, anti};
    Graph ga = pa_generate(a, {0.5, 0.5}, 11);
    check_structure(ga);
    CHECK(edge_homophily(ga) <= 0.05);
    // heavy tail: the largest degree is far above the mean
    NodeId max_deg = 0;
    for (NodeId u = 0; u < ga.num_nodes(); ++u) max_deg = std::max(max_deg, ga.degree(u));
    CHECK(max_deg > 10 * ga.mean_degree());

    CHECK(pa_generate(a, {0.5, 0.5}, 3).same_structure(pa_generate(a, {0.5, 0.5}, 3)));
}

TEST_CASE("preferential attachment without eligible target") {
    // class 2 may only attach to class 2, which is absent from the seed clique
    PaParams p{10, 3, 1, Eigen::MatrixXd::Identity(3, 3)};
    CHECK_THROWS_AS(pa_generate(p, {0.0, 0.0, 1.0}, 0), GenerationError);
    Eigen::MatrixXd zero_row(2, 2);
    zero_row << 1, 1, 0, 0;
    CHECK_THROWS_AS(pa_generate({10, 2, 1, zero_row}, {0.5, 0.5}, 0), ParameterError);
}

TEST_CASE("feature generation") {
    std::vector<int> labels{0, 1, 1, 0};
    FeatureGenParams tiny{1.0, 1e-300, 10};
    Eigen::MatrixXd x = gen_features(labels, 2, tiny, FeatureMode::binary, 1);
    CHECK(x.rows() == 4);
    CHECK(x.cols() == 10);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 10; ++j) CHECK(x(i, j) == doctest::Approx(labels[i]));

    std::vector<int> five{3, 0};
    Eigen::MatrixXd m = gen_features(five, 5, {2.0, 1e-300, 10}, FeatureMode::multiclass, 1);
    CHECK(m.cols() == 5);
    Eigen::RowVectorXd want(5);
    want << 0, 0, 0, 2, 0;
    CHECK((m.row(0) - want).cwiseAbs().maxCoeff() < 1e-12);

    std::vector<int> y(2000);
    for (int i = 0; i < 2000; ++i) y[i] = i % 2;
    Eigen::MatrixXd big = gen_features(y, 2, {1.0, 1.0, 10}, FeatureMode::binary, 5);
    for (int c = 0; c < 2; ++c) {
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(10);
        for (int i = c; i < 2000; i += 2) mean += big.row(i);
        mean /= 1000.0;
        for (int j = 0; j < 10; ++j) CHECK(std::abs(mean[j] - c) < 0.1);
    }
    CHECK(big == gen_features(y, 2, {1.0, 1.0, 10}, FeatureMode::binary, 5));
    CHECK_THROWS_AS(gen_features(y, 2, {1.0, 0.0, 10}, FeatureMode::binary, 5), ParameterError);
}

TEST_CASE("edge homophily") {
    Graph tri = oracle::complete(3);
    tri.set_labels({0, 0, 0}, 1);
    CHECK(edge_homophily(tri) == 1.0);
    tri.set_labels({0, 0, 1}, 2);
    CHECK(edge_homophily(tri) == doctest::Approx(1.0 / 3.0));
    Graph k22 = oracle::complete_bipartite(2, 2);
    k22.set_labels({0, 0, 1, 1}, 2);
    CHECK(edge_homophily(k22) == 0.0);
    Graph empty = Graph::from_edges(3, {});
    empty.set_labels({0, 0, 0}, 1);
    CHECK_THROWS_AS(edge_homophily(empty), UndefinedMeasureError);
}

TEST_CASE("local homophily and quintiles") {
    std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
    Graph g = Graph::from_edges(6, star);
    g.set_labels({0, 0, 0, 0, 1, 0}, 2);
    CHECK(local_homophily(g, 0) == doctest::Approx(0.75));
    CHECK(local_homophily(g, 1) == 1.0);
    CHECK(local_homophily(g, 4) == 0.0);
    auto prof = local_homophily_profile(g);
    CHECK(prof.isolated[5]);
    CHECK_FALSE(prof.isolated[0]);
    CHECK(prof.value[5] == 0.0);

    Graph k22 = oracle::complete_bipartite(2, 2);
    k22.set_labels({0, 0, 1, 1}, 2);
    for (NodeId u = 0; u < 4; ++u) CHECK(local_homophily(k22, u) == 0.0);

    // 10 nodes with equal values: quintiles follow node index
    Graph c = oracle::cycle(10);
    c.set_labels(std::vector<int>(10, 0), 1);
    auto q = quintile_bucketing(c);
    for (int i = 0; i < 10; ++i) CHECK(q[i] == i / 2);
}

TEST_CASE("normalized laplacian entries") {
    Eigen::MatrixXd k2 = Eigen::MatrixXd(normalized_laplacian(oracle::complete(2)));
    Eigen::Matrix2d want;
    want << 1, -1, -1, 1;
    CHECK((k2 - want).cwiseAbs().maxCoeff() < 1e-15);

    Eigen::MatrixXd k3 = Eigen::MatrixXd(normalized_laplacian(oracle::complete(3)));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(k3(i, j) == doctest::Approx(i == j ? 1.0 : -0.5));

    std::vector<Edge> e{{0, 1}};
    Eigen::MatrixXd iso = Eigen::MatrixXd(normalized_laplacian(Graph::from_edges(3, e)));
    CHECK(iso.row(2).cwiseAbs().sum() == 0.0);
    CHECK(iso.col(2).cwiseAbs().sum() == 0.0);
}

TEST_CASE("normalized laplacian matches the definition and Rayleigh bound") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    for (std::uint64_t s = 0; s < 10; ++s) {
        Graph g = sbm_generate({60, 3, 0.2, 0.05}, s);
        Eigen::MatrixXd l = Eigen::MatrixXd(normalized_laplacian(g));
        CHECK((l - oracle::dense_laplacian(g)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((l - l.transpose()).cwiseAbs().maxCoeff() == 0.0);
        for (int t = 0; t < 20; ++t) {
            Eigen::VectorXd x(60);
            for (auto& v : x) v = normal(rng);
            const double rq = x.dot(l * x);
            CHECK(rq >= -1e-10);
            CHECK(rq <= 2 * x.squaredNorm() + 1e-10);
        }
    }
}

TEST_CASE("random walk matrix rows sum to one") {
    Graph g = sbm_generate({30, 3, 0.4, 0.1}, 2);
    Eigen::MatrixXd p = Eigen::MatrixXd(random_walk_matrix(g));
    for (NodeId u = 0; u < 30; ++u) {
        if (g.degree(u) > 0) CHECK(p.row(u).sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("edge-list io") {
    auto dir = temp_dir("io");
    {
        std::ofstream out(dir / "empty.txt");
        out << "3 0\n";
    }
    Graph e = load_graph(dir / "empty.txt");
    CHECK(e.num_nodes() == 3);
    CHECK(e.num_edges() == 0);

    {
        std::ofstream out(dir / "dup.txt");
        out << "3 3\n0 1\n0 1\n1 2\n";
    }
    std::vector<std::string> warnings;
    Graph d = load_graph(dir / "dup.txt", &warnings);
    CHECK(d.num_edges() == 2);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("duplicate") != std::string::npos);

    {
        std::ofstream out(dir / "bad.txt");
        out << "3 2\n0 1\n1 7\n";
    }
    try {
        load_graph(dir / "bad.txt");
        FAIL("expected parse error");
    } catch (const ParseError& err) {
        CHECK(err.line() == 3);
    }
    {
        std::ofstream out(dir / "header.txt");
        out << "three 2\n";
    }
    CHECK_THROWS_AS(load_graph(dir / "header.txt"), ParseError);
}

TEST_CASE("save/load round trip is byte identical") {
    auto dir = temp_dir("roundtrip");
    Graph g = sbm_generate(sbm_from_homophily(200, 2, 6.0, 0.3), 4);
    g.set_features(gen_features(g.labels(), 2, {}, FeatureMode::binary, 4));
    save_graph(g, dir / "g.txt");
    const std::string first = slurp(dir / "g.txt");
    const std::string first_feat = slurp(dir / "features.csv");
    Graph back = load_graph(dir / "g.txt");
    CHECK(back.same_structure(g));
    CHECK(back.labels() == g.labels());
    CHECK(back.features() == g.features());
    save_graph(back, dir / "g.txt");
    CHECK(slurp(dir / "g.txt") == first);
    CHECK(slurp(dir / "features.csv") == first_feat);
}
