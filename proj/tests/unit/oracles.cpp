#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace oracle {

using spe::Edge;
using spe::Graph;
using spe::NodeId;

Graph path(NodeId n) {
    std::vector<Edge> e;
    for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return Graph::from_edges(n, e);
}

Graph cycle(NodeId n) {
    std::vector<Edge> e;
    for (NodeId i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return Graph::from_edges(n, e);
}

Graph complete(NodeId n) {
    std::vector<Edge> e;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Graph::from_edges(n, e);
}

Graph complete_bipartite(NodeId a, NodeId b) {
    std::vector<Edge> e;
    for (NodeId i = 0; i < a; ++i)
        for (NodeId j = 0; j < b; ++j) e.emplace_back(i, a + j);
    return Graph::from_edges(a + b, e);
}

Graph connected_gnp(NodeId n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<Edge> e;
        for (NodeId i = 0; i < n; ++i)
            for (NodeId j = i + 1; j < n; ++j)
                if (coin(rng)) e.emplace_back(i, j);
        Graph g = Graph::from_edges(n, e);
        NodeId count = 0;
        g.components(&count);
        if (count == 1) return g;
    }
    throw std::runtime_error("connected_gnp: no connected sample");
}

Graph random_regular(NodeId n, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<NodeId> stubs;
        for (NodeId i = 0; i < n; ++i)
            for (int k = 0; k < d; ++k) stubs.push_back(i);
        std::shuffle(stubs.begin(), stubs.end(), rng);
        std::vector<Edge> e;
        bool ok = true;
        for (std::size_t s = 0; s + 1 < stubs.size(); s += 2) {
            NodeId u = std::min(stubs[s], stubs[s + 1]), v = std::max(stubs[s], stubs[s + 1]);
            if (u == v || std::find(e.begin(), e.end(), Edge{u, v}) != e.end()) {
                ok = false;
                break;
            }
            e.emplace_back(u, v);
        }
        if (!ok) continue;
        Graph g = Graph::from_edges(n, e);
        NodeId count = 0;
        g.components(&count);
        if (count == 1) return g;
    }
    throw std::runtime_error("random_regular: no sample");
}

Eigen::MatrixXd dense_laplacian(const Graph& g) {
    const NodeId n = g.num_nodes();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (NodeId i = 0; i < n; ++i) {
        if (g.degree(i) == 0) continue;
        l(i, i) = 1.0;
        for (NodeId j = 0; j < n; ++j) {
            if (i != j && g.has_edge(i, j)) l(i, j) = -1.0 / std::sqrt(double(g.degree(i)) * g.degree(j));
        }
    }
    return l;
}

Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd a) {
    const Eigen::Index n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Eigen::VectorXd d = a.diagonal();
    std::sort(d.data(), d.data() + n);
    return d;
}

namespace {

// Expected hitting time of `target` from every node.
Eigen::VectorXd hitting_times(const Graph& g, NodeId target) {
    const NodeId n = g.num_nodes();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (NodeId u = 0; u < n; ++u) {
        a(u, u) = 1.0;
        if (u == target) continue;
        b[u] = 1.0;
        for (NodeId v : g.neighbors(u)) a(u, v) -= 1.0 / g.degree(u);
    }
    return a.fullPivLu().solve(b);
}

}  // namespace

double commute_time(const Graph& g, NodeId i, NodeId j) {
    return hitting_times(g, j)[i] + hitting_times(g, i)[j];
}

double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

namespace {

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * double(i + j);
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a), rb = ranks(b);
    const double n = double(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
