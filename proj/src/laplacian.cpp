#include "spe/laplacian.hpp"

#include <cmath>
#include <vector>

namespace spe {

SparseMatrix normalized_laplacian(const Graph& graph) {
    const NodeId n = graph.num_nodes();
    std::vector<double> inv_sqrt(static_cast<std::size_t>(n), 0.0);
    for (NodeId u = 0; u < n; ++u) {
        if (graph.degree(u) > 0) inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(graph.degree(u)));
    }
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(graph.adjacency().size() + static_cast<std::size_t>(n));
    for (NodeId u = 0; u < n; ++u) {
        if (graph.degree(u) == 0) continue;
        entries.emplace_back(u, u, 1.0);
        for (NodeId v : graph.neighbors(u)) entries.emplace_back(u, v, -inv_sqrt[u] * inv_sqrt[v]);
    }
    SparseMatrix lap(n, n);
    lap.setFromTriplets(entries.begin(), entries.end());
    return lap;
}

SparseMatrix random_walk_matrix(const Graph& graph) {
    const NodeId n = graph.num_nodes();
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(graph.adjacency().size());
    for (NodeId u = 0; u < n; ++u) {
        const double w = graph.degree(u) > 0 ? 1.0 / graph.degree(u) : 0.0;
        for (NodeId v : graph.neighbors(u)) entries.emplace_back(u, v, w);
    }
    SparseMatrix walk(n, n);
    walk.setFromTriplets(entries.begin(), entries.end());
    return walk;
}

}  // namespace spe
