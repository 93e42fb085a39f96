#include "spe/homophily.hpp"

#include "spe/errors.hpp"

#include <algorithm>
#include <numeric>

namespace spe {

double edge_homophily(const Graph& graph) {
    const auto& y = graph.labels();
    if (graph.num_edges() == 0) throw UndefinedMeasureError("edge homophily undefined on a graph without edges");
    std::size_t same = 0;
    for (NodeId u = 0; u < graph.num_nodes(); ++u) {
        for (NodeId v : graph.neighbors(u)) {
            if (u < v && y[u] == y[v]) ++same;
        }
    }
    return static_cast<double>(same) / static_cast<double>(graph.num_edges());
}

double local_homophily(const Graph& graph, NodeId node) {
    const auto& y = graph.labels();
    if (node < 0 || node >= graph.num_nodes()) throw ParameterError("node index out of range");
    auto nb = graph.neighbors(node);
    if (nb.empty()) return 0.0;
    const auto same = std::count_if(nb.begin(), nb.end(), [&](NodeId v) { return y[v] == y[node]; });
    return static_cast<double>(same) / static_cast<double>(nb.size());
}

LocalHomophilyProfile local_homophily_profile(const Graph& graph) {
    const NodeId n = graph.num_nodes();
    LocalHomophilyProfile out;
    out.value.resize(static_cast<std::size_t>(n));
    out.isolated.resize(static_cast<std::size_t>(n));
    out.quintile.resize(static_cast<std::size_t>(n));
    for (NodeId u = 0; u < n; ++u) {
        out.isolated[u] = graph.degree(u) == 0;
        out.value[u] = local_homophily(graph, u);
    }
    std::vector<NodeId> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return out.value[a] < out.value[b]; });
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        out.quintile[order[rank]] = static_cast<int>(rank * 5 / order.size());
    }
    return out;
}

std::vector<int> quintile_bucketing(const Graph& graph) { return local_homophily_profile(graph).quintile; }

}  // namespace spe
