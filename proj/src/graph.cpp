#include "spe/graph.hpp"

#include "spe/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace spe {

Graph Graph::from_edges(NodeId n, std::span<const Edge> edges, std::size_t* duplicates) {
    if (n < 0) throw ParameterError("node count must be non-negative");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n) {
            throw ParameterError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                 ") out of range for n=" + std::to_string(n));
        }
        if (u == v) throw ParameterError("self loop at node " + std::to_string(u));
        ++counts[u + 1];
        ++counts[v + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());

    std::vector<NodeId> raw(static_cast<std::size_t>(counts.back()));
    std::vector<std::int64_t> cursor(counts.begin(), counts.end() - 1);
    for (const auto& [u, v] : edges) {
        raw[cursor[u]++] = v;
        raw[cursor[v]++] = u;
    }

    Graph g;
    g.n_ = n;
    g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    g.neighbors_.reserve(raw.size());
    std::size_t dropped = 0;
    for (NodeId u = 0; u < n; ++u) {
        auto first = raw.begin() + counts[u];
        auto last = raw.begin() + counts[u + 1];
        std::sort(first, last);
        auto unique_end = std::unique(first, last);
        dropped += static_cast<std::size_t>(last - unique_end);
        g.neighbors_.insert(g.neighbors_.end(), first, unique_end);
        g.offsets_[u + 1] = static_cast<std::int64_t>(g.neighbors_.size());
    }
    // every duplicate undirected edge was counted once from each endpoint
    if (duplicates) *duplicates = dropped / 2;
    return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edge_list() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (NodeId u = 0; u < n_; ++u) {
        for (NodeId v : neighbors(u)) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

const std::vector<int>& Graph::labels() const {
    if (!labels_) throw ConfigurationError("graph has no labels");
    return *labels_;
}

void Graph::set_labels(std::vector<int> labels, int num_classes) {
    if (static_cast<NodeId>(labels.size()) != n_) throw ParameterError("label vector length != n");
    for (int y : labels) {
        if (y < 0 || y >= num_classes) throw ParameterError("label " + std::to_string(y) + " outside [0, num_classes)");
    }
    labels_ = std::move(labels);
    num_classes_ = num_classes;
}

const Eigen::MatrixXd& Graph::features() const {
    if (!features_) throw ConfigurationError("graph has no features");
    return *features_;
}

void Graph::set_features(Eigen::MatrixXd features) {
    if (features.rows() != n_) throw ParameterError("feature matrix must have n rows");
    features_ = std::move(features);
}

NodeId Graph::min_degree() const noexcept {
    NodeId best = n_ > 0 ? degree(0) : 0;
    for (NodeId u = 1; u < n_; ++u) best = std::min(best, degree(u));
    return best;
}

double Graph::mean_degree() const noexcept {
    return n_ > 0 ? static_cast<double>(neighbors_.size()) / n_ : 0.0;
}

std::vector<NodeId> Graph::components(NodeId* count) const {
    std::vector<NodeId> comp(static_cast<std::size_t>(n_), -1);
    std::vector<NodeId> stack;
    NodeId next = 0;
    for (NodeId s = 0; s < n_; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            for (NodeId v : neighbors(u)) {
                if (comp[v] < 0) {
                    comp[v] = next;
                    stack.push_back(v);
                }
            }
        }
        ++next;
    }
    if (count) *count = next;
    return comp;
}

}  // namespace spe
