#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace spe {

using NodeId = std::int32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected, unweighted simple graph in compressed sparse row form with
/// optional node features and labels. Immutable once built.
///
/// Invariants: symmetric adjacency, no self loops, strictly increasing
/// neighbor lists, labels in [0, num_classes).
class Graph {
public:
    Graph() = default;

    /// Builds from an undirected edge list. Self loops are rejected, duplicate
    /// edges (in either orientation) are collapsed; the number dropped is
    /// written to `duplicates` when given.
    static Graph from_edges(NodeId n, std::span<const Edge> edges, std::size_t* duplicates = nullptr);

    NodeId num_nodes() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return neighbors_.size() / 2; }

    std::span<const NodeId> neighbors(NodeId u) const noexcept {
        return {neighbors_.data() + offsets_[u], neighbors_.data() + offsets_[u + 1]};
    }
    NodeId degree(NodeId u) const noexcept { return static_cast<NodeId>(offsets_[u + 1] - offsets_[u]); }
    bool has_edge(NodeId u, NodeId v) const;

    const std::vector<std::int64_t>& offsets() const noexcept { return offsets_; }
    const std::vector<NodeId>& adjacency() const noexcept { return neighbors_; }

    /// Each undirected edge once, as (u, v) with u < v, in row order.
    std::vector<Edge> edge_list() const;

    bool has_labels() const noexcept { return labels_.has_value(); }
    const std::vector<int>& labels() const;
    int num_classes() const noexcept { return num_classes_; }
    void set_labels(std::vector<int> labels, int num_classes);

    bool has_features() const noexcept { return features_.has_value(); }
    const Eigen::MatrixXd& features() const;
    void set_features(Eigen::MatrixXd features);

    NodeId min_degree() const noexcept;
    double mean_degree() const noexcept;

    /// Connected component index per node, components numbered in order of
    /// their smallest node.
    std::vector<NodeId> components(NodeId* count = nullptr) const;

    /// Structural equality: same n and same adjacency (features/labels ignored).
    bool same_structure(const Graph& other) const noexcept {
        return n_ == other.n_ && offsets_ == other.offsets_ && neighbors_ == other.neighbors_;
    }

private:
    NodeId n_ = 0;
    std::vector<std::int64_t> offsets_{0};
    std::vector<NodeId> neighbors_;
    std::optional<std::vector<int>> labels_;
    int num_classes_ = 0;
    std::optional<Eigen::MatrixXd> features_;
};

}  // namespace spe
