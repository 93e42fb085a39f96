#pragma once

#include "spe/graph.hpp"

#include <vector>

namespace spe {

/// Fraction of undirected edges whose endpoints share a label.
double edge_homophily(const Graph& graph);

/// Fraction of `node`'s neighbors sharing its label; 0 for isolated nodes.
double local_homophily(const Graph& graph, NodeId node);

struct LocalHomophilyProfile {
    std::vector<double> value;  ///< per node, 0 for isolated nodes
    std::vector<bool> isolated;
    std::vector<int> quintile;  ///< 0..4
};

/// Per-node local homophily and quintile index. Quintiles are assigned by rank
/// over (value, node index), so ties break towards the lower index.
LocalHomophilyProfile local_homophily_profile(const Graph& graph);

/// Quintile index per node; see local_homophily_profile.
std::vector<int> quintile_bucketing(const Graph& graph);

}  // namespace spe
