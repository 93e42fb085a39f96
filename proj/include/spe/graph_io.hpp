#pragma once

#include "spe/graph.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace spe {

/// Edge-list text format: first line "n m", then m lines "u v" (0-based,
/// u < v). Companion files `features.csv` (n rows, no header) and
/// `labels.csv` (one integer per line) are read from the same directory when
/// present.
///
/// Duplicate edge lines are dropped with a warning. Warnings go to `warnings`
/// when given, otherwise to stderr.
Graph load_graph(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Writes the edge list, plus companions for whatever features/labels the
/// graph carries.
void save_graph(const Graph& graph, const std::filesystem::path& path);

}  // namespace spe
