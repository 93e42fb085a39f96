#pragma once

#include "spe/graph.hpp"

#include <Eigen/Sparse>

namespace spe {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// L = I − D^{−1/2} A D^{−1/2}. Isolated nodes get D^{−1/2} = 0, so their row
/// and column are entirely zero (eigenvalue 0).
SparseMatrix normalized_laplacian(const Graph& graph);

/// Random-walk transition matrix D^{−1} A; rows of isolated nodes are zero.
SparseMatrix random_walk_matrix(const Graph& graph);

}  // namespace spe
