#pragma once

// Independent reference computations used by the test suites.

#include "spe/graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace oracle {

spe::Graph path(spe::NodeId n);
spe::Graph cycle(spe::NodeId n);
spe::Graph complete(spe::NodeId n);
spe::Graph complete_bipartite(spe::NodeId a, spe::NodeId b);

/// G(n, p) conditioned on being connected (rejection sampling).
spe::Graph connected_gnp(spe::NodeId n, double p, std::uint64_t seed);

/// Random d-regular simple connected graph (pairing model with rejection).
spe::Graph random_regular(spe::NodeId n, int d, std::uint64_t seed);

/// Dense normalized Laplacian built entry by entry from the definition.
Eigen::MatrixXd dense_laplacian(const spe::Graph& g);

/// Eigenvalues by cyclic Jacobi rotations (ascending).
Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd a);

/// Exact commute time between i and j: hitting times from linear solves of
/// the random-walk chain.
double commute_time(const spe::Graph& g, spe::NodeId i, spe::NodeId j);

/// Central finite-difference gradient of f at x.
template <class F>
Eigen::MatrixXd finite_difference(F&& f, Eigen::MatrixXd x, double step) {
    Eigen::MatrixXd g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x(i);
        x(i) = keep + step;
        const double up = f(x);
        x(i) = keep - step;
        const double down = f(x);
        x(i) = keep;
        g(i) = (up - down) / (2 * step);
    }
    return g;
}

/// max |a − b| / max(1, max |b|)
double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace oracle
