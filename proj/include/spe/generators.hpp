#pragma once

#include "spe/graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace spe {

/// G(n, k, p, q): k equal contiguous communities, intra probability p, inter q.
struct SbmParams {
    NodeId n = 0;
    int k = 2;
    double p = 0.0;
    double q = 0.0;

    void validate() const;
};

/// Labels are set to the community index (node i belongs to ⌊i·k/n⌋).
Graph sbm_generate(const SbmParams& params, std::uint64_t seed);

/// Solves for (p, q) so that expected intra degree is h·avg_degree and the
/// expected inter degree (1−h)·avg_degree, with exact finite-size counts.
SbmParams sbm_from_homophily(NodeId n, int k, double avg_degree, double h);

/// Degree-and-compatibility preferential attachment.
struct PaParams {
    NodeId n = 0;
    int k = 2;
    int m_edges = 2;
    Eigen::MatrixXd compat;  ///< k×k, non-negative, each row has a positive entry

    void validate() const;
};

/// Nodes arrive one at a time after an (m_edges+1)-clique seeded with
/// round-robin labels. A new node of class i attaches each endpoint to an
/// existing node v with probability ∝ compat(i, class(v))·deg(v). Duplicate
/// picks are resampled up to 100 times, then skipped.
Graph pa_generate(const PaParams& params, const std::vector<double>& label_dist, std::uint64_t seed);

struct FeatureGenParams {
    double mu = 1.0;
    double sigma = 1.0;
    int dim = 10;  ///< binary mode only; multiclass uses k
};

enum class FeatureMode { binary, multiclass };

/// binary: `dim` iid Gaussians with mean y·mu; multiclass: k-dim Gaussian with
/// mean mu·one_hot(y). Coordinate std is sigma in both modes.
Eigen::MatrixXd gen_features(const std::vector<int>& labels, int num_classes, const FeatureGenParams& params,
                             FeatureMode mode, std::uint64_t seed);

}  // namespace spe
