#pragma once

#include "spe/encodings.hpp"
#include "spe/generators.hpp"
#include "spe/graph.hpp"
#include "spe/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace spe {

struct Partition {
    std::vector<int> labels;
    int k = 0;
};

struct RecoveryReport {
    int misclassified = 0;
    double accuracy = 0.0;
    std::vector<int> permutation;  ///< predicted label → true label
};

/// Which columns feed the clustering step.
enum class SelectorKind {
    first_nontrivial,  ///< eigenvectors 1..k−1
    last,              ///< the k−1 largest
    sign_of_last,      ///< the single largest (k = 2)
    llpe,              ///< rows of U·B·Θ
};

struct PartitionSelector {
    SelectorKind kind = SelectorKind::first_nontrivial;
    LlpeParams params;  ///< llpe only
};

enum class ClusterMethod { sign, kmeans };

/// Clusters nodes from the selected spectral coordinates. The sign method
/// needs k = 2 and a single column; node i goes to cluster 1 iff its entry is
/// positive. Throws ConfigurationError on a selector/spectrum mismatch.
Partition spectral_partition(const SpectralDecomposition& spectrum, const PartitionSelector& selector, int k,
                             ClusterMethod method, std::uint64_t seed);

struct KMeansResult {
    std::vector<int> labels;
    Eigen::MatrixXd centers;
    double inertia = 0.0;
};

/// Lloyd's algorithm from k-means++ seeds, best inertia over `restarts`.
/// Restarts that end with an empty cluster are discarded; ClusteringError
/// when none survives.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 10, int max_iter = 300);

/// Best label permutation: exhaustive for k ≤ 8, Hungarian matching above.
RecoveryReport align_errors(const Partition& pred, const Partition& truth);

/// Maximum-weight perfect matching on a square matrix; result[row] = column.
std::vector<int> hungarian_max(const Eigen::MatrixXd& weight);

/// E[L] = I − E[A]/D with E[A] block-constant (p on diagonal blocks,
/// including the diagonal itself, q elsewhere) and D = p·n/k + q·(n − n/k).
/// Throws DegenerateModelError when p = q = 0.
Eigen::MatrixXd expected_laplacian(const SbmParams& params);

/// E[L] as an O(n) operator.
LinearOperator expected_laplacian_operator(const SbmParams& params);

struct EigenvalueMultiplicity {
    double value = 0.0;
    Eigen::Index multiplicity = 0;
};

/// {0: 1, 1: n − k, kq/(p + (k−1)q): k − 1}, ascending; coinciding values
/// are merged.
std::vector<EigenvalueMultiplicity> expected_spectrum(const SbmParams& params);

struct ConcentrationReport {
    double observed = 0.0;
    double bound = 0.0;
    bool holds = false;
    NodeId min_degree = 0;
};

/// 14·√(ln(4n/δ)/min_degree); +∞ when δ = 0.
double concentration_bound(NodeId n, NodeId min_degree, double delta);

/// ‖E[L] − L‖ of a sampled SBM against its bound. Needs min degree ≥ 1.
ConcentrationReport concentration_check(const Graph& graph, const SbmParams& params, double delta,
                                        std::uint64_t seed = 0);

/// Same check for an arbitrary operator standing in for L.
ConcentrationReport concentration_check(const LinearOperator& laplacian, const SbmParams& params, NodeId min_degree,
                                        double delta, std::uint64_t seed = 0);

}  // namespace spe
