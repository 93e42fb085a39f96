#pragma once

#include "spe/graph.hpp"
#include "spe/laplacian.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace spe {

enum class DecompositionKind { full, extremal };

/// Ascending eigenvalues with orthonormal eigenvector columns. For extremal
/// decompositions the first `first_k` columns are the smallest pairs and the
/// last `last_k` the largest.
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    DecompositionKind kind = DecompositionKind::full;
    int first_k = 0;
    int last_k = 0;
    Eigen::Index n = 0;

    Eigen::Index size() const noexcept { return eigenvalues.size(); }
    bool is_full() const noexcept { return kind == DecompositionKind::full; }

    /// Sub-decomposition made of the first `k_small` and last `k_large` pairs.
    SpectralDecomposition extremal_view(int k_small, int k_large) const;
};

inline constexpr Eigen::Index kDefaultDenseCap = 8192;

/// Dense symmetric eigensolver (LAPACK divide and conquer). Only the upper
/// triangle is read. Eigenvectors follow the sign convention.
SpectralDecomposition full_eigh(const Eigen::MatrixXd& a, Eigen::Index dense_cap = kDefaultDenseCap);
SpectralDecomposition full_eigh(const SparseMatrix& a, Eigen::Index dense_cap = kDefaultDenseCap);

struct SolverStats {
    int restarts = 0;
    long long matvecs = 0;
    std::size_t workspace_bytes = 0;
    double max_residual = 0.0;
};

/// Known exact eigenpairs kept out of the Krylov space and merged into the
/// result. Columns must be orthonormal.
struct LockedPairs {
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;

    Eigen::Index count() const noexcept { return vectors.cols(); }
};

struct ExtremalOptions {
    double tol = 1e-6;
    int max_iter = 1000;  ///< restart cycles per end
    std::uint64_t seed = 0;
    int krylov_dim = 0;  ///< 0 picks max(2·nev + 16, 48)
    LockedPairs locked_small;
    LockedPairs locked_large;
};

/// The `k_small` smallest and `k_large` largest eigenpairs of a normalized
/// Laplacian by thick-restart Lanczos with full reorthogonalization. The large
/// end is computed as the small end of 2I − L. Residuals ‖Lu − λu‖ of every
/// returned pair are at most `tol`.
///
/// Throws ParameterError unless k_small + k_large < n, and ConvergenceError
/// with the achieved residuals when `max_iter` restarts do not suffice.
SpectralDecomposition extremal_eigs(const SparseMatrix& lap, int k_small, int k_large, const ExtremalOptions& options,
                                    SolverStats* stats = nullptr);

SpectralDecomposition extremal_eigs(const SparseMatrix& lap, int k_small, int k_large, double tol = 1e-6,
                                    int max_iter = 1000, std::uint64_t seed = 0, SolverStats* stats = nullptr);

/// Orthonormal bases of the exact eigenspaces at 0 and 2, built from the
/// component structure.
///
/// Kernel: the first column is the global √d direction; the remaining ones are
/// Gram–Schmidt of per-component √d indicators (isolated nodes use e_i), in
/// order of decreasing component size, then smallest node. Only the first
/// column is the trivial eigenvector.
///
/// λ = 2: one signed √d indicator per bipartite component with at least one
/// edge, same ordering.
struct ExactSubspaces {
    LockedPairs kernel;
    LockedPairs top;
};
ExactSubspaces exact_subspaces(const Graph& graph);

struct SpectrumRequest {
    bool full = true;
    int k_small = 0;
    int k_large = 0;
    double tol = 1e-6;
    int max_iter = 1000;
    std::uint64_t seed = 0;
    Eigen::Index dense_cap = kDefaultDenseCap;
};

/// Spectrum of the normalized Laplacian of `graph` with the exact subspaces
/// at 0 and 2 substituted by their canonical bases, so degenerate ends are
/// deterministic. Extremal requests deflate those subspaces.
SpectralDecomposition laplacian_spectrum(const Graph& graph, const SpectrumRequest& request,
                                         SolverStats* stats = nullptr);

/// λ − 1 clamped to [−1, 1].
Eigen::VectorXd normalize_eigenvalues(const Eigen::VectorXd& eigenvalues);

/// Flips columns so the first entry with magnitude above 1e−12 is positive.
void apply_sign_convention(Eigen::MatrixXd& vectors);

/// y = A x for a symmetric operator of dimension `dim`.
struct LinearOperator {
    Eigen::Index dim = 0;
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> apply;
};

LinearOperator as_operator(const SparseMatrix& a);
LinearOperator as_operator(const Eigen::MatrixXd& a);

/// Largest |eigenvalue| by power iteration from a random start. Stops when
/// the estimate changes by less than `tol` relatively.
double operator_norm(const LinearOperator& a, double tol = 1e-6, std::uint64_t seed = 0, int max_iter = 100000);

struct DecompositionCheck {
    double max_residual = 0.0;      ///< max_i ‖L u_i − λ_i u_i‖
    double max_scaled_residual = 0.0;  ///< max_i of the above over (1 + |λ_i|)
    double orthogonality = 0.0;     ///< ‖UᵀU − I‖_max
    bool sorted = true;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
};
DecompositionCheck check_decomposition(const SparseMatrix& lap, const SpectralDecomposition& dec);

/// sin of the largest principal angle between the column spans of `a` and
/// `b` (orthonormal, same column count).
double subspace_sin_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// CSV: eigenvalues on the first line, then one line per node holding that
/// node's entry in each eigenvector.
void write_decomposition_csv(const SpectralDecomposition& dec, const std::filesystem::path& path);

}  // namespace spe
