#pragma once

#include "spe/chebyshev.hpp"
#include "spe/encodings.hpp"
#include "spe/graph.hpp"
#include "spe/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace spe {

/// r(λ) = 1/λ².
struct Commute {};
/// r(λ) = e^{−2tλ}.
struct Diffusion {
    double t = 1.0;
};
/// r(λ) = 1/λ.
struct Biharmonic {};
/// r(λ) = e^{−2t(2−λ)}, increasing in λ.
struct HighPass {
    double t = 1.0;
};
/// r given as a Chebyshev series in λ̃ = λ − 1.
struct Custom {
    ChebyshevSeries series;
};

using SpectralKernel = std::variant<Commute, Diffusion, Biharmonic, HighPass, Custom>;

inline constexpr double kLambdaFloor = 1e-8;

std::string kernel_name(const SpectralKernel& kernel);

/// True for kernels that diverge at λ = 0; they skip eigenvalues ≤ the floor.
bool is_singular(const SpectralKernel& kernel);

/// r(λ). Singular kernels throw KernelError at λ ≤ 0.
double kernel_value(const SpectralKernel& kernel, double lambda);

struct DistanceMatrix {
    Eigen::MatrixXd values;  ///< f_r(i, j)
    SpectralKernel kernel;
    bool approximate = false;  ///< computed from an extremal spectrum
};

/// f_r(i,j)² = Σ_k r(λ_k)(u_k[i] − u_k[j])². Throws KernelError when r is
/// negative at an evaluated eigenvalue.
DistanceMatrix spectral_distance_matrix(const SpectralDecomposition& spectrum, const SpectralKernel& kernel,
                                        double lambda_floor = kLambdaFloor);

/// Θ with one column per eigenpair: column j fits
/// λ̃ ↦ √r(λ_j)·exp(−C_max (λ̃ − λ̃_j)²) at order M, so squared row gaps of
/// U·B·Θ approach f_r². Appends a warning when adjacent normalized
/// eigenvalues are closer than 3/√C_max.
LlpeParams bump_llpe_construct(const SpectralDecomposition& spectrum, const SpectralKernel& kernel, double c_max,
                               int order, std::vector<std::string>* warnings = nullptr);

/// max_{i,j} |‖P_i − P_j‖² − f_r(i,j)²| / max_{i,j} f_r(i,j)².
double squared_distance_error(const Eigen::MatrixXd& encoding, const DistanceMatrix& distance);

struct CommuteEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int completed = 0;
    int truncated = 0;  ///< trials where a leg exceeded max_steps; excluded from the mean
};

/// Monte Carlo round trip i → j → i of a uniform random walk.
CommuteEstimate commute_mc_oracle(const Graph& graph, NodeId i, NodeId j, int trials, long long max_steps,
                                  std::uint64_t seed);

}  // namespace spe
