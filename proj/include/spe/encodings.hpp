#pragma once

#include "spe/graph.hpp"
#include "spe/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

namespace spe {

struct NoPE {};
/// First k nontrivial eigenvectors.
struct LpeFK {
    int k = 16;
};
/// First k nontrivial and last k eigenvectors.
struct LpeFLK {
    int k = 16;
};
struct LpeFull {};
/// Random-walk return probabilities for 1..m steps.
struct Rwse {
    int m = 16;
};
/// Learnable Chebyshev weighting of the full spectrum. M is the polynomial
/// order (M+1 coefficients per column), d the encoding width.
struct Llpe {
    int M = 64;
    int d = 32;
    double l1 = 0.0;
    double l2 = 0.0;
};
/// Llpe restricted to the first k and last k eigenpairs.
struct LlpeLarge {
    int k = 32;
    int M = 64;
    int d = 32;
    double l1 = 0.0;
    double l2 = 0.0;
};

using EncodingSpec = std::variant<NoPE, LpeFK, LpeFLK, LpeFull, Rwse, Llpe, LlpeLarge>;

void validate(const EncodingSpec& spec);
std::string encoding_name(const EncodingSpec& spec);
bool is_learnable(const EncodingSpec& spec);

/// Polynomial order, width and regularization of a learnable spec.
struct LlpeShape {
    int order = 0;
    int width = 0;
    double l1 = 0.0;
    double l2 = 0.0;
};
std::optional<LlpeShape> llpe_shape(const EncodingSpec& spec);

/// Cheapest spectrum that can serve the encoding: nullopt when none is needed.
std::optional<SpectrumRequest> spectrum_requirement(const EncodingSpec& spec);

/// Θ: (M+1)×d, column j holds the coefficients of filter j.
struct LlpeParams {
    Eigen::MatrixXd theta;

    int order() const noexcept { return static_cast<int>(theta.rows()) - 1; }
    int width() const noexcept { return static_cast<int>(theta.cols()); }
};

/// iid N(0, (0.1/√(M+1))²) entries.
LlpeParams init_llpe_params(int order, int width, std::uint64_t seed);

struct PositionalEncoding {
    Eigen::MatrixXd matrix;
    EncodingSpec provenance;
};

/// B[i, m] = T_m(λ̃_i) over the stored eigenvalues, and U·B. The product is
/// precomputed so forward and gradient cost O(n·M·d).
struct LlpeBasis {
    Eigen::MatrixXd b;
    Eigen::MatrixXd ub;

    static LlpeBasis build(const SpectralDecomposition& spectrum, int order);
    Eigen::MatrixXd forward(const Eigen::MatrixXd& theta) const { return ub * theta; }
    Eigen::MatrixXd grad(const Eigen::MatrixXd& upstream) const { return ub.transpose() * upstream; }
};

/// P = U · B · Θ.
PositionalEncoding llpe_forward(const SpectralDecomposition& spectrum, const LlpeParams& params);

/// ∂loss/∂Θ = Bᵀ Uᵀ upstream.
Eigen::MatrixXd llpe_grad(const SpectralDecomposition& spectrum, const LlpeParams& params,
                          const Eigen::MatrixXd& upstream);

struct Penalty {
    double value = 0.0;
    Eigen::MatrixXd grad;
};

/// Σ_j l1‖W_j‖₁ + l2‖W_j‖₂² with W = BΘ, and its (sub)gradient in Θ. The
/// l1 subgradient is 0 at exact zeros.
Penalty reg_penalty(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& basis, double l1, double l2);
Penalty reg_penalty(const LlpeParams& params, const SpectralDecomposition& spectrum, double l1, double l2);

/// Column s−1 is the diagonal of (D⁻¹A)^s. Rows of isolated nodes are zero.
Eigen::MatrixXd rwse(const Graph& graph, int m);

/// Builds any encoding. Learnable specs use `params` when given, otherwise a
/// zero Θ of the declared shape. Throws ConfigurationError when the spectrum
/// cannot serve the encoding.
PositionalEncoding build_encoding(const EncodingSpec& spec, const Graph& graph,
                                  const SpectralDecomposition* spectrum, const LlpeParams* params = nullptr);

/// The decomposition a learnable spec actually filters: the full spectrum for
/// Llpe, the first-k ⊕ last-k view for LlpeLarge.
SpectralDecomposition llpe_domain(const EncodingSpec& spec, const SpectralDecomposition& spectrum);

void save_theta_csv(const LlpeParams& params, const std::filesystem::path& path);
LlpeParams load_theta_csv(const std::filesystem::path& path);

}  // namespace spe
