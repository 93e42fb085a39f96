#pragma once

#include "spe/encodings.hpp"
#include "spe/graph.hpp"
#include "spe/laplacian.hpp"
#include "spe/spectral.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace spe {

enum class Arch { linear, mlp, sage1 };
enum class OptimizerKind { sgd_momentum, adam };

struct ClassifierConfig {
    Arch arch = Arch::mlp;
    int hidden = 64;
    double lr = 0.01;
    int epochs = 500;
    int patience = 200;
    double weight_decay = 0.0;
    OptimizerKind optimizer = OptimizerKind::adam;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

struct Split {
    std::vector<std::uint8_t> train, val, test;

    std::vector<NodeId> train_nodes() const;
    std::vector<NodeId> val_nodes() const;
    std::vector<NodeId> test_nodes() const;
};

/// Uniform permutation cut into consecutive parts of size ⌊f_i·n⌋, with the
/// leftover nodes going one each to the parts with the largest fractional
/// remainders (ties to the earlier part).
Split split_nodes(NodeId n, std::uint64_t seed, std::array<double, 3> fractions = {0.6, 0.2, 0.2});

/// Everything a model reads. `fixed_pe` is used when `llpe` is null.
struct TrainingData {
    Eigen::MatrixXd features;
    Eigen::MatrixXd fixed_pe;
    std::optional<LlpeBasis> llpe;
    double l1 = 0.0;
    double l2 = 0.0;
    int llpe_width = 0;
    SparseMatrix mean_adjacency;  ///< D⁻¹A, used by sage1
    std::vector<int> labels;
    int num_classes = 0;

    Eigen::Index num_nodes() const noexcept { return features.rows(); }
    bool has_encoding() const noexcept { return llpe.has_value() || fixed_pe.cols() > 0; }
};

/// Projections z = [X·Wx, P·Wp] of total width `hidden` (the feature part
/// gets ⌈hidden/2⌉, or everything without an encoding), then:
/// linear: logits = z·Wo + bo; mlp: one ReLU layer; sage1: ReLU(z·W1 +
/// mean_N(z)·W2 + b1). With LLPE, P = U·B·Θ and Θ is a parameter.
class Model {
public:
    enum Slot { kWx, kWp, kW1, kW2, kB1, kWo, kBo, kTheta, kSlots };

    /// Glorot-uniform weights, zero biases, Θ from init_llpe_params. Unused
    /// slots are empty matrices.
    static Model init(const ClassifierConfig& config, const TrainingData& data, std::uint64_t seed);

    /// Mean cross-entropy over `nodes` plus weight decay and the LLPE penalty.
    /// Gradients are written to `grad` (same shapes as params) when given.
    /// The full logits are written to `logits` when given.
    double loss_and_grad(const TrainingData& data, std::span<const NodeId> nodes,
                         std::vector<Eigen::MatrixXd>* grad, Eigen::MatrixXd* logits = nullptr) const;

    Eigen::MatrixXd logits(const TrainingData& data) const;
    Eigen::MatrixXd encoding(const TrainingData& data) const;

    std::vector<Eigen::MatrixXd> params;
    Arch arch = Arch::mlp;
    double weight_decay = 0.0;
    int feature_width = 0;
    int pe_width = 0;

private:
    struct Cache;
    Eigen::MatrixXd forward(const TrainingData& data, Cache& cache) const;
};

/// Per-quintile accuracy over local-homophily buckets; nullopt for empty ones.
using QuintileAccuracy = std::array<std::optional<double>, 5>;

struct TrainResult {
    double test_accuracy = 0.0;
    double val_accuracy = 0.0;
    double train_accuracy = 0.0;
    int best_epoch = 0;
    int epochs_run = 0;
    double final_loss = 0.0;
    std::optional<LlpeParams> theta;
    QuintileAccuracy quintile_accuracy;
    std::vector<int> predictions;
};

/// Full-batch training with early stopping on validation accuracy (the
/// earliest best epoch is restored). When `spectrum` is null the cheapest
/// spectrum the encoding needs is computed. Throws TrainingError when the loss
/// stops being finite.
TrainResult train_node_classifier(const Graph& graph, const EncodingSpec& spec, const Split& split,
                                  const ClassifierConfig& config, std::uint64_t seed,
                                  const SpectralDecomposition* spectrum = nullptr);

/// Accuracy within each local-homophily quintile, optionally restricted to
/// nodes with mask[i] != 0.
QuintileAccuracy evaluate_by_quintile(const Graph& graph, const std::vector<int>& predictions,
                                      const std::vector<std::uint8_t>* mask = nullptr);

/// Features, labels and encoding inputs for a graph. For learnable specs the
/// LLPE basis is stored and Θ lives in the model.
TrainingData make_training_data(const Graph& graph, const EncodingSpec& spec, const SpectralDecomposition* spectrum);

/// Spectrum required by `spec` (null when none), computed as cheaply as the
/// spec allows.
std::optional<SpectralDecomposition> spectrum_for(const Graph& graph, const EncodingSpec& spec, std::uint64_t seed = 0);

}  // namespace spe
