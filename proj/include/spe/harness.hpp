#pragma once

#include "spe/community.hpp"
#include "spe/distances.hpp"
#include "spe/encodings.hpp"
#include "spe/generators.hpp"
#include "spe/learner.hpp"
#include "spe/spectral.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spe {

enum class GraphFamily { sbm, pa };

struct GraphConfig {
    GraphFamily family = GraphFamily::sbm;
    NodeId n = 2000;
    int k = 2;
    double avg_degree = 10.0;
    int m_edges = 5;  ///< pa only
    FeatureGenParams features{0.1, 1.0, 10};

    FeatureMode feature_mode() const noexcept { return k == 2 ? FeatureMode::binary : FeatureMode::multiclass; }
};

/// Graph with labels and features at homophily `h`. SBM: (p, q) from h and the
/// average degree. PA: compatibility h on the diagonal and (1−h)/(k−1) off it.
Graph make_graph(const GraphConfig& config, double h, std::uint64_t seed);

struct SensitivityConfig {
    double h = 0.8;
    std::vector<int> m_grid{8, 16, 25, 50, 64, 128, 256, 500};
    std::vector<int> k_grid{8, 16, 32, 64, 128};
    Llpe base{64, 32, 1e-3, 0.0};  ///< width and regularization for both sweeps
};

struct RademacherConfig {
    int configs = 50;
    int num_sigma = 2000;
    NodeId max_n = 2000;
    int max_m = 128;
    bool include_constant = true;
};

struct BenchConfig {
    std::vector<NodeId> n_grid{10000, 100000};
    std::vector<int> k_grid{1, 8, 32, 64};
    double avg_degree = 10.0;
    int repeats = 3;
    double tol = 1e-6;
};

/// Everything the CLI reads from one JSON file. Every key has a default; see
/// the README for the key set.
struct ExperimentConfig {
    GraphConfig graph;
    std::vector<double> homophily{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<EncodingSpec> encodings{NoPE{}, LpeFK{16}, LpeFLK{16}, LpeFull{}, Llpe{64, 32, 1e-3, 0.0}};
    ClassifierConfig classifier;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    int workers = 0;  ///< 0: hardware concurrency
    std::string output;

    SensitivityConfig sensitivity;
    RademacherConfig rademacher;
    BenchConfig bench;

    // single-shot subcommands
    std::string input;  ///< edge-list path; empty generates from `graph`
    SpectrumRequest spectrum;
    SpectralKernel kernel = Commute{};
    PartitionSelector selector{SelectorKind::last, {}};
    ClusterMethod cluster = ClusterMethod::sign;
    int clusters = 2;
    std::string theta;  ///< Θ CSV for encode

    void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const EncodingSpec& spec);
EncodingSpec encoding_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClassifierConfig& config);
nlohmann::json to_json(const GraphConfig& config);

/// One sweep cell: everything except the seed.
struct SweepCell {
    GraphConfig graph;
    double h = 0.0;
    EncodingSpec encoding;
    ClassifierConfig classifier;

    nlohmann::json to_json() const;
    /// FNV-1a of the canonical JSON dump, 16 hex digits.
    std::string hash() const;
};

struct SweepRow {
    double h = 0.0;
    std::string encoding;
    std::uint64_t seed = 0;
    double test_accuracy = 0.0;
    double val_accuracy = 0.0;
    double wall_time_s = 0.0;
    std::string config_hash;
    int best_epoch = 0;
    QuintileAccuracy quintiles;
    std::string error;  ///< empty on success, "<kind>: <message>" otherwise

    bool ok() const noexcept { return error.empty(); }
};

/// Seeds used by a cell: the graph depends on (h, seed) only, so every
/// encoding of a sweep sees the same graphs and splits.
std::uint64_t graph_seed(double h, std::uint64_t seed);
std::uint64_t split_seed(std::uint64_t seed);

/// Runs one cell from scratch. Errors are caught and recorded in the row.
SweepRow run_cell(const SweepCell& cell, std::uint64_t seed);

/// Every (h, encoding, seed) cell on a bounded worker pool; rows are ordered
/// by (h, encoding, seed) regardless of scheduling. Spectra are shared between
/// encodings of one graph when they need the same request.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct CellSummary {
    std::string key;  ///< e.g. "h=0|LpeFK{k=16}"
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation, 0 for one row
    int count = 0;
    int failures = 0;
};

/// Test-accuracy mean ± std over seeds for each distinct (axis value,
/// encoding), in first-appearance order. Failed rows are counted, not averaged.
std::vector<CellSummary> summarize(const std::vector<SweepRow>& rows);
nlohmann::json summary_json(const std::vector<CellSummary>& summary);

/// M-sweep (Llpe with varying order) and k-sweep (LlpeLarge with varying k)
/// on one reference graph per seed. Grids are deduplicated.
struct SensitivityRow {
    std::string axis;  ///< "M" or "k"
    int value = 0;
    SweepRow row;
};
std::vector<SensitivityRow> sensitivity_sweeps(const ExperimentConfig& config);
void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityRow>& rows);

struct RademacherResult {
    double estimate = 0.0;
    double lower = 0.0;  ///< C/√(2n)
    double upper = 0.0;  ///< √2·C/√n
    double mc_stderr = 0.0;
};

/// (C/n)·E_σ‖Σ_i σ_i φ(λ̃_i)‖₂ over `num_sigma` Rademacher draws, with
/// φ = (T̃_0, …, T̃_M) monic Chebyshev values, or (T̃_1, …, T̃_M) when
/// `include_constant` is false. The supremum over the C-ball is exact.
RademacherResult rademacher_estimate(const Eigen::VectorXd& lambdas, double c, int order, int num_sigma,
                                     std::uint64_t seed, bool include_constant = true);

struct RademacherRow {
    NodeId n = 0;
    int order = 0;
    double c = 0.0;
    std::string source;  ///< "uniform" or "sbm"
    RademacherResult result;

    /// estimate inside [lower − 3·stderr, upper + 3·stderr]
    bool inside() const noexcept;
};

/// `config.configs` random (n, M, C, eigenvalue sample) draws: n uniform in
/// [2, max_n] (at least 20 for SBM samples), M in [1, max_m], C log-uniform in [0.1, 10]; samples alternate
/// between iid uniform values on [−1, 1] and normalized SBM spectra.
std::vector<RademacherRow> rademacher_suite(const RademacherConfig& config, std::uint64_t seed);
void write_rademacher_csv(std::ostream& out, const std::vector<RademacherRow>& rows);

struct BenchRow {
    NodeId n = 0;
    int k = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;  ///< median over repeats
    std::size_t peak_bytes = 0;  ///< solver workspace
    int restarts = 0;
    double max_residual = 0.0;
    std::string error;
};

/// Times extremal_eigs(first k, last k) on binary SBM graphs (h = 0.5).
/// Runs sequentially.
std::vector<BenchRow> bench_eigs(const BenchConfig& config, const std::vector<std::uint64_t>& seeds);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

/// Calls fn(i) for i in [0, count) on at most `workers` threads (0 picks the
/// hardware concurrency).
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace spe
