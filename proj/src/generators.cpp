#include "spe/generators.hpp"

#include "spe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace spe {

void SbmParams::validate() const {
    if (n <= 0 || k <= 0) throw ParameterError("SBM needs n > 0 and k > 0");
    if (n % k != 0) throw ParameterError("SBM n must be divisible by k");
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
        throw ParameterError("SBM probabilities must lie in [0, 1]");
    }
}

namespace {

// Geometric skipping over the pairs of one block (Batagelj & Brandes).
template <class Emit>
void sample_intra_block(NodeId base, std::int64_t size, double prob, std::mt19937_64& rng, Emit&& emit) {
    if (prob <= 0.0 || size < 2) return;
    std::geometric_distribution<std::int64_t> skip(prob);
    const std::int64_t total = size * (size - 1) / 2;
    std::int64_t row = 0;
    std::int64_t row_start = 0;  // linear index of (row, row+1)
    for (std::int64_t t = skip(rng); t < total; t += 1 + skip(rng)) {
        while (t >= row_start + (size - 1 - row)) {
            row_start += size - 1 - row;
            ++row;
        }
        const std::int64_t col = row + 1 + (t - row_start);
        emit(base + static_cast<NodeId>(row), base + static_cast<NodeId>(col));
    }
}

template <class Emit>
void sample_cross_block(NodeId base_a, NodeId base_b, std::int64_t size_a, std::int64_t size_b, double prob,
                        std::mt19937_64& rng, Emit&& emit) {
    if (prob <= 0.0) return;
    std::geometric_distribution<std::int64_t> skip(prob);
    const std::int64_t total = size_a * size_b;
    for (std::int64_t t = skip(rng); t < total; t += 1 + skip(rng)) {
        emit(base_a + static_cast<NodeId>(t / size_b), base_b + static_cast<NodeId>(t % size_b));
    }
}

}  // namespace

Graph sbm_generate(const SbmParams& params, std::uint64_t seed) {
    params.validate();
    std::mt19937_64 rng(seed);
    const std::int64_t block = params.n / params.k;
    std::vector<Edge> edges;
    const double expected = 0.5 * params.n * (params.p * (block - 1) + params.q * (params.n - block));
    edges.reserve(static_cast<std::size_t>(expected * 1.1) + 16);
    auto emit = [&](NodeId u, NodeId v) { edges.emplace_back(u, v); };

    for (int a = 0; a < params.k; ++a) {
        const auto base_a = static_cast<NodeId>(a * block);
        sample_intra_block(base_a, block, params.p, rng, emit);
        for (int b = a + 1; b < params.k; ++b) {
            sample_cross_block(base_a, static_cast<NodeId>(b * block), block, block, params.q, rng, emit);
        }
    }

    Graph g = Graph::from_edges(params.n, edges);
    std::vector<int> labels(static_cast<std::size_t>(params.n));
    for (NodeId i = 0; i < params.n; ++i) {
        labels[i] = static_cast<int>(static_cast<std::int64_t>(i) * params.k / params.n);
    }
    g.set_labels(std::move(labels), params.k);
    return g;
}

SbmParams sbm_from_homophily(NodeId n, int k, double avg_degree, double h) {
    if (n <= 0 || k <= 0 || n % k != 0) throw ParameterError("need n > 0 divisible by k > 0");
    if (!(h >= 0.0 && h <= 1.0)) throw ParameterError("homophily must lie in [0, 1]");
    if (avg_degree < 0.0) throw ParameterError("average degree must be non-negative");
    const double block = static_cast<double>(n) / k;
    SbmParams out{n, k, 0.0, 0.0};
    if (h > 0.0) {
        if (block < 2) throw ParameterError("intra degree requested but blocks are singletons");
        out.p = h * avg_degree / (block - 1.0);
    }
    if (h < 1.0) {
        if (k < 2) throw ParameterError("inter degree requested but k = 1");
        out.q = (1.0 - h) * avg_degree / (n - block);
    }
    if (out.p > 1.0 || out.q > 1.0) {
        throw ParameterError("requested degree needs p=" + std::to_string(out.p) + ", q=" + std::to_string(out.q) +
                             " outside [0, 1]");
    }
    return out;
}

void PaParams::validate() const {
    if (n <= 0 || k <= 0) throw ParameterError("PA needs n > 0 and k > 0");
    if (m_edges < 1) throw ParameterError("PA needs m_edges >= 1");
    if (compat.rows() != k || compat.cols() != k) throw ParameterError("compatibility matrix must be k x k");
    for (int i = 0; i < k; ++i) {
        if ((compat.row(i).array() < 0.0).any()) throw ParameterError("compatibility entries must be non-negative");
        if (!(compat.row(i).array() > 0.0).any()) {
            throw ParameterError("compatibility row " + std::to_string(i) + " has no positive entry");
        }
    }
}

Graph pa_generate(const PaParams& params, const std::vector<double>& label_dist, std::uint64_t seed) {
    params.validate();
    if (static_cast<int>(label_dist.size()) != params.k) throw ParameterError("label distribution must have k entries");
    std::mt19937_64 rng(seed);
    std::discrete_distribution<int> draw_class(label_dist.begin(), label_dist.end());

    const NodeId n = params.n;
    const NodeId seed_size = std::min<NodeId>(n, params.m_edges + 1);
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n) * params.m_edges);
    // degree-weighted urns per class: node v appears deg(v) times in urn[class(v)]
    std::vector<std::vector<NodeId>> urn(static_cast<std::size_t>(params.k));

    for (NodeId v = 0; v < seed_size; ++v) labels[v] = v % params.k;
    for (NodeId u = 0; u < seed_size; ++u) {
        for (NodeId v = u + 1; v < seed_size; ++v) {
            edges.emplace_back(u, v);
            urn[labels[u]].push_back(u);
            urn[labels[v]].push_back(v);
        }
    }

    std::vector<double> weight(static_cast<std::size_t>(params.k));
    std::vector<NodeId> picked;
    for (NodeId u = seed_size; u < n; ++u) {
        const int cls = draw_class(rng);
        labels[u] = cls;
        double total = 0.0;
        for (int j = 0; j < params.k; ++j) {
            weight[j] = params.compat(cls, j) * static_cast<double>(urn[j].size());
            total += weight[j];
        }
        if (total <= 0.0) {
            throw GenerationError("node " + std::to_string(u) + " of class " + std::to_string(cls) +
                                  " has no eligible attachment target");
        }
        std::discrete_distribution<int> draw_target_class(weight.begin(), weight.end());
        picked.clear();
        const int wanted = std::min<int>(params.m_edges, u);
        for (int e = 0; e < wanted; ++e) {
            for (int attempt = 0; attempt < 100; ++attempt) {
                const auto& bucket = urn[draw_target_class(rng)];
                std::uniform_int_distribution<std::size_t> pick(0, bucket.size() - 1);
                const NodeId v = bucket[pick(rng)];
                if (std::find(picked.begin(), picked.end(), v) == picked.end()) {
                    picked.push_back(v);
                    break;
                }
            }
        }
        for (NodeId v : picked) {
            edges.emplace_back(v, u);
            urn[labels[v]].push_back(v);
            urn[cls].push_back(u);
        }
    }

    Graph g = Graph::from_edges(n, edges);
    g.set_labels(std::move(labels), params.k);
    return g;
}

Eigen::MatrixXd gen_features(const std::vector<int>& labels, int num_classes, const FeatureGenParams& params,
                             FeatureMode mode, std::uint64_t seed) {
    if (!(params.sigma > 0.0)) throw ParameterError("feature sigma must be > 0");
    const int dim = mode == FeatureMode::binary ? params.dim : num_classes;
    if (dim <= 0) throw ParameterError("feature dimension must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(labels.size());
    Eigen::MatrixXd x(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = labels[i];
        for (int c = 0; c < dim; ++c) {
            double mean = 0.0;
            if (mode == FeatureMode::binary) {
                mean = y * params.mu;
            } else if (c == y) {
                mean = params.mu;
            }
            x(i, c) = mean + params.sigma * noise(rng);
        }
    }
    return x;
}

}  // namespace spe
