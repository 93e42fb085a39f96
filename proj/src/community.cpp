#include "spe/community.hpp"

#include "spe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace spe {

namespace {

Eigen::MatrixXd selected_columns(const SpectralDecomposition& spectrum, const PartitionSelector& selector, int k) {
    const Eigen::Index avail_first = spectrum.is_full() ? spectrum.size() : spectrum.first_k;
    const Eigen::Index avail_last = spectrum.is_full() ? spectrum.size() : spectrum.last_k;
    switch (selector.kind) {
        case SelectorKind::first_nontrivial:
            if (avail_first < k) throw ConfigurationError("first_nontrivial needs the k smallest eigenpairs");
            return spectrum.eigenvectors.middleCols(1, k - 1);
        case SelectorKind::last:
            if (avail_last < k - 1) throw ConfigurationError("last needs the k-1 largest eigenpairs");
            return spectrum.eigenvectors.rightCols(k - 1);
        case SelectorKind::sign_of_last:
            if (k != 2) throw ConfigurationError("sign_of_last is defined for k = 2");
            if (avail_last < 1) throw ConfigurationError("sign_of_last needs the largest eigenpair");
            return spectrum.eigenvectors.rightCols(1);
        case SelectorKind::llpe:
            if (selector.params.theta.size() == 0) throw ConfigurationError("llpe selector needs parameters");
            return llpe_forward(spectrum, selector.params).matrix;
    }
    throw ConfigurationError("unknown selector");
}

}  // namespace

Partition spectral_partition(const SpectralDecomposition& spectrum, const PartitionSelector& selector, int k,
                             ClusterMethod method, std::uint64_t seed) {
    if (k < 2) throw ParameterError("spectral_partition needs k >= 2");
    const Eigen::MatrixXd x = selected_columns(spectrum, selector, k);
    Partition out;
    out.k = k;
    if (method == ClusterMethod::sign) {
        if (k != 2 || x.cols() != 1) throw ConfigurationError("sign clustering needs k = 2 and one column");
        out.labels.resize(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index i = 0; i < x.rows(); ++i) out.labels[i] = x(i, 0) > 0.0 ? 1 : 0;
        return out;
    }
    out.labels = kmeans(x, k, seed).labels;
    return out;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts, int max_iter) {
    const Eigen::Index n = points.rows();
    if (k < 1 || k > n) throw ParameterError("kmeans needs 1 <= k <= n");
    if (restarts < 1 || max_iter < 1) throw ParameterError("kmeans needs positive restarts and max_iter");
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (int r = 0; r < restarts; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);
        Eigen::MatrixXd centers(k, points.cols());
        std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
        centers.row(0) = points.row(first(rng));
        for (Eigen::Index i = 0; i < n; ++i) dist[i] = (points.row(i) - centers.row(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
            const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
            Eigen::Index pick = 0;
            if (total > 0.0) {
                std::discrete_distribution<Eigen::Index> draw(dist.begin(), dist.end());
                pick = draw(rng);
            } else {
                pick = first(rng);
            }
            centers.row(c) = points.row(pick);
            for (Eigen::Index i = 0; i < n; ++i) {
                dist[i] = std::min(dist[i], (points.row(i) - centers.row(c)).squaredNorm());
            }
        }

        std::fill(labels.begin(), labels.end(), -1);
        bool empty = false;
        double inertia = 0.0;
        for (int it = 0; it < max_iter; ++it) {
            bool changed = false;
            inertia = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                int arg = 0;
                double bestd = std::numeric_limits<double>::infinity();
                for (int c = 0; c < k; ++c) {
                    const double d = (points.row(i) - centers.row(c)).squaredNorm();
                    if (d < bestd) {
                        bestd = d;
                        arg = c;
                    }
                }
                if (labels[i] != arg) {
                    labels[i] = arg;
                    changed = true;
                }
                inertia += bestd;
            }
            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
            std::vector<int> counts(static_cast<std::size_t>(k), 0);
            for (Eigen::Index i = 0; i < n; ++i) {
                sums.row(labels[i]) += points.row(i);
                ++counts[labels[i]];
            }
            empty = std::find(counts.begin(), counts.end(), 0) != counts.end();
            if (empty) break;
            for (int c = 0; c < k; ++c) centers.row(c) = sums.row(c) / counts[c];
            if (!changed) break;
        }
        if (empty) continue;
        if (inertia < best.inertia) {
            best.inertia = inertia;
            best.labels = labels;
            best.centers = centers;
        }
    }
    if (best.labels.empty()) {
        throw ClusteringError("kmeans: every restart ended with an empty cluster");
    }
    return best;
}

std::vector<int> hungarian_max(const Eigen::MatrixXd& weight) {
    const int n = static_cast<int>(weight.rows());
    if (weight.cols() != n) throw ParameterError("hungarian_max needs a square matrix");
    if (n == 0) return {};
    const double top = weight.maxCoeff();
    // Minimum-cost assignment on top − weight with row/column potentials.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = (top - weight(i0 - 1, j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> out(n);
    for (int j = 1; j <= n; ++j) out[match[j] - 1] = j - 1;
    return out;
}

RecoveryReport align_errors(const Partition& pred, const Partition& truth) {
    if (pred.k != truth.k) throw ConfigurationError("align_errors: partitions have different k");
    if (pred.labels.size() != truth.labels.size()) throw ConfigurationError("align_errors: partitions differ in size");
    const int k = pred.k;
    if (k < 1) throw ParameterError("align_errors needs k >= 1");
    Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        const int a = pred.labels[i], b = truth.labels[i];
        if (a < 0 || a >= k || b < 0 || b >= k) throw ParameterError("align_errors: label outside [0, k)");
        confusion(a, b) += 1.0;
    }
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    if (k <= 8) {
        double best_matches = -1.0;
        do {
            double matches = 0.0;
            for (int a = 0; a < k; ++a) matches += confusion(a, perm[a]);
            if (matches > best_matches) {
                best_matches = matches;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        best = hungarian_max(confusion);
    }
    double matches = 0.0;
    for (int a = 0; a < k; ++a) matches += confusion(a, best[a]);
    RecoveryReport out;
    const auto n = static_cast<int>(pred.labels.size());
    out.misclassified = n - static_cast<int>(std::lround(matches));
    out.accuracy = n > 0 ? 1.0 - static_cast<double>(out.misclassified) / n : 1.0;
    out.permutation = std::move(best);
    return out;
}

namespace {

double expected_degree(const SbmParams& params) {
    params.validate();
    if (params.p == 0.0 && params.q == 0.0) throw DegenerateModelError("p = q = 0 has no edges in expectation");
    const double block = static_cast<double>(params.n) / params.k;
    return params.p * block + params.q * (params.n - block);
}

}  // namespace

Eigen::MatrixXd expected_laplacian(const SbmParams& params) {
    const double d = expected_degree(params);
    const Eigen::Index n = params.n, block = params.n / params.k;
    Eigen::MatrixXd l(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double a = (i / block == j / block) ? params.p : params.q;
            l(i, j) = (i == j ? 1.0 : 0.0) - a / d;
        }
    }
    return l;
}

LinearOperator expected_laplacian_operator(const SbmParams& params) {
    const double d = expected_degree(params);
    const Eigen::Index n = params.n, block = params.n / params.k;
    const int k = params.k;
    const double p = params.p, q = params.q;
    return {n, [=](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
                // E[A] x = (p − q)·Z Zᵀ x + q·1 1ᵀ x
                const double total = x.sum();
                y.resize(n);
                for (int b = 0; b < k; ++b) {
                    const double s = x.segment(b * block, block).sum();
                    y.segment(b * block, block) =
                        x.segment(b * block, block).array() - ((p - q) * s + q * total) / d;
                }
            }};
}

std::vector<EigenvalueMultiplicity> expected_spectrum(const SbmParams& params) {
    expected_degree(params);
    const double k = params.k;
    std::vector<EigenvalueMultiplicity> raw{{0.0, 1}, {1.0, params.n - params.k}};
    if (params.k > 1) raw.push_back({k * params.q / (params.p + (k - 1.0) * params.q), params.k - 1});
    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    std::vector<EigenvalueMultiplicity> out;
    for (const auto& e : raw) {
        if (e.multiplicity == 0) continue;
        if (!out.empty() && out.back().value == e.value) {
            out.back().multiplicity += e.multiplicity;
        } else {
            out.push_back(e);
        }
    }
    return out;
}

double concentration_bound(NodeId n, NodeId min_degree, double delta) {
    if (min_degree < 1) throw ParameterError("concentration bound needs min degree >= 1");
    if (!(delta >= 0.0)) throw ParameterError("delta must be non-negative");
    if (delta == 0.0) return std::numeric_limits<double>::infinity();
    return 14.0 * std::sqrt(std::log(4.0 * n / delta) / min_degree);
}

ConcentrationReport concentration_check(const LinearOperator& laplacian, const SbmParams& params, NodeId min_degree,
                                        double delta, std::uint64_t seed) {
    if (laplacian.dim != params.n) throw ParameterError("concentration_check: operator size != n");
    const LinearOperator expected = expected_laplacian_operator(params);
    LinearOperator diff{params.n, [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
                            Eigen::VectorXd tmp;
                            expected.apply(x, y);
                            laplacian.apply(x, tmp);
                            y -= tmp;
                        }};
    ConcentrationReport out;
    out.min_degree = min_degree;
    out.bound = concentration_bound(params.n, min_degree, delta);
    out.observed = operator_norm(diff, 1e-6, seed);
    out.holds = out.observed <= out.bound;
    return out;
}

ConcentrationReport concentration_check(const Graph& graph, const SbmParams& params, double delta,
                                        std::uint64_t seed) {
    if (graph.num_nodes() != params.n) throw ParameterError("concentration_check: graph size != n");
    const SparseMatrix lap = normalized_laplacian(graph);
    return concentration_check(as_operator(lap), params, graph.min_degree(), delta, seed);
}

}  // namespace spe
