#include "spe/learner.hpp"

#include "spe/errors.hpp"
#include "spe/homophily.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace spe {

namespace {

std::vector<NodeId> mask_nodes(const std::vector<std::uint8_t>& mask) {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.push_back(static_cast<NodeId>(i));
    return out;
}

Eigen::MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> uni(-a, a);
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = uni(rng);
    return w;
}

double accuracy(const Eigen::MatrixXd& logits, const std::vector<int>& labels, std::span<const NodeId> nodes) {
    if (nodes.empty()) return 0.0;
    std::size_t hits = 0;
    for (NodeId v : nodes) {
        Eigen::Index arg = 0;
        logits.row(v).maxCoeff(&arg);
        if (static_cast<int>(arg) == labels[v]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

bool is_weight(int slot) {
    return slot == Model::kWx || slot == Model::kWp || slot == Model::kW1 || slot == Model::kW2 ||
           slot == Model::kWo;
}

}  // namespace

void ClassifierConfig::validate() const {
    if (!(lr > 0.0)) throw ParameterError("lr must be positive");
    if (epochs < 1) throw ParameterError("epochs must be at least 1");
    if (patience < 1) throw ParameterError("patience must be at least 1");
    if (!(weight_decay >= 0.0)) throw ParameterError("weight_decay must be non-negative");
    if (hidden < 2) throw ParameterError("hidden must be at least 2");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterError("momentum must lie in [0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ParameterError("Adam betas must lie in [0, 1)");
    if (!(eps > 0.0)) throw ParameterError("eps must be positive");
}

std::vector<NodeId> Split::train_nodes() const { return mask_nodes(train); }
std::vector<NodeId> Split::val_nodes() const { return mask_nodes(val); }
std::vector<NodeId> Split::test_nodes() const { return mask_nodes(test); }

Split split_nodes(NodeId n, std::uint64_t seed, std::array<double, 3> fractions) {
    double total = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0)) throw ParameterError("split fractions must be non-negative");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ParameterError("split fractions must sum to 1");

    std::array<std::size_t, 3> size{};
    std::array<double, 3> rem{};
    std::size_t used = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = fractions[i] * static_cast<double>(n);
        size[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        rem[i] = exact - static_cast<double>(size[i]);
        used += size[i];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
    for (std::size_t extra = 0; used < static_cast<std::size_t>(n); ++extra, ++used) ++size[order[extra % 3]];

    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    Split s;
    s.train.assign(n, 0);
    s.val.assign(n, 0);
    s.test.assign(n, 0);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < size[0]; ++i) s.train[perm[pos++]] = 1;
    for (std::size_t i = 0; i < size[1]; ++i) s.val[perm[pos++]] = 1;
    for (std::size_t i = 0; i < size[2]; ++i) s.test[perm[pos++]] = 1;
    return s;
}

std::optional<SpectralDecomposition> spectrum_for(const Graph& graph, const EncodingSpec& spec, std::uint64_t seed) {
    auto req = spectrum_requirement(spec);
    if (!req) return std::nullopt;
    req->seed = seed;
    return laplacian_spectrum(graph, *req);
}

TrainingData make_training_data(const Graph& graph, const EncodingSpec& spec, const SpectralDecomposition* spectrum) {
    validate(spec);
    if (!graph.has_features()) throw ConfigurationError("training needs node features");
    if (!graph.has_labels()) throw ConfigurationError("training needs node labels");
    TrainingData data;
    data.features = graph.features();
    data.labels = graph.labels();
    data.num_classes = graph.num_classes();
    data.mean_adjacency = random_walk_matrix(graph);
    if (const auto shape = llpe_shape(spec)) {
        if (!spectrum) throw ConfigurationError(encoding_name(spec) + " needs a spectrum");
        data.llpe = LlpeBasis::build(llpe_domain(spec, *spectrum), shape->order);
        data.l1 = shape->l1;
        data.l2 = shape->l2;
        data.llpe_width = shape->width;
    } else {
        data.fixed_pe = build_encoding(spec, graph, spectrum).matrix;
    }
    return data;
}

struct Model::Cache {
    Eigen::MatrixXd pe, z, mz, a, h;
};

Model Model::init(const ClassifierConfig& config, const TrainingData& data, std::uint64_t seed) {
    config.validate();
    Model m;
    m.arch = config.arch;
    m.weight_decay = config.weight_decay;
    const bool with_pe = data.has_encoding();
    m.pe_width = with_pe ? config.hidden / 2 : 0;
    m.feature_width = config.hidden - m.pe_width;
    const Eigen::Index h = config.hidden;
    const Eigen::Index c = data.num_classes;
    const Eigen::Index pe_in = data.llpe ? data.llpe_width : data.fixed_pe.cols();

    std::mt19937_64 rng(seed);
    m.params.assign(kSlots, Eigen::MatrixXd());
    m.params[kWx] = glorot(data.features.cols(), m.feature_width, rng);
    if (with_pe) m.params[kWp] = glorot(pe_in, m.pe_width, rng);
    if (config.arch != Arch::linear) {
        m.params[kW1] = glorot(h, h, rng);
        if (config.arch == Arch::sage1) m.params[kW2] = glorot(h, h, rng);
        m.params[kB1] = Eigen::MatrixXd::Zero(1, h);
    }
    m.params[kWo] = glorot(h, c, rng);
    m.params[kBo] = Eigen::MatrixXd::Zero(1, c);
    if (data.llpe) {
        const int order = static_cast<int>(data.llpe->b.cols()) - 1;
        m.params[kTheta] = init_llpe_params(order, data.llpe_width, rng()).theta;
    }
    return m;
}

Eigen::MatrixXd Model::encoding(const TrainingData& data) const {
    return data.llpe ? data.llpe->forward(params[kTheta]) : data.fixed_pe;
}

Eigen::MatrixXd Model::forward(const TrainingData& data, Cache& cache) const {
    const Eigen::Index n = data.num_nodes();
    cache.z.resize(n, feature_width + pe_width);
    cache.z.leftCols(feature_width).noalias() = data.features * params[kWx];
    if (pe_width > 0) {
        cache.pe = encoding(data);
        cache.z.rightCols(pe_width).noalias() = cache.pe * params[kWp];
    }
    const Eigen::MatrixXd* h = &cache.z;
    if (arch != Arch::linear) {
        cache.a.noalias() = cache.z * params[kW1];
        if (arch == Arch::sage1) {
            cache.mz = data.mean_adjacency * cache.z;
            cache.a.noalias() += cache.mz * params[kW2];
        }
        cache.a.rowwise() += params[kB1].row(0);
        cache.h = cache.a.cwiseMax(0.0);
        h = &cache.h;
    }
    Eigen::MatrixXd logits = *h * params[kWo];
    logits.rowwise() += params[kBo].row(0);
    return logits;
}

Eigen::MatrixXd Model::logits(const TrainingData& data) const {
    Cache cache;
    return forward(data, cache);
}

double Model::loss_and_grad(const TrainingData& data, std::span<const NodeId> nodes,
                            std::vector<Eigen::MatrixXd>* grad, Eigen::MatrixXd* logits_out) const {
    if (nodes.empty()) throw ParameterError("loss needs at least one node");
    Cache cache;
    Eigen::MatrixXd logits = forward(data, cache);

    const double inv = 1.0 / static_cast<double>(nodes.size());
    Eigen::MatrixXd dlogits;
    if (grad) dlogits = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
    double loss = 0.0;
    for (NodeId v : nodes) {
        const double top = logits.row(v).maxCoeff();
        const Eigen::RowVectorXd e = (logits.row(v).array() - top).exp().matrix();
        const double sum = e.sum();
        loss -= (logits(v, data.labels[v]) - top - std::log(sum)) * inv;
        if (grad) {
            dlogits.row(v) = e * (inv / sum);
            dlogits(v, data.labels[v]) -= inv;
        }
    }
    for (int s = 0; s < kSlots; ++s)
        if (is_weight(s) && params[s].size() > 0) loss += 0.5 * weight_decay * params[s].squaredNorm();

    Penalty penalty;
    if (data.llpe) {
        penalty = reg_penalty(params[kTheta], data.llpe->b, data.l1, data.l2);
        loss += penalty.value;
    }
    if (logits_out) *logits_out = std::move(logits);
    if (!grad) return loss;

    std::vector<Eigen::MatrixXd>& g = *grad;
    g.assign(kSlots, Eigen::MatrixXd());
    g[kBo] = dlogits.colwise().sum();
    Eigen::MatrixXd dz;
    if (arch == Arch::linear) {
        g[kWo].noalias() = cache.z.transpose() * dlogits;
        dz.noalias() = dlogits * params[kWo].transpose();
    } else {
        g[kWo].noalias() = cache.h.transpose() * dlogits;
        Eigen::MatrixXd da = dlogits * params[kWo].transpose();
        da.array() *= (cache.a.array() > 0.0).cast<double>();
        g[kB1] = da.colwise().sum();
        g[kW1].noalias() = cache.z.transpose() * da;
        dz.noalias() = da * params[kW1].transpose();
        if (arch == Arch::sage1) {
            g[kW2].noalias() = cache.mz.transpose() * da;
            const Eigen::MatrixXd dmz = da * params[kW2].transpose();
            dz.noalias() += data.mean_adjacency.transpose() * dmz;
        }
    }
    g[kWx].noalias() = data.features.transpose() * dz.leftCols(feature_width);
    if (pe_width > 0) {
        g[kWp].noalias() = cache.pe.transpose() * dz.rightCols(pe_width);
        if (data.llpe) {
            const Eigen::MatrixXd dpe = dz.rightCols(pe_width) * params[kWp].transpose();
            g[kTheta] = data.llpe->grad(dpe) + penalty.grad;
        }
    }
    for (int s = 0; s < kSlots; ++s)
        if (is_weight(s) && params[s].size() > 0) g[s] += weight_decay * params[s];
    return loss;
}

namespace {

class Optimizer {
public:
    Optimizer(const ClassifierConfig& config, const std::vector<Eigen::MatrixXd>& params) : config_(config) {
        first_.reserve(params.size());
        for (const auto& p : params) first_.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
        if (config.optimizer == OptimizerKind::adam) second_ = first_;
    }

    void step(std::vector<Eigen::MatrixXd>& params, const std::vector<Eigen::MatrixXd>& grad) {
        ++t_;
        const double lr = config_.lr;
        for (std::size_t s = 0; s < params.size(); ++s) {
            if (params[s].size() == 0) continue;
            if (config_.optimizer == OptimizerKind::sgd_momentum) {
                first_[s] = config_.momentum * first_[s] + grad[s];
                params[s] -= lr * first_[s];
            } else {
                first_[s] = config_.beta1 * first_[s] + (1.0 - config_.beta1) * grad[s];
                second_[s] = config_.beta2 * second_[s] + (1.0 - config_.beta2) * grad[s].cwiseAbs2();
                const double c1 = 1.0 - std::pow(config_.beta1, t_);
                const double c2 = 1.0 - std::pow(config_.beta2, t_);
                params[s].array() -=
                    lr * (first_[s].array() / c1) / ((second_[s].array() / c2).sqrt() + config_.eps);
            }
        }
    }

private:
    const ClassifierConfig& config_;
    std::vector<Eigen::MatrixXd> first_, second_;
    int t_ = 0;
};

}  // namespace

TrainResult train_node_classifier(const Graph& graph, const EncodingSpec& spec, const Split& split,
                                  const ClassifierConfig& config, std::uint64_t seed,
                                  const SpectralDecomposition* spectrum) {
    config.validate();
    const auto n = static_cast<std::size_t>(graph.num_nodes());
    if (split.train.size() != n || split.val.size() != n || split.test.size() != n)
        throw ParameterError("split masks do not match the graph");
    std::optional<SpectralDecomposition> own;
    if (!spectrum) {
        own = spectrum_for(graph, spec, seed);
        if (own) spectrum = &*own;
    }
    const TrainingData data = make_training_data(graph, spec, spectrum);
    const auto train = split.train_nodes();
    const auto val = split.val_nodes();
    const auto test = split.test_nodes();
    if (train.empty()) throw ParameterError("empty training set");

    Model model = Model::init(config, data, seed);
    Optimizer opt(config, model.params);
    std::vector<Eigen::MatrixXd> grad;
    Eigen::MatrixXd logits;

    TrainResult result;
    std::vector<Eigen::MatrixXd> best = model.params;
    double best_val = -1.0;
    int last_finite = -1;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double loss = model.loss_and_grad(data, train, &grad, &logits);
        if (!std::isfinite(loss)) {
            throw TrainingError("training loss is not finite at epoch " + std::to_string(epoch) +
                                    " (last finite epoch " + std::to_string(last_finite) + ")",
                                last_finite);
        }
        last_finite = epoch;
        result.epochs_run = epoch + 1;
        const double val_acc = accuracy(logits, data.labels, val);
        if (val_acc > best_val) {
            best_val = val_acc;
            best = model.params;
            result.best_epoch = epoch;
        }
        if (epoch - result.best_epoch >= config.patience) break;
        opt.step(model.params, grad);
    }
    model.params = std::move(best);

    result.final_loss = model.loss_and_grad(data, train, nullptr, &logits);
    result.train_accuracy = accuracy(logits, data.labels, train);
    result.val_accuracy = accuracy(logits, data.labels, val);
    result.test_accuracy = accuracy(logits, data.labels, test);
    result.predictions.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        Eigen::Index arg = 0;
        logits.row(static_cast<Eigen::Index>(v)).maxCoeff(&arg);
        result.predictions[v] = static_cast<int>(arg);
    }
    if (data.llpe) result.theta = LlpeParams{model.params[Model::kTheta]};
    result.quintile_accuracy = evaluate_by_quintile(graph, result.predictions, &split.test);
    return result;
}

QuintileAccuracy evaluate_by_quintile(const Graph& graph, const std::vector<int>& predictions,
                                      const std::vector<std::uint8_t>* mask) {
    if (!graph.has_labels()) throw ConfigurationError("quintile evaluation needs labels");
    const auto n = static_cast<std::size_t>(graph.num_nodes());
    if (predictions.size() != n) throw ParameterError("one prediction per node required");
    if (mask && mask->size() != n) throw ParameterError("mask does not match the graph");
    const auto quintile = quintile_bucketing(graph);
    const auto& labels = graph.labels();
    std::array<std::size_t, 5> hits{}, total{};
    for (std::size_t v = 0; v < n; ++v) {
        if (mask && !(*mask)[v]) continue;
        ++total[quintile[v]];
        if (predictions[v] == labels[v]) ++hits[quintile[v]];
    }
    QuintileAccuracy out;
    for (int q = 0; q < 5; ++q)
        if (total[q] > 0) out[q] = static_cast<double>(hits[q]) / static_cast<double>(total[q]);
    return out;
}

}  // namespace spe
