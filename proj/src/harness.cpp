#include "spe/harness.hpp"

#include "spe/chebyshev.hpp"
#include "spe/csv.hpp"
#include "spe/errors.hpp"
#include "spe/laplacian.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <thread>

namespace spe {

namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigurationError(where + " must be an object");
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
        if (!known) throw ConfigurationError("unknown key '" + item.key() + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("bad value for '") + key + "': " + e.what());
    }
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string error_tag(const std::exception& e) {
    const char* kind = "Error";
    if (dynamic_cast<const TrainingError*>(&e)) kind = "TrainingError";
    else if (dynamic_cast<const ConvergenceError*>(&e)) kind = "ConvergenceError";
    else if (dynamic_cast<const CapacityError*>(&e)) kind = "CapacityError";
    else if (dynamic_cast<const ConfigurationError*>(&e)) kind = "ConfigurationError";
    else if (dynamic_cast<const GenerationError*>(&e)) kind = "GenerationError";
    else if (dynamic_cast<const ParameterError*>(&e)) kind = "ParameterError";
    else if (dynamic_cast<const ClusteringError*>(&e)) kind = "ClusteringError";
    else if (!dynamic_cast<const Error*>(&e)) kind = "InternalError";
    return std::string(kind) + ": " + e.what();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string request_key(const std::optional<SpectrumRequest>& r) {
    if (!r) return "none";
    if (r->full) return "full";
    return "ext:" + std::to_string(r->k_small) + ":" + std::to_string(r->k_large);
}

/// Spectra of one graph keyed by request, computed on first use.
class SpectrumCache {
public:
    SpectrumCache(const Graph& graph, std::uint64_t seed) : graph_(graph), seed_(seed) {}

    const SpectralDecomposition* get(const EncodingSpec& spec) {
        auto req = spectrum_requirement(spec);
        if (!req) return nullptr;
        auto [it, inserted] = cache_.try_emplace(request_key(req));
        if (inserted) {
            req->seed = seed_;
            it->second = laplacian_spectrum(graph_, *req);
        }
        return &it->second;
    }

private:
    const Graph& graph_;
    std::uint64_t seed_;
    std::map<std::string, SpectralDecomposition> cache_;
};

SweepRow train_row(const Graph& graph, const SweepCell& cell, std::uint64_t seed, SpectrumCache& spectra) {
    SweepRow row;
    row.h = cell.h;
    row.encoding = encoding_name(cell.encoding);
    row.seed = seed;
    row.config_hash = cell.hash();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const SpectralDecomposition* spectrum = spectra.get(cell.encoding);
        const Split split = split_nodes(graph.num_nodes(), split_seed(seed));
        const TrainResult r = train_node_classifier(graph, cell.encoding, split, cell.classifier, seed, spectrum);
        row.test_accuracy = r.test_accuracy;
        row.val_accuracy = r.val_accuracy;
        row.best_epoch = r.best_epoch;
        row.quintiles = r.quintile_accuracy;
    } catch (const std::exception& e) {
        row.error = error_tag(e);
        row.test_accuracy = row.val_accuracy = std::nan("");
    }
    row.wall_time_s = seconds_since(t0);
    return row;
}

SweepRow failed_row(const SweepCell& cell, std::uint64_t seed, std::string error) {
    SweepRow row;
    row.h = cell.h;
    row.encoding = encoding_name(cell.encoding);
    row.seed = seed;
    row.config_hash = cell.hash();
    row.test_accuracy = row.val_accuracy = std::nan("");
    row.error = std::move(error);
    return row;
}

template <class T>
std::vector<T> dedup(const std::vector<T>& v) {
    std::vector<T> out;
    for (const T& x : v)
        if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    return out;
}

std::string fmt(double v) { return std::isnan(v) ? std::string() : csv::format_double(v); }

std::vector<std::string> sweep_fields(const SweepRow& r) {
    std::vector<std::string> f{fmt(r.h),
                               r.encoding,
                               std::to_string(r.seed),
                               fmt(r.test_accuracy),
                               fmt(r.val_accuracy),
                               csv::format_double(r.wall_time_s),
                               r.config_hash,
                               std::to_string(r.best_epoch)};
    for (const auto& q : r.quintiles) f.push_back(q ? csv::format_double(*q) : std::string());
    f.push_back(r.error);
    return f;
}

const std::vector<std::string> kSweepHeader{"h",          "encoding", "seed", "test_accuracy", "val_accuracy",
                                            "wall_time_s", "config_hash", "best_epoch", "q1", "q2",
                                            "q3",          "q4",       "q5",   "error"};

}  // namespace

Graph make_graph(const GraphConfig& config, double h, std::uint64_t seed) {
    if (!(h >= 0.0 && h <= 1.0)) throw ParameterError("homophily must lie in [0, 1]");
    Graph g;
    if (config.family == GraphFamily::sbm) {
        g = sbm_generate(sbm_from_homophily(config.n, config.k, config.avg_degree, h), seed);
    } else {
        PaParams p;
        p.n = config.n;
        p.k = config.k;
        p.m_edges = config.m_edges;
        p.compat = Eigen::MatrixXd::Constant(config.k, config.k, (1.0 - h) / (config.k - 1));
        p.compat.diagonal().setConstant(h);
        g = pa_generate(p, std::vector<double>(config.k, 1.0 / config.k), seed);
    }
    g.set_features(gen_features(g.labels(), config.k, config.features, config.feature_mode(), splitmix(seed)));
    return g;
}

// --- configuration ---------------------------------------------------------

json to_json(const EncodingSpec& spec) {
    return std::visit(overloaded{
                          [](const NoPE&) { return json{{"type", "NoPE"}}; },
                          [](const LpeFK& s) { return json{{"type", "LpeFK"}, {"k", s.k}}; },
                          [](const LpeFLK& s) { return json{{"type", "LpeFLK"}, {"k", s.k}}; },
                          [](const LpeFull&) { return json{{"type", "LpeFull"}}; },
                          [](const Rwse& s) { return json{{"type", "Rwse"}, {"m", s.m}}; },
                          [](const Llpe& s) {
                              return json{{"type", "Llpe"}, {"M", s.M}, {"d", s.d}, {"l1", s.l1}, {"l2", s.l2}};
                          },
                          [](const LlpeLarge& s) {
                              return json{{"type", "LlpeLarge"}, {"k", s.k}, {"M", s.M},
                                          {"d", s.d},            {"l1", s.l1}, {"l2", s.l2}};
                          },
                      },
                      spec);
}

EncodingSpec encoding_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type")) throw ConfigurationError("encoding needs a 'type'");
    const std::string type = j.at("type").get<std::string>();
    EncodingSpec spec;
    if (type == "NoPE") {
        check_keys(j, {"type"}, "NoPE");
        spec = NoPE{};
    } else if (type == "LpeFK" || type == "LpeFLK") {
        check_keys(j, {"type", "k"}, type);
        int k = 16;
        read(j, "k", k);
        spec = type == "LpeFK" ? EncodingSpec(LpeFK{k}) : EncodingSpec(LpeFLK{k});
    } else if (type == "LpeFull") {
        check_keys(j, {"type"}, type);
        spec = LpeFull{};
    } else if (type == "Rwse") {
        check_keys(j, {"type", "m"}, type);
        Rwse s;
        read(j, "m", s.m);
        spec = s;
    } else if (type == "Llpe") {
        check_keys(j, {"type", "M", "d", "l1", "l2"}, type);
        Llpe s;
        read(j, "M", s.M);
        read(j, "d", s.d);
        read(j, "l1", s.l1);
        read(j, "l2", s.l2);
        spec = s;
    } else if (type == "LlpeLarge") {
        check_keys(j, {"type", "k", "M", "d", "l1", "l2"}, type);
        LlpeLarge s;
        read(j, "k", s.k);
        read(j, "M", s.M);
        read(j, "d", s.d);
        read(j, "l1", s.l1);
        read(j, "l2", s.l2);
        spec = s;
    } else {
        throw ConfigurationError("unknown encoding type '" + type + "'");
    }
    validate(spec);
    return spec;
}

json to_json(const ClassifierConfig& c) {
    static const char* arch[] = {"linear", "mlp", "sage1"};
    json j{{"arch", arch[static_cast<int>(c.arch)]},
           {"hidden", c.hidden},
           {"lr", c.lr},
           {"epochs", c.epochs},
           {"patience", c.patience},
           {"weight_decay", c.weight_decay}};
    if (c.optimizer == OptimizerKind::adam) {
        j["optimizer"] = "adam";
        j["beta1"] = c.beta1;
        j["beta2"] = c.beta2;
        j["eps"] = c.eps;
    } else {
        j["optimizer"] = "sgd_momentum";
        j["momentum"] = c.momentum;
    }
    return j;
}

json to_json(const GraphConfig& c) {
    json j{{"family", c.family == GraphFamily::sbm ? "sbm" : "pa"},
           {"n", c.n},
           {"k", c.k},
           {"features", {{"mu", c.features.mu}, {"sigma", c.features.sigma}, {"dim", c.features.dim}}}};
    if (c.family == GraphFamily::sbm) j["avg_degree"] = c.avg_degree;
    else j["m_edges"] = c.m_edges;
    return j;
}

namespace {

ClassifierConfig classifier_from_json(const json& j) {
    check_keys(j, {"arch", "hidden", "lr", "epochs", "patience", "weight_decay", "optimizer", "momentum", "beta1",
                   "beta2", "eps"},
               "classifier");
    ClassifierConfig c;
    std::string arch = "mlp", opt = "adam";
    read(j, "arch", arch);
    read(j, "optimizer", opt);
    if (arch == "linear") c.arch = Arch::linear;
    else if (arch == "mlp") c.arch = Arch::mlp;
    else if (arch == "sage1") c.arch = Arch::sage1;
    else throw ConfigurationError("unknown arch '" + arch + "'");
    if (opt == "adam") c.optimizer = OptimizerKind::adam;
    else if (opt == "sgd_momentum") c.optimizer = OptimizerKind::sgd_momentum;
    else throw ConfigurationError("unknown optimizer '" + opt + "'");
    read(j, "hidden", c.hidden);
    read(j, "lr", c.lr);
    read(j, "epochs", c.epochs);
    read(j, "patience", c.patience);
    read(j, "weight_decay", c.weight_decay);
    read(j, "momentum", c.momentum);
    read(j, "beta1", c.beta1);
    read(j, "beta2", c.beta2);
    read(j, "eps", c.eps);
    return c;
}

GraphConfig graph_from_json(const json& j) {
    check_keys(j, {"family", "n", "k", "avg_degree", "m_edges", "features"}, "graph");
    GraphConfig g;
    std::string family = "sbm";
    read(j, "family", family);
    if (family == "sbm") g.family = GraphFamily::sbm;
    else if (family == "pa") g.family = GraphFamily::pa;
    else throw ConfigurationError("unknown graph family '" + family + "'");
    read(j, "n", g.n);
    read(j, "k", g.k);
    read(j, "avg_degree", g.avg_degree);
    read(j, "m_edges", g.m_edges);
    if (j.contains("features")) {
        const json& f = j.at("features");
        check_keys(f, {"mu", "sigma", "dim"}, "graph.features");
        read(f, "mu", g.features.mu);
        read(f, "sigma", g.features.sigma);
        read(f, "dim", g.features.dim);
    }
    return g;
}

SpectralKernel kernel_from_json(const json& j) {
    check_keys(j, {"type", "t"}, "kernel");
    std::string type = "Commute";
    double t = 1.0;
    read(j, "type", type);
    read(j, "t", t);
    if (type == "Commute") return Commute{};
    if (type == "Diffusion") return Diffusion{t};
    if (type == "Biharmonic") return Biharmonic{};
    if (type == "HighPass") return HighPass{t};
    throw ConfigurationError("unknown kernel type '" + type + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
    if (graph.n < 2) throw ConfigurationError("graph.n must be at least 2");
    if (graph.k < 2) throw ConfigurationError("graph.k must be at least 2");
    if (graph.n % graph.k != 0 && graph.family == GraphFamily::sbm)
        throw ConfigurationError("graph.n must be divisible by graph.k");
    if (!(graph.avg_degree > 0)) throw ConfigurationError("graph.avg_degree must be positive");
    if (homophily.empty()) throw ConfigurationError("homophily grid is empty");
    for (double h : homophily)
        if (!(h >= 0.0 && h <= 1.0)) throw ConfigurationError("homophily values must lie in [0, 1]");
    if (encodings.empty()) throw ConfigurationError("encoding list is empty");
    for (const auto& e : encodings) spe::validate(e);
    if (seeds.empty()) throw ConfigurationError("seed list is empty");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
        throw ConfigurationError("seeds must be distinct");
    if (workers < 0) throw ConfigurationError("workers must be non-negative");
    try {
        classifier.validate();
    } catch (const ParameterError& e) {
        throw ConfigurationError(std::string("classifier: ") + e.what());
    }
    if (sensitivity.m_grid.empty() || sensitivity.k_grid.empty())
        throw ConfigurationError("sensitivity grids must be nonempty");
    if (bench.repeats < 1) throw ConfigurationError("bench.repeats must be at least 1");
    if (rademacher.num_sigma < 1) throw ConfigurationError("rademacher.num_sigma must be at least 1");
}

ExperimentConfig parse_config(const json& j) {
    check_keys(j,
               {"graph", "homophily", "encodings", "classifier", "seeds", "workers", "output", "sensitivity",
                "rademacher", "bench", "input", "spectrum", "kernel", "selector", "cluster", "clusters", "theta"},
               "config");
    ExperimentConfig c;
    if (j.contains("graph")) c.graph = graph_from_json(j.at("graph"));
    read(j, "homophily", c.homophily);
    if (j.contains("encodings")) {
        c.encodings.clear();
        for (const auto& e : j.at("encodings")) c.encodings.push_back(encoding_from_json(e));
    }
    if (j.contains("classifier")) c.classifier = classifier_from_json(j.at("classifier"));
    read(j, "seeds", c.seeds);
    read(j, "workers", c.workers);
    read(j, "output", c.output);
    read(j, "input", c.input);
    read(j, "theta", c.theta);
    read(j, "clusters", c.clusters);
    if (j.contains("sensitivity")) {
        const json& s = j.at("sensitivity");
        check_keys(s, {"h", "M_grid", "k_grid", "base"}, "sensitivity");
        read(s, "h", c.sensitivity.h);
        read(s, "M_grid", c.sensitivity.m_grid);
        read(s, "k_grid", c.sensitivity.k_grid);
        if (s.contains("base")) {
            const EncodingSpec base = encoding_from_json(s.at("base"));
            if (!std::holds_alternative<Llpe>(base)) throw ConfigurationError("sensitivity.base must be an Llpe");
            c.sensitivity.base = std::get<Llpe>(base);
        }
    }
    if (j.contains("rademacher")) {
        const json& r = j.at("rademacher");
        check_keys(r, {"configs", "num_sigma", "max_n", "max_M", "include_constant"}, "rademacher");
        read(r, "configs", c.rademacher.configs);
        read(r, "num_sigma", c.rademacher.num_sigma);
        read(r, "max_n", c.rademacher.max_n);
        read(r, "max_M", c.rademacher.max_m);
        read(r, "include_constant", c.rademacher.include_constant);
    }
    if (j.contains("bench")) {
        const json& b = j.at("bench");
        check_keys(b, {"n_grid", "k_grid", "avg_degree", "repeats", "tol"}, "bench");
        read(b, "n_grid", c.bench.n_grid);
        read(b, "k_grid", c.bench.k_grid);
        read(b, "avg_degree", c.bench.avg_degree);
        read(b, "repeats", c.bench.repeats);
        read(b, "tol", c.bench.tol);
    }
    if (j.contains("spectrum")) {
        const json& s = j.at("spectrum");
        check_keys(s, {"full", "k_small", "k_large", "tol", "max_iter"}, "spectrum");
        read(s, "full", c.spectrum.full);
        read(s, "k_small", c.spectrum.k_small);
        read(s, "k_large", c.spectrum.k_large);
        read(s, "tol", c.spectrum.tol);
        read(s, "max_iter", c.spectrum.max_iter);
    }
    if (j.contains("kernel")) c.kernel = kernel_from_json(j.at("kernel"));
    if (j.contains("selector")) {
        const std::string s = j.at("selector").get<std::string>();
        if (s == "first_nontrivial") c.selector.kind = SelectorKind::first_nontrivial;
        else if (s == "last") c.selector.kind = SelectorKind::last;
        else if (s == "sign_of_last") c.selector.kind = SelectorKind::sign_of_last;
        else if (s == "llpe") c.selector.kind = SelectorKind::llpe;
        else throw ConfigurationError("unknown selector '" + s + "'");
    }
    if (j.contains("cluster")) {
        const std::string s = j.at("cluster").get<std::string>();
        if (s == "sign") c.cluster = ClusterMethod::sign;
        else if (s == "kmeans") c.cluster = ClusterMethod::kmeans;
        else throw ConfigurationError("unknown cluster method '" + s + "'");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigurationError("config " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

// --- sweeps ------------------------------------------------------------------

json SweepCell::to_json() const {
    return json{{"graph", spe::to_json(graph)},
                {"h", h},
                {"encoding", spe::to_json(encoding)},
                {"classifier", spe::to_json(classifier)}};
}

std::string SweepCell::hash() const {
    const std::string text = to_json().dump();
    std::uint64_t x = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        x ^= c;
        x *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

std::uint64_t graph_seed(double h, std::uint64_t seed) {
    return splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(std::llround(h * 1e6)));
}

std::uint64_t split_seed(std::uint64_t seed) { return splitmix(seed ^ 0x5851f42d4c957f2dULL); }

SweepRow run_cell(const SweepCell& cell, std::uint64_t seed) {
    try {
        const std::uint64_t gs = graph_seed(cell.h, seed);
        const Graph graph = make_graph(cell.graph, cell.h, gs);
        SpectrumCache spectra(graph, gs);
        return train_row(graph, cell, seed, spectra);
    } catch (const std::exception& e) {
        return failed_row(cell, seed, error_tag(e));
    }
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers) : std::thread::hardware_concurrency();
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
    config.validate();
    const std::size_t nh = config.homophily.size(), ne = config.encodings.size(), ns = config.seeds.size();
    std::vector<SweepRow> rows(nh * ne * ns);
    // one job per graph; its encodings share spectra
    parallel_for(nh * ns, config.workers, [&](std::size_t job) {
        const std::size_t hi = job / ns, si = job % ns;
        const double h = config.homophily[hi];
        const std::uint64_t seed = config.seeds[si];
        const std::uint64_t gs = graph_seed(h, seed);
        std::optional<Graph> graph;
        std::string graph_error;
        try {
            graph = make_graph(config.graph, h, gs);
        } catch (const std::exception& e) {
            graph_error = error_tag(e);
        }
        std::optional<SpectrumCache> spectra;
        if (graph) spectra.emplace(*graph, gs);
        for (std::size_t ei = 0; ei < ne; ++ei) {
            const SweepCell cell{config.graph, h, config.encodings[ei], config.classifier};
            SweepRow& row = rows[(hi * ne + ei) * ns + si];
            if (graph) {
                row = train_row(*graph, cell, seed, *spectra);
            } else {
                row = failed_row(cell, seed, graph_error);
            }
        }
    });
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    csv::write_row(out, kSweepHeader);
    for (const auto& r : rows) csv::write_row(out, sweep_fields(r));
}

std::vector<CellSummary> summarize(const std::vector<SweepRow>& rows) {
    std::vector<CellSummary> out;
    std::vector<std::vector<double>> values;
    std::map<std::string, std::size_t> index;
    for (const auto& r : rows) {
        const std::string key = "h=" + csv::format_double(r.h) + "|" + r.encoding;
        auto [it, inserted] = index.try_emplace(key, out.size());
        if (inserted) {
            out.push_back({key});
            values.emplace_back();
        }
        CellSummary& s = out[it->second];
        if (r.ok()) values[it->second].push_back(r.test_accuracy);
        else ++s.failures;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& v = values[i];
        out[i].count = static_cast<int>(v.size());
        if (v.empty()) {
            out[i].mean = out[i].std = std::nan("");
            continue;
        }
        double sum = 0.0;
        for (double x : v) sum += x;
        const double mean = sum / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        out[i].mean = mean;
        out[i].std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    }
    return out;
}

json summary_json(const std::vector<CellSummary>& summary) {
    json cells = json::array();
    int failures = 0;
    for (const auto& s : summary) {
        failures += s.failures;
        json c{{"cell", s.key}, {"count", s.count}, {"failures", s.failures}};
        c["mean"] = std::isnan(s.mean) ? json(nullptr) : json(s.mean);
        c["std"] = std::isnan(s.std) ? json(nullptr) : json(s.std);
        cells.push_back(c);
    }
    return json{{"cells", cells}, {"failures", failures}};
}

std::vector<SensitivityRow> sensitivity_sweeps(const ExperimentConfig& config) {
    config.validate();
    const auto m_grid = dedup(config.sensitivity.m_grid);
    const auto k_grid = dedup(config.sensitivity.k_grid);
    const Llpe& base = config.sensitivity.base;
    const double h = config.sensitivity.h;
    const std::size_t per_seed = m_grid.size() + k_grid.size(), ns = config.seeds.size();

    std::vector<SensitivityRow> rows(per_seed * ns);
    parallel_for(ns, config.workers, [&](std::size_t si) {
        const std::uint64_t seed = config.seeds[si];
        const std::uint64_t gs = graph_seed(h, seed);
        std::optional<Graph> graph;
        std::string graph_error;
        try {
            graph = make_graph(config.graph, h, gs);
        } catch (const std::exception& e) {
            graph_error = error_tag(e);
        }
        std::optional<SpectrumCache> spectra;
        if (graph) spectra.emplace(*graph, gs);
        auto run = [&](std::size_t slot, const char* axis, int value, const EncodingSpec& enc) {
            const SweepCell cell{config.graph, h, enc, config.classifier};
            SensitivityRow& r = rows[slot * ns + si];
            r.axis = axis;
            r.value = value;
            if (graph) {
                r.row = train_row(*graph, cell, seed, *spectra);
            } else {
                r.row = failed_row(cell, seed, graph_error);
            }
        };
        for (std::size_t i = 0; i < m_grid.size(); ++i)
            run(i, "M", m_grid[i], Llpe{m_grid[i], base.d, base.l1, base.l2});
        for (std::size_t i = 0; i < k_grid.size(); ++i)
            run(m_grid.size() + i, "k", k_grid[i], LlpeLarge{k_grid[i], base.M, base.d, base.l1, base.l2});
    });
    return rows;
}

void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityRow>& rows) {
    std::vector<std::string> header{"axis", "value"};
    header.insert(header.end(), kSweepHeader.begin(), kSweepHeader.end());
    csv::write_row(out, header);
    for (const auto& r : rows) {
        std::vector<std::string> f{r.axis, std::to_string(r.value)};
        const auto rest = sweep_fields(r.row);
        f.insert(f.end(), rest.begin(), rest.end());
        csv::write_row(out, f);
    }
}

// --- Rademacher --------------------------------------------------------------

RademacherResult rademacher_estimate(const Eigen::VectorXd& lambdas, double c, int order, int num_sigma,
                                     std::uint64_t seed, bool include_constant) {
    const Eigen::Index n = lambdas.size();
    if (n < 1) throw ParameterError("rademacher_estimate needs at least one eigenvalue");
    if (!(c >= 0.0)) throw ParameterError("C must be non-negative");
    if (order < (include_constant ? 0 : 1)) throw ParameterError("order too small for the feature map");
    if (num_sigma < 1) throw ParameterError("num_sigma must be at least 1");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(std::abs(lambdas[i]) <= 1.0 + 1e-12)) throw ParameterError("normalized eigenvalues must lie in [-1, 1]");

    RademacherResult r;
    const double dn = static_cast<double>(n);
    r.lower = c / std::sqrt(2.0 * dn);
    r.upper = std::sqrt(2.0) * c / std::sqrt(dn);
    if (c == 0.0) return r;

    const int first = include_constant ? 0 : 1;
    Eigen::MatrixXd phi(n, order - first + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = clamp_unit(lambdas[i]);
        for (int m = first; m <= order; ++m) phi(i, m - first) = monic_cheb_eval(m, x);
    }

    std::mt19937_64 rng(seed);
    constexpr int kBatch = 256;
    std::vector<double> norms;
    norms.reserve(num_sigma);
    for (int done = 0; done < num_sigma; done += kBatch) {
        const int b = std::min(kBatch, num_sigma - done);
        Eigen::MatrixXd sigma(n, b);
        for (int j = 0; j < b; ++j)
            for (Eigen::Index i = 0; i < n; ++i) sigma(i, j) = (rng() >> 63) ? 1.0 : -1.0;
        const Eigen::MatrixXd v = phi.transpose() * sigma;
        for (int j = 0; j < b; ++j) norms.push_back(v.col(j).norm());
    }
    double mean = 0.0;
    for (double x : norms) mean += x;
    mean /= num_sigma;
    double ss = 0.0;
    for (double x : norms) ss += (x - mean) * (x - mean);
    const double sd = num_sigma > 1 ? std::sqrt(ss / (num_sigma - 1)) : 0.0;
    r.estimate = c / dn * mean;
    r.mc_stderr = c / dn * sd / std::sqrt(static_cast<double>(num_sigma));
    return r;
}

bool RademacherRow::inside() const noexcept {
    return result.estimate >= result.lower - 3.0 * result.mc_stderr &&
           result.estimate <= result.upper + 3.0 * result.mc_stderr;
}

std::vector<RademacherRow> rademacher_suite(const RademacherConfig& config, std::uint64_t seed) {
    if (config.configs < 1) throw ParameterError("rademacher.configs must be at least 1");
    if (config.max_n < 2 || config.max_m < 1) throw ParameterError("rademacher.max_n >= 2 and max_M >= 1 required");
    std::mt19937_64 rng(seed);
    std::vector<RademacherRow> rows;
    for (int i = 0; i < config.configs; ++i) {
        RademacherRow row;
        row.n = std::uniform_int_distribution<NodeId>(2, config.max_n)(rng);
        row.order = std::uniform_int_distribution<int>(1, config.max_m)(rng);
        row.c = std::exp(std::uniform_real_distribution<double>(std::log(0.1), std::log(10.0))(rng));
        Eigen::VectorXd lambdas;
        if (i % 2 == 0) {
            row.source = "uniform";
            lambdas.resize(row.n);
            std::uniform_real_distribution<double> uni(-1.0, 1.0);
            for (auto& x : lambdas) x = uni(rng);
        } else {
            row.source = "sbm";
            // two equal blocks of at least 10 nodes
            row.n = std::max<NodeId>(20, row.n - row.n % 2);
            const double h = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const double deg = std::min(10.0, row.n / 2.0 - 1.0);
            const Graph g = sbm_generate(sbm_from_homophily(row.n, 2, deg, h), rng());
            lambdas = normalize_eigenvalues(full_eigh(normalized_laplacian(g)).eigenvalues);
        }
        row.result = rademacher_estimate(lambdas, row.c, row.order, config.num_sigma, rng(), config.include_constant);
        rows.push_back(row);
    }
    return rows;
}

void write_rademacher_csv(std::ostream& out, const std::vector<RademacherRow>& rows) {
    csv::write_row(out, {"n", "M", "C", "source", "estimate", "lower", "upper", "mc_stderr", "inside"});
    for (const auto& r : rows) {
        csv::write_row(out, {std::to_string(r.n), std::to_string(r.order), csv::format_double(r.c), r.source,
                             csv::format_double(r.result.estimate), csv::format_double(r.result.lower),
                             csv::format_double(r.result.upper), csv::format_double(r.result.mc_stderr),
                             r.inside() ? "true" : "false"});
    }
}

// --- eigensolver benchmark ---------------------------------------------------

std::vector<BenchRow> bench_eigs(const BenchConfig& config, const std::vector<std::uint64_t>& seeds) {
    if (config.repeats < 1) throw ParameterError("repeats must be at least 1");
    std::vector<BenchRow> rows;
    for (NodeId n : config.n_grid) {
        for (std::uint64_t seed : seeds) {
            std::optional<SparseMatrix> lap;
            std::string graph_error;
            try {
                lap = normalized_laplacian(sbm_generate(sbm_from_homophily(n, 2, config.avg_degree, 0.5), seed));
            } catch (const std::exception& e) {
                graph_error = error_tag(e);
            }
            for (int k : config.k_grid) {
                BenchRow row;
                row.n = n;
                row.k = k;
                row.seed = seed;
                if (!lap) {
                    row.error = graph_error;
                    rows.push_back(row);
                    continue;
                }
                std::vector<double> times;
                try {
                    for (int rep = 0; rep < config.repeats; ++rep) {
                        SolverStats stats;
                        ExtremalOptions opts;
                        opts.tol = config.tol;
                        opts.seed = seed;
                        const auto t0 = std::chrono::steady_clock::now();
                        extremal_eigs(*lap, k, k, opts, &stats);
                        times.push_back(seconds_since(t0));
                        row.peak_bytes = std::max(row.peak_bytes, stats.workspace_bytes);
                        row.restarts = stats.restarts;
                        row.max_residual = stats.max_residual;
                    }
                    std::sort(times.begin(), times.end());
                    row.wall_time_s = times[times.size() / 2];
                } catch (const std::exception& e) {
                    row.error = error_tag(e);
                    row.wall_time_s = std::nan("");
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    csv::write_row(out, {"n", "k", "seed", "wall_time_s", "peak_bytes", "restarts", "max_residual", "error"});
    for (const auto& r : rows) {
        csv::write_row(out, {std::to_string(r.n), std::to_string(r.k), std::to_string(r.seed), fmt(r.wall_time_s),
                             std::to_string(r.peak_bytes), std::to_string(r.restarts),
                             csv::format_double(r.max_residual), r.error});
    }
}

}  // namespace spe
