// Command-line front end: one subcommand per experiment artifact.

#include "spe/community.hpp"
#include "spe/csv.hpp"
#include "spe/distances.hpp"
#include "spe/errors.hpp"
#include "spe/graph_io.hpp"
#include "spe/harness.hpp"
#include "spe/homophily.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

using namespace spe;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kHardError = 1;
constexpr int kSoftFailure = 2;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

/// CSV goes to --out (or the config's output, or stdout); the JSON summary
/// goes next to it with a .json extension, or to stderr when CSV is on stdout.
class Sink {
public:
    explicit Sink(std::string path) : path_(std::move(path)) {
        if (!path_.empty()) {
            if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
            file_.open(path_);
            if (!file_) throw ConfigurationError("cannot write " + path_.string());
        }
    }
    std::ostream& csv() { return path_.empty() ? std::cout : file_; }
    void summary(const json& j) {
        if (path_.empty()) {
            std::cerr << j.dump(2) << "\n";
            return;
        }
        auto json_path = path_;
        json_path.replace_extension(".json");
        std::ofstream out(json_path);
        out << j.dump(2) << "\n";
        std::cerr << "wrote " << path_.string() << " and " << json_path.string() << "\n";
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream file_;
};

std::uint64_t single_seed(const Options& o, const ExperimentConfig& c) { return o.seed ? *o.seed : c.seeds.front(); }

ExperimentConfig configure(const Options& o) {
    ExperimentConfig c = load_config(o.config);
    if (o.seed) c.seeds = {*o.seed};
    return c;
}

std::string output_path(const Options& o, const ExperimentConfig& c) { return o.out.empty() ? c.output : o.out; }

Graph input_graph(const ExperimentConfig& c, std::uint64_t seed, json& summary) {
    if (!c.input.empty()) {
        std::vector<std::string> warnings;
        Graph g = load_graph(c.input, &warnings);
        summary["source"] = c.input;
        summary["warnings"] = warnings;
        return g;
    }
    const double h = c.homophily.front();
    summary["source"] = "generated";
    summary["h"] = h;
    return make_graph(c.graph, h, graph_seed(h, seed));
}

json graph_json(const Graph& g) {
    json j{{"n", g.num_nodes()}, {"m", g.num_edges()}};
    if (g.has_labels() && g.num_edges() > 0) j["edge_homophily"] = edge_homophily(g);
    return j;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::string& prefix) {
    std::vector<std::string> header{"node"};
    for (Eigen::Index j = 0; j < m.cols(); ++j) header.push_back(prefix + std::to_string(j));
    csv::write_row(out, header);
    std::vector<std::string> row(m.cols() + 1);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        row[0] = std::to_string(i);
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[j + 1] = csv::format_double(m(i, j));
        csv::write_row(out, row);
    }
}

int cmd_gen(const Options& o) {
    const ExperimentConfig c = configure(o);
    const std::string out = output_path(o, c);
    if (out.empty()) throw ConfigurationError("gen needs --out");
    const std::filesystem::path out_path(out);
    if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
    json summary;
    const Graph g = input_graph(c, single_seed(o, c), summary);
    save_graph(g, out);
    summary["graph"] = graph_json(g);
    std::cout << summary.dump(2) << "\n";
    return kOk;
}

int cmd_spectrum(const Options& o) {
    const ExperimentConfig c = configure(o);
    const std::uint64_t seed = single_seed(o, c);
    json summary;
    const Graph g = input_graph(c, seed, summary);
    SpectrumRequest req = c.spectrum;
    req.seed = seed;
    SolverStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    const SpectralDecomposition s = laplacian_spectrum(g, req, &stats);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const DecompositionCheck check = check_decomposition(normalized_laplacian(g), s);

    Sink sink(output_path(o, c));
    csv::write_row(sink.csv(), {"index", "eigenvalue"});
    for (Eigen::Index i = 0; i < s.size(); ++i)
        csv::write_row(sink.csv(), {std::to_string(i), csv::format_double(s.eigenvalues[i])});
    if (!sink.path().empty()) {
        auto vec_path = sink.path();
        vec_path.replace_extension(".vectors.csv");
        std::ofstream vout(vec_path);
        write_matrix_csv(vout, s.eigenvectors, "u");
        summary["vectors"] = vec_path.string();
    }
    summary["graph"] = graph_json(g);
    summary["kind"] = s.is_full() ? "full" : "extremal";
    summary["pairs"] = s.size();
    summary["wall_time_s"] = wall;
    summary["max_residual"] = check.max_residual;
    summary["orthogonality"] = check.orthogonality;
    if (!s.is_full()) summary["restarts"] = stats.restarts;
    sink.summary(summary);
    return kOk;
}

int cmd_encode(const Options& o) {
    const ExperimentConfig c = configure(o);
    const std::uint64_t seed = single_seed(o, c);
    json summary;
    const Graph g = input_graph(c, seed, summary);
    const EncodingSpec& spec = c.encodings.front();
    const auto spectrum = spectrum_for(g, spec, seed);
    std::optional<LlpeParams> params;
    if (const auto shape = llpe_shape(spec)) {
        params = c.theta.empty() ? init_llpe_params(shape->order, shape->width, seed) : load_theta_csv(c.theta);
    }
    const PositionalEncoding pe =
        build_encoding(spec, g, spectrum ? &*spectrum : nullptr, params ? &*params : nullptr);
    Sink sink(output_path(o, c));
    write_matrix_csv(sink.csv(), pe.matrix, "p");
    summary["graph"] = graph_json(g);
    summary["encoding"] = encoding_name(spec);
    summary["columns"] = pe.matrix.cols();
    sink.summary(summary);
    return kOk;
}

int cmd_distance(const Options& o) {
    ExperimentConfig c = configure(o);
    const std::uint64_t seed = single_seed(o, c);
    json summary;
    const Graph g = input_graph(c, seed, summary);
    SpectrumRequest req = c.spectrum;
    req.seed = seed;
    const DistanceMatrix d = spectral_distance_matrix(laplacian_spectrum(g, req), c.kernel);
    Sink sink(output_path(o, c));
    write_matrix_csv(sink.csv(), d.values, "d");
    summary["graph"] = graph_json(g);
    summary["kernel"] = kernel_name(c.kernel);
    summary["approximate"] = d.approximate;
    sink.summary(summary);
    return kOk;
}

int cmd_community(const Options& o) {
    const ExperimentConfig c = configure(o);
    const std::uint64_t seed = single_seed(o, c);
    json summary;
    const Graph g = input_graph(c, seed, summary);
    PartitionSelector selector = c.selector;
    if (selector.kind == SelectorKind::llpe) {
        if (c.theta.empty()) throw ConfigurationError("the llpe selector needs a theta file");
        selector.params = load_theta_csv(c.theta);
    }
    SpectrumRequest req = c.spectrum;
    req.seed = seed;
    const Partition p = spectral_partition(laplacian_spectrum(g, req), selector, c.clusters, c.cluster, seed);
    Sink sink(output_path(o, c));
    csv::write_row(sink.csv(), {"node", "label", "truth"});
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
        csv::write_row(sink.csv(), {std::to_string(i), std::to_string(p.labels[i]),
                                    g.has_labels() ? std::to_string(g.labels()[i]) : std::string()});
    }
    summary["graph"] = graph_json(g);
    if (g.has_labels()) {
        const RecoveryReport r = align_errors(p, Partition{g.labels(), g.num_classes()});
        summary["misclassified"] = r.misclassified;
        summary["accuracy"] = r.accuracy;
    }
    sink.summary(summary);
    return kOk;
}

int cmd_train(const Options& o) {
    const ExperimentConfig c = configure(o);
    const std::uint64_t seed = single_seed(o, c);
    const SweepCell cell{c.graph, c.homophily.front(), c.encodings.front(), c.classifier};
    const SweepRow row = run_cell(cell, seed);
    Sink sink(output_path(o, c));
    write_sweep_csv(sink.csv(), {row});
    json summary{{"cell", cell.to_json()}, {"config_hash", row.config_hash}, {"seed", seed}};
    if (row.ok()) {
        summary["test_accuracy"] = row.test_accuracy;
        summary["val_accuracy"] = row.val_accuracy;
        summary["best_epoch"] = row.best_epoch;
    } else {
        summary["error"] = row.error;
    }
    sink.summary(summary);
    return row.ok() ? kOk : kSoftFailure;
}

int cmd_sweep(const Options& o) {
    const ExperimentConfig c = configure(o);
    const auto rows = run_sweep(c);
    Sink sink(output_path(o, c));
    write_sweep_csv(sink.csv(), rows);
    const json summary = summary_json(summarize(rows));
    sink.summary(summary);
    return summary["failures"].get<int>() > 0 ? kSoftFailure : kOk;
}

int cmd_sensitivity(const Options& o) {
    const ExperimentConfig c = configure(o);
    const auto rows = sensitivity_sweeps(c);
    Sink sink(output_path(o, c));
    write_sensitivity_csv(sink.csv(), rows);
    std::vector<SweepRow> flat;
    for (const auto& r : rows) flat.push_back(r.row);
    const json summary = summary_json(summarize(flat));
    sink.summary(summary);
    return summary["failures"].get<int>() > 0 ? kSoftFailure : kOk;
}

int cmd_rademacher(const Options& o) {
    const ExperimentConfig c = configure(o);
    const auto rows = rademacher_suite(c.rademacher, single_seed(o, c));
    Sink sink(output_path(o, c));
    write_rademacher_csv(sink.csv(), rows);
    int inside = 0;
    for (const auto& r : rows) inside += r.inside();
    sink.summary(json{{"configs", rows.size()}, {"inside", inside}});
    return kOk;
}

int cmd_bench(const Options& o) {
    const ExperimentConfig c = configure(o);
    const auto rows = bench_eigs(c.bench, c.seeds);
    Sink sink(output_path(o, c));
    write_bench_csv(sink.csv(), rows);
    int failures = 0;
    for (const auto& r : rows) failures += !r.error.empty();
    sink.summary(json{{"rows", rows.size()}, {"failures", failures}});
    return failures > 0 ? kSoftFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral positional encodings: graphs, spectra, encodings and experiments"};
    app.require_subcommand(1);
    Options options;
    std::uint64_t seed = 0;
    int status = kOk;

    struct Entry {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Entry entries[] = {
        {"gen", "generate a labelled graph with features", cmd_gen},
        {"spectrum", "normalized Laplacian spectrum", cmd_spectrum},
        {"encode", "positional encoding matrix", cmd_encode},
        {"distance", "spectral distance matrix", cmd_distance},
        {"community", "spectral community recovery", cmd_community},
        {"train", "train one node classifier", cmd_train},
        {"sweep", "homophily x encoding x seed sweep", cmd_sweep},
        {"rademacher", "Rademacher bracket check on random configurations", cmd_rademacher},
        {"bench", "extremal eigensolver timing", cmd_bench},
        {"sensitivity", "Chebyshev order and extremal k sweeps", cmd_sensitivity},
    };
    for (const Entry& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        sub->add_option("--config", options.config, "JSON configuration")->required()->check(CLI::ExistingFile);
        auto* seed_opt = sub->add_option("--seed", seed, "seed override");
        sub->add_option("--out", options.out, "CSV output path");
        sub->callback([&, run = e.run, seed_opt] {
            if (seed_opt->count() > 0) options.seed = seed;
            status = run(options);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kHardError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kHardError;
    }
    return status;
}
