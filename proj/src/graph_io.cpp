#include "spe/graph_io.hpp"

#include "spe/csv.hpp"
#include "spe/errors.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace spe {

namespace {

bool parse_two(const std::string& line, std::int64_t& a, std::int64_t& b) {
    const char* p = line.data();
    const char* end = line.data() + line.size();
    auto skip_ws = [&] {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    };
    skip_ws();
    auto r1 = std::from_chars(p, end, a);
    if (r1.ec != std::errc{} || r1.ptr == p) return false;
    p = r1.ptr;
    if (p < end && *p != ' ' && *p != '\t') return false;
    skip_ws();
    auto r2 = std::from_chars(p, end, b);
    if (r2.ec != std::errc{} || r2.ptr == p) return false;
    p = r2.ptr;
    skip_ws();
    return p == end;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

std::filesystem::path companion(const std::filesystem::path& path, const char* name) {
    return path.parent_path() / name;
}

}  // namespace

Graph load_graph(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    auto warn = [&](const std::string& msg) {
        if (warnings) {
            warnings->push_back(msg);
        } else {
            std::cerr << "warning: " << path.string() << ": " << msg << '\n';
        }
    };

    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError("missing header", lineno);
    std::int64_t n = 0, m = 0;
    if (!parse_two(line, n, m) || n < 0 || m < 0 || n > std::numeric_limits<NodeId>::max()) {
        throw ParseError("header must be 'n m' with non-negative integers", lineno);
    }

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(m));
    while (static_cast<std::int64_t>(edges.size()) < m) {
        if (!std::getline(in, line)) {
            throw ParseError("expected " + std::to_string(m) + " edges, found " + std::to_string(edges.size()),
                             lineno + 1);
        }
        ++lineno;
        std::int64_t u = 0, v = 0;
        if (!parse_two(line, u, v)) throw ParseError("edge line must be 'u v'", lineno);
        if (u < 0 || v < 0 || u >= n || v >= n) throw ParseError("node index out of range [0, n)", lineno);
        if (u == v) throw ParseError("self loop", lineno);
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (!blank(line)) throw ParseError("trailing content after " + std::to_string(m) + " edges", lineno);
    }

    std::size_t duplicates = 0;
    Graph g = Graph::from_edges(static_cast<NodeId>(n), edges, &duplicates);
    if (duplicates > 0) warn(std::to_string(duplicates) + " duplicate edge(s) dropped");

    if (const auto fpath = companion(path, "features.csv"); std::filesystem::exists(fpath)) {
        Eigen::MatrixXd x = csv::read_matrix(fpath);
        if (x.rows() != n) throw ParseError("features.csv has " + std::to_string(x.rows()) + " rows, expected n", 1);
        g.set_features(std::move(x));
    }
    if (const auto lpath = companion(path, "labels.csv"); std::filesystem::exists(lpath)) {
        std::ifstream lin(lpath);
        std::vector<int> labels;
        std::size_t lno = 0;
        int max_label = -1;
        while (std::getline(lin, line)) {
            ++lno;
            if (blank(line)) continue;
            std::istringstream ss(line);
            int y = 0;
            std::string rest;
            if (!(ss >> y) || (ss >> rest) || y < 0) throw ParseError("labels.csv: expected one non-negative integer", lno);
            labels.push_back(y);
            max_label = std::max(max_label, y);
        }
        if (static_cast<std::int64_t>(labels.size()) != n) throw ParseError("labels.csv must have n rows", lno);
        g.set_labels(std::move(labels), max_label + 1);
    }
    return g;
}

void save_graph(const Graph& graph, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << graph.num_nodes() << ' ' << graph.num_edges() << '\n';
    for (const auto& [u, v] : graph.edge_list()) out << u << ' ' << v << '\n';
    if (graph.has_features()) csv::write_matrix(companion(path, "features.csv"), graph.features());
    if (graph.has_labels()) {
        std::ofstream lout(companion(path, "labels.csv"));
        for (int y : graph.labels()) lout << y << '\n';
    }
}

}  // namespace spe
