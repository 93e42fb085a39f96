#include "spe/encodings.hpp"

#include "spe/chebyshev.hpp"
#include "spe/csv.hpp"
#include "spe/errors.hpp"
#include "spe/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace spe {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
}

}  // namespace

void validate(const EncodingSpec& spec) {
    std::visit(overloaded{
                   [](const NoPE&) {},
                   [](const LpeFK& s) { require(s.k >= 1, "LpeFK needs k >= 1"); },
                   [](const LpeFLK& s) { require(s.k >= 1, "LpeFLK needs k >= 1"); },
                   [](const LpeFull&) {},
                   [](const Rwse& s) { require(s.m >= 1, "Rwse needs m >= 1"); },
                   [](const Llpe& s) {
                       require(s.M >= 0 && s.d >= 1, "Llpe needs M >= 0 and d >= 1");
                       require(s.l1 >= 0 && s.l2 >= 0, "Llpe regularization must be non-negative");
                   },
                   [](const LlpeLarge& s) {
                       require(s.k >= 1 && s.M >= 0 && s.d >= 1, "LlpeLarge needs k >= 1, M >= 0, d >= 1");
                       require(s.l1 >= 0 && s.l2 >= 0, "LlpeLarge regularization must be non-negative");
                   },
               },
               spec);
}

std::string encoding_name(const EncodingSpec& spec) {
    return std::visit(overloaded{
                          [](const NoPE&) { return std::string("NoPE"); },
                          [](const LpeFK& s) { return "LpeFK{k=" + std::to_string(s.k) + "}"; },
                          [](const LpeFLK& s) { return "LpeFLK{k=" + std::to_string(s.k) + "}"; },
                          [](const LpeFull&) { return std::string("LpeFull"); },
                          [](const Rwse& s) { return "Rwse{m=" + std::to_string(s.m) + "}"; },
                          [](const Llpe& s) {
                              return "Llpe{M=" + std::to_string(s.M) + ",d=" + std::to_string(s.d) +
                                     ",l1=" + csv::format_double(s.l1) + ",l2=" + csv::format_double(s.l2) + "}";
                          },
                          [](const LlpeLarge& s) {
                              return "LlpeLarge{k=" + std::to_string(s.k) + ",M=" + std::to_string(s.M) +
                                     ",d=" + std::to_string(s.d) + ",l1=" + csv::format_double(s.l1) +
                                     ",l2=" + csv::format_double(s.l2) + "}";
                          },
                      },
                      spec);
}

std::optional<LlpeShape> llpe_shape(const EncodingSpec& spec) {
    if (const auto* s = std::get_if<Llpe>(&spec)) return LlpeShape{s->M, s->d, s->l1, s->l2};
    if (const auto* s = std::get_if<LlpeLarge>(&spec)) return LlpeShape{s->M, s->d, s->l1, s->l2};
    return std::nullopt;
}

bool is_learnable(const EncodingSpec& spec) { return llpe_shape(spec).has_value(); }

std::optional<SpectrumRequest> spectrum_requirement(const EncodingSpec& spec) {
    auto extremal = [](int small, int large) {
        SpectrumRequest r;
        r.full = false;
        r.k_small = small;
        r.k_large = large;
        return std::optional<SpectrumRequest>(r);
    };
    return std::visit(overloaded{
                          [](const NoPE&) { return std::optional<SpectrumRequest>(); },
                          [](const Rwse&) { return std::optional<SpectrumRequest>(); },
                          [&](const LpeFK& s) { return extremal(s.k + 1, 0); },
                          [&](const LpeFLK& s) { return extremal(s.k + 1, s.k); },
                          [&](const LlpeLarge& s) { return extremal(s.k, s.k); },
                          [](const LpeFull&) { return std::optional<SpectrumRequest>(SpectrumRequest{}); },
                          [](const Llpe&) { return std::optional<SpectrumRequest>(SpectrumRequest{}); },
                      },
                      spec);
}

LlpeParams init_llpe_params(int order, int width, std::uint64_t seed) {
    require(order >= 0 && width >= 1, "LLPE parameters need M >= 0 and d >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.1 / std::sqrt(order + 1.0));
    LlpeParams p;
    p.theta.resize(order + 1, width);
    for (Eigen::Index j = 0; j < p.theta.cols(); ++j)
        for (Eigen::Index i = 0; i < p.theta.rows(); ++i) p.theta(i, j) = normal(rng);
    return p;
}

LlpeBasis LlpeBasis::build(const SpectralDecomposition& spectrum, int order) {
    LlpeBasis out;
    out.b = cheb_basis_matrix(normalize_eigenvalues(spectrum.eigenvalues), order);
    out.ub = spectrum.eigenvectors * out.b;
    return out;
}

PositionalEncoding llpe_forward(const SpectralDecomposition& spectrum, const LlpeParams& params) {
    const LlpeBasis basis = LlpeBasis::build(spectrum, params.order());
    return {basis.forward(params.theta), Llpe{params.order(), params.width()}};
}

Eigen::MatrixXd llpe_grad(const SpectralDecomposition& spectrum, const LlpeParams& params,
                          const Eigen::MatrixXd& upstream) {
    if (upstream.rows() != spectrum.eigenvectors.rows() || upstream.cols() != params.theta.cols()) {
        throw ParameterError("llpe_grad: upstream must be n x d");
    }
    const Eigen::MatrixXd b = cheb_basis_matrix(normalize_eigenvalues(spectrum.eigenvalues), params.order());
    return b.transpose() * (spectrum.eigenvectors.transpose() * upstream);
}

Penalty reg_penalty(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& basis, double l1, double l2) {
    Penalty out;
    out.grad = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
    if (l1 == 0.0 && l2 == 0.0) return out;
    const Eigen::MatrixXd w = basis * theta;
    out.value = l1 * w.cwiseAbs().sum() + l2 * w.squaredNorm();
    const Eigen::MatrixXd gw = l1 * w.unaryExpr([](double x) { return double((x > 0) - (x < 0)); }) + 2.0 * l2 * w;
    out.grad = basis.transpose() * gw;
    return out;
}

Penalty reg_penalty(const LlpeParams& params, const SpectralDecomposition& spectrum, double l1, double l2) {
    const Eigen::MatrixXd b = cheb_basis_matrix(normalize_eigenvalues(spectrum.eigenvalues), params.order());
    return reg_penalty(params.theta, b, l1, l2);
}

Eigen::MatrixXd rwse(const Graph& graph, int m) {
    require(m >= 1, "rwse needs m >= 1");
    const NodeId n = graph.num_nodes();
    const SparseMatrix walk = random_walk_matrix(graph);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, m);
    constexpr NodeId block = 256;
    Eigen::MatrixXd x, y;
    for (NodeId c0 = 0; c0 < n; c0 += block) {
        const NodeId width = std::min(block, n - c0);
        x = Eigen::MatrixXd::Zero(n, width);
        for (NodeId i = 0; i < width; ++i) x(c0 + i, i) = 1.0;
        for (int s = 0; s < m; ++s) {
            y.noalias() = walk * x;
            x.swap(y);
            for (NodeId i = 0; i < width; ++i) out(c0 + i, s) = x(c0 + i, i);
        }
    }
    return out;
}

SpectralDecomposition llpe_domain(const EncodingSpec& spec, const SpectralDecomposition& spectrum) {
    if (std::holds_alternative<Llpe>(spec)) {
        if (!spectrum.is_full()) throw ConfigurationError("Llpe needs the full spectrum");
        return spectrum;
    }
    if (const auto* s = std::get_if<LlpeLarge>(&spec)) {
        if (spectrum.is_full()) {
            if (2 * s->k > spectrum.size()) throw ConfigurationError("LlpeLarge: 2k exceeds the number of eigenpairs");
            return spectrum.extremal_view(s->k, s->k);
        }
        if (spectrum.first_k < s->k || spectrum.last_k < s->k) {
            throw ConfigurationError("LlpeLarge{k=" + std::to_string(s->k) + "} needs at least k first and k last pairs");
        }
        return spectrum.extremal_view(s->k, s->k);
    }
    throw ConfigurationError(encoding_name(spec) + " is not learnable");
}

PositionalEncoding build_encoding(const EncodingSpec& spec, const Graph& graph,
                                  const SpectralDecomposition* spectrum, const LlpeParams* params) {
    validate(spec);
    const Eigen::Index n = graph.num_nodes();
    auto need_spectrum = [&]() -> const SpectralDecomposition& {
        if (!spectrum) throw ConfigurationError(encoding_name(spec) + " needs a spectrum");
        if (spectrum->eigenvectors.rows() != n) throw ConfigurationError("spectrum size does not match the graph");
        return *spectrum;
    };
    auto first_nontrivial = [&](const SpectralDecomposition& s, int k) -> Eigen::MatrixXd {
        const Eigen::Index avail = s.is_full() ? s.size() : s.first_k;
        if (avail < k + 1) {
            throw ConfigurationError(encoding_name(spec) + " needs " + std::to_string(k + 1) +
                                     " smallest eigenpairs, spectrum has " + std::to_string(avail));
        }
        return s.eigenvectors.middleCols(1, k);
    };

    PositionalEncoding out;
    out.provenance = spec;
    if (std::holds_alternative<NoPE>(spec)) {
        out.matrix = Eigen::MatrixXd(n, 0);
    } else if (const auto* fk = std::get_if<LpeFK>(&spec)) {
        out.matrix = first_nontrivial(need_spectrum(), fk->k);
    } else if (const auto* flk = std::get_if<LpeFLK>(&spec)) {
        const auto& s = need_spectrum();
        const Eigen::Index last = s.is_full() ? s.size() - 1 - flk->k : s.last_k;
        if (last < flk->k) throw ConfigurationError(encoding_name(spec) + " needs k largest eigenpairs");
        out.matrix.resize(n, 2 * flk->k);
        out.matrix.leftCols(flk->k) = first_nontrivial(s, flk->k);
        out.matrix.rightCols(flk->k) = s.eigenvectors.rightCols(flk->k);
    } else if (std::holds_alternative<LpeFull>(spec)) {
        const auto& s = need_spectrum();
        if (!s.is_full()) throw ConfigurationError("LpeFull needs the full spectrum");
        out.matrix = s.eigenvectors;
    } else if (const auto* rw = std::get_if<Rwse>(&spec)) {
        out.matrix = rwse(graph, rw->m);
    } else {
        const LlpeShape shape = *llpe_shape(spec);
        const SpectralDecomposition domain = llpe_domain(spec, need_spectrum());
        LlpeParams zero;
        if (!params) {
            zero.theta = Eigen::MatrixXd::Zero(shape.order + 1, shape.width);
            params = &zero;
        }
        if (params->order() != shape.order || params->width() != shape.width) {
            throw ConfigurationError("LLPE parameters do not match " + encoding_name(spec));
        }
        out.matrix = llpe_forward(domain, *params).matrix;
    }
    return out;
}

void save_theta_csv(const LlpeParams& params, const std::filesystem::path& path) {
    csv::write_matrix(path, params.theta);
}

LlpeParams load_theta_csv(const std::filesystem::path& path) {
    LlpeParams p;
    p.theta = csv::read_matrix(path);
    if (p.theta.size() == 0) throw ParseError("empty coefficient file", 1);
    return p;
}

}  // namespace spe
