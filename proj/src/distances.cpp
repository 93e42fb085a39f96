#include "spe/distances.hpp"

#include "spe/errors.hpp"

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

}  // namespace

std::string kernel_name(const SpectralKernel& kernel) {
    return std::visit(overloaded{
                          [](const Commute&) { return std::string("commute"); },
                          [](const Diffusion& k) { return "diffusion(t=" + std::to_string(k.t) + ")"; },
                          [](const Biharmonic&) { return std::string("biharmonic"); },
                          [](const HighPass& k) { return "highpass(t=" + std::to_string(k.t) + ")"; },
                          [](const Custom& k) { return "custom(M=" + std::to_string(k.series.order()) + ")"; },
                      },
                      kernel);
}

bool is_singular(const SpectralKernel& kernel) {
    return std::holds_alternative<Commute>(kernel) || std::holds_alternative<Biharmonic>(kernel);
}

double kernel_value(const SpectralKernel& kernel, double lambda) {
    if (is_singular(kernel) && !(lambda > 0.0)) throw KernelError(kernel_name(kernel) + " is singular at 0");
    return std::visit(overloaded{
                          [&](const Commute&) { return 1.0 / (lambda * lambda); },
                          [&](const Diffusion& k) { return std::exp(-2.0 * k.t * lambda); },
                          [&](const Biharmonic&) { return 1.0 / lambda; },
                          [&](const HighPass& k) { return std::exp(-2.0 * k.t * (2.0 - lambda)); },
                          [&](const Custom& k) { return k.series.eval(clamp_unit(lambda - 1.0)); },
                      },
                      kernel);
}

namespace {

// r at every stored eigenvalue; 0 where a singular kernel is skipped.
Eigen::VectorXd kernel_weights(const SpectralDecomposition& spectrum, const SpectralKernel& kernel,
                               double lambda_floor) {
    if (const auto* d = std::get_if<Diffusion>(&kernel); d && !(d->t > 0)) throw KernelError("diffusion needs t > 0");
    if (const auto* h = std::get_if<HighPass>(&kernel); h && !(h->t > 0)) throw KernelError("highpass needs t > 0");
    Eigen::VectorXd r(spectrum.size());
    for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
        const double lam = spectrum.eigenvalues[k];
        if (is_singular(kernel) && lam <= lambda_floor) {
            r[k] = 0.0;
            continue;
        }
        double v = kernel_value(kernel, lam);
        if (!std::isfinite(v) || v < -1e-12) {
            throw KernelError(kernel_name(kernel) + " is negative or non-finite at lambda = " + std::to_string(lam));
        }
        r[k] = std::max(v, 0.0);
    }
    return r;
}

}  // namespace

DistanceMatrix spectral_distance_matrix(const SpectralDecomposition& spectrum, const SpectralKernel& kernel,
                                        double lambda_floor) {
    const Eigen::VectorXd r = kernel_weights(spectrum, kernel, lambda_floor);
    const Eigen::MatrixXd scaled = spectrum.eigenvectors * r.cwiseSqrt().asDiagonal();
    const Eigen::MatrixXd gram = scaled * scaled.transpose();
    const Eigen::Index n = gram.rows();
    DistanceMatrix out;
    out.kernel = kernel;
    out.approximate = !spectrum.is_full();
    out.values = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double sq = std::max(0.0, gram(i, i) + gram(j, j) - 2.0 * gram(i, j));
            out.values(i, j) = out.values(j, i) = std::sqrt(sq);
        }
    }
    return out;
}

LlpeParams bump_llpe_construct(const SpectralDecomposition& spectrum, const SpectralKernel& kernel, double c_max,
                               int order, std::vector<std::string>* warnings) {
    if (!spectrum.is_full()) throw ConfigurationError("bump construction needs the full spectrum");
    if (spectrum.size() > 50) throw ParameterError("bump construction is limited to n <= 50");
    if (!(c_max > 0)) throw ParameterError("C_max must be positive");
    const Eigen::VectorXd r = kernel_weights(spectrum, kernel, kLambdaFloor);
    const Eigen::VectorXd lt = normalize_eigenvalues(spectrum.eigenvalues);
    const double min_gap = 3.0 / std::sqrt(c_max);
    if (warnings) {
        for (Eigen::Index k = 1; k < lt.size(); ++k) {
            const double gap = lt[k] - lt[k - 1];
            if (gap < min_gap) {
                warnings->push_back("normalized eigenvalues " + std::to_string(k - 1) + " and " + std::to_string(k) +
                                    " are " + std::to_string(gap) + " apart, below 3/sqrt(C_max) = " +
                                    std::to_string(min_gap));
            }
        }
    }
    LlpeParams p;
    p.theta = Eigen::MatrixXd::Zero(order + 1, spectrum.size());
    for (Eigen::Index j = 0; j < spectrum.size(); ++j) {
        if (r[j] == 0.0) continue;
        const double amp = std::sqrt(r[j]);
        const double center = lt[j];
        p.theta.col(j) =
            cheb_fit([&](double x) { return amp * std::exp(-c_max * (x - center) * (x - center)); }, order).coeffs;
    }
    return p;
}

double squared_distance_error(const Eigen::MatrixXd& encoding, const DistanceMatrix& distance) {
    const Eigen::Index n = encoding.rows();
    if (distance.values.rows() != n) throw ParameterError("squared_distance_error: size mismatch");
    double worst = 0.0, scale = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double want = distance.values(i, j) * distance.values(i, j);
            const double got = (encoding.row(i) - encoding.row(j)).squaredNorm();
            worst = std::max(worst, std::abs(got - want));
            scale = std::max(scale, want);
        }
    }
    return scale > 0 ? worst / scale : worst;
}

CommuteEstimate commute_mc_oracle(const Graph& graph, NodeId i, NodeId j, int trials, long long max_steps,
                                  std::uint64_t seed) {
    const NodeId n = graph.num_nodes();
    if (i < 0 || j < 0 || i >= n || j >= n) throw ParameterError("commute_mc_oracle: node out of range");
    if (i == j) throw ParameterError("commute_mc_oracle: needs i != j");
    if (trials < 1 || max_steps < 1) throw ParameterError("commute_mc_oracle: trials and max_steps must be positive");
    const std::vector<NodeId> comp = graph.components();
    if (comp[i] != comp[j]) throw ReachabilityError("nodes " + std::to_string(i) + " and " + std::to_string(j) +
                                                    " are in different components");
    std::mt19937_64 rng(seed);
    auto leg = [&](NodeId from, NodeId to) -> long long {
        long long steps = 0;
        NodeId at = from;
        while (at != to) {
            if (steps >= max_steps) return -1;
            const auto nb = graph.neighbors(at);
            std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
            at = nb[pick(rng)];
            ++steps;
        }
        return steps;
    };
    CommuteEstimate out;
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        const long long a = leg(i, j);
        const long long b = a < 0 ? -1 : leg(j, i);
        if (a < 0 || b < 0) {
            ++out.truncated;
            continue;
        }
        const double total = static_cast<double>(a + b);
        sum += total;
        sum_sq += total * total;
        ++out.completed;
    }
    if (out.completed > 0) {
        out.mean = sum / out.completed;
        if (out.completed > 1) {
            const double var = std::max(0.0, (sum_sq - out.completed * out.mean * out.mean) / (out.completed - 1));
            out.std_error = std::sqrt(var / out.completed);
        }
    }
    return out;
}

}  // namespace spe
