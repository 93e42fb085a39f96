#include "spe/spectral.hpp"

#include "spe/csv.hpp"
#include "spe/errors.hpp"

#include <Eigen/Eigenvalues>
#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace spe {

SpectralDecomposition SpectralDecomposition::extremal_view(int k_small, int k_large) const {
    if (k_small < 0 || k_large < 0 || k_small + k_large > size()) {
        throw ParameterError("extremal_view: requested more pairs than stored");
    }
    SpectralDecomposition out;
    out.kind = DecompositionKind::extremal;
    out.first_k = k_small;
    out.last_k = k_large;
    out.n = n;
    const Eigen::Index total = k_small + k_large;
    out.eigenvalues.resize(total);
    out.eigenvectors.resize(eigenvectors.rows(), total);
    out.eigenvalues.head(k_small) = eigenvalues.head(k_small);
    out.eigenvalues.tail(k_large) = eigenvalues.tail(k_large);
    out.eigenvectors.leftCols(k_small) = eigenvectors.leftCols(k_small);
    out.eigenvectors.rightCols(k_large) = eigenvectors.rightCols(k_large);
    return out;
}

void apply_sign_convention(Eigen::MatrixXd& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
            const double x = vectors(r, c);
            if (std::abs(x) > 1e-12) {
                if (x < 0) vectors.col(c) *= -1.0;
                break;
            }
        }
    }
}

SpectralDecomposition full_eigh(const Eigen::MatrixXd& a, Eigen::Index dense_cap) {
    if (a.rows() != a.cols()) throw ParameterError("full_eigh: matrix must be square");
    const Eigen::Index n = a.rows();
    if (n > dense_cap) {
        throw CapacityError("full_eigh: n = " + std::to_string(n) + " exceeds dense cap " + std::to_string(dense_cap) +
                            "; use extremal_eigs");
    }
    SpectralDecomposition dec;
    dec.n = n;
    dec.kind = DecompositionKind::full;
    dec.eigenvectors = a;
    dec.eigenvalues.resize(n);
    if (n > 0) {
        const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', static_cast<lapack_int>(n),
                                               dec.eigenvectors.data(), static_cast<lapack_int>(n),
                                               dec.eigenvalues.data());
        if (info != 0) throw ConvergenceError("dsyevd failed with info " + std::to_string(info));
    }
    apply_sign_convention(dec.eigenvectors);
    return dec;
}

SpectralDecomposition full_eigh(const SparseMatrix& a, Eigen::Index dense_cap) {
    if (a.rows() > dense_cap) {
        throw CapacityError("full_eigh: n = " + std::to_string(a.rows()) + " exceeds dense cap " +
                            std::to_string(dense_cap) + "; use extremal_eigs");
    }
    return full_eigh(Eigen::MatrixXd(a), dense_cap);
}

namespace {

using Apply = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct EndResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    std::vector<double> residuals;
};

// h = Vᵀ x and x −= V h through BLAS; the Krylov basis is large enough that
// these two calls dominate the solve.
void gemv_t(const Eigen::Ref<const Eigen::MatrixXd>& v, const Eigen::VectorXd& x, Eigen::VectorXd& h) {
    h.resize(v.cols());
    cblas_dgemv(CblasColMajor, CblasTrans, static_cast<int>(v.rows()), static_cast<int>(v.cols()), 1.0, v.data(),
                static_cast<int>(v.outerStride()), x.data(), 1, 0.0, h.data(), 1);
}

void gemv_sub(const Eigen::Ref<const Eigen::MatrixXd>& v, const Eigen::VectorXd& h, Eigen::VectorXd& x) {
    cblas_dgemv(CblasColMajor, CblasNoTrans, static_cast<int>(v.rows()), static_cast<int>(v.cols()), -1.0, v.data(),
                static_cast<int>(v.outerStride()), h.data(), 1, 1.0, x.data(), 1);
}

// Removes the components of x along the columns of y and v. A second pass
// runs only when the first one cancelled most of x (DGKS criterion).
// Returns the accumulated coefficients along v.
Eigen::VectorXd project_out(Eigen::VectorXd& x, const Eigen::MatrixXd& y, const Eigen::Ref<const Eigen::MatrixXd>& v) {
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(v.cols());
    Eigen::VectorXd h;
    double before = x.norm();
    for (int pass = 0; pass < 2; ++pass) {
        if (y.cols() > 0) {
            gemv_t(y, x, h);
            gemv_sub(y, h, x);
        }
        if (v.cols() > 0) {
            gemv_t(v, x, h);
            gemv_sub(v, h, x);
            coef += h;
        }
        const double after = x.norm();
        if (after > 0.7071067811865476 * before) break;
        before = after;
    }
    return coef;
}

// Smallest `nev` eigenpairs of a symmetric operator restricted to the
// orthogonal complement of span(y).
EndResult lanczos_smallest(const Apply& op, Eigen::Index n, const Eigen::MatrixXd& y, int nev, const ExtremalOptions& opt,
                           std::mt19937_64& rng, SolverStats& stats) {
    EndResult res;
    if (nev <= 0) return res;
    const Eigen::Index n_eff = n - y.cols();
    if (nev > n_eff) throw ParameterError("extremal_eigs: not enough dimensions left after deflation");
    const int m_default = std::max(2 * nev + 16, 48);
    const int m = static_cast<int>(std::min<Eigen::Index>(opt.krylov_dim > 0 ? std::max(opt.krylov_dim, nev + 1) : m_default, n_eff));

    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_vector = [&](const Eigen::Ref<const Eigen::MatrixXd>& basis, Eigen::VectorXd& out) -> bool {
        for (int attempt = 0; attempt < 5; ++attempt) {
            for (Eigen::Index i = 0; i < n; ++i) out[i] = normal(rng);
            project_out(out, y, basis);
            const double norm = out.norm();
            if (norm > 1e-8 * std::sqrt(static_cast<double>(n))) {
                out /= norm;
                return true;
            }
        }
        return false;
    };

    Eigen::MatrixXd v(n, m + 1);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd w(n), x(n), r(n);
    stats.workspace_bytes = std::max(stats.workspace_bytes,
                                     sizeof(double) * static_cast<std::size_t>(n * (2 * m + 4) + m * m + n * y.cols()));
    {
        Eigen::VectorXd start(n);
        if (!random_vector(v.leftCols(0), start)) throw ConvergenceError("extremal_eigs: empty search space");
        v.col(0) = start;
    }

    int kept = 0;
    std::vector<double> best(static_cast<std::size_t>(nev), std::numeric_limits<double>::infinity());
    for (int cycle = 0; cycle <= opt.max_iter; ++cycle) {
        int m_eff = m;
        double beta_last = 0.0;
        for (int j = kept; j < m; ++j) {
            op(v.col(j), w);
            ++stats.matvecs;
            // Three-term step first so the full pass only removes rounding drift.
            const double alpha = v.col(j).dot(w);
            w -= alpha * v.col(j);
            const double beta_prev = j > kept ? beta_last : 0.0;
            if (j > kept) w -= beta_prev * v.col(j - 1);
            Eigen::VectorXd coef = project_out(w, y, v.leftCols(j + 1));
            coef[j] += alpha;
            if (j > kept) coef[j - 1] += beta_prev;
            t.block(0, j, j + 1, 1) = coef;
            t.block(j, 0, 1, j + 1) = coef.transpose();
            const double beta = w.norm();
            if (beta > 1e-10) {
                v.col(j + 1) = w / beta;
                beta_last = beta;
            } else {
                // Invariant subspace: continue in a fresh direction if one is left.
                beta_last = 0.0;
                if (j + 1 == m) break;
                Eigen::VectorXd fresh(n);
                if (!random_vector(v.leftCols(j + 1), fresh)) {
                    m_eff = j + 1;
                    break;
                }
                v.col(j + 1) = fresh;
            }
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(m_eff, m_eff));
        const Eigen::VectorXd& theta = es.eigenvalues();
        const Eigen::MatrixXd& s = es.eigenvectors();
        const int want = std::min(nev, m_eff);
        bool estimated = want == nev;
        for (int i = 0; i < want; ++i) {
            const double est = std::abs(beta_last * s(m_eff - 1, i));
            if (est > opt.tol) estimated = false;
        }

        if (estimated) {
            Eigen::MatrixXd vecs = v.leftCols(m_eff) * s.leftCols(nev);
            bool ok = true;
            for (int i = 0; i < nev; ++i) {
                x = vecs.col(i);
                op(x, r);
                ++stats.matvecs;
                r -= theta[i] * x;
                const double resid = r.norm();
                best[static_cast<std::size_t>(i)] = resid;
                if (resid > opt.tol) ok = false;
            }
            if (ok) {
                res.values = theta.head(nev);
                res.vectors = std::move(vecs);
                res.residuals = best;
                stats.restarts += cycle;
                return res;
            }
        } else {
            for (int i = 0; i < want; ++i) {
                best[static_cast<std::size_t>(i)] =
                    std::min(best[static_cast<std::size_t>(i)], std::abs(beta_last * s(m_eff - 1, i)));
            }
        }
        if (m_eff < m) {
            throw ConvergenceError("extremal_eigs: exhausted search space without convergence", best);
        }

        // Thick restart: keep the smallest p Ritz vectors plus the residual direction.
        const int p = std::min(nev + (m - nev) / 2, m - 1);
        Eigen::MatrixXd kept_vectors(n, p);
        cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(n), p, m, 1.0, v.data(),
                    static_cast<int>(n), s.data(), static_cast<int>(s.rows()), 0.0, kept_vectors.data(),
                    static_cast<int>(n));
        v.leftCols(p) = kept_vectors;
        v.col(p) = v.col(m);
        t.setZero();
        for (int i = 0; i < p; ++i) t(i, i) = theta[i];
        kept = p;
        if (beta_last == 0.0) {
            Eigen::VectorXd fresh(n);
            if (!random_vector(v.leftCols(p), fresh)) throw ConvergenceError("extremal_eigs: restart failed", best);
            v.col(p) = fresh;
        }
    }
    stats.restarts += opt.max_iter;
    throw ConvergenceError("extremal_eigs: no convergence within " + std::to_string(opt.max_iter) + " restarts", best);
}

Eigen::MatrixXd hstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(std::max(a.rows(), b.rows()), a.cols() + b.cols());
    if (a.cols()) out.leftCols(a.cols()) = a;
    if (b.cols()) out.rightCols(b.cols()) = b;
    return out;
}

}  // namespace

SpectralDecomposition extremal_eigs(const SparseMatrix& lap, int k_small, int k_large, const ExtremalOptions& options,
                                    SolverStats* stats_out) {
    const Eigen::Index n = lap.rows();
    if (lap.cols() != n) throw ParameterError("extremal_eigs: matrix must be square");
    if (k_small < 0 || k_large < 0 || k_small + k_large >= n) {
        throw ParameterError("extremal_eigs: need k_small + k_large < n");
    }
    if (!(options.tol > 0.0) || options.max_iter < 0) throw ParameterError("extremal_eigs: invalid tol or max_iter");
    for (const LockedPairs* lp : {&options.locked_small, &options.locked_large}) {
        if (lp->count() > 0 && (lp->vectors.rows() != n || lp->values.size() != lp->count())) {
            throw ParameterError("extremal_eigs: locked pairs have inconsistent shape");
        }
    }

    SolverStats stats;
    std::mt19937_64 rng(options.seed);

    // Small end on L.
    const int lock_s = static_cast<int>(std::min<Eigen::Index>(options.locked_small.count(), k_small));
    const Apply apply_l = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = lap * x; };
    EndResult small = lanczos_smallest(apply_l, n, options.locked_small.vectors, k_small - lock_s, options, rng, stats);

    Eigen::MatrixXd small_vectors =
        hstack(options.locked_small.vectors.leftCols(lock_s), small.vectors.cols() ? small.vectors : Eigen::MatrixXd(n, 0));
    Eigen::VectorXd small_values(k_small);
    small_values.head(lock_s) = options.locked_small.values.head(lock_s);
    small_values.tail(k_small - lock_s) = small.values;

    // Large end as the small end of 2I − L, kept orthogonal to everything found so far.
    const int lock_l = static_cast<int>(std::min<Eigen::Index>(options.locked_large.count(), k_large));
    const Apply apply_flip = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        y.noalias() = lap * x;
        y = 2.0 * x - y;
    };
    const Eigen::MatrixXd large_lock =
        hstack(hstack(options.locked_large.vectors, options.locked_small.vectors),
               small.vectors.cols() ? small.vectors : Eigen::MatrixXd(n, 0));
    EndResult large = lanczos_smallest(apply_flip, n, large_lock, k_large - lock_l, options, rng, stats);

    SpectralDecomposition dec;
    dec.kind = DecompositionKind::extremal;
    dec.first_k = k_small;
    dec.last_k = k_large;
    dec.n = n;
    dec.eigenvalues.resize(k_small + k_large);
    dec.eigenvectors.resize(n, k_small + k_large);
    dec.eigenvalues.head(k_small) = small_values;
    dec.eigenvectors.leftCols(k_small) = small_vectors;
    // Large pairs in ascending order of λ = 2 − θ, then the locked λ = 2 block.
    const int found = k_large - lock_l;
    for (int i = 0; i < found; ++i) {
        const int src = found - 1 - i;
        dec.eigenvalues[k_small + i] = 2.0 - large.values[src];
        dec.eigenvectors.col(k_small + i) = large.vectors.col(src);
    }
    for (int i = 0; i < lock_l; ++i) {
        dec.eigenvalues[k_small + found + i] = options.locked_large.values[i];
        dec.eigenvectors.col(k_small + found + i) = options.locked_large.vectors.col(i);
    }
    apply_sign_convention(dec.eigenvectors);

    stats.max_residual = 0.0;
    for (double r : small.residuals) stats.max_residual = std::max(stats.max_residual, r);
    for (double r : large.residuals) stats.max_residual = std::max(stats.max_residual, r);
    if (stats_out) *stats_out = stats;
    return dec;
}

SpectralDecomposition extremal_eigs(const SparseMatrix& lap, int k_small, int k_large, double tol, int max_iter,
                                    std::uint64_t seed, SolverStats* stats) {
    ExtremalOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    opt.seed = seed;
    return extremal_eigs(lap, k_small, k_large, opt, stats);
}

ExactSubspaces exact_subspaces(const Graph& graph) {
    const NodeId n = graph.num_nodes();
    NodeId ncomp = 0;
    const std::vector<NodeId> comp = graph.components(&ncomp);

    std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(ncomp));
    for (NodeId u = 0; u < n; ++u) members[comp[u]].push_back(u);
    std::vector<NodeId> order(static_cast<std::size_t>(ncomp));
    std::iota(order.begin(), order.end(), 0);
    // Components are numbered by smallest node, so a stable sort breaks size ties by it.
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return members[a].size() > members[b].size(); });

    std::vector<double> sqrt_deg(static_cast<std::size_t>(n));
    for (NodeId u = 0; u < n; ++u) sqrt_deg[u] = std::sqrt(static_cast<double>(graph.degree(u)));

    ExactSubspaces out;
    std::vector<Eigen::VectorXd> basis;
    Eigen::VectorXd global(n);
    for (NodeId u = 0; u < n; ++u) global[u] = sqrt_deg[u];
    if (global.norm() > 0) basis.push_back(global / global.norm());

    for (NodeId c : order) {
        Eigen::VectorXd ind = Eigen::VectorXd::Zero(n);
        const auto& mem = members[c];
        if (mem.size() == 1 && graph.degree(mem[0]) == 0) {
            ind[mem[0]] = 1.0;
        } else {
            for (NodeId u : mem) ind[u] = sqrt_deg[u];
        }
        ind /= ind.norm();
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) ind -= b.dot(ind) * b;
        }
        const double norm = ind.norm();
        if (norm > 1e-8) basis.push_back(ind / norm);
    }
    out.kernel.vectors.resize(n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) out.kernel.vectors.col(static_cast<Eigen::Index>(i)) = basis[i];
    out.kernel.values = Eigen::VectorXd::Zero(out.kernel.vectors.cols());
    apply_sign_convention(out.kernel.vectors);

    // Two-colour each component with an edge; bipartite ones contribute to λ = 2.
    std::vector<int> side(static_cast<std::size_t>(n), -1);
    std::vector<Eigen::VectorXd> top;
    std::vector<NodeId> stack;
    for (NodeId c : order) {
        const auto& mem = members[c];
        if (mem.size() < 2) continue;
        bool bipartite = true;
        side[mem[0]] = 0;
        stack.assign(1, mem[0]);
        while (!stack.empty() && bipartite) {
            const NodeId u = stack.back();
            stack.pop_back();
            for (NodeId v : graph.neighbors(u)) {
                if (side[v] < 0) {
                    side[v] = 1 - side[u];
                    stack.push_back(v);
                } else if (side[v] == side[u]) {
                    bipartite = false;
                    break;
                }
            }
        }
        if (!bipartite) continue;
        Eigen::VectorXd vec = Eigen::VectorXd::Zero(n);
        for (NodeId u : mem) vec[u] = side[u] == side[mem[0]] ? sqrt_deg[u] : -sqrt_deg[u];
        top.push_back(vec / vec.norm());
    }
    out.top.vectors.resize(n, static_cast<Eigen::Index>(top.size()));
    for (std::size_t i = 0; i < top.size(); ++i) out.top.vectors.col(static_cast<Eigen::Index>(i)) = top[i];
    out.top.values = Eigen::VectorXd::Constant(out.top.vectors.cols(), 2.0);
    return out;
}

SpectralDecomposition laplacian_spectrum(const Graph& graph, const SpectrumRequest& request, SolverStats* stats) {
    const SparseMatrix lap = normalized_laplacian(graph);
    ExactSubspaces exact = exact_subspaces(graph);
    if (request.full) {
        SpectralDecomposition dec = full_eigh(lap, request.dense_cap);
        const Eigen::Index c = exact.kernel.count();
        const Eigen::Index b = exact.top.count();
        if (c > 0) {
            dec.eigenvectors.leftCols(c) = exact.kernel.vectors;
            dec.eigenvalues.head(c).setZero();
        }
        if (b > 0) {
            dec.eigenvectors.rightCols(b) = exact.top.vectors;
            dec.eigenvalues.tail(b).setConstant(2.0);
        }
        return dec;
    }
    ExtremalOptions opt;
    opt.tol = request.tol;
    opt.max_iter = request.max_iter;
    opt.seed = request.seed;
    opt.locked_small = std::move(exact.kernel);
    opt.locked_large = std::move(exact.top);
    return extremal_eigs(lap, request.k_small, request.k_large, opt, stats);
}

Eigen::VectorXd normalize_eigenvalues(const Eigen::VectorXd& eigenvalues) {
    return (eigenvalues.array() - 1.0).cwiseMax(-1.0).cwiseMin(1.0).matrix();
}

LinearOperator as_operator(const SparseMatrix& a) {
    return {a.rows(), [&a](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = a * x; }};
}

LinearOperator as_operator(const Eigen::MatrixXd& a) {
    return {a.rows(), [&a](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = a * x; }};
}

double operator_norm(const LinearOperator& a, double tol, std::uint64_t seed, int max_iter) {
    if (a.dim == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd x(a.dim), y(a.dim);
    for (Eigen::Index i = 0; i < a.dim; ++i) x[i] = normal(rng);
    x.normalize();
    // ‖A x_k‖ is non-decreasing and converges to max |λ| (power iteration on A²).
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        a.apply(x, y);
        const double norm = y.norm();
        if (!std::isfinite(norm)) throw ConvergenceError("operator_norm: non-finite iterate");
        if (norm == 0.0) return 0.0;
        if (it > 0 && std::abs(norm - estimate) <= tol * norm) return norm;
        estimate = norm;
        x = y / norm;
    }
    throw ConvergenceError("operator_norm: no convergence within " + std::to_string(max_iter) + " iterations",
                           {estimate});
}

DecompositionCheck check_decomposition(const SparseMatrix& lap, const SpectralDecomposition& dec) {
    DecompositionCheck chk;
    const Eigen::Index k = dec.size();
    if (k == 0) return chk;
    const Eigen::MatrixXd lu = lap * dec.eigenvectors;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double r = (lu.col(i) - dec.eigenvalues[i] * dec.eigenvectors.col(i)).norm();
        chk.max_residual = std::max(chk.max_residual, r);
        chk.max_scaled_residual = std::max(chk.max_scaled_residual, r / (1.0 + std::abs(dec.eigenvalues[i])));
    }
    const Eigen::MatrixXd gram = dec.eigenvectors.transpose() * dec.eigenvectors;
    chk.orthogonality = (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 1; i < k; ++i) {
        if (dec.eigenvalues[i] < dec.eigenvalues[i - 1]) chk.sorted = false;
    }
    chk.min_eigenvalue = dec.eigenvalues.minCoeff();
    chk.max_eigenvalue = dec.eigenvalues.maxCoeff();
    return chk;
}

double subspace_sin_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ParameterError("subspace_sin_angle: shape mismatch");
    if (a.cols() == 0) return 0.0;
    const Eigen::MatrixXd resid = b - a * (a.transpose() * b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(resid.transpose() * resid, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

void write_decomposition_csv(const SpectralDecomposition& dec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (Eigen::Index i = 0; i < dec.size(); ++i) {
        if (i) out << ',';
        out << csv::format_double(dec.eigenvalues[i]);
    }
    out << '\n';
    for (Eigen::Index r = 0; r < dec.eigenvectors.rows(); ++r) {
        for (Eigen::Index c = 0; c < dec.eigenvectors.cols(); ++c) {
            if (c) out << ',';
            out << csv::format_double(dec.eigenvectors(r, c));
        }
        out << '\n';
    }
}

}  // namespace spe
