#include "spe/chebyshev.hpp"

#include "spe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace spe {

double clamp_unit(double x) {
    if (!(std::abs(x) <= 1.0 + 1e-9)) {
        throw ParameterError("Chebyshev argument " + std::to_string(x) + " outside [-1, 1]");
    }
    return std::clamp(x, -1.0, 1.0);
}

Eigen::VectorXd cheb_basis(double x, int order) {
    if (order < 0) throw ParameterError("Chebyshev order must be non-negative");
    x = clamp_unit(x);
    Eigen::VectorXd t(order + 1);
    t[0] = 1.0;
    if (order >= 1) t[1] = x;
    for (int m = 1; m < order; ++m) t[m + 1] = 2.0 * x * t[m] - t[m - 1];
    return t;
}

Eigen::MatrixXd cheb_basis_matrix(const Eigen::VectorXd& x, int order) {
    if (order < 0) throw ParameterError("Chebyshev order must be non-negative");
    Eigen::MatrixXd b(x.size(), order + 1);
    for (Eigen::Index i = 0; i < x.size(); ++i) b.row(i) = cheb_basis(x[i], order).transpose();
    return b;
}

double ChebyshevSeries::eval(double x) const {
    if (coeffs.size() == 0) return 0.0;
    return cheb_basis(x, order()).dot(coeffs);
}

Eigen::VectorXd ChebyshevSeries::eval(const Eigen::VectorXd& x) const {
    if (coeffs.size() == 0) return Eigen::VectorXd::Zero(x.size());
    return cheb_basis_matrix(x, order()) * coeffs;
}

ChebyshevSeries cheb_fit_samples(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int order) {
    if (order < 0) throw ParameterError("Chebyshev order must be non-negative");
    if (x.size() != y.size()) throw ParameterError("cheb_fit: sample sizes differ");
    const Eigen::MatrixXd b = cheb_basis_matrix(x, order);
    const Eigen::MatrixXd gram = b.transpose() * b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (!(top > 0.0) || es.eigenvalues().minCoeff() <= 1e-12 * top) {
        throw FittingError("cheb_fit: normal equations are rank deficient (" + std::to_string(x.size()) +
                           " samples for order " + std::to_string(order) + ")");
    }
    ChebyshevSeries s;
    s.coeffs = gram.ldlt().solve(b.transpose() * y);
    if (!s.coeffs.allFinite()) throw FittingError("cheb_fit: non-finite coefficients");
    return s;
}

ChebyshevSeries cheb_fit(const std::function<double(double)>& f, int order, FitMethod method,
                         const Eigen::VectorXd& grid) {
    if (order < 0) throw ParameterError("Chebyshev order must be non-negative");
    const int nodes = 4 * (order + 1);
    if (method == FitMethod::least_squares) {
        Eigen::VectorXd x = grid;
        if (x.size() == 0) x = Eigen::VectorXd::LinSpaced(nodes, -1.0, 1.0);
        Eigen::VectorXd y(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = f(x[i]);
        return cheb_fit_samples(x, y, order);
    }
    ChebyshevSeries s;
    s.coeffs = Eigen::VectorXd::Zero(order + 1);
    for (int k = 0; k < nodes; ++k) {
        const double x = std::cos(std::numbers::pi * (k + 0.5) / nodes);
        const double fx = f(x);
        if (!std::isfinite(fx)) throw FittingError("cheb_fit: target is not finite at a quadrature node");
        s.coeffs += fx * cheb_basis(x, order);
    }
    s.coeffs *= 2.0 / nodes;
    s.coeffs[0] *= 0.5;
    return s;
}

double monic_cheb_eval(int m, double x) {
    if (m < 0) throw ParameterError("monic Chebyshev degree must be non-negative");
    if (m == 0) return 1.0;
    return cheb_basis(x, m)[m] / std::ldexp(1.0, m - 1);
}

double monic_infnorm(int m) {
    if (m < 0) throw ParameterError("monic Chebyshev degree must be non-negative");
    return m == 0 ? 1.0 : std::ldexp(1.0, 1 - m);
}

}  // namespace spe
