#pragma once

#include <Eigen/Dense>

#include <functional>

namespace spe {

/// Maps x into [−1, 1]. Values outside by at most 1e−9 are clamped; larger
/// violations throw ParameterError.
double clamp_unit(double x);

/// (T_0(x), …, T_M(x)) by the three-term recurrence.
Eigen::VectorXd cheb_basis(double x, int order);

/// Row i holds cheb_basis(x_i, order).
Eigen::MatrixXd cheb_basis_matrix(const Eigen::VectorXd& x, int order);

/// Coefficients over T_0..T_M on [−1, 1].
struct ChebyshevSeries {
    Eigen::VectorXd coeffs;

    int order() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
    double eval(double x) const;
    Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
};

enum class FitMethod { quadrature, least_squares };

/// Fits f at order M. Quadrature uses 4(M+1) Chebyshev–Gauss nodes with the
/// halved constant term; least squares solves the normal equations on `grid`
/// (default: 4(M+1) equispaced points). Throws FittingError when the normal
/// matrix is numerically singular.
ChebyshevSeries cheb_fit(const std::function<double(double)>& f, int order, FitMethod method = FitMethod::quadrature,
                         const Eigen::VectorXd& grid = {});

/// Least-squares fit to samples (x_i, y_i).
ChebyshevSeries cheb_fit_samples(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int order);

/// T̃_m = T_m / 2^{m−1} for m ≥ 1, T̃_0 = 1.
double monic_cheb_eval(int m, double x);

/// sup over [−1, 1] of |T̃_m|: 1 for m = 0, 2^{1−m} otherwise.
double monic_infnorm(int m);

}  // namespace spe
