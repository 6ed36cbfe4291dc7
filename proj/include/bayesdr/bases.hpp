#pragma once

#include <Eigen/Dense>
#include <vector>

namespace bayesdr {

/// Centred B-spline design for one covariate.
struct SplineBasis {
  Eigen::MatrixXd basis;             ///< n x df, columns centred to mean 0
  Eigen::RowVectorXd column_means;   ///< means removed from the raw columns
  std::vector<double> interior_knots;
  double lower = 0.0;
  double upper = 1.0;
  int degree = 3;
  int df = 3;

  /// Evaluates the same (centred) basis at new points.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
};

/// B-spline basis with `df` columns: degree min(3, df), df - degree interior
/// knots at equispaced quantiles of x, boundary knots at the range of x,
/// first function dropped and columns centred.
SplineBasis spline_basis(const Eigen::VectorXd& x, int df);

/// Full B-spline basis (every function, uncentred) for a clamped knot vector
/// built from `interior` and the boundaries, evaluated with de Boor's
/// triangular recurrence.
Eigen::MatrixXd bspline_raw(const Eigen::VectorXd& x, const std::vector<double>& interior,
                            double lower, double upper, int degree);

/// Type-7 sample quantile.
double quantile(std::vector<double> values, double prob);

inline constexpr double kEigenvalueFloor = 1e-12;

/// Exponential kernel matrix K(z, z') = exp(-|z - z'| / phi) over one
/// covariate, with its eigendecomposition (eigenvalues descending).
struct GpKernel {
  Eigen::MatrixXd sigma;
  double phi = 1.0;
  Eigen::MatrixXd eigenvectors;
  Eigen::VectorXd eigenvalues;

  /// Eigenvalues with the near-singularity floor applied.
  Eigen::VectorXd floored_eigenvalues() const {
    return eigenvalues.cwiseMax(kEigenvalueFloor);
  }
};

/// Throws NonPositiveBandwidth when phi <= 0.
GpKernel gp_kernel(const Eigen::VectorXd& x, double phi);

/// (I + Sigma^{-1} / tau2)^{-1} via the stored eigendecomposition:
/// A (I + B^{-1} / tau2)^{-1} A^T.
Eigen::MatrixXd woodbury_inverse(const GpKernel& kernel, double tau2);

}  // namespace bayesdr
