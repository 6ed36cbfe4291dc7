#include "bayesdr/bases.hpp"

#include <algorithm>
#include <cmath>

#include "bayesdr/errors.hpp"

namespace bayesdr {

double quantile(std::vector<double> values, double prob) {
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Eigen::MatrixXd bspline_raw(const Eigen::VectorXd& x, const std::vector<double>& interior,
                            double lower, double upper, int degree) {
  std::vector<double> knots(static_cast<std::size_t>(degree + 1), lower);
  knots.insert(knots.end(), interior.begin(), interior.end());
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), upper);
  const int n_basis = static_cast<int>(interior.size()) + degree + 1;
  // Last span with a nonzero width; x == upper is evaluated there.
  const int last_span = n_basis - 1;

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.size(), n_basis);
  std::vector<double> left(static_cast<std::size_t>(degree + 1));
  std::vector<double> right(static_cast<std::size_t>(degree + 1));
  std::vector<double> values(static_cast<std::size_t>(degree + 1));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x[i];
    int span = degree;
    if (v >= upper) {
      span = last_span;
    } else {
      while (span < last_span && knots[static_cast<std::size_t>(span + 1)] <= v) ++span;
    }
    values[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      left[ju] = v - knots[static_cast<std::size_t>(span + 1 - j)];
      right[ju] = knots[static_cast<std::size_t>(span + j)] - v;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const auto ru = static_cast<std::size_t>(r);
        const double temp = values[ru] / (right[ru + 1] + left[ju - ru]);
        values[ru] = saved + right[ru + 1] * temp;
        saved = left[ju - ru] * temp;
      }
      values[ju] = saved;
    }
    for (int r = 0; r <= degree; ++r) out(i, span - degree + r) = values[static_cast<std::size_t>(r)];
  }
  return out;
}

SplineBasis spline_basis(const Eigen::VectorXd& x, int df) {
  if (df < 1) throw ConfigError("spline df must be >= 1");
  if (x.size() < 2) throw DataError("spline basis needs at least two points");
  SplineBasis sb;
  sb.df = df;
  sb.degree = std::min(3, df);
  sb.lower = x.minCoeff();
  sb.upper = x.maxCoeff();
  if (!(sb.upper > sb.lower)) throw ZeroVarianceColumn(0);
  const int n_interior = df - sb.degree;
  std::vector<double> xs(x.data(), x.data() + x.size());
  for (int k = 1; k <= n_interior; ++k) {
    sb.interior_knots.push_back(quantile(xs, static_cast<double>(k) / (n_interior + 1)));
  }
  const Eigen::MatrixXd full = bspline_raw(x, sb.interior_knots, sb.lower, sb.upper, sb.degree);
  Eigen::MatrixXd raw = full.rightCols(df);
  sb.column_means = raw.colwise().mean();
  sb.basis = raw.rowwise() - sb.column_means;
  return sb;
}

Eigen::MatrixXd SplineBasis::evaluate(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd clamped = x.cwiseMax(lower).cwiseMin(upper);
  Eigen::MatrixXd raw = bspline_raw(clamped, interior_knots, lower, upper, degree).rightCols(df);
  return raw.rowwise() - column_means;
}

GpKernel gp_kernel(const Eigen::VectorXd& x, double phi) {
  if (!(phi > 0.0)) throw NonPositiveBandwidth(phi);
  const Eigen::Index n = x.size();
  GpKernel k;
  k.phi = phi;
  k.sigma.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k.sigma(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = std::exp(-std::abs(x[i] - x[j]) / phi);
      k.sigma(i, j) = v;
      k.sigma(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k.sigma);
  if (solver.info() != Eigen::Success) throw NumericError("kernel eigendecomposition failed");
  // Eigen returns ascending order; store descending.
  k.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
  k.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return k;
}

Eigen::MatrixXd woodbury_inverse(const GpKernel& kernel, double tau2) {
  if (!(tau2 > 0.0)) throw ConfigError("tau2 must be positive");
  const Eigen::VectorXd b = kernel.floored_eigenvalues();
  const Eigen::VectorXd shrink = (1.0 + (1.0 / b.array()) / tau2).inverse();
  Eigen::MatrixXd out = kernel.eigenvectors * shrink.asDiagonal() * kernel.eigenvectors.transpose();
  // Exact symmetry.
  return 0.5 * (out + out.transpose());
}

}  // namespace bayesdr
