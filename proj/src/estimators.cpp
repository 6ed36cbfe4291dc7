#include "bayesdr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bayesdr/errors.hpp"

namespace bayesdr {

Eigen::VectorXd clip_propensity(const Eigen::VectorXd& p1, double delta) {
  return p1.cwiseMax(delta).cwiseMin(1.0 - delta);
}

namespace {

double dr_term(double t, double y, double p1, double m1, double m0) {
  p1 = std::clamp(p1, kPropensityClip, 1.0 - kPropensityClip);
  const double p0 = 1.0 - p1;
  const double treated = t * y / p1 - (t - p1) * m1 / p1;
  const double control = (1.0 - t) * y / p0 + (t - p1) * m0 / p0;
  return treated - control;
}

}  // namespace

double dr_binary(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const BinaryFittedValues& fv,
                 std::span<const std::size_t> rows) {
  double sum = 0.0;
  for (std::size_t r : rows) {
    const auto i = static_cast<Eigen::Index>(r);
    sum += dr_term(t[i], y[i], fv.p1[i], fv.m1[i], fv.m0[i]);
  }
  return sum / static_cast<double>(rows.size());
}

double dr_binary(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const BinaryFittedValues& fv) {
  const auto rows = identity_rows(static_cast<std::size_t>(t.size()));
  return dr_binary(t, y, fv, rows);
}

double ipw_binary(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const BinaryFittedValues& fv,
                  std::span<const std::size_t> rows) {
  double sum = 0.0;
  for (std::size_t r : rows) {
    const auto i = static_cast<Eigen::Index>(r);
    sum += dr_term(t[i], y[i], fv.p1[i], 0.0, 0.0);
  }
  return sum / static_cast<double>(rows.size());
}

double ipw_binary(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const BinaryFittedValues& fv) {
  const auto rows = identity_rows(static_cast<std::size_t>(t.size()));
  return ipw_binary(t, y, fv, rows);
}

double reg_binary(const BinaryFittedValues& fv, std::span<const std::size_t> rows) {
  double sum = 0.0;
  for (std::size_t r : rows) {
    const auto i = static_cast<Eigen::Index>(r);
    sum += fv.m1[i] - fv.m0[i];
  }
  return sum / static_cast<double>(rows.size());
}

double reg_binary(const BinaryFittedValues& fv) {
  const auto rows = identity_rows(static_cast<std::size_t>(fv.m1.size()));
  return reg_binary(fv, rows);
}

BinaryFittedValues binary_fitted_values(const PosteriorDraws& treatment, const PosteriorDraws& outcome,
                                        std::size_t draw) {
  const auto b = static_cast<Eigen::Index>(draw);
  const Eigen::Index n = outcome.n();
  BinaryFittedValues fv;
  if (treatment.response_kind != VariableKind::binary) {
    throw ConfigError("binary estimators need a binary treatment model");
  }
  fv.p1 = clip_propensity(treatment.fitted_prob.row(b).transpose());
  fv.m1.resize(n);
  fv.m0.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    fv.m1[i] = outcome.mean_at(draw, i, 1.0);
    fv.m0[i] = outcome.mean_at(draw, i, 0.0);
  }
  return fv;
}

Eigen::MatrixXd treatment_density_matrix(const Eigen::VectorXd& t, const Eigen::VectorXd& mu,
                                         double sigma, double floor) {
  const Eigen::Index n = t.size();
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  Eigen::MatrixXd out(n, mu.size());
  for (Eigen::Index k = 0; k < mu.size(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = t[i] - mu[k];
      out(i, k) = std::max(norm * std::exp(-d * d * inv_two_var), floor);
    }
  }
  return out;
}

Eigen::MatrixXd outcome_mean_matrix(const PosteriorDraws& outcome, std::size_t draw,
                                    const Eigen::VectorXd& t) {
  const auto b = static_cast<Eigen::Index>(draw);
  const Eigen::Index n = outcome.n();
  Eigen::MatrixXd out(t.size(), n);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double base = outcome.treatment.row(t[i]).dot(outcome.intercept_block.row(b));
    out.row(i) = (outcome.covariate_effect.row(b).array() + base).matrix();
  }
  if (outcome.response_kind == VariableKind::binary) {
    out = out.unaryExpr([](double eta) { return normal_cdf(eta); });
  }
  return out;
}

Eigen::VectorXd pseudo_outcome(const Eigen::VectorXd& y, const Eigen::MatrixXd& density,
                               const Eigen::MatrixXd& mean, const Eigen::VectorXd& weights) {
  const double total = weights.sum();
  const Eigen::VectorXd avg_density = density * weights / total;
  const Eigen::VectorXd avg_mean = mean * weights / total;
  Eigen::VectorXd xi(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    xi[i] = (y[i] - mean(i, i)) / density(i, i) * avg_density[i] + avg_mean[i];
  }
  return xi;
}

Eigen::VectorXd pseudo_outcome(const Eigen::VectorXd& y, const Eigen::MatrixXd& density,
                               const Eigen::MatrixXd& mean) {
  return pseudo_outcome(y, density, mean, Eigen::VectorXd::Ones(y.size()));
}

Eigen::RowVector4d cubic_row(double t, double center, double scale) {
  const double s = (t - center) / scale;
  return Eigen::RowVector4d(1.0, s, s * s, s * s * s);
}

CubicCurve::CubicCurve(const Eigen::VectorXd& t, const Eigen::VectorXd& response)
    : CubicCurve(t, response, Eigen::VectorXd::Ones(t.size())) {}

CubicCurve::CubicCurve(const Eigen::VectorXd& t, const Eigen::VectorXd& response,
                       const Eigen::VectorXd& weights) {
  std::set<double> distinct;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (weights[i] > 0.0) distinct.insert(t[i]);
    if (distinct.size() >= 4) break;
  }
  if (distinct.size() < 4) {
    throw RankDeficientDesign("cubic curve needs at least 4 distinct treatment values");
  }
  center_ = t.mean();
  scale_ = std::sqrt((t.array() - center_).square().mean());
  Eigen::MatrixXd design(t.size(), 4);
  for (Eigen::Index i = 0; i < t.size(); ++i) design.row(i) = cubic_row(t[i], center_, scale_);
  const Eigen::VectorXd sw = weights.cwiseSqrt();
  const Eigen::MatrixXd wd = sw.asDiagonal() * design;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(wd);
  if (qr.rank() < 4) throw RankDeficientDesign("cubic design is rank deficient");
  coef_ = qr.solve(sw.cwiseProduct(response));
}

double CubicCurve::operator()(double t) const { return cubic_row(t, center_, scale_).dot(coef_); }

Eigen::VectorXd CubicCurve::operator()(const Eigen::VectorXd& grid) const {
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index g = 0; g < grid.size(); ++g) out[g] = (*this)(grid[g]);
  return out;
}

Eigen::Vector4d CubicCurve::raw_coefficients() const {
  // Expand sum_k c_k ((t - a) / s)^k in powers of t.
  const double a = center_, s = scale_;
  const double c0 = coef_[0], c1 = coef_[1] / s, c2 = coef_[2] / (s * s), c3 = coef_[3] / (s * s * s);
  Eigen::Vector4d raw;
  raw[0] = c0 - c1 * a + c2 * a * a - c3 * a * a * a;
  raw[1] = c1 - 2.0 * c2 * a + 3.0 * c3 * a * a;
  raw[2] = c2 - 3.0 * c3 * a;
  raw[3] = c3;
  return raw;
}

Eigen::VectorXd fit_curve(const Eigen::VectorXd& response, const Eigen::VectorXd& t,
                          const Eigen::VectorXd& grid, const Eigen::VectorXd& weights) {
  const double lo = t.minCoeff(), hi = t.maxCoeff();
  for (double g : grid) {
    if (g < lo || g > hi) throw ConfigError("curve grid point outside the observed treatment range");
  }
  return CubicCurve(t, response, weights)(grid);
}

Eigen::VectorXd fit_curve(const Eigen::VectorXd& response, const Eigen::VectorXd& t,
                          const Eigen::VectorXd& grid) {
  return fit_curve(response, t, grid, Eigen::VectorXd::Ones(t.size()));
}

}  // namespace bayesdr
