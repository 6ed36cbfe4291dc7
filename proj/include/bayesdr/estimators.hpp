#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "bayesdr/samplers.hpp"

namespace bayesdr {

/// Positivity guard for propensities: p1 is clipped to [delta, 1 - delta].
inline constexpr double kPropensityClip = 0.01;
/// Floor applied to the treatment density in the pseudo-outcome.
inline constexpr double kDensityFloor = 1e-4;

/// Binary-treatment nuisance values on the original rows. p0 is always
/// 1 - p1.
struct BinaryFittedValues {
  Eigen::VectorXd p1;
  Eigen::VectorXd m1;
  Eigen::VectorXd m0;
};

Eigen::VectorXd clip_propensity(const Eigen::VectorXd& p1, double delta = kPropensityClip);

/// Doubly robust ATE
///   (1/n) sum [T Y / p1 - (T - p1) m1 / p1] - (1/n) sum [(1 - T) Y / p0 + (T - p1) m0 / p0]
/// over the sample whose original row indices are `rows` (repeats allowed).
/// p1 is clipped before use.
double dr_binary(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const BinaryFittedValues& fv,
                 std::span<const std::size_t> rows);
double dr_binary(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const BinaryFittedValues& fv);

/// The DR formula with m1 = m0 = 0.
double ipw_binary(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const BinaryFittedValues& fv,
                  std::span<const std::size_t> rows);
double ipw_binary(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const BinaryFittedValues& fv);

/// g-computation: mean of m1 - m0.
double reg_binary(const BinaryFittedValues& fv, std::span<const std::size_t> rows);
double reg_binary(const BinaryFittedValues& fv);

/// Fitted values implied by one posterior draw of each model.
BinaryFittedValues binary_fitted_values(const PosteriorDraws& treatment, const PosteriorDraws& outcome,
                                        std::size_t draw);

/// density(i, k) = max(N(t_i; mu_k, sigma^2), floor)
Eigen::MatrixXd treatment_density_matrix(const Eigen::VectorXd& t, const Eigen::VectorXd& mu,
                                         double sigma, double floor = kDensityFloor);
/// mean(i, k) = m(t_i, X_k) under one outcome draw.
Eigen::MatrixXd outcome_mean_matrix(const PosteriorDraws& outcome, std::size_t draw,
                                    const Eigen::VectorXd& t);

/// Pseudo-outcome for every original row i:
///   xi_i = (y_i - mean(i,i)) / density(i,i) * avg_k density(i,k) + avg_k mean(i,k)
/// where avg_k is the empirical average over the sample described by
/// `weights` (row multiplicities summing to the sample size).
Eigen::VectorXd pseudo_outcome(const Eigen::VectorXd& y, const Eigen::MatrixXd& density,
                               const Eigen::MatrixXd& mean, const Eigen::VectorXd& weights);
Eigen::VectorXd pseudo_outcome(const Eigen::VectorXd& y, const Eigen::MatrixXd& density,
                               const Eigen::MatrixXd& mean);

/// Weighted least-squares cubic in t. The polynomial is built on t
/// centred and scaled by the full-sample moments for conditioning.
class CubicCurve {
 public:
  /// Throws RankDeficientDesign with fewer than 4 distinct weighted t values.
  CubicCurve(const Eigen::VectorXd& t, const Eigen::VectorXd& response, const Eigen::VectorXd& weights);
  CubicCurve(const Eigen::VectorXd& t, const Eigen::VectorXd& response);

  double operator()(double t) const;
  Eigen::VectorXd operator()(const Eigen::VectorXd& grid) const;
  /// Coefficients on (1, t, t^2, t^3) in the original t scale.
  Eigen::Vector4d raw_coefficients() const;

  double center() const { return center_; }
  double scale() const { return scale_; }

 private:
  double center_ = 0.0;
  double scale_ = 1.0;
  Eigen::Vector4d coef_ = Eigen::Vector4d::Zero();
};

/// Row (1, s, s^2, s^3) with s = (t - center) / scale.
Eigen::RowVector4d cubic_row(double t, double center, double scale);

/// OLS of response on (1, T, T^2, T^3) evaluated at grid. Grid points must
/// lie inside [min t, max t] (ConfigError otherwise).
Eigen::VectorXd fit_curve(const Eigen::VectorXd& response, const Eigen::VectorXd& t,
                          const Eigen::VectorXd& grid);
Eigen::VectorXd fit_curve(const Eigen::VectorXd& response, const Eigen::VectorXd& t,
                          const Eigen::VectorXd& grid, const Eigen::VectorXd& weights);

}  // namespace bayesdr
