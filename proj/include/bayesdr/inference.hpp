#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bayesdr/dataset.hpp"
#include "bayesdr/rng.hpp"
#include "bayesdr/samplers.hpp"

namespace bayesdr {

/// Default number of bootstrap datasets.
inline constexpr std::size_t kDefaultBootstrap = 100;
/// Attempts per bootstrap row before giving up on a one-arm resample.
inline constexpr int kMaxResampleAttempts = 100;

/// Estimator evaluated on the resample `rows` (original row indices, with
/// repeats) under posterior draw `draw`.
using CellEstimator = std::function<double(std::span<const std::size_t> rows, std::size_t draw)>;
/// Returns false for resamples the estimator cannot use.
using RowFilter = std::function<bool(std::span<const std::size_t> rows)>;

/// M x B matrix of estimator values; cell (m, b) uses bootstrap row m and
/// posterior draw b.
struct DeltaMatrix {
  Eigen::MatrixXd values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

struct VarianceEstimate {
  double var_outer = 0.0;  ///< sample variance of the row means
  double var_inner = 0.0;  ///< mean of the row variances
  double total() const { return var_outer + var_inner; }
};

struct EstimateReport {
  std::string estimand;
  double point = 0.0;
  double var_outer = 0.0;
  double var_inner = 0.0;
  double var_total = 0.0;
  std::pair<double, double> ci{0.0, 0.0};
  double level = 0.95;
  std::size_t M = 0;
  std::size_t B = 0;
  std::uint64_t seed = 0;
  double correction_share = 0.0;  ///< var_inner / var_total
  bool degenerate = false;        ///< var_total == 0

  double se() const;
  double se_outer() const;
};

/// (1/B) sum_b estimator(all rows, b).
double point_estimate(const CellEstimator& estimator, std::size_t n, std::size_t draws);

/// M resamples of [0, n). Row m is drawn from stream.child(m); rows the
/// filter rejects are redrawn from the same stream up to
/// kMaxResampleAttempts times.
std::vector<std::vector<std::size_t>> bootstrap_rows(std::size_t n, std::size_t M, RngStream stream,
                                                     const RowFilter& accept = {});

/// True when the resample contains both treatment arms.
RowFilter both_arms_filter(const Eigen::VectorXd& t);

DeltaMatrix build_delta_matrix(const CellEstimator& estimator,
                               const std::vector<std::vector<std::size_t>>& rows, std::size_t draws,
                               std::size_t threads = 1);
DeltaMatrix build_delta_matrix(const CellEstimator& estimator, std::size_t n, std::size_t draws,
                               std::size_t M, RngStream stream, std::size_t threads = 1,
                               const RowFilter& accept = {});

/// Throws TooFewRows when M < 2, TooFewCols when B < 2.
VarianceEstimate variance_estimate(const Eigen::MatrixXd& values);
inline VarianceEstimate variance_estimate(const DeltaMatrix& dm) { return variance_estimate(dm.values); }

/// point -/+ z_{(1+level)/2} sqrt(var_total).
std::pair<double, double> confidence_interval(double point, double var_total, double level);

EstimateReport summarize(std::string estimand, double point, const Eigen::MatrixXd& values,
                         double level, std::uint64_t seed);

enum class BinaryEstimand { dr, ipw, reg };
const char* to_string(BinaryEstimand e);

/// Per-draw fitted values for binary treatment (each B x n, p1 clipped).
struct BinaryDraws {
  Eigen::MatrixXd p1;
  Eigen::MatrixXd m1;
  Eigen::MatrixXd m0;

  std::size_t draws() const { return static_cast<std::size_t>(p1.rows()); }
};

BinaryDraws binary_draws(const PosteriorDraws& treatment, const PosteriorDraws& outcome);

CellEstimator binary_estimator(const Dataset& data, const BinaryDraws& draws, BinaryEstimand which);

EstimateReport estimate_ate(const Dataset& data, const BinaryDraws& draws, BinaryEstimand which,
                            const std::vector<std::vector<std::size_t>>& rows, double level,
                            std::uint64_t seed, std::size_t threads = 1);

struct CurvePoint {
  double t = 0.0;
  double point = 0.0;
  double var_outer = 0.0;
  double var_inner = 0.0;
  double var_total = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct CurveReport {
  std::string estimand;
  std::vector<CurvePoint> points;
  double level = 0.95;
  std::size_t M = 0;
  std::size_t B = 0;
  std::uint64_t seed = 0;
};

/// size points evenly spaced over the 5th..95th percentile of t.
Eigen::VectorXd default_grid(const Eigen::VectorXd& t, std::size_t size);

/// Per-grid-point DeltaMatrices of a curve estimator plus the point
/// estimates on the original data.
struct CurveDeltas {
  std::vector<Eigen::MatrixXd> cells;  ///< one M x B matrix per grid point
  Eigen::MatrixXd original;            ///< grid x B, original data
};

/// Pseudo-outcome cubic-curve estimator. Continuous treatment only.
CurveDeltas curve_deltas(const Dataset& data, const PosteriorDraws& outcome,
                         const PosteriorDraws& treatment, const Eigen::VectorXd& grid,
                         const std::vector<std::vector<std::size_t>>& rows, std::size_t threads = 1);
/// Regression estimator (1/n) sum_k m(t, X_k) at each grid point.
CurveDeltas regression_curve_deltas(const PosteriorDraws& outcome, const Eigen::VectorXd& grid,
                                    const std::vector<std::vector<std::size_t>>& rows,
                                    std::size_t threads = 1);

CurveReport summarize_curve(std::string estimand, const Eigen::VectorXd& grid, const CurveDeltas& deltas,
                            double level, std::uint64_t seed);

CurveReport estimate_curve(const Dataset& data, const PosteriorDraws& outcome,
                           const PosteriorDraws& treatment, const Eigen::VectorXd& grid,
                           const std::vector<std::vector<std::size_t>>& rows, double level,
                           std::uint64_t seed, std::size_t threads = 1);

}  // namespace bayesdr
