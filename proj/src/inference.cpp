#include "bayesdr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bayesdr/bases.hpp"
#include "bayesdr/errors.hpp"
#include "bayesdr/estimators.hpp"
#include "bayesdr/parallel.hpp"

namespace bayesdr {

double EstimateReport::se() const { return std::sqrt(var_total); }
double EstimateReport::se_outer() const { return std::sqrt(var_outer); }

double point_estimate(const CellEstimator& estimator, std::size_t n, std::size_t draws) {
  const auto rows = identity_rows(n);
  double sum = 0.0;
  for (std::size_t b = 0; b < draws; ++b) sum += estimator(rows, b);
  return sum / static_cast<double>(draws);
}

std::vector<std::vector<std::size_t>> bootstrap_rows(std::size_t n, std::size_t M, RngStream stream,
                                                     const RowFilter& accept) {
  std::vector<std::vector<std::size_t>> out(M);
  for (std::size_t m = 0; m < M; ++m) {
    Rng rng(stream.child(m));
    int attempt = 0;
    do {
      if (attempt++ == kMaxResampleAttempts) {
        throw NumericError("bootstrap resample " + std::to_string(m) + " rejected " +
                           std::to_string(kMaxResampleAttempts) + " times");
      }
      out[m] = bootstrap_indices(n, rng);
    } while (accept && !accept(out[m]));
  }
  return out;
}

RowFilter both_arms_filter(const Eigen::VectorXd& t) {
  return [&t](std::span<const std::size_t> rows) {
    bool treated = false, control = false;
    for (std::size_t r : rows) {
      (t[static_cast<Eigen::Index>(r)] == 1.0 ? treated : control) = true;
      if (treated && control) return true;
    }
    return false;
  };
}

DeltaMatrix build_delta_matrix(const CellEstimator& estimator,
                               const std::vector<std::vector<std::size_t>>& rows, std::size_t draws,
                               std::size_t threads) {
  DeltaMatrix dm;
  dm.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(draws));
  parallel_for(rows.size(), threads, [&](std::size_t m) {
    for (std::size_t b = 0; b < draws; ++b) {
      dm.values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(b)) = estimator(rows[m], b);
    }
  });
  if (!dm.values.allFinite()) throw NumericError("non-finite estimator value in the delta matrix");
  return dm;
}

DeltaMatrix build_delta_matrix(const CellEstimator& estimator, std::size_t n, std::size_t draws,
                               std::size_t M, RngStream stream, std::size_t threads,
                               const RowFilter& accept) {
  return build_delta_matrix(estimator, bootstrap_rows(n, M, stream, accept), draws, threads);
}

VarianceEstimate variance_estimate(const Eigen::MatrixXd& values) {
  const Eigen::Index M = values.rows(), B = values.cols();
  if (M < 2) throw TooFewRows("variance estimate needs at least 2 bootstrap rows");
  if (B < 2) throw TooFewCols("variance estimate needs at least 2 posterior draws");
  const Eigen::VectorXd row_means = values.rowwise().mean();
  VarianceEstimate v;
  v.var_outer = (row_means.array() - row_means.mean()).square().sum() / static_cast<double>(M - 1);
  double inner = 0.0;
  for (Eigen::Index m = 0; m < M; ++m) {
    inner += (values.row(m).array() - row_means[m]).square().sum() / static_cast<double>(B - 1);
  }
  v.var_inner = inner / static_cast<double>(M);
  return v;
}

std::pair<double, double> confidence_interval(double point, double var_total, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  const double half = normal_quantile(0.5 * (1.0 + level)) * std::sqrt(std::max(var_total, 0.0));
  return {point - half, point + half};
}

EstimateReport summarize(std::string estimand, double point, const Eigen::MatrixXd& values,
                         double level, std::uint64_t seed) {
  const VarianceEstimate v = variance_estimate(values);
  EstimateReport r;
  r.estimand = std::move(estimand);
  r.point = point;
  r.var_outer = v.var_outer;
  r.var_inner = v.var_inner;
  r.var_total = v.total();
  r.ci = confidence_interval(point, r.var_total, level);
  r.level = level;
  r.M = static_cast<std::size_t>(values.rows());
  r.B = static_cast<std::size_t>(values.cols());
  r.seed = seed;
  r.degenerate = !(r.var_total > 0.0);
  r.correction_share = r.degenerate ? 0.0 : r.var_inner / r.var_total;
  return r;
}

const char* to_string(BinaryEstimand e) {
  switch (e) {
    case BinaryEstimand::dr: return "ate_dr";
    case BinaryEstimand::ipw: return "ate_ipw";
    case BinaryEstimand::reg: return "ate_reg";
  }
  return "?";
}

BinaryDraws binary_draws(const PosteriorDraws& treatment, const PosteriorDraws& outcome) {
  if (treatment.draws() != outcome.draws()) {
    throw ConfigError("treatment and outcome models saved different numbers of draws");
  }
  const auto B = static_cast<Eigen::Index>(outcome.draws());
  const Eigen::Index n = outcome.n();
  BinaryDraws d;
  d.p1.resize(B, n);
  d.m1.resize(B, n);
  d.m0.resize(B, n);
  for (Eigen::Index b = 0; b < B; ++b) {
    const BinaryFittedValues fv = binary_fitted_values(treatment, outcome, static_cast<std::size_t>(b));
    d.p1.row(b) = fv.p1.transpose();
    d.m1.row(b) = fv.m1.transpose();
    d.m0.row(b) = fv.m0.transpose();
  }
  return d;
}

CellEstimator binary_estimator(const Dataset& data, const BinaryDraws& draws, BinaryEstimand which) {
  const Eigen::VectorXd& t = data.t();
  const Eigen::VectorXd& y = data.y();
  return [&t, &y, &draws, which](std::span<const std::size_t> rows, std::size_t draw) {
    const auto b = static_cast<Eigen::Index>(draw);
    BinaryFittedValues fv{draws.p1.row(b).transpose(), draws.m1.row(b).transpose(),
                          draws.m0.row(b).transpose()};
    switch (which) {
      case BinaryEstimand::dr: return dr_binary(t, y, fv, rows);
      case BinaryEstimand::ipw: return ipw_binary(t, y, fv, rows);
      case BinaryEstimand::reg: return reg_binary(fv, rows);
    }
    return 0.0;
  };
}

EstimateReport estimate_ate(const Dataset& data, const BinaryDraws& draws, BinaryEstimand which,
                            const std::vector<std::vector<std::size_t>>& rows, double level,
                            std::uint64_t seed, std::size_t threads) {
  if (data.t_kind() != VariableKind::binary) throw ConfigError("ATE needs a binary treatment column");
  const CellEstimator est = binary_estimator(data, draws, which);
  const double point = point_estimate(est, static_cast<std::size_t>(data.n()), draws.draws());
  const DeltaMatrix dm = build_delta_matrix(est, rows, draws.draws(), threads);
  return summarize(to_string(which), point, dm.values, level, seed);
}

Eigen::VectorXd default_grid(const Eigen::VectorXd& t, std::size_t size) {
  if (size < 2) throw ConfigError("curve grid needs at least 2 points");
  const std::vector<double> values(t.data(), t.data() + t.size());
  return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(size), quantile(values, 0.05),
                                    quantile(values, 0.95));
}

namespace {

/// Counts matrix n x (M + 1); the last column is the original sample.
Eigen::MatrixXd counts_matrix(const std::vector<std::vector<std::size_t>>& rows, Eigen::Index n) {
  const auto M = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd c(n, M + 1);
  for (Eigen::Index m = 0; m < M; ++m) c.col(m) = row_counts(rows[static_cast<std::size_t>(m)], static_cast<std::size_t>(n));
  c.col(M).setOnes();
  return c;
}

CurveDeltas empty_deltas(Eigen::Index grid, Eigen::Index M, Eigen::Index B) {
  CurveDeltas d;
  d.cells.assign(static_cast<std::size_t>(grid), Eigen::MatrixXd(M, B));
  d.original.resize(grid, B);
  return d;
}

}  // namespace

CurveDeltas curve_deltas(const Dataset& data, const PosteriorDraws& outcome,
                         const PosteriorDraws& treatment, const Eigen::VectorXd& grid,
                         const std::vector<std::vector<std::size_t>>& rows, std::size_t threads) {
  if (data.t_kind() != VariableKind::continuous) {
    throw ConfigError("curve estimation needs a continuous treatment column");
  }
  if (treatment.draws() != outcome.draws()) {
    throw ConfigError("treatment and outcome models saved different numbers of draws");
  }
  const Eigen::VectorXd& t = data.t();
  const Eigen::VectorXd& y = data.y();
  const Eigen::Index n = data.n();
  const auto M = static_cast<Eigen::Index>(rows.size());
  const auto B = static_cast<Eigen::Index>(outcome.draws());
  const Eigen::Index G = grid.size();
  const double lo = t.minCoeff(), hi = t.maxCoeff();
  for (double g : grid) {
    if (g < lo || g > hi) throw ConfigError("curve grid point outside the observed treatment range");
  }

  const Eigen::MatrixXd counts = counts_matrix(rows, n);

  // The weighted cubic fit of column m is linear in the pseudo-outcome:
  // curve = H_m xi with H_m = G_d (X' W_m X)^{-1} X' W_m.
  const double center = t.mean();
  const double scale = std::sqrt((t.array() - center).square().mean());
  Eigen::MatrixXd design(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) design.row(i) = cubic_row(t[i], center, scale);
  Eigen::MatrixXd grid_design(G, 4);
  for (Eigen::Index g = 0; g < G; ++g) grid_design.row(g) = cubic_row(grid[g], center, scale);
  std::vector<Eigen::MatrixXd> hat(static_cast<std::size_t>(M + 1));
  for (Eigen::Index m = 0; m <= M; ++m) {
    const Eigen::VectorXd w = counts.col(m);
    std::set<double> distinct;
    for (Eigen::Index i = 0; i < n && distinct.size() < 4; ++i) {
      if (w[i] > 0.0) distinct.insert(t[i]);
    }
    if (distinct.size() < 4) {
      throw RankDeficientDesign("cubic curve needs at least 4 distinct treatment values");
    }
    const Eigen::MatrixXd weighted = w.asDiagonal() * design;
    const Eigen::Matrix4d gram = design.transpose() * weighted;
    Eigen::ColPivHouseholderQR<Eigen::Matrix4d> qr(gram);
    if (qr.rank() < 4) throw RankDeficientDesign("cubic design is rank deficient");
    hat[static_cast<std::size_t>(m)] = grid_design * qr.solve(weighted.transpose());
  }

  const bool identity_link = outcome.response_kind == VariableKind::continuous;
  const double dn = static_cast<double>(n);
  CurveDeltas out = empty_deltas(G, M, B);
  parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t draw) {
    const auto b = static_cast<Eigen::Index>(draw);
    const Eigen::MatrixXd density = treatment_density_matrix(
        t, treatment.linear_predictor.row(b).transpose(), std::sqrt(treatment.sigma2[b]));
    const Eigen::MatrixXd avg_density = density * counts / dn;
    Eigen::VectorXd own_density = density.diagonal();
    Eigen::VectorXd own_mean(n);
    Eigen::MatrixXd avg_mean(n, M + 1);
    if (identity_link) {
      // m(t_i, X_k) = a(t_i) + h_k, so the averages factor.
      const Eigen::RowVectorXd h = outcome.covariate_effect.row(b);
      const Eigen::RowVectorXd h_avg = h * counts / dn;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double a = outcome.treatment.row(t[i]).dot(outcome.intercept_block.row(b));
        own_mean[i] = a + h[i];
        avg_mean.row(i) = h_avg.array() + a;
      }
    } else {
      const Eigen::MatrixXd mean = outcome_mean_matrix(outcome, draw, t);
      own_mean = mean.diagonal();
      avg_mean = mean * counts / dn;
    }
    const Eigen::ArrayXd ratio = (y - own_mean).array() / own_density.array();
    for (Eigen::Index m = 0; m <= M; ++m) {
      const Eigen::VectorXd xi = (ratio * avg_density.col(m).array() + avg_mean.col(m).array()).matrix();
      const Eigen::VectorXd curve = hat[static_cast<std::size_t>(m)] * xi;
      if (m == M) {
        out.original.col(b) = curve;
      } else {
        for (Eigen::Index g = 0; g < G; ++g) out.cells[static_cast<std::size_t>(g)](m, b) = curve[g];
      }
    }
  });
  for (const auto& c : out.cells) {
    if (!c.allFinite()) throw NumericError("non-finite curve estimate");
  }
  return out;
}

CurveDeltas regression_curve_deltas(const PosteriorDraws& outcome, const Eigen::VectorXd& grid,
                                    const std::vector<std::vector<std::size_t>>& rows,
                                    std::size_t threads) {
  const Eigen::Index n = outcome.n();
  const auto M = static_cast<Eigen::Index>(rows.size());
  const auto B = static_cast<Eigen::Index>(outcome.draws());
  const Eigen::Index G = grid.size();
  const Eigen::MatrixXd counts = counts_matrix(rows, n);
  const double dn = static_cast<double>(n);
  CurveDeltas out = empty_deltas(G, M, B);
  parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t draw) {
    const auto b = static_cast<Eigen::Index>(draw);
    const Eigen::MatrixXd surface = outcome_mean_matrix(outcome, draw, grid);  // G x n
    const Eigen::MatrixXd avg = surface * counts / dn;
    for (Eigen::Index g = 0; g < G; ++g) {
      for (Eigen::Index m = 0; m < M; ++m) out.cells[static_cast<std::size_t>(g)](m, b) = avg(g, m);
    }
    out.original.col(b) = avg.col(M);
  });
  return out;
}

CurveReport summarize_curve(std::string estimand, const Eigen::VectorXd& grid, const CurveDeltas& deltas,
                            double level, std::uint64_t seed) {
  CurveReport r;
  r.estimand = std::move(estimand);
  r.level = level;
  r.seed = seed;
  r.B = static_cast<std::size_t>(deltas.original.cols());
  r.M = deltas.cells.empty() ? 0 : static_cast<std::size_t>(deltas.cells.front().rows());
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const auto& cells = deltas.cells[static_cast<std::size_t>(g)];
    const VarianceEstimate v = variance_estimate(cells);
    CurvePoint pt;
    pt.t = grid[g];
    pt.point = deltas.original.row(g).mean();
    pt.var_outer = v.var_outer;
    pt.var_inner = v.var_inner;
    pt.var_total = v.total();
    std::tie(pt.lo, pt.hi) = confidence_interval(pt.point, pt.var_total, level);
    r.points.push_back(pt);
  }
  return r;
}

CurveReport estimate_curve(const Dataset& data, const PosteriorDraws& outcome,
                           const PosteriorDraws& treatment, const Eigen::VectorXd& grid,
                           const std::vector<std::vector<std::size_t>>& rows, double level,
                           std::uint64_t seed, std::size_t threads) {
  return summarize_curve("curve_dr", grid, curve_deltas(data, outcome, treatment, grid, rows, threads),
                         level, seed);
}

}  // namespace bayesdr
