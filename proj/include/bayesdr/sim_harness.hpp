#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bayesdr/dataset.hpp"
#include "bayesdr/pipeline.hpp"
#include "bayesdr/rng.hpp"

namespace bayesdr {

enum class ScenarioId {
  linear_binary,
  nonlinear_binary,
  continuous,
  appx_e1,
  appx_e2,
  appx_e3,
  appx_e4,
  misspec_g,
};

/// A data-generating process. For misspec_g the two flags choose whether
/// the true treatment / outcome index uses squared covariates.
struct Scenario {
  ScenarioId id = ScenarioId::linear_binary;
  std::size_t n = 100;
  std::size_t p = 100;
  bool squared_treatment = false;
  bool squared_outcome = false;

  /// Accepts the ScenarioId names plus misspec_g_{ll,ls,sl,ss} (treatment
  /// letter first; s = squared truth). Throws UnknownScenario. n and p are
  /// set to the desk-scale defaults of the scenario.
  static Scenario parse(const std::string& name);
  std::string name() const;

  bool binary_treatment() const { return id != ScenarioId::continuous && id != ScenarioId::appx_e4; }
  /// Scalar ATE for binary-treatment scenarios.
  double true_ate() const;
  /// Throws ConfigError when n or p is too small for the DGP.
  void validate() const;
};

/// Coefficient vector (1, 1/4, ..., 1/p^2).
Eigen::VectorXd inverse_square_coefficients(std::size_t p);
/// (1, 1/2, ..., 1/p) rescaled to squared norm 18.
Eigen::VectorXd cluster_outcome_coefficients(std::size_t p);

/// E[Y | T = t, X = x] for raw covariates x.
double outcome_mean(const Scenario& s, double t, const Eigen::Ref<const Eigen::RowVectorXd>& x);
/// Binary scenarios: P(T = 1 | X = x); continuous: E[T | X = x].
/// Not defined for appx_e3, whose propensity depends on the cluster.
double treatment_mean(const Scenario& s, const Eigen::Ref<const Eigen::RowVectorXd>& x);

struct SimData {
  Dataset data;
  Eigen::MatrixXd raw_x;
  /// True P(T=1|X) (binary) or E[T|X] (continuous) per row.
  Eigen::VectorXd true_treatment;
  /// Binary: true E[Y|T=1,X] and E[Y|T=0,X]; empty otherwise.
  Eigen::VectorXd true_m1;
  Eigen::VectorXd true_m0;
  /// appx_e3 cluster of each row, empty otherwise.
  std::vector<int> cluster;
};

/// Draws one dataset; bitwise reproducible per (scenario, stream).
SimData generate(const Scenario& s, RngStream stream);
SimData generate(const Scenario& s, std::uint64_t rep_seed);

/// Covariates from N(0, Sigma) with unit variances and common correlation rho.
Eigen::MatrixXd equicorrelated_normal(std::size_t n, std::size_t p, double rho, Rng& rng);

struct MonteCarloMean {
  double mean = 0.0;
  double se = 0.0;
};

/// Monte Carlo estimate of E_X[mu_y(0, X)] for a continuous scenario.
MonteCarloMean curve_oracle_offset(const Scenario& s, std::uint64_t seed, std::size_t draws = 1000000);
/// True E[Y(t)]; the covariate part is estimated once from 10^6 draws and
/// cached.
double curve_oracle(const Scenario& s, double t);
/// Grid spanning the population 5th..95th percentile of T.
Eigen::VectorXd population_grid(const Scenario& s, std::size_t size);

/// Result of one method in one replication; vectors hold one entry per
/// estimand location (1 for an ATE, grid size for a curve).
struct MethodResult {
  std::string method;
  std::vector<double> point;
  std::vector<double> se;
  std::vector<double> se_outer;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> truth;
};

struct RepResult {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::string treatment_family;
  std::string outcome_family;
  std::vector<MethodResult> methods;
};

struct MethodMetrics {
  std::string method;
  double abs_bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double coverage = 0.0;
  double se_ratio = 0.0;
  /// SE ratio using the between-resample variance only.
  double se_ratio_outer = 0.0;
  double mean_se = 0.0;
  std::size_t n_reps = 0;
};

struct MetricsTable {
  std::vector<MethodMetrics> methods;
  std::size_t n_reps = 0;
  std::size_t n_failed = 0;

  const MethodMetrics& at(const std::string& method) const;
};

/// Metrics from the successful replications; curve metrics are computed per
/// location and averaged.
MetricsTable aggregate(const std::vector<RepResult>& reps);

struct SimConfig {
  Scenario scenario;
  AnalysisConfig analysis;  ///< mcmc.seed is replaced per replication
  std::size_t reps = 20;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

/// Seed of replication r under a master seed.
std::uint64_t rep_seed(std::uint64_t master, std::size_t rep);

/// Runs fn(rep, seed) for every replication, in parallel over reps.
/// Errors derived from bayesdr::Error are recorded as failed reps.
std::vector<RepResult> run_replications(std::size_t reps, std::uint64_t master_seed, std::size_t threads,
                                        const std::function<RepResult(std::size_t, std::uint64_t)>& fn);
/// generate -> fit -> estimate for every replication.
std::vector<RepResult> run_replications(const SimConfig& cfg);
/// One replication of the full pipeline.
RepResult run_replication(const SimConfig& cfg, std::size_t rep);

void write_metrics_csv(std::ostream& out, const MetricsTable& table);
void write_reps_csv(std::ostream& out, const std::vector<RepResult>& reps);

}  // namespace bayesdr
