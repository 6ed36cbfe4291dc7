#include "bayesdr/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>

#include "bayesdr/bases.hpp"
#include "bayesdr/csv.hpp"
#include "bayesdr/errors.hpp"
#include "bayesdr/parallel.hpp"

namespace bayesdr {

namespace {

struct ScenarioName {
  ScenarioId id;
  const char* name;
  std::size_t n;
  std::size_t p;
};

// Desk-scale defaults.
constexpr ScenarioName kScenarios[] = {
    {ScenarioId::linear_binary, "linear_binary", 100, 100},
    {ScenarioId::nonlinear_binary, "nonlinear_binary", 100, 100},
    {ScenarioId::continuous, "continuous", 200, 50},
    {ScenarioId::appx_e1, "appx_e1", 100, 100},
    {ScenarioId::appx_e2, "appx_e2", 100, 100},
    {ScenarioId::appx_e3, "appx_e3", 100, 100},
    {ScenarioId::appx_e4, "appx_e4", 200, 50},
    {ScenarioId::misspec_g, "misspec_g", 200, 10},
};

constexpr double kCorrelation = 0.3;
constexpr int kClusters = 20;

// Coefficients of the misspecification grid on X1..X5.
constexpr double kMisspecOutcome[] = {0.75, 1.0, 0.6, -0.8, -0.7};
constexpr double kMisspecTreatment[] = {0.15, 0.2, 0.0, 0.0, -0.4};

double misspec_index(const Eigen::Ref<const Eigen::RowVectorXd>& x, const double* coef, bool squared) {
  double s = 0.0;
  for (int j = 0; j < 5; ++j) {
    const double v = squared ? x[j] * x[j] - 1.0 : x[j];
    s += coef[j] * v;
  }
  return s;
}

/// The part of E[Y(t)] that depends on t (continuous scenarios).
double curve_treatment_part(const Scenario& s, double t) {
  if (s.id == ScenarioId::continuous) return 0.05 * t * t * t - 0.1 * t * t;
  return -0.1 * t + 0.05 * t * t * t;
}

Eigen::MatrixXd scenario_covariates(const Scenario& s, std::size_t n, std::size_t p, Rng& rng) {
  if (s.id == ScenarioId::appx_e4) {
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
    }
    return x;
  }
  return equicorrelated_normal(n, p, kCorrelation, rng);
}

}  // namespace

Scenario Scenario::parse(const std::string& name) {
  for (const auto& s : kScenarios) {
    if (name == s.name && s.id != ScenarioId::misspec_g) return Scenario{s.id, s.n, s.p};
  }
  const std::string prefix = "misspec_g_";
  if (name.size() == prefix.size() + 2 && name.compare(0, prefix.size(), prefix) == 0) {
    const char a = name[prefix.size()], b = name[prefix.size() + 1];
    if ((a == 'l' || a == 's') && (b == 'l' || b == 's')) {
      Scenario sc{ScenarioId::misspec_g, 200, 10};
      sc.squared_treatment = a == 's';
      sc.squared_outcome = b == 's';
      return sc;
    }
  }
  throw UnknownScenario(name);
}

std::string Scenario::name() const {
  if (id == ScenarioId::misspec_g) {
    return std::string("misspec_g_") + (squared_treatment ? 's' : 'l') + (squared_outcome ? 's' : 'l');
  }
  for (const auto& s : kScenarios) {
    if (s.id == id) return s.name;
  }
  return "?";
}

double Scenario::true_ate() const {
  if (!binary_treatment()) throw ConfigError("scenario " + name() + " has no scalar ATE");
  return id == ScenarioId::appx_e3 ? 10.0 : 1.0;
}

void Scenario::validate() const {
  if (n < 2) throw ConfigError("scenario needs n >= 2");
  const std::size_t min_p = (id == ScenarioId::appx_e2 || id == ScenarioId::appx_e3) ? 1 : 5;
  if (p < min_p) throw ConfigError("scenario " + name() + " needs p >= " + std::to_string(min_p));
}

Eigen::VectorXd inverse_square_coefficients(std::size_t p) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = 1.0 / static_cast<double>((j + 1) * (j + 1));
  return c;
}

Eigen::VectorXd cluster_outcome_coefficients(std::size_t p) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = 1.0 / static_cast<double>(j + 1);
  return c * std::sqrt(18.0 / c.squaredNorm());
}

double outcome_mean(const Scenario& s, double t, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  switch (s.id) {
    case ScenarioId::linear_binary:
      return t + 0.75 * x[0] + x[1] + 0.6 * x[2] - 0.8 * x[3] - 0.7 * x[4];
    case ScenarioId::nonlinear_binary:
      return t + 0.8 * x[0] + 0.4 * x[1] * x[1] * x[1] + 0.25 * std::exp(std::abs(x[1])) +
             0.8 * x[4] * x[4] - 1.5 * std::sin(x[4]);
    case ScenarioId::continuous:
      return 5.0 + curve_treatment_part(s, t) + 0.6 * x[0] + 0.4 * std::exp(x[0]) +
             std::log(std::abs(0.65 * x[1])) + 0.5 * (1.0 + x[2]) * (1.0 + x[2]);
    case ScenarioId::appx_e1:
      return t + 0.45 * x[0] + 0.7 * x[1] - 0.6 * x[2] + 1.3 * x[3] - 0.5 * x[4];
    case ScenarioId::appx_e2:
      return t + x.dot(inverse_square_coefficients(static_cast<std::size_t>(x.size())).transpose());
    case ScenarioId::appx_e3:
      return 10.0 * t + x.dot(cluster_outcome_coefficients(static_cast<std::size_t>(x.size())).transpose());
    case ScenarioId::appx_e4:
      return 5.0 + curve_treatment_part(s, t) + 0.5 * x[0] + 0.5 * x[1] - 0.3 * x[4];
    case ScenarioId::misspec_g:
      return t + misspec_index(x, kMisspecOutcome, s.squared_outcome);
  }
  return 0.0;
}

double treatment_mean(const Scenario& s, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  switch (s.id) {
    case ScenarioId::linear_binary:
      return normal_cdf(0.15 * x[0] + 0.2 * x[1] - 0.4 * x[4]);
    case ScenarioId::nonlinear_binary:
      return normal_cdf(0.15 * x[0] - 0.4 * x[1] - 0.5 * x[4]);
    case ScenarioId::continuous:
      return 0.6 * x[0] * x[0] + 0.6 * x[0] + std::exp(std::abs(0.65 * x[1])) - 0.8 * x[2] * x[2];
    case ScenarioId::appx_e1:
      return normal_cdf(0.35 * x[0] + 0.2 * x[1] - 0.3 * x[2] - 0.4 * x[4]);
    case ScenarioId::appx_e2:
      return normal_cdf(x.dot(inverse_square_coefficients(static_cast<std::size_t>(x.size())).transpose()));
    case ScenarioId::appx_e3:
      throw ConfigError("appx_e3 propensity depends on the cluster, not on X");
    case ScenarioId::appx_e4:
      return 0.4 * x[0] + 0.6 * x[1] - 0.5 * x[3];
    case ScenarioId::misspec_g:
      return normal_cdf(misspec_index(x, kMisspecTreatment, s.squared_treatment));
  }
  return 0.0;
}

Eigen::MatrixXd equicorrelated_normal(std::size_t n, std::size_t p, double rho, Rng& rng) {
  const double shared = std::sqrt(rho), own = std::sqrt(1.0 - rho);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double z0 = rng.normal();
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = shared * z0 + own * rng.normal();
  }
  return x;
}

SimData generate(const Scenario& s, RngStream stream) {
  s.validate();
  Rng rng(stream);
  const auto n = static_cast<Eigen::Index>(s.n);
  Eigen::MatrixXd x;
  Eigen::VectorXd truth_t(n);
  std::vector<int> cluster;
  if (s.id == ScenarioId::appx_e3) {
    Eigen::MatrixXd centers(kClusters, static_cast<Eigen::Index>(s.p));
    for (Eigen::Index k = 0; k < centers.rows(); ++k) {
      for (Eigen::Index j = 0; j < centers.cols(); ++j) centers(k, j) = rng.normal();
    }
    x.resize(n, static_cast<Eigen::Index>(s.p));
    cluster.resize(s.n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = static_cast<int>(rng.index(kClusters));
      cluster[static_cast<std::size_t>(i)] = c;
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = centers(c, j) + rng.normal();
      truth_t[i] = c < kClusters / 2 ? 0.25 : 0.75;
    }
  } else {
    x = scenario_covariates(s, s.n, s.p, rng);
    for (Eigen::Index i = 0; i < n; ++i) truth_t[i] = treatment_mean(s, x.row(i));
  }

  const bool binary = s.binary_treatment();
  Eigen::VectorXd t(n), y(n), m1, m0;
  if (binary) {
    m1.resize(n);
    m0.resize(n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    t[i] = binary ? (rng.bernoulli(truth_t[i]) ? 1.0 : 0.0) : truth_t[i] + rng.normal();
    y[i] = outcome_mean(s, t[i], x.row(i)) + rng.normal();
    if (binary) {
      m1[i] = outcome_mean(s, 1.0, x.row(i));
      m0[i] = outcome_mean(s, 0.0, x.row(i));
    }
  }
  Dataset data(x, t, y, binary ? VariableKind::binary : VariableKind::continuous, VariableKind::continuous);
  return SimData{std::move(data), std::move(x), std::move(truth_t), std::move(m1), std::move(m0),
                 std::move(cluster)};
}

SimData generate(const Scenario& s, std::uint64_t seed) { return generate(s, RngStream{seed, 0x300}); }

MonteCarloMean curve_oracle_offset(const Scenario& s, std::uint64_t seed, std::size_t draws) {
  if (s.binary_treatment()) throw ConfigError("curve oracle needs a continuous-treatment scenario");
  Rng rng(RngStream{seed, 0x500});
  constexpr std::size_t kChunk = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t done = 0; done < draws; done += kChunk) {
    const std::size_t len = std::min(kChunk, draws - done);
    const Eigen::MatrixXd x = scenario_covariates(s, len, 5, rng);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double v = outcome_mean(s, 0.0, x.row(i));
      sum += v;
      sum_sq += v * v;
    }
  }
  const double d = static_cast<double>(draws);
  const double mean = sum / d;
  const double var = (sum_sq - d * mean * mean) / (d - 1.0);
  return {mean, std::sqrt(var / d)};
}

double curve_oracle(const Scenario& s, double t) {
  static std::mutex mutex;
  static std::map<ScenarioId, double> cache;
  double offset;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(s.id);
    if (it == cache.end()) it = cache.emplace(s.id, curve_oracle_offset(s, 20240601).mean).first;
    offset = it->second;
  }
  return offset + curve_treatment_part(s, t);
}

Eigen::VectorXd population_grid(const Scenario& s, std::size_t size) {
  if (s.binary_treatment()) throw ConfigError("curve grid needs a continuous-treatment scenario");
  static std::mutex mutex;
  static std::map<ScenarioId, std::pair<double, double>> cache;
  std::pair<double, double> range;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(s.id);
    if (it == cache.end()) {
      constexpr std::size_t kDraws = 1000000;
      Rng rng(RngStream{20240601, 0x600});
      const Eigen::MatrixXd x = scenario_covariates(s, kDraws, 5, rng);
      std::vector<double> t(kDraws);
      for (std::size_t i = 0; i < kDraws; ++i) {
        t[i] = treatment_mean(s, x.row(static_cast<Eigen::Index>(i))) + rng.normal();
      }
      it = cache.emplace(s.id, std::make_pair(quantile(t, 0.05), quantile(t, 0.95))).first;
    }
    range = it->second;
  }
  return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(size), range.first, range.second);
}

const MethodMetrics& MetricsTable::at(const std::string& method) const {
  for (const auto& m : methods) {
    if (m.method == method) return m;
  }
  throw ConfigError("no metrics for method '" + method + "'");
}

MetricsTable aggregate(const std::vector<RepResult>& reps) {
  MetricsTable table;
  std::vector<const RepResult*> ok;
  for (const auto& r : reps) {
    if (r.failed) {
      ++table.n_failed;
    } else {
      ok.push_back(&r);
    }
  }
  table.n_reps = ok.size();
  if (ok.empty()) return table;

  for (std::size_t k = 0; k < ok.front()->methods.size(); ++k) {
    MethodMetrics mm;
    mm.method = ok.front()->methods[k].method;
    mm.n_reps = ok.size();
    const std::size_t locations = ok.front()->methods[k].point.size();
    const double r = static_cast<double>(ok.size());
    for (std::size_t g = 0; g < locations; ++g) {
      double sum_err = 0.0, sum_sq_err = 0.0, sum_point = 0.0, covered = 0.0, sum_se = 0.0, sum_se_outer = 0.0;
      for (const RepResult* rep : ok) {
        const MethodResult& m = rep->methods[k];
        const double err = m.point[g] - m.truth[g];
        sum_err += err;
        sum_sq_err += err * err;
        sum_point += m.point[g];
        covered += (m.lo[g] <= m.truth[g] && m.truth[g] <= m.hi[g]) ? 1.0 : 0.0;
        sum_se += m.se[g];
        sum_se_outer += m.se_outer[g];
      }
      const double mean_point = sum_point / r;
      double ss = 0.0;
      for (const RepResult* rep : ok) {
        const double d = rep->methods[k].point[g] - mean_point;
        ss += d * d;
      }
      const double variance = ok.size() > 1 ? ss / (r - 1.0) : 0.0;
      const double sd = std::sqrt(variance);
      mm.abs_bias += std::abs(sum_err / r);
      mm.variance += variance;
      mm.mse += sum_sq_err / r;
      mm.coverage += covered / r;
      mm.mean_se += sum_se / r;
      mm.se_ratio += (sum_se / r) / sd;
      mm.se_ratio_outer += (sum_se_outer / r) / sd;
    }
    const double L = static_cast<double>(locations);
    mm.abs_bias /= L;
    mm.variance /= L;
    mm.mse /= L;
    mm.coverage /= L;
    mm.mean_se /= L;
    mm.se_ratio /= L;
    mm.se_ratio_outer /= L;
    table.methods.push_back(mm);
  }
  return table;
}

std::uint64_t rep_seed(std::uint64_t master, std::size_t rep) {
  Rng rng(RngStream{master, 0x400}.child(rep));
  return rng.bits();
}

std::vector<RepResult> run_replications(std::size_t reps, std::uint64_t master_seed, std::size_t threads,
                                        const std::function<RepResult(std::size_t, std::uint64_t)>& fn) {
  std::vector<RepResult> out(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    const std::uint64_t seed = rep_seed(master_seed, r);
    try {
      out[r] = fn(r, seed);
    } catch (const Error& e) {
      out[r] = RepResult{};
      out[r].failed = true;
      out[r].error = e.kind() + ": " + e.what();
    }
    out[r].rep = r;
    out[r].seed = seed;
  });
  return out;
}

namespace {

MethodResult scalar_result(const std::string& method, const EstimateReport& r, double truth) {
  return MethodResult{method, {r.point}, {r.se()}, {r.se_outer()}, {r.ci.first}, {r.ci.second}, {truth}};
}

MethodResult curve_result(const std::string& method, const CurveReport& c, const Scenario& s) {
  MethodResult m;
  m.method = method;
  for (const auto& pt : c.points) {
    m.point.push_back(pt.point);
    m.se.push_back(std::sqrt(pt.var_total));
    m.se_outer.push_back(std::sqrt(pt.var_outer));
    m.lo.push_back(pt.lo);
    m.hi.push_back(pt.hi);
    m.truth.push_back(curve_oracle(s, pt.t));
  }
  return m;
}

}  // namespace

RepResult run_replication(const SimConfig& cfg, std::size_t rep) {
  const std::uint64_t seed = rep_seed(cfg.seed, rep);
  const SimData sim = generate(cfg.scenario, seed);
  AnalysisConfig a = cfg.analysis;
  a.mcmc.seed = seed;
  a.threads = 1;
  RepResult out;
  out.rep = rep;
  out.seed = seed;
  if (cfg.scenario.binary_treatment()) {
    const AteAnalysis r = run_ate(sim.data, a);
    const double truth = cfg.scenario.true_ate();
    out.treatment_family = to_string(r.models.treatment.chosen().family);
    out.outcome_family = to_string(r.models.outcome.chosen().family);
    out.methods.push_back(scalar_result("bayes_dr", r.dr, truth));
    out.methods.push_back(scalar_result("ipw", r.ipw, truth));
    out.methods.push_back(scalar_result("reg", r.reg, truth));
  } else {
    const CurveAnalysis c = run_curve(sim.data, a, population_grid(cfg.scenario, a.grid_size));
    out.treatment_family = to_string(c.models.treatment.chosen().family);
    out.outcome_family = to_string(c.models.outcome.chosen().family);
    out.methods.push_back(curve_result("bayes_dr", c.dr, cfg.scenario));
    for (const auto& [family, report] : c.regression) {
      out.methods.push_back(curve_result(std::string("reg_") + to_string(family), report, cfg.scenario));
    }
  }
  return out;
}

std::vector<RepResult> run_replications(const SimConfig& cfg) {
  cfg.scenario.validate();
  cfg.analysis.validate();
  if (cfg.reps < 1) throw ConfigError("reps must be at least 1");
  if (!cfg.scenario.binary_treatment()) {
    // Fill the caches before workers start.
    population_grid(cfg.scenario, cfg.analysis.grid_size);
    curve_oracle(cfg.scenario, 0.0);
  }
  return run_replications(cfg.reps, cfg.seed, cfg.threads,
                          [&cfg](std::size_t r, std::uint64_t) { return run_replication(cfg, r); });
}

void write_metrics_csv(std::ostream& out, const MetricsTable& table) {
  write_csv_row(out, {"method", "abs_bias", "variance", "mse", "coverage", "se_ratio", "se_ratio_outer",
                      "mean_se", "n_reps", "n_failed"});
  for (const auto& m : table.methods) {
    write_csv_row(out, {m.method, format_double(m.abs_bias), format_double(m.variance), format_double(m.mse),
                        format_double(m.coverage), format_double(m.se_ratio), format_double(m.se_ratio_outer),
                        format_double(m.mean_se), std::to_string(m.n_reps), std::to_string(table.n_failed)});
  }
}

void write_reps_csv(std::ostream& out, const std::vector<RepResult>& reps) {
  write_csv_row(out, {"rep", "seed", "status", "treatment_family", "outcome_family", "method", "location",
                      "point", "se", "se_outer", "lo", "hi", "truth"});
  for (const auto& r : reps) {
    if (r.failed) {
      write_csv_row(out, {std::to_string(r.rep), std::to_string(r.seed), r.error, "", "", "", "", "", "", "",
                          "", "", ""});
      continue;
    }
    for (const auto& m : r.methods) {
      for (std::size_t g = 0; g < m.point.size(); ++g) {
        write_csv_row(out, {std::to_string(r.rep), std::to_string(r.seed), "ok", r.treatment_family,
                            r.outcome_family, m.method, std::to_string(g), format_double(m.point[g]),
                            format_double(m.se[g]), format_double(m.se_outer[g]), format_double(m.lo[g]),
                            format_double(m.hi[g]), format_double(m.truth[g])});
      }
    }
  }
}

}  // namespace bayesdr
