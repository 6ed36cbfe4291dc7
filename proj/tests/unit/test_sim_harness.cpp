#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "bayesdr/errors.hpp"
#include "bayesdr/sim_harness.hpp"

using namespace bayesdr;

namespace {

RepResult stub_rep(double point, double se, double truth) {
  RepResult r;
  r.methods.push_back(MethodResult{"stub", {point}, {se}, {se}, {point - 1.96 * se}, {point + 1.96 * se}, {truth}});
  return r;
}

}  // namespace

TEST(Scenario, ParseAndDefaults) {
  const auto a = Scenario::parse("linear_binary");
  EXPECT_EQ(a.n, 100u);
  EXPECT_EQ(a.p, 100u);
  EXPECT_TRUE(a.binary_treatment());
  EXPECT_EQ(a.true_ate(), 1.0);
  EXPECT_EQ(Scenario::parse("appx_e3").true_ate(), 10.0);
  const auto c = Scenario::parse("continuous");
  EXPECT_FALSE(c.binary_treatment());
  EXPECT_EQ(c.n, 200u);
  EXPECT_EQ(c.p, 50u);
  const auto m = Scenario::parse("misspec_g_sl");
  EXPECT_TRUE(m.squared_treatment);
  EXPECT_FALSE(m.squared_outcome);
  EXPECT_EQ(m.name(), "misspec_g_sl");
  EXPECT_THROW(Scenario::parse("nonsense"), UnknownScenario);
  EXPECT_THROW(Scenario::parse("misspec_g"), UnknownScenario);
  Scenario small = a;
  small.p = 3;
  EXPECT_THROW(small.validate(), ConfigError);
}

TEST(Generate, EquicorrelatedCovariates) {
  Scenario s = Scenario::parse("linear_binary");
  s.n = 1000000;
  s.p = 5;
  const SimData sim = generate(s, std::uint64_t{1});
  const auto& x = sim.raw_x;
  const double cov = (x.col(0).array() - x.col(0).mean()).matrix().dot((x.col(1).array() - x.col(1).mean()).matrix()) /
                     static_cast<double>(s.n - 1);
  EXPECT_NEAR(cov, 0.3, 0.01);
  EXPECT_NEAR((x.col(2).array() - x.col(2).mean()).square().mean(), 1.0, 0.01);
}

TEST(Generate, OutcomeCoefficientsRecoveredByOls) {
  Scenario s = Scenario::parse("linear_binary");
  s.n = 1000000;
  s.p = 10;
  const SimData sim = generate(s, std::uint64_t{2});
  const Eigen::VectorXd r = sim.data.y() - sim.data.t();
  Eigen::MatrixXd design(s.n, s.p + 1);
  design << Eigen::VectorXd::Ones(s.n), sim.raw_x;
  const Eigen::VectorXd coef = (design.transpose() * design).ldlt().solve(design.transpose() * r);
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(s.p + 1);
  truth.segment(1, 5) << 0.75, 1.0, 0.6, -0.8, -0.7;
  EXPECT_LT((coef - truth).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Generate, BinaryTruthVectors) {
  const Scenario s = Scenario::parse("linear_binary");
  const SimData sim = generate(s, std::uint64_t{3});
  EXPECT_LT((sim.true_m1 - sim.true_m0).array().abs().maxCoeff() - 1.0, 1e-12);
  for (Eigen::Index i = 0; i < sim.raw_x.rows(); ++i) {
    EXPECT_NEAR(sim.true_treatment[i], treatment_mean(s, sim.raw_x.row(i)), 1e-15);
    EXPECT_NEAR(sim.true_m0[i], outcome_mean(s, 0.0, sim.raw_x.row(i)), 1e-15);
  }
}

TEST(Generate, BitwiseReproducible) {
  for (const char* name : {"linear_binary", "nonlinear_binary", "continuous", "appx_e1", "appx_e2", "appx_e3",
                           "appx_e4", "misspec_g_ss"}) {
    const Scenario s = Scenario::parse(name);
    const SimData a = generate(s, std::uint64_t{44});
    const SimData b = generate(s, std::uint64_t{44});
    EXPECT_EQ(a.raw_x, b.raw_x) << name;
    EXPECT_EQ(a.data.y(), b.data.y()) << name;
    EXPECT_EQ(a.data.t(), b.data.t()) << name;
    const SimData c = generate(s, std::uint64_t{45});
    EXPECT_NE(a.data.y(), c.data.y()) << name;
  }
}

TEST(Generate, InverseSquareCoefficients) {
  const Eigen::VectorXd a = inverse_square_coefficients(100);
  EXPECT_EQ(a.maxCoeff(), 1.0);
  EXPECT_EQ(a[0], 1.0);
  EXPECT_DOUBLE_EQ(a[99], 1.0 / 10000.0);
  EXPECT_NEAR(cluster_outcome_coefficients(30).squaredNorm(), 18.0, 1e-12);
}

TEST(Generate, ClusterPropensities) {
  const Scenario s = Scenario::parse("appx_e3");
  const SimData sim = generate(s, std::uint64_t{5});
  ASSERT_EQ(sim.cluster.size(), s.n);
  std::map<int, double> prop;
  for (std::size_t i = 0; i < s.n; ++i) {
    const double p = sim.true_treatment[static_cast<Eigen::Index>(i)];
    auto [it, fresh] = prop.emplace(sim.cluster[i], p);
    EXPECT_EQ(it->second, p);
  }
  // every cluster's propensity is fixed by construction, whether or not it
  // received rows in this draw
  int low = 0, high = 0;
  for (const auto& [c, p] : prop) {
    EXPECT_TRUE(p == 0.25 || p == 0.75);
    EXPECT_EQ(p, c < 10 ? 0.25 : 0.75) << "cluster " << c;
    (p == 0.25 ? low : high)++;
  }
  EXPECT_LE(low, 10);
  EXPECT_LE(high, 10);
}

TEST(CurveOracle, TreatmentPartIsExact) {
  const Scenario s = Scenario::parse("continuous");
  for (double t : {-2.0, 0.5, 1.0, 4.0}) {
    EXPECT_NEAR(curve_oracle(s, t) - curve_oracle(s, 0.0), 0.05 * t * t * t - 0.1 * t * t, 1e-12);
  }
}

TEST(CurveOracle, OffsetMatchesClosedFormAndReseeds) {
  const Scenario s = Scenario::parse("continuous");
  const auto a = curve_oracle_offset(s, 1);
  const auto b = curve_oracle_offset(s, 2);
  EXPECT_NEAR(a.mean, b.mean, 3 * std::hypot(a.se, b.se));
  // marginals are standard normal: E e^X = e^{1/2}, E log|X| = -(gamma + log 2) / 2
  const double closed = 5.0 + 0.4 * std::exp(0.5) + std::log(0.65) -
                        0.5 * (std::numbers::egamma + std::log(2.0)) + 1.0;
  EXPECT_NEAR(a.mean, closed, 3 * a.se);
  EXPECT_NEAR(curve_oracle(s, 0.0), closed, 0.01);
}

TEST(CurveOracle, PopulationGrid) {
  const Scenario s = Scenario::parse("continuous");
  const Eigen::VectorXd g = population_grid(s, 20);
  ASSERT_EQ(g.size(), 20);
  for (Eigen::Index i = 1; i < 20; ++i) EXPECT_GT(g[i], g[i - 1]);
  EXPECT_EQ(g, population_grid(s, 20));
  EXPECT_THROW(population_grid(Scenario::parse("linear_binary"), 20), ConfigError);
}

TEST(Metrics, StubAtTruth) {
  std::vector<RepResult> reps;
  for (int r = 0; r < 10; ++r) reps.push_back(stub_rep(1.0, 1.0, 1.0));
  const auto table = aggregate(reps);
  EXPECT_EQ(table.at("stub").abs_bias, 0.0);
  EXPECT_EQ(table.at("stub").coverage, 1.0);
  EXPECT_EQ(table.n_reps, 10u);
}

TEST(Metrics, NormalToyCalibration) {
  const auto reps = run_replications(10000, 3, 2, [](std::size_t, std::uint64_t seed) {
    Rng rng(seed, 0);
    return stub_rep(2.0 + rng.normal(), 1.0, 2.0);
  });
  const auto m = aggregate(reps).at("stub");
  EXPECT_GT(m.coverage, 0.94);
  EXPECT_LT(m.coverage, 0.96);
  EXPECT_GT(m.se_ratio, 0.98);
  EXPECT_LT(m.se_ratio, 1.02);
  EXPECT_NEAR(m.mse, m.variance + m.abs_bias * m.abs_bias, 1e-3);
}

TEST(Metrics, FailedRepsExcluded) {
  const auto reps = run_replications(6, 3, 1, [](std::size_t r, std::uint64_t) {
    if (r % 3 == 0) throw NumericError("boom");
    return stub_rep(1.0 + static_cast<double>(r) * 0.01, 0.5, 1.0);
  });
  const auto table = aggregate(reps);
  EXPECT_EQ(table.n_failed, 2u);
  EXPECT_EQ(table.n_reps, 4u);
  EXPECT_NE(reps[0].error.find("boom"), std::string::npos);
  std::ostringstream csv;
  write_reps_csv(csv, reps);
  EXPECT_NE(csv.str().find("NumericError"), std::string::npos);
}

TEST(Replications, ThreadCountInvariant) {
  auto fn = [](std::size_t r, std::uint64_t seed) {
    Rng rng(seed, 0);
    return stub_rep(rng.normal() + static_cast<double>(r), 1.0, 0.0);
  };
  const auto a = run_replications(17, 9, 1, fn);
  const auto b = run_replications(17, 9, 4, fn);
  std::ostringstream sa, sb;
  write_reps_csv(sa, a);
  write_reps_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  std::set<std::uint64_t> seeds;
  for (const auto& r : a) seeds.insert(r.seed);
  EXPECT_EQ(seeds.size(), 17u);
}

TEST(Replications, SmallPipelineRuns) {
  SimConfig cfg;
  cfg.scenario = Scenario::parse("linear_binary");
  cfg.scenario.n = 60;
  cfg.scenario.p = 6;
  cfg.analysis.mcmc.n_iter = 200;
  cfg.analysis.mcmc.burn_in = 100;
  cfg.analysis.bootstrap = 10;
  cfg.reps = 2;
  const auto reps = run_replications(cfg);
  ASSERT_EQ(reps.size(), 2u);
  for (const auto& r : reps) {
    ASSERT_FALSE(r.failed) << r.error;
    ASSERT_EQ(r.methods.size(), 3u);
    EXPECT_EQ(r.methods[0].method, "bayes_dr");
    EXPECT_EQ(r.methods[1].method, "ipw");
    EXPECT_EQ(r.methods[2].method, "reg");
    EXPECT_EQ(r.outcome_family, "linear");
  }
  const auto again = run_replications(cfg);
  EXPECT_EQ(reps[1].methods[0].point, again[1].methods[0].point);
}

TEST(Replications, SmallCurvePipelineRuns) {
  SimConfig cfg;
  cfg.scenario = Scenario::parse("continuous");
  cfg.scenario.n = 60;
  cfg.scenario.p = 5;
  cfg.analysis.mcmc.n_iter = 200;
  cfg.analysis.mcmc.burn_in = 100;
  cfg.analysis.bootstrap = 10;
  cfg.reps = 1;
  const auto reps = run_replications(cfg);
  ASSERT_FALSE(reps[0].failed) << reps[0].error;
  ASSERT_EQ(reps[0].methods.size(), 2u);
  EXPECT_EQ(reps[0].methods[1].method, "reg_linear");
  EXPECT_EQ(reps[0].methods[0].point.size(), 20u);
  const auto table = aggregate(reps);
  EXPECT_EQ(table.methods.size(), 2u);
  std::ostringstream csv;
  write_metrics_csv(csv, table);
  EXPECT_EQ(csv.str().substr(0, 16), "method,abs_bias,");
}
