#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bayesdr/errors.hpp"
#include "bayesdr/model_selection.hpp"
#include "bayesdr/pipeline.hpp"

using namespace bayesdr;

namespace {

PosteriorDraws continuous_draws(const Eigen::MatrixXd& predictor, const Eigen::VectorXd& sigma2) {
  PosteriorDraws d;
  d.response_kind = VariableKind::continuous;
  d.linear_predictor = predictor;
  d.sigma2 = sigma2;
  return d;
}

WaicResult with_waic(double w) {
  WaicResult r;
  r.waic = w;
  return r;
}

Dataset additive_data(Eigen::Index n, bool nonlinear, std::uint64_t seed) {
  Rng rng(seed, 3);
  Eigen::MatrixXd x(n, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Eigen::VectorXd t(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t[i] = rng.bernoulli(normal_cdf(0.5 * x(i, 0))) ? 1.0 : 0.0;
    const double f = nonlinear ? 2.0 * std::sin(2.0 * x(i, 1)) + x(i, 2) * x(i, 2) : x(i, 1) - 0.5 * x(i, 2);
    y[i] = t[i] + f + 0.5 * rng.normal();
  }
  return Dataset(x, t, y, VariableKind::binary, VariableKind::continuous);
}

}  // namespace

TEST(PointwiseLoglik, ZeroResidualUnitVariance) {
  const Eigen::Vector3d y(0.5, -1.0, 2.0);
  Eigen::MatrixXd pred(2, 3);
  pred << y.transpose(), y.transpose();
  const auto ll = pointwise_loglik(continuous_draws(pred, Eigen::Vector2d(1.0, 1.0)), y);
  EXPECT_TRUE(((ll.array() + 0.5 * std::log(2 * std::numbers::pi)).abs() < 1e-15).all());
}

TEST(PointwiseLoglik, BinaryZeroPredictor) {
  PosteriorDraws d;
  d.response_kind = VariableKind::binary;
  d.linear_predictor = Eigen::MatrixXd::Zero(2, 4);
  d.sigma2 = Eigen::Vector2d::Ones();
  const auto ll = pointwise_loglik(d, Eigen::Vector4d(0, 1, 1, 0));
  EXPECT_TRUE(((ll.array() - std::log(0.5)).abs() < 1e-15).all());
}

TEST(PointwiseLoglik, UsesRoleResponse) {
  const Dataset data = additive_data(20, false, 1);
  PosteriorDraws d = continuous_draws(Eigen::MatrixXd::Zero(2, 20), Eigen::Vector2d::Ones());
  d.role = ModelRole::outcome;
  EXPECT_EQ(pointwise_loglik(d, data), pointwise_loglik(d, data.y()));
  d.role = ModelRole::treatment;
  EXPECT_EQ(pointwise_loglik(d, data), pointwise_loglik(d, data.t()));
}

TEST(Waic, HandCase) {
  Eigen::MatrixXd ll(2, 1);
  ll << std::log(0.5), std::log(0.25);
  const auto w = waic(ll);
  EXPECT_NEAR(w.lppd, std::log(0.375), 1e-10);
  const double var = 0.5 * std::pow(std::log(0.5) - std::log(0.25), 2);
  EXPECT_NEAR(w.p_waic, var, 1e-10);
  EXPECT_NEAR(w.p_waic, 0.24023, 1e-5);
  EXPECT_NEAR(w.waic, -2.0 * (std::log(0.375) - var), 1e-10);
  EXPECT_NEAR(w.waic, 2.44212, 1e-5);
}

TEST(Waic, IdenticalDrawsHaveNoPenalty) {
  Eigen::MatrixXd ll(5, 3);
  ll.rowwise() = Eigen::RowVector3d(-1.0, -0.2, -3.5);
  const auto w = waic(ll);
  EXPECT_EQ(w.p_waic, 0.0);
  EXPECT_NEAR(w.waic, -2.0 * (-1.0 - 0.2 - 3.5), 1e-12);
  EXPECT_NEAR(w.per_obs.sum(), w.waic, 1e-12);
}

TEST(Waic, ShiftChangesOnlyLppd) {
  Rng rng(2, 2);
  Eigen::MatrixXd ll(50, 10);
  for (Eigen::Index i = 0; i < ll.size(); ++i) ll.data()[i] = -1.0 + 0.3 * rng.normal();
  const auto a = waic(ll);
  const auto b = waic((ll.array() + 2.0).matrix());
  EXPECT_NEAR(b.lppd - a.lppd, 20.0, 1e-10);
  EXPECT_NEAR(b.p_waic, a.p_waic, 1e-12);
}

TEST(Waic, StableForLargeMagnitudes) {
  Eigen::MatrixXd ll(2, 1);
  ll << -1000.0, -1001.0;
  const auto w = waic(ll);
  EXPECT_TRUE(std::isfinite(w.lppd));
  EXPECT_NEAR(w.lppd, -1000.0 + std::log((1.0 + std::exp(-1.0)) / 2.0), 1e-10);
}

TEST(Waic, NeedsTwoDraws) { EXPECT_THROW(waic(Eigen::MatrixXd::Zero(1, 4)), RequiresTwoDraws); }

TEST(SelectModel, ArgminWithTiesToEarlier) {
  EXPECT_EQ(select_model({with_waic(100), with_waic(98), with_waic(105)}), 1u);
  EXPECT_EQ(select_model({with_waic(50), with_waic(60), with_waic(50)}), 0u);
  EXPECT_THROW(select_model({}), ConfigError);
}

TEST(SelectModel, AutoPrefersFlexibleFamiliesOnlyWhenNeeded) {
  AnalysisConfig cfg;
  cfg.family.reset();
  cfg.mcmc.n_iter = 1000;
  cfg.mcmc.burn_in = 500;
  int linear_wins = 0, nonlinear_flexible = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    cfg.mcmc.seed = seed + 1;
    const auto lin = fit_models(additive_data(150, false, 10 + seed), cfg);
    linear_wins += lin.outcome.chosen().family == Family::linear;
    const auto non = fit_models(additive_data(150, true, 20 + seed), cfg);
    nonlinear_flexible += non.outcome.chosen().family != Family::linear;
    ASSERT_EQ(non.outcome.candidates.size(), 3u);
    EXPECT_EQ(select_model({non.outcome.candidates[0].waic, non.outcome.candidates[1].waic,
                            non.outcome.candidates[2].waic}),
              non.outcome.selected);
  }
  EXPECT_GE(linear_wins, 2);
  EXPECT_EQ(nonlinear_flexible, 3);
}
