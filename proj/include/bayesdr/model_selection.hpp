#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bayesdr/dataset.hpp"
#include "bayesdr/samplers.hpp"

namespace bayesdr {

struct WaicResult {
  double lppd = 0.0;
  double p_waic = 0.0;
  double waic = 0.0;
  Eigen::VectorXd per_obs;  ///< -2 (lppd_i - p_waic_i)
};

/// B x n log-likelihood of the observed response under each saved draw:
/// Normal at the fitted mean and sigma^2, or Bernoulli at Phi(predictor).
Eigen::MatrixXd pointwise_loglik(const PosteriorDraws& draws, const Dataset& data);
/// Same, given the observed response directly.
Eigen::MatrixXd pointwise_loglik(const PosteriorDraws& draws, const Eigen::VectorXd& response);

/// Throws RequiresTwoDraws when B < 2.
WaicResult waic(const Eigen::MatrixXd& loglik);

/// Index of the smallest WAIC; `results` is ordered from least to most
/// flexible so ties go to the earlier entry.
std::size_t select_model(const std::vector<WaicResult>& results);

}  // namespace bayesdr
