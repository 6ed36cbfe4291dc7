#include "bayesdr/model_selection.hpp"

#include <cmath>
#include <numbers>

#include "bayesdr/errors.hpp"

namespace bayesdr {

Eigen::MatrixXd pointwise_loglik(const PosteriorDraws& draws, const Eigen::VectorXd& response) {
  const auto B = static_cast<Eigen::Index>(draws.draws());
  const Eigen::Index n = draws.n();
  if (response.size() != n) throw ConfigError("response length does not match the fitted model");
  Eigen::MatrixXd ll(B, n);
  if (draws.response_kind == VariableKind::binary) {
    for (Eigen::Index b = 0; b < B; ++b) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double eta = draws.linear_predictor(b, i);
        ll(b, i) = response[i] == 1.0 ? normal_log_cdf(eta) : normal_log_cdf(-eta);
      }
    }
  } else {
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    for (Eigen::Index b = 0; b < B; ++b) {
      const double s2 = draws.sigma2[b];
      const double c = -0.5 * (log_2pi + std::log(s2));
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = response[i] - draws.linear_predictor(b, i);
        ll(b, i) = c - 0.5 * r * r / s2;
      }
    }
  }
  return ll;
}

Eigen::MatrixXd pointwise_loglik(const PosteriorDraws& draws, const Dataset& data) {
  return pointwise_loglik(draws, draws.role == ModelRole::outcome ? data.y() : data.t());
}

WaicResult waic(const Eigen::MatrixXd& loglik) {
  const Eigen::Index B = loglik.rows(), n = loglik.cols();
  if (B < 2) throw RequiresTwoDraws("WAIC needs at least 2 posterior draws");
  WaicResult r;
  r.per_obs.resize(n);
  const double log_b = std::log(static_cast<double>(B));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto col = loglik.col(i).array();
    const double top = col.maxCoeff();
    const double lppd_i = top + std::log((col - top).exp().sum()) - log_b;
    const double mean = col.mean();
    const double var_i = (col - mean).square().sum() / static_cast<double>(B - 1);
    r.lppd += lppd_i;
    r.p_waic += var_i;
    r.per_obs[i] = -2.0 * (lppd_i - var_i);
  }
  r.waic = -2.0 * (r.lppd - r.p_waic);
  return r;
}

std::size_t select_model(const std::vector<WaicResult>& results) {
  if (results.empty()) throw ConfigError("no models to select from");
  std::size_t best = 0;
  for (std::size_t k = 1; k < results.size(); ++k) {
    if (results[k].waic < results[best].waic) best = k;
  }
  return best;
}

}  // namespace bayesdr
