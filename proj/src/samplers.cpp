#include "bayesdr/samplers.hpp"

#include <cmath>
#include <limits>

#include "bayesdr/errors.hpp"

namespace bayesdr {

const char* to_string(Family family) {
  switch (family) {
    case Family::linear: return "linear";
    case Family::spline: return "spline";
    case Family::gp: return "gp";
  }
  return "?";
}

const char* to_string(ModelRole role) {
  return role == ModelRole::outcome ? "outcome" : "treatment";
}

Family parse_family(const std::string& name) {
  if (name == "linear") return Family::linear;
  if (name == "spline") return Family::spline;
  if (name == "gp") return Family::gp;
  throw ConfigError("unknown prior family '" + name + "'");
}

void PriorSpec::validate() const {
  if (family == Family::spline && df < 1) throw ConfigError("spline df must be >= 1");
  if (family == Family::gp && !(phi > 0.0)) throw NonPositiveBandwidth(phi);
  const double required[] = {a_theta, a_sigma2, b_sigma2, a_sigma_beta2, b_sigma_beta2, k_t};
  for (double v : required) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("prior hyperparameters must be positive");
  }
  if (!std::isfinite(b_theta)) throw ConfigError("b_theta must be finite");
}

std::size_t McmcConfig::saved_draws() const {
  if (n_iter <= burn_in || thin < 1) return 0;
  return static_cast<std::size_t>((n_iter - burn_in) / thin);
}

void McmcConfig::validate() const {
  if (burn_in < 0) throw ConfigError("burn-in must be >= 0");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (n_iter <= burn_in) throw ConfigError("number of iterations must exceed burn-in");
  if (saved_draws() < 2) {
    throw RequiresTwoDraws("MCMC settings keep " + std::to_string(saved_draws()) +
                           " posterior draws; at least 2 are required");
  }
}

Eigen::RowVectorXd TreatmentEncoding::row(double t) const {
  Eigen::RowVectorXd r(width());
  r[0] = 1.0;
  if (term == TreatmentTerm::linear) {
    r[1] = t;
  } else if (term == TreatmentTerm::cubic) {
    const double s = (t - center) / scale;
    r[1] = s;
    r[2] = s * s;
    r[3] = s * s * s;
  }
  return r;
}

Eigen::MatrixXd TreatmentEncoding::design(const Eigen::VectorXd& t) const {
  Eigen::MatrixXd z(t.size(), width());
  for (Eigen::Index i = 0; i < t.size(); ++i) z.row(i) = row(t[i]);
  return z;
}

std::size_t ModelState::active_count() const {
  std::size_t k = 0;
  for (auto g : gamma) k += g;
  return k;
}

void check_state(const ModelState& state, Family family) {
  if (state.gamma.size() != state.effects.size()) throw NumericError("state size mismatch");
  for (std::size_t j = 0; j < state.gamma.size(); ++j) {
    if (state.gamma[j] == 0 && state.effects[j].size() != 0) {
      throw NumericError("excluded covariate carries a nonzero effect");
    }
    if (state.gamma[j] == 1 && state.effects[j].size() == 0) {
      throw NumericError("included covariate has no effect");
    }
    if (!state.effects[j].allFinite()) throw NumericError("non-finite effect");
  }
  if (!(state.sigma2 > 0.0) || !std::isfinite(state.sigma2)) throw NumericError("sigma2 must be positive");
  if (!(state.theta > 0.0 && state.theta < 1.0)) throw NumericError("theta outside (0, 1)");
  if (family == Family::gp) {
    for (double t : state.tau2) {
      if (!(t > 0.0)) throw NumericError("tau2 must be positive");
    }
  }
  if (!state.intercept_block.allFinite()) throw NumericError("non-finite intercept block");
}

double PosteriorDraws::predictor_at(std::size_t b, Eigen::Index i, double t) const {
  const auto bi = static_cast<Eigen::Index>(b);
  return treatment.row(t).dot(intercept_block.row(bi)) + covariate_effect(bi, i);
}

double PosteriorDraws::mean_at(std::size_t b, Eigen::Index i, double t) const {
  const double eta = predictor_at(b, i, t);
  return response_kind == VariableKind::binary ? normal_cdf(eta) : eta;
}

GibbsSampler::GibbsSampler(const Dataset& data, ModelRole role, PriorSpec prior, RngStream stream)
    : n_(data.n()), p_(data.p()), role_(role), prior_(prior), rng_(stream) {
  prior_.validate();
  if (role == ModelRole::outcome) {
    response_ = data.y();
    kind_ = data.y_kind();
    if (data.t_kind() == VariableKind::binary) {
      encoding_.term = TreatmentTerm::linear;
    } else {
      encoding_.term = TreatmentTerm::cubic;
      encoding_.center = data.t().mean();
      encoding_.scale = std::sqrt((data.t().array() - encoding_.center).square().sum() /
                                  static_cast<double>(n_ - 1));
      if (!(encoding_.scale > 0.0)) throw ZeroVarianceColumn(0);
    }
    z_ = encoding_.design(data.t());
  } else {
    response_ = data.t();
    kind_ = data.t_kind();
    z_ = Eigen::MatrixXd::Ones(n_, 1);
  }
  if (kind_ == VariableKind::binary) {
    const double ones = response_.sum();
    if (ones < 0.5 || ones > static_cast<double>(n_) - 0.5) {
      throw DegenerateResponse(std::string(to_string(role)) + " is binary but has a single class");
    }
  }
  ztz_ = z_.transpose() * z_;

  const auto pu = static_cast<std::size_t>(p_);
  switch (prior_.family) {
    case Family::linear:
      for (Eigen::Index j = 0; j < p_; ++j) design_.emplace_back(data.x().col(j));
      break;
    case Family::spline:
      for (Eigen::Index j = 0; j < p_; ++j) {
        design_.push_back(spline_basis(data.x().col(j), prior_.df).basis);
      }
      break;
    case Family::gp:
      kernels_.reserve(pu);
      for (Eigen::Index j = 0; j < p_; ++j) {
        kernels_.push_back(gp_kernel(data.x().col(j), prior_.phi));
        floored_.push_back(kernels_.back().floored_eigenvalues());
        // The kernel matrix itself is not needed by the chain.
        kernels_.back().sigma.resize(0, 0);
      }
      eigen_coords_.assign(pu, Eigen::VectorXd());
      break;
  }
  for (const auto& d : design_) gram_.push_back(d.transpose() * d);

  state_.gamma.assign(pu, 0);
  state_.effects.assign(pu, Eigen::VectorXd());
  if (prior_.family == Family::gp) state_.tau2 = Eigen::VectorXd::Ones(p_);
  const double b_theta = prior_.resolved_b_theta(p_);
  state_.theta = prior_.a_theta / (prior_.a_theta + b_theta);
  state_.sigma_beta2 = 1.0;
  state_.sigma2 = 1.0;

  if (kind_ == VariableKind::binary) {
    state_.latent = (response_.array() > 0.5).select(Eigen::VectorXd::Constant(n_, 0.5),
                                                     Eigen::VectorXd::Constant(n_, -0.5));
  }
  const Eigen::VectorXd& start = kind_ == VariableKind::binary ? state_.latent : response_;
  Eigen::MatrixXd precision = ztz_;
  precision.diagonal().array() += 1.0 / prior_.k_t;
  state_.intercept_block = precision.ldlt().solve(z_.transpose() * start);
  if (kind_ == VariableKind::continuous) {
    const Eigen::VectorXd resid = start - z_ * state_.intercept_block;
    state_.sigma2 = std::max(resid.squaredNorm() / static_cast<double>(n_), 1e-8);
  }
  rebuild_cache();
}

void GibbsSampler::rebuild_cache() {
  const auto pu = static_cast<std::size_t>(p_);
  ystar_ = kind_ == VariableKind::binary ? state_.latent : response_;
  zc_ = z_ * state_.intercept_block;
  h_ = Eigen::VectorXd::Zero(n_);
  contrib_.assign(pu, Eigen::VectorXd::Zero(n_));
  for (std::size_t j = 0; j < pu; ++j) {
    if (state_.gamma[j] == 0) continue;
    if (prior_.family == Family::gp) {
      contrib_[j] = state_.effects[j];
      eigen_coords_[j] = kernels_[j].eigenvectors.transpose() * state_.effects[j];
    } else {
      contrib_[j] = design_[j] * state_.effects[j];
    }
    h_ += contrib_[j];
  }
}

void GibbsSampler::set_state(ModelState state) {
  if (state.gamma.size() != static_cast<std::size_t>(p_) || state.effects.size() != state.gamma.size()) {
    throw ConfigError("state dimension does not match the model");
  }
  if (kind_ == VariableKind::binary && state.latent.size() != n_) {
    throw ConfigError("binary model state needs a latent vector of length n");
  }
  state_ = std::move(state);
  rebuild_cache();
}

void GibbsSampler::set_response(const Eigen::VectorXd& y) {
  if (kind_ != VariableKind::continuous) throw ConfigError("set_response needs a continuous response");
  if (y.size() != n_) throw ConfigError("response length mismatch");
  response_ = y;
  ystar_ = y;
}

Eigen::VectorXd GibbsSampler::draw_mvn_precision(const Eigen::MatrixXd& precision,
                                                 const Eigen::VectorXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericError("posterior precision is not positive definite");
  Eigen::VectorXd mean = llt.solve(rhs);
  Eigen::VectorXd z(rhs.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng_.normal();
  // L^T x = z gives Cov(x) = (L L^T)^{-1}.
  Eigen::VectorXd noise = llt.matrixU().solve(z);
  return mean + noise;
}

void GibbsSampler::step_latent() {
  if (kind_ != VariableKind::binary) return;
  for (Eigen::Index i = 0; i < n_; ++i) {
    const double eta = zc_[i] + h_[i];
    state_.latent[i] = rng_.truncated_normal_unit(eta, response_[i] > 0.5);
  }
  ystar_ = state_.latent;
}

GibbsSampler::SlabPosterior GibbsSampler::slab_posterior(Eigen::Index j) const {
  const auto ju = static_cast<std::size_t>(j);
  const Eigen::VectorXd partial = ystar_ - zc_ - h_ + contrib_[ju];
  const double s2 = state_.sigma2;
  SlabPosterior post;
  if (prior_.family == Family::gp) {
    // Eigenbasis of Sigma_j: posterior precision is diagonal there.
    post.rhs = kernels_[ju].eigenvectors.transpose() * partial;
    const Eigen::ArrayXd tb = state_.tau2[j] * floored_[ju].array();
    post.shrink = (tb / (1.0 + tb)).matrix();
    post.log_bf = -0.5 * tb.log1p().sum() +
                  0.5 * (post.shrink.array() * post.rhs.array().square()).sum() / s2;
    return post;
  }
  const double prior_var = s2 * state_.sigma_beta2;
  post.precision = gram_[ju] / s2;
  post.precision.diagonal().array() += 1.0 / prior_var;
  post.rhs = design_[ju].transpose() * partial / s2;
  Eigen::LLT<Eigen::MatrixXd> llt(post.precision);
  const Eigen::VectorXd mean = llt.solve(post.rhs);
  const double log_det_precision = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  post.log_bf = -0.5 * static_cast<double>(post.rhs.size()) * std::log(prior_var) -
                0.5 * log_det_precision + 0.5 * post.rhs.dot(mean);
  return post;
}

double GibbsSampler::log_bayes_factor(Eigen::Index j) const { return slab_posterior(j).log_bf; }

void GibbsSampler::step_gamma_beta(Eigen::Index j) {
  const auto ju = static_cast<std::size_t>(j);
  const SlabPosterior post = slab_posterior(j);
  const double theta = state_.theta;
  const double log_bf = post.log_bf;

  const double draw = rng_.uniform();
  bool include;
  if (force_inclusion_ || theta >= 1.0) {
    include = true;
  } else if (theta <= 0.0) {
    include = false;
  } else {
    // P(gamma = 1) = w1 / (w1 + w0), w1 = theta * BF, w0 = 1 - theta.
    const double log_odds = std::log(theta) - std::log1p(-theta) + log_bf;
    const double prob = log_odds >= 0.0 ? 1.0 / (1.0 + std::exp(-log_odds))
                                        : std::exp(log_odds) / (1.0 + std::exp(log_odds));
    include = draw < prob;
  }

  Eigen::VectorXd new_contrib;
  if (include) {
    if (prior_.family == Family::gp) {
      Eigen::VectorXd w(n_);
      const double sd = std::sqrt(state_.sigma2);
      for (Eigen::Index k = 0; k < n_; ++k) {
        w[k] = post.shrink[k] * post.rhs[k] + sd * std::sqrt(post.shrink[k]) * rng_.normal();
      }
      new_contrib = kernels_[ju].eigenvectors * w;
      eigen_coords_[ju] = std::move(w);
      state_.effects[ju] = new_contrib;
    } else {
      state_.effects[ju] = draw_mvn_precision(post.precision, post.rhs);
      new_contrib = design_[ju] * state_.effects[ju];
    }
    state_.gamma[ju] = 1;
  } else {
    state_.gamma[ju] = 0;
    state_.effects[ju].resize(0);
    if (prior_.family == Family::gp) eigen_coords_[ju].resize(0);
    new_contrib = Eigen::VectorXd::Zero(n_);
  }
  h_ += new_contrib - contrib_[ju];
  contrib_[ju] = std::move(new_contrib);
}

double GibbsSampler::gp_quadratic_form(Eigen::Index j) const {
  const auto ju = static_cast<std::size_t>(j);
  if (state_.gamma[ju] == 0) return 0.0;
  return (eigen_coords_[ju].array().square() / floored_[ju].array()).sum();
}

void GibbsSampler::step_tau2(Eigen::Index j) {
  if (prior_.family != Family::gp) return;
  const auto ju = static_cast<std::size_t>(j);
  if (state_.gamma[ju] == 0) {
    state_.tau2[j] = rng_.gamma(0.5, 0.5);
  } else {
    // Gamma(1/2, 1/2) prior times the N(0, sigma2 tau2 Sigma) slab.
    const double lambda = 0.5 * static_cast<double>(1 - n_);
    state_.tau2[j] = rng_.gig(lambda, gp_quadratic_form(j) / state_.sigma2, 1.0);
  }
  state_.tau2[j] = std::max(state_.tau2[j], 1e-300);
}

double GibbsSampler::slab_sum_squares() const {
  double ss = 0.0;
  for (std::size_t j = 0; j < state_.effects.size(); ++j) {
    if (state_.gamma[j]) ss += state_.effects[j].squaredNorm();
  }
  return ss;
}

void GibbsSampler::step_sigma_beta2() {
  if (prior_.family == Family::gp) return;
  const double d = prior_.family == Family::spline ? prior_.df : 1.0;
  const double shape = prior_.a_sigma_beta2 + 0.5 * d * static_cast<double>(state_.active_count());
  const double scale = prior_.b_sigma_beta2 + slab_sum_squares() / (2.0 * state_.sigma2);
  state_.sigma_beta2 = rng_.inv_gamma(shape, scale);
}

std::pair<double, double> GibbsSampler::theta_posterior() const {
  const auto active = static_cast<double>(state_.active_count());
  return {prior_.a_theta + active,
          prior_.resolved_b_theta(p_) + static_cast<double>(p_) - active};
}

void GibbsSampler::step_theta() {
  const auto [a, b] = theta_posterior();
  state_.theta = rng_.beta(a, b);
}

std::pair<double, double> GibbsSampler::sigma2_posterior() const {
  const double rss = (ystar_ - zc_ - h_).squaredNorm();
  const auto active = static_cast<double>(state_.active_count());
  const auto n = static_cast<double>(n_);
  if (prior_.family == Family::gp) {
    double penalty = 0.0;
    for (Eigen::Index j = 0; j < p_; ++j) {
      if (state_.gamma[static_cast<std::size_t>(j)]) penalty += gp_quadratic_form(j) / (2.0 * state_.tau2[j]);
    }
    return {prior_.a_sigma2 + 0.5 * n * (1.0 + active), prior_.b_sigma2 + 0.5 * rss + penalty};
  }
  const double d = prior_.family == Family::spline ? prior_.df : 1.0;
  return {prior_.a_sigma2 + 0.5 * n + 0.5 * d * active,
          prior_.b_sigma2 + 0.5 * rss + slab_sum_squares() / (2.0 * state_.sigma_beta2)};
}

void GibbsSampler::step_sigma2() {
  if (kind_ == VariableKind::binary) {
    state_.sigma2 = 1.0;
    return;
  }
  const auto [shape, scale] = sigma2_posterior();
  state_.sigma2 = rng_.inv_gamma(shape, scale);
}

void GibbsSampler::step_intercept_treatment() {
  const Eigen::VectorXd partial = ystar_ - h_;
  Eigen::MatrixXd precision = ztz_ / state_.sigma2;
  precision.diagonal().array() += 1.0 / prior_.k_t;
  const Eigen::VectorXd rhs = z_.transpose() * partial / state_.sigma2;
  state_.intercept_block = draw_mvn_precision(precision, rhs);
  zc_ = z_ * state_.intercept_block;
}

void GibbsSampler::scan() {
  step_latent();
  for (Eigen::Index j = 0; j < p_; ++j) step_gamma_beta(j);
  for (Eigen::Index j = 0; j < p_; ++j) step_tau2(j);
  step_sigma_beta2();
  step_theta();
  step_sigma2();
  step_intercept_treatment();
}

RngStream model_stream(std::uint64_t seed, ModelRole role, Family family) {
  const std::uint64_t id = 0x100 + 0x10 * static_cast<std::uint64_t>(role) + static_cast<std::uint64_t>(family);
  return RngStream{seed, id};
}

PosteriorDraws fit_model(const Dataset& data, ModelRole role, const PriorSpec& prior,
                         const McmcConfig& cfg) {
  cfg.validate();
  GibbsSampler sampler(data, role, prior, model_stream(cfg.seed, role, prior.family));
  const std::size_t b_total = cfg.saved_draws();
  const auto bn = static_cast<Eigen::Index>(b_total);
  const Eigen::Index n = data.n();

  PosteriorDraws out;
  out.role = role;
  out.prior = prior;
  out.response_kind = sampler.response_kind();
  out.treatment = sampler.treatment_encoding();
  out.states.reserve(b_total);
  out.linear_predictor.resize(bn, n);
  out.covariate_effect.resize(bn, n);
  out.intercept_block.resize(bn, out.treatment.width());
  out.sigma2.resize(bn);
  if (out.response_kind == VariableKind::binary) out.fitted_prob.resize(bn, n);
  out.inclusion_prob = Eigen::VectorXd::Zero(data.p());

  Eigen::Index saved = 0;
  for (int iter = 0; iter < cfg.n_iter && saved < bn; ++iter) {
    sampler.scan();
    if (iter < cfg.burn_in || (iter - cfg.burn_in) % cfg.thin != cfg.thin - 1) continue;
    const ModelState& s = sampler.state();
    out.states.push_back(s);
    out.covariate_effect.row(saved) = sampler.covariate_effect().transpose();
    out.linear_predictor.row(saved) = sampler.linear_predictor().transpose();
    out.intercept_block.row(saved) = s.intercept_block.transpose();
    out.sigma2[saved] = s.sigma2;
    for (std::size_t j = 0; j < s.gamma.size(); ++j) {
      out.inclusion_prob[static_cast<Eigen::Index>(j)] += s.gamma[j];
    }
    if (out.response_kind == VariableKind::binary) {
      for (Eigen::Index i = 0; i < n; ++i) {
        out.fitted_prob(saved, i) =
            std::clamp(normal_cdf(out.linear_predictor(saved, i)), 1e-15, 1.0 - 1e-15);
      }
    }
    ++saved;
  }
  out.inclusion_prob /= static_cast<double>(bn);
  return out;
}

}  // namespace bayesdr
