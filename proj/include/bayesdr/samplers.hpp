#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bayesdr/bases.hpp"
#include "bayesdr/dataset.hpp"
#include "bayesdr/rng.hpp"

namespace bayesdr {

enum class Family { linear, spline, gp };
enum class ModelRole { outcome, treatment };

const char* to_string(Family family);
const char* to_string(ModelRole role);
Family parse_family(const std::string& name);

/// Prior hyperparameters for one spike-and-slab additive model.
struct PriorSpec {
  Family family = Family::linear;
  int df = 3;          ///< spline columns per covariate
  double phi = 1.0;    ///< GP bandwidth on standardized covariates
  double a_theta = 1.0;
  double b_theta = 0.0;  ///< <= 0 means "use p"
  double a_sigma2 = 0.01;
  double b_sigma2 = 0.01;
  double a_sigma_beta2 = 0.01;
  double b_sigma_beta2 = 0.01;
  double k_t = 1e4;    ///< prior variance of the intercept / treatment block

  double resolved_b_theta(Eigen::Index p) const {
    return b_theta > 0.0 ? b_theta : static_cast<double>(p);
  }
  void validate() const;
};

struct McmcConfig {
  int n_iter = 2000;
  int burn_in = 1000;
  int thin = 2;
  std::uint64_t seed = 1;

  /// floor((n_iter - burn_in) / thin)
  std::size_t saved_draws() const;
  /// ConfigError on inconsistent counts, RequiresTwoDraws when fewer than
  /// two draws would be saved.
  void validate() const;
};

/// How the treatment enters the outcome model's intercept block.
enum class TreatmentTerm { none, linear, cubic };

struct TreatmentEncoding {
  TreatmentTerm term = TreatmentTerm::none;
  double center = 0.0;
  double scale = 1.0;

  Eigen::Index width() const { return term == TreatmentTerm::none ? 1 : term == TreatmentTerm::linear ? 2 : 4; }
  /// Row of the intercept-block design at treatment value t.
  Eigen::RowVectorXd row(double t) const;
  Eigen::MatrixXd design(const Eigen::VectorXd& t) const;
};

/// One state of the Gibbs chain.
struct ModelState {
  std::vector<std::uint8_t> gamma;
  /// Coefficients (linear: size 1, spline: size df) or GP function values
  /// at the observed points (size n). Empty exactly when gamma_j == 0.
  std::vector<Eigen::VectorXd> effects;
  Eigen::VectorXd tau2;  ///< GP family only
  double theta = 0.5;
  double sigma2 = 1.0;
  double sigma_beta2 = 1.0;
  Eigen::VectorXd intercept_block;  ///< (beta_0, treatment coefficients...)
  Eigen::VectorXd latent;           ///< binary response only

  std::size_t active_count() const;
};

/// Throws NumericError naming the violated ModelState invariant.
void check_state(const ModelState& state, Family family);

/// Saved draws of one fitted model.
struct PosteriorDraws {
  ModelRole role = ModelRole::outcome;
  PriorSpec prior;
  VariableKind response_kind = VariableKind::continuous;
  TreatmentEncoding treatment;
  std::vector<ModelState> states;
  Eigen::MatrixXd linear_predictor;  ///< B x n at the observed treatment
  Eigen::MatrixXd covariate_effect;  ///< B x n, sum of covariate effects
  Eigen::MatrixXd intercept_block;   ///< B x width
  Eigen::MatrixXd fitted_prob;       ///< B x n, binary response only
  Eigen::VectorXd sigma2;            ///< B
  Eigen::VectorXd inclusion_prob;    ///< p

  std::size_t draws() const { return static_cast<std::size_t>(linear_predictor.rows()); }
  Eigen::Index n() const { return linear_predictor.cols(); }
  /// Linear predictor for row i under draw b with the treatment set to t.
  double predictor_at(std::size_t b, Eigen::Index i, double t) const;
  /// Mean on the response scale (probit link for binary responses).
  double mean_at(std::size_t b, Eigen::Index i, double t) const;
};

/// Gibbs sampler for one spike-and-slab additive model. The step methods
/// are public so individual full conditionals can be checked in isolation.
class GibbsSampler {
 public:
  GibbsSampler(const Dataset& data, ModelRole role, PriorSpec prior, RngStream stream);

  void step_latent();
  void step_gamma_beta(Eigen::Index j);
  void step_tau2(Eigen::Index j);
  void step_sigma_beta2();
  void step_theta();
  void step_sigma2();
  void step_intercept_treatment();
  /// latent -> (gamma, effect) sweep -> tau2 -> sigma_beta2 -> theta ->
  /// sigma2 -> intercept block.
  void scan();

  const ModelState& state() const { return state_; }
  /// Replaces the state and rebuilds cached fitted values.
  void set_state(ModelState state);
  /// Replaces the continuous working response (used by joint-distribution
  /// tests that resimulate data).
  void set_response(const Eigen::VectorXd& y);
  /// Keeps every gamma_j at 1 (conjugate-posterior checks).
  void set_force_inclusion(bool on) { force_inclusion_ = on; }

  const Eigen::VectorXd& working_response() const { return ystar_; }
  Eigen::VectorXd linear_predictor() const { return zc_ + h_; }
  const Eigen::VectorXd& covariate_effect() const { return h_; }
  /// Contribution f_j(X_j) of covariate j at the observed rows.
  const Eigen::VectorXd& contribution(Eigen::Index j) const { return contrib_[static_cast<std::size_t>(j)]; }
  const Eigen::MatrixXd& design(Eigen::Index j) const { return design_[static_cast<std::size_t>(j)]; }
  const Eigen::MatrixXd& intercept_design() const { return z_; }
  const TreatmentEncoding& treatment_encoding() const { return encoding_; }
  VariableKind response_kind() const { return kind_; }
  ModelRole role() const { return role_; }
  const PriorSpec& prior() const { return prior_; }

  /// (shape, scale) of the sigma^2 full conditional at the current state.
  std::pair<double, double> sigma2_posterior() const;
  /// Beta parameters of the theta full conditional.
  std::pair<double, double> theta_posterior() const;
  /// log Bayes factor N(0; 0, slab) / N(0; M, V) for covariate j, with the
  /// partial residual taken from the current state.
  double log_bayes_factor(Eigen::Index j) const;
  /// Quadratic form f_j' Sigma_j^{-1} f_j (GP family).
  double gp_quadratic_form(Eigen::Index j) const;

 private:
  Eigen::Index n_;
  Eigen::Index p_;
  ModelRole role_;
  PriorSpec prior_;
  VariableKind kind_;
  Rng rng_;
  Eigen::VectorXd response_;
  TreatmentEncoding encoding_;
  Eigen::MatrixXd z_;
  Eigen::MatrixXd ztz_;
  std::vector<Eigen::MatrixXd> design_;  ///< linear / spline
  std::vector<Eigen::MatrixXd> gram_;
  std::vector<GpKernel> kernels_;        ///< gp
  std::vector<Eigen::VectorXd> floored_;
  std::vector<Eigen::VectorXd> eigen_coords_;  ///< A^T f_j for active GP effects
  std::vector<Eigen::VectorXd> contrib_;
  ModelState state_;
  Eigen::VectorXd ystar_;
  Eigen::VectorXd zc_;
  Eigen::VectorXd h_;
  bool force_inclusion_ = false;

  /// Slab full conditional of covariate j given everything else. For GP
  /// effects rhs holds A^T (partial residual) and shrink the eigenbasis
  /// posterior weights; otherwise precision/rhs define MVN(P^{-1} rhs, P^{-1}).
  struct SlabPosterior {
    double log_bf = 0.0;
    Eigen::MatrixXd precision;
    Eigen::VectorXd rhs;
    Eigen::VectorXd shrink;
  };
  SlabPosterior slab_posterior(Eigen::Index j) const;
  double slab_sum_squares() const;
  void rebuild_cache();
  Eigen::VectorXd draw_mvn_precision(const Eigen::MatrixXd& precision, const Eigen::VectorXd& rhs);
};

/// Stream used by fit_model for a given role/family under a master seed.
RngStream model_stream(std::uint64_t seed, ModelRole role, Family family);

/// Runs the chain and returns the thinned post-burn-in draws. Throws
/// DegenerateResponse for an all-0 or all-1 binary response.
PosteriorDraws fit_model(const Dataset& data, ModelRole role, const PriorSpec& prior,
                         const McmcConfig& cfg);

}  // namespace bayesdr
