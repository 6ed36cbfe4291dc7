#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "bayesdr/dataset.hpp"
#include "bayesdr/inference.hpp"
#include "bayesdr/model_selection.hpp"
#include "bayesdr/samplers.hpp"

namespace bayesdr {

/// Everything needed to go from a Dataset to estimates.
struct AnalysisConfig {
  /// Fixed family for both models; empty means fit every family and pick
  /// the lowest WAIC per model.
  std::optional<Family> family = Family::linear;
  PriorSpec prior;  ///< family field is overridden per fit
  McmcConfig mcmc;
  std::size_t bootstrap = kDefaultBootstrap;
  double level = 0.95;
  std::size_t grid_size = 20;
  std::size_t threads = 1;

  void validate() const;
};

struct FamilyFit {
  Family family = Family::linear;
  PosteriorDraws draws;
  WaicResult waic;
};

struct RoleFit {
  ModelRole role = ModelRole::outcome;
  std::vector<FamilyFit> candidates;  ///< ordered linear, spline, gp when auto
  std::size_t selected = 0;

  const FamilyFit& chosen() const { return candidates[selected]; }
  /// Candidate of the given family, or nullptr when it was not fitted.
  const FamilyFit* find(Family family) const;
};

struct FittedModels {
  RoleFit treatment;
  RoleFit outcome;
};

/// Fits the treatment and outcome models. Candidate fits run in parallel;
/// each uses its own stream so results do not depend on `threads`.
FittedModels fit_models(const Dataset& data, const AnalysisConfig& cfg);

/// Stream used for the bootstrap rows of an analysis.
RngStream bootstrap_stream(std::uint64_t seed);

struct AteAnalysis {
  FittedModels models;
  EstimateReport dr;
  EstimateReport ipw;
  EstimateReport reg;
};

AteAnalysis run_ate(const Dataset& data, const AnalysisConfig& cfg);
/// Estimation step only, for callers that already hold fitted models.
AteAnalysis estimate_ate_all(const Dataset& data, FittedModels models, const AnalysisConfig& cfg);

struct CurveAnalysis {
  FittedModels models;
  Eigen::VectorXd grid;
  CurveReport dr;
  /// Regression curves from every fitted outcome family.
  std::vector<std::pair<Family, CurveReport>> regression;
};

/// An empty grid is replaced by default_grid(t, cfg.grid_size).
CurveAnalysis run_curve(const Dataset& data, const AnalysisConfig& cfg, Eigen::VectorXd grid = {});

}  // namespace bayesdr
