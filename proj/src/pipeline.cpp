#include "bayesdr/pipeline.hpp"

#include "bayesdr/errors.hpp"
#include "bayesdr/parallel.hpp"

namespace bayesdr {

void AnalysisConfig::validate() const {
  prior.validate();
  mcmc.validate();
  if (bootstrap < 2) throw ConfigError("bootstrap must be at least 2");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  if (grid_size < 2) throw ConfigError("grid must have at least 2 points");
}

const FamilyFit* RoleFit::find(Family family) const {
  for (const auto& c : candidates) {
    if (c.family == family) return &c;
  }
  return nullptr;
}

FittedModels fit_models(const Dataset& data, const AnalysisConfig& cfg) {
  cfg.validate();
  std::vector<Family> families;
  if (cfg.family) {
    families.push_back(*cfg.family);
  } else {
    families = {Family::linear, Family::spline, Family::gp};
  }
  const ModelRole roles[] = {ModelRole::treatment, ModelRole::outcome};
  std::vector<FamilyFit> fits(2 * families.size());
  parallel_for(fits.size(), cfg.threads, [&](std::size_t k) {
    const ModelRole role = roles[k / families.size()];
    PriorSpec prior = cfg.prior;
    prior.family = families[k % families.size()];
    FamilyFit& fit = fits[k];
    fit.family = prior.family;
    fit.draws = fit_model(data, role, prior, cfg.mcmc);
    fit.waic = waic(pointwise_loglik(fit.draws, data));
  });

  FittedModels out;
  out.treatment.role = ModelRole::treatment;
  out.outcome.role = ModelRole::outcome;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    RoleFit& target = k < families.size() ? out.treatment : out.outcome;
    target.candidates.push_back(std::move(fits[k]));
  }
  for (RoleFit* r : {&out.treatment, &out.outcome}) {
    std::vector<WaicResult> table;
    for (const auto& c : r->candidates) table.push_back(c.waic);
    r->selected = select_model(table);
  }
  return out;
}

RngStream bootstrap_stream(std::uint64_t seed) { return RngStream{seed, 0x200}; }

AteAnalysis estimate_ate_all(const Dataset& data, FittedModels models, const AnalysisConfig& cfg) {
  if (data.t_kind() != VariableKind::binary) throw ConfigError("ATE needs a binary treatment column");
  const BinaryDraws draws = binary_draws(models.treatment.chosen().draws, models.outcome.chosen().draws);
  const auto rows = bootstrap_rows(static_cast<std::size_t>(data.n()), cfg.bootstrap,
                                   bootstrap_stream(cfg.mcmc.seed), both_arms_filter(data.t()));
  AteAnalysis a;
  const std::uint64_t seed = cfg.mcmc.seed;
  a.dr = estimate_ate(data, draws, BinaryEstimand::dr, rows, cfg.level, seed, cfg.threads);
  a.ipw = estimate_ate(data, draws, BinaryEstimand::ipw, rows, cfg.level, seed, cfg.threads);
  a.reg = estimate_ate(data, draws, BinaryEstimand::reg, rows, cfg.level, seed, cfg.threads);
  a.models = std::move(models);
  return a;
}

AteAnalysis run_ate(const Dataset& data, const AnalysisConfig& cfg) {
  if (data.t_kind() != VariableKind::binary) throw ConfigError("ATE needs a binary treatment column");
  return estimate_ate_all(data, fit_models(data, cfg), cfg);
}

CurveAnalysis run_curve(const Dataset& data, const AnalysisConfig& cfg, Eigen::VectorXd grid) {
  if (data.t_kind() != VariableKind::continuous) {
    throw ConfigError("curve estimation needs a continuous treatment column");
  }
  cfg.validate();
  CurveAnalysis a;
  a.grid = grid.size() > 0 ? std::move(grid) : default_grid(data.t(), cfg.grid_size);
  a.models = fit_models(data, cfg);
  const auto rows = bootstrap_rows(static_cast<std::size_t>(data.n()), cfg.bootstrap,
                                   bootstrap_stream(cfg.mcmc.seed));
  const std::uint64_t seed = cfg.mcmc.seed;
  a.dr = summarize_curve("curve_dr", a.grid,
                         curve_deltas(data, a.models.outcome.chosen().draws,
                                      a.models.treatment.chosen().draws, a.grid, rows, cfg.threads),
                         cfg.level, seed);
  for (const auto& c : a.models.outcome.candidates) {
    a.regression.emplace_back(
        c.family, summarize_curve(std::string("curve_reg_") + to_string(c.family), a.grid,
                                  regression_curve_deltas(c.draws, a.grid, rows, cfg.threads),
                                  cfg.level, seed));
  }
  return a;
}

}  // namespace bayesdr
