#include "bayesdr/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "bayesdr/csv.hpp"
#include "bayesdr/errors.hpp"
#include "bayesdr/run_config.hpp"

namespace bayesdr {

namespace {

struct Flag {
  const char* key;
  const char* help;
};

constexpr Flag kFlags[] = {
    {"input", "CSV file with a header row"},
    {"treatment-col", "treatment column name (default T)"},
    {"outcome-col", "outcome column name (default Y)"},
    {"prior", "covariate model family: linear, spline, gp or auto (WAIC selection)"},
    {"df", "spline basis functions per covariate"},
    {"phi", "GP kernel bandwidth"},
    {"draws", "total MCMC iterations"},
    {"burnin", "iterations discarded before saving"},
    {"thin", "save every thin-th iteration after burn-in"},
    {"bootstrap", "number of bootstrap datasets M"},
    {"level", "confidence level"},
    {"grid", "number of curve grid points"},
    {"seed", "master seed"},
    {"threads", "worker threads (0 = all cores)"},
    {"out", "output file prefix"},
    {"scenario", "simulation scenario"},
    {"reps", "simulation replications"},
    {"n", "simulated sample size (0 = scenario default)"},
    {"p", "simulated covariate count (0 = scenario default)"},
};

int exit_code(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  return 1;
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  Json j;
  j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  err << j.dump() << "\n";
}

Json data_json(const Dataset& d) {
  Json j;
  j["n"] = d.n();
  j["p"] = d.p();
  j["treatment_kind"] = to_string(d.t_kind());
  j["outcome_kind"] = to_string(d.y_kind());
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << content;
}

Json header(const RunConfig& cfg) {
  Json j;
  j["version"] = version();
  j["config"] = cfg.to_json();
  return j;
}

void log(std::ostream& err, const std::string& msg) { err << "bayesdr: " << msg << "\n"; }

Json run_fit(const RunConfig& cfg, const Dataset& data, std::ostream& err, bool waic_only) {
  log(err, "fitting treatment and outcome models (prior " + cfg.prior + ")");
  const FittedModels models = fit_models(data, cfg.analysis());
  Json j = header(cfg);
  j["data"] = data_json(data);
  if (waic_only) {
    Json w;
    for (const RoleFit* r : {&models.treatment, &models.outcome}) {
      Json role;
      role["selected_family"] = to_string(r->chosen().family);
      Json table = Json::array();
      for (const auto& c : r->candidates) {
        Json row = to_json(c.waic);
        row["family"] = to_string(c.family);
        table.push_back(std::move(row));
      }
      role["families"] = std::move(table);
      w[to_string(r->role)] = std::move(role);
    }
    j["waic"] = std::move(w);
  } else {
    j["models"] = to_json(models);
  }
  return j;
}

Json run_ate_cmd(const RunConfig& cfg, const Dataset& data, std::ostream& err) {
  if (data.t_kind() != VariableKind::binary) {
    throw DataError("treatment column '" + cfg.treatment_col + "' is not binary (0/1)");
  }
  log(err, "fitting models and building the bootstrap x posterior matrix");
  const AteAnalysis a = run_ate(data, cfg.analysis());
  Json j = header(cfg);
  j["data"] = data_json(data);
  j["estimate"] = to_json(a.dr);
  j["comparators"] = Json::array({to_json(a.ipw), to_json(a.reg)});
  j["models"] = to_json(a.models);
  return j;
}

Json run_curve_cmd(const RunConfig& cfg, const Dataset& data, std::ostream& err) {
  if (data.t_kind() != VariableKind::continuous) {
    throw DataError("treatment column '" + cfg.treatment_col + "' is binary; curve needs a continuous treatment");
  }
  log(err, "fitting models and estimating the exposure-response curve");
  const CurveAnalysis a = run_curve(data, cfg.analysis());
  Json j = header(cfg);
  j["data"] = data_json(data);
  j["estimate"] = to_json(a.dr);
  Json comps = Json::array();
  for (const auto& [family, report] : a.regression) comps.push_back(to_json(report));
  j["comparators"] = std::move(comps);
  j["models"] = to_json(a.models);
  if (!cfg.out.empty()) {
    std::ostringstream csv;
    write_curve_csv(csv, a.dr);
    write_file(cfg.out + ".csv", csv.str());
  }
  return j;
}

void run_simulate_cmd(const RunConfig& cfg, std::ostream& err) {
  const SimConfig sim = cfg.simulation();
  log(err, "simulating " + sim.scenario.name() + " (n=" + std::to_string(sim.scenario.n) +
               ", p=" + std::to_string(sim.scenario.p) + ", reps=" + std::to_string(sim.reps) + ")");
  const auto reps = run_replications(sim);
  const MetricsTable table = aggregate(reps);
  for (const auto& r : reps) {
    if (r.failed) log(err, "replication " + std::to_string(r.rep) + " failed: " + r.error);
  }
  Json j = header(cfg);
  j["scenario"] = {{"name", sim.scenario.name()}, {"n", sim.scenario.n}, {"p", sim.scenario.p}};
  j["metrics"] = to_json(table);
  write_file(cfg.out + ".metrics.json", j.dump(2) + "\n");
  std::ostringstream metrics, raw;
  write_metrics_csv(metrics, table);
  write_reps_csv(raw, reps);
  write_file(cfg.out + ".metrics.csv", metrics.str());
  write_file(cfg.out + ".reps.csv", raw.str());
  log(err, "wrote " + cfg.out + ".metrics.{json,csv} and " + cfg.out + ".reps.csv");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Doubly robust causal effect estimation with Bayesian spike-and-slab models", "bayesdr"};
  app.set_version_flag("--version", std::string(version()));
  std::map<std::string, std::string> given;
  std::map<std::string, CLI::Option*> options;
  for (const auto& f : kFlags) {
    options[f.key] = app.add_option(std::string("--") + f.key, given[f.key], f.help);
  }
  std::string config_path;
  app.add_option("--config", config_path, "key=value file or previous JSON report; flags take precedence");
  std::map<std::string, CLI::App*> subs;
  subs["fit"] = app.add_subcommand("fit", "fit treatment and outcome models, report inclusion probabilities");
  subs["ate"] = app.add_subcommand("ate", "average treatment effect for a binary treatment");
  subs["curve"] = app.add_subcommand("curve", "exposure-response curve for a continuous treatment");
  subs["simulate"] = app.add_subcommand("simulate", "run a simulation scenario and write metrics");
  subs["waic"] = app.add_subcommand("waic", "WAIC of every model family");
  for (auto& [name, sub] : subs) sub->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "ConfigError", e.what(), 2);
    return 2;
  }

  try {
    RunConfig cfg;
    for (auto& [name, sub] : subs) {
      if (sub->parsed()) cfg.subcommand = parse_subcommand(name);
    }
    if (!config_path.empty()) {
      for (const auto& [key, value] : read_config_file(config_path)) cfg.set(key, value);
    }
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) cfg.set(key, given[key]);
    }
    cfg.validate();

    if (cfg.subcommand == Subcommand::simulate) {
      run_simulate_cmd(cfg, err);
      return 0;
    }
    const Dataset data = load_dataset(cfg.input, cfg.treatment_col, cfg.outcome_col);
    Json report;
    switch (cfg.subcommand) {
      case Subcommand::fit: report = run_fit(cfg, data, err, false); break;
      case Subcommand::waic: report = run_fit(cfg, data, err, true); break;
      case Subcommand::ate: report = run_ate_cmd(cfg, data, err); break;
      case Subcommand::curve: report = run_curve_cmd(cfg, data, err); break;
      case Subcommand::simulate: break;
    }
    const std::string text = report.dump(2) + "\n";
    if (!cfg.out.empty()) write_file(cfg.out + ".json", text);
    out << text;
    return 0;
  } catch (const Error& e) {
    const int code = exit_code(e);
    emit_error(err, e.kind(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    emit_error(err, "InternalError", e.what(), 1);
    return 1;
  }
}

}  // namespace bayesdr
