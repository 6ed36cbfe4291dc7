#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bayesdr/pipeline.hpp"
#include "bayesdr/report.hpp"
#include "bayesdr/sim_harness.hpp"

namespace bayesdr {

enum class Subcommand { fit, ate, curve, simulate, waic };

const char* to_string(Subcommand s);
Subcommand parse_subcommand(const std::string& name);

/// Fully resolved settings of one CLI run. Keys used by set() and the
/// config file are the long flag names without the leading dashes.
struct RunConfig {
  Subcommand subcommand = Subcommand::ate;
  std::string input;
  std::string treatment_col = "T";
  std::string outcome_col = "Y";
  std::string prior = "auto";  ///< linear | spline | gp | auto
  int df = 3;
  double phi = 1.0;
  int draws = 2000;  ///< total MCMC iterations
  int burnin = 1000;
  int thin = 2;
  std::size_t bootstrap = kDefaultBootstrap;
  double level = 0.95;
  std::size_t grid = 20;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  ///< 0 = hardware concurrency
  std::string out;
  std::string scenario = "linear_binary";
  std::size_t reps = 20;
  std::size_t n = 0;  ///< 0 = scenario default
  std::size_t p = 0;

  static const std::vector<std::string>& keys();

  /// Parses and assigns one setting; ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// ConfigError for invalid settings; RequiresTwoDraws when the chain
  /// would save fewer than two draws.
  void validate() const;

  AnalysisConfig analysis() const;
  Scenario resolved_scenario() const;
  SimConfig simulation() const;

  /// Every setting except `threads`, which never changes results.
  Json to_json() const;
};

/// Reads key=value lines ('#' starts a comment) or, when the file holds a
/// JSON object, the "config" member of a previous report (or the object
/// itself). Values come back as strings in file order.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

}  // namespace bayesdr
