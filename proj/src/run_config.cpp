#include "bayesdr/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bayesdr/errors.hpp"

namespace bayesdr {

namespace {

constexpr const char* kSubcommands[] = {"fit", "ate", "curve", "simulate", "waic"};

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || value.empty()) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

const char* to_string(Subcommand s) { return kSubcommands[static_cast<int>(s)]; }

Subcommand parse_subcommand(const std::string& name) {
  for (int k = 0; k < 5; ++k) {
    if (name == kSubcommands[k]) return static_cast<Subcommand>(k);
  }
  throw ConfigError("unknown subcommand '" + name + "'");
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "input", "treatment-col", "outcome-col", "prior", "df",    "phi",      "draws", "burnin",
      "thin",  "bootstrap",     "level",       "grid",  "seed",  "threads",  "out",   "scenario",
      "reps",  "n",             "p"};
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "input") input = value;
  else if (key == "treatment-col") treatment_col = value;
  else if (key == "outcome-col") outcome_col = value;
  else if (key == "prior") prior = value;
  else if (key == "df") df = parse_number<int>(key, value);
  else if (key == "phi") phi = parse_number<double>(key, value);
  else if (key == "draws") draws = parse_number<int>(key, value);
  else if (key == "burnin") burnin = parse_number<int>(key, value);
  else if (key == "thin") thin = parse_number<int>(key, value);
  else if (key == "bootstrap") bootstrap = parse_number<std::size_t>(key, value);
  else if (key == "level") level = parse_number<double>(key, value);
  else if (key == "grid") grid = parse_number<std::size_t>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "threads") threads = parse_number<std::size_t>(key, value);
  else if (key == "out") out = value;
  else if (key == "scenario") scenario = value;
  else if (key == "reps") reps = parse_number<std::size_t>(key, value);
  else if (key == "n") n = parse_number<std::size_t>(key, value);
  else if (key == "p") p = parse_number<std::size_t>(key, value);
  else if (key == "subcommand") parse_subcommand(value);  // informational in saved reports
  else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  if (prior != "auto") parse_family(prior);
  if (subcommand == Subcommand::simulate) {
    resolved_scenario().validate();
    if (reps < 1) throw ConfigError("reps must be at least 1");
    if (out.empty()) throw ConfigError("simulate needs --out (output file prefix)");
  } else if (input.empty()) {
    throw ConfigError("--input is required");
  }
  if (treatment_col == outcome_col) throw ConfigError("treatment and outcome columns must differ");
  analysis().validate();
}

AnalysisConfig RunConfig::analysis() const {
  AnalysisConfig a;
  if (prior == "auto") {
    a.family.reset();
  } else {
    a.family = parse_family(prior);
  }
  a.prior.df = df;
  a.prior.phi = phi;
  a.mcmc.n_iter = draws;
  a.mcmc.burn_in = burnin;
  a.mcmc.thin = thin;
  a.mcmc.seed = seed;
  a.bootstrap = bootstrap;
  a.level = level;
  a.grid_size = grid;
  a.threads = threads;
  return a;
}

Scenario RunConfig::resolved_scenario() const {
  Scenario s = Scenario::parse(scenario);
  if (n > 0) s.n = n;
  if (p > 0) s.p = p;
  return s;
}

SimConfig RunConfig::simulation() const {
  SimConfig c;
  c.scenario = resolved_scenario();
  c.analysis = analysis();
  c.reps = reps;
  c.seed = seed;
  c.threads = threads;
  return c;
}

Json RunConfig::to_json() const {
  Json j;
  j["subcommand"] = to_string(subcommand);
  j["input"] = input;
  j["treatment-col"] = treatment_col;
  j["outcome-col"] = outcome_col;
  j["prior"] = prior;
  j["df"] = df;
  j["phi"] = phi;
  j["draws"] = draws;
  j["burnin"] = burnin;
  j["thin"] = thin;
  j["bootstrap"] = bootstrap;
  j["level"] = level;
  j["grid"] = grid;
  j["seed"] = seed;
  j["scenario"] = scenario;
  j["reps"] = reps;
  j["n"] = n;
  j["p"] = p;
  return j;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::vector<std::pair<std::string, std::string>> out;

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json doc;
    try {
      doc = Json::parse(text);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    const Json& cfg = doc.contains("config") ? doc["config"] : doc;
    if (!cfg.is_object()) throw ConfigError("config member must be an object");
    for (const auto& [key, value] : cfg.items()) {
      out.emplace_back(key, value.is_string() ? value.get<std::string>() : value.dump());
    }
    return out;
  }

  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + " is not key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace bayesdr
