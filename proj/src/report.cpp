#include "bayesdr/report.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "bayesdr/csv.hpp"

namespace bayesdr {

const char* version() { return BAYESDR_VERSION; }

namespace {

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

Json to_json(const EstimateReport& r) {
  Json j;
  j["estimand"] = r.estimand;
  j["point"] = r.point;
  j["var_outer"] = r.var_outer;
  j["var_inner"] = r.var_inner;
  j["var_total"] = r.var_total;
  j["ci"] = {r.ci.first, r.ci.second};
  j["level"] = r.level;
  j["M"] = r.M;
  j["B"] = r.B;
  j["seed"] = r.seed;
  j["diagnostics"] = {{"correction_share", r.correction_share}, {"degenerate", r.degenerate}};
  return j;
}

Json to_json(const CurveReport& r) {
  Json j;
  j["estimand"] = r.estimand;
  j["level"] = r.level;
  j["M"] = r.M;
  j["B"] = r.B;
  j["seed"] = r.seed;
  Json points = Json::array();
  for (const auto& p : r.points) {
    Json pj;
    pj["t"] = p.t;
    pj["point"] = p.point;
    pj["var_outer"] = p.var_outer;
    pj["var_inner"] = p.var_inner;
    pj["var_total"] = p.var_total;
    pj["ci"] = {p.lo, p.hi};
    points.push_back(std::move(pj));
  }
  j["points"] = std::move(points);
  return j;
}

Json to_json(const WaicResult& r) {
  Json j;
  j["lppd"] = r.lppd;
  j["p_waic"] = r.p_waic;
  j["waic"] = r.waic;
  return j;
}

Json to_json(const RoleFit& r) {
  Json j;
  j["role"] = to_string(r.role);
  j["selected_family"] = to_string(r.chosen().family);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : r.candidates) best = std::min(best, c.waic.waic);
  Json table = Json::array();
  for (const auto& c : r.candidates) {
    Json row;
    row["family"] = to_string(c.family);
    row["lppd"] = c.waic.lppd;
    row["p_waic"] = c.waic.p_waic;
    row["waic"] = c.waic.waic;
    row["ratio_to_min"] = c.waic.waic / best;
    table.push_back(std::move(row));
  }
  j["waic"] = std::move(table);
  const PosteriorDraws& d = r.chosen().draws;
  j["draws"] = d.draws();
  j["inclusion_prob"] = vector_json(d.inclusion_prob);
  j["intercept_block_mean"] = vector_json(d.intercept_block.colwise().mean().transpose());
  if (d.response_kind == VariableKind::continuous) j["sigma2_mean"] = d.sigma2.mean();
  return j;
}

Json to_json(const FittedModels& m) {
  Json j;
  j["treatment"] = to_json(m.treatment);
  j["outcome"] = to_json(m.outcome);
  return j;
}

Json to_json(const MetricsTable& t) {
  Json j;
  j["n_reps"] = t.n_reps;
  j["n_failed"] = t.n_failed;
  Json methods = Json::array();
  for (const auto& m : t.methods) {
    Json mj;
    mj["method"] = m.method;
    mj["abs_bias"] = m.abs_bias;
    mj["variance"] = m.variance;
    mj["mse"] = m.mse;
    mj["coverage"] = m.coverage;
    mj["se_ratio"] = m.se_ratio;
    mj["se_ratio_outer"] = m.se_ratio_outer;
    mj["mean_se"] = m.mean_se;
    mj["n_reps"] = m.n_reps;
    methods.push_back(std::move(mj));
  }
  j["methods"] = std::move(methods);
  return j;
}

void write_curve_csv(std::ostream& out, const CurveReport& r) {
  write_csv_row(out, {"t", "point", "lo", "hi", "var_outer", "var_inner", "var_total"});
  for (const auto& p : r.points) {
    write_csv_row(out, {format_double(p.t), format_double(p.point), format_double(p.lo), format_double(p.hi),
                        format_double(p.var_outer), format_double(p.var_inner), format_double(p.var_total)});
  }
}

}  // namespace bayesdr
