#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "bayesdr/inference.hpp"
#include "bayesdr/model_selection.hpp"
#include "bayesdr/pipeline.hpp"
#include "bayesdr/sim_harness.hpp"

namespace bayesdr {

using Json = nlohmann::ordered_json;

/// Version string baked in at build time (git describe).
const char* version();

Json to_json(const EstimateReport& r);
Json to_json(const CurveReport& r);
Json to_json(const WaicResult& r);
/// Selected family, WAIC table (with ratio to the minimum) and posterior
/// summaries of the chosen fit.
Json to_json(const RoleFit& r);
Json to_json(const FittedModels& m);
Json to_json(const MetricsTable& t);

/// t, point, lo, hi, var_outer, var_inner, var_total per grid point.
void write_curve_csv(std::ostream& out, const CurveReport& r);

}  // namespace bayesdr
