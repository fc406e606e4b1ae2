#pragma once

#include "json.hpp"
#include "shapmat/harness/config.hpp"
#include "shapmat/models/data_point.hpp"

namespace shapmat::detail {

using nlohmann::json;

json point_to_json(const DataPoint& p);
DataPoint point_from_json(const json& j);

json config_to_value(const ExperimentConfig& config);
ExperimentConfig config_from_value(const json& j);

}  // namespace shapmat::detail
