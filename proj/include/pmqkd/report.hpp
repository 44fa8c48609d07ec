#pragma once

#include <json.hpp>

#include "pmqkd/ingest.hpp"
#include "pmqkd/optimizer.hpp"
#include "pmqkd/security.hpp"

namespace pmqkd {

nlohmann::json to_json(const SecurityBudget& budget);
nlohmann::json to_json(const KeyRateResult& result);
nlohmann::json to_json(const OptimizationResult& result, bool include_trace = false);
nlohmann::json to_json(const ExperimentRecord& record);

}  // namespace pmqkd
