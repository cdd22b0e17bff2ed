#pragma once

// Internal helpers shared between the dataset, pipeline, and config
// translation units; not part of the installed API.

#include <nlohmann/json.hpp>

#include "codelink/metrics.hpp"

namespace codelink {

nlohmann::ordered_json stage_metrics_to_json(const StageMetrics& m);

}  // namespace codelink
