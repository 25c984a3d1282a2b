#pragma once

#include <json.hpp>

#include "regio/embedding.hpp"
#include "regio/geo_grid.hpp"
#include "regio/metrics.hpp"
#include "regio/refine.hpp"
#include "regio/scsom.hpp"
#include "regio/variogram.hpp"

// JSON forms of the stage artifacts. Every *_from_json inverts the matching
// to_json exactly (doubles round-trip through the shortest representation).
namespace regio {

nlohmann::json to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StandardizationParams& p);
StandardizationParams standardization_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Semivariogram& sv);
Semivariogram semivariogram_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ThresholdEstimate& t);
ThresholdEstimate threshold_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AutoencoderModel& m);
AutoencoderModel autoencoder_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainingLog& log);
TrainingLog training_log_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SomModel& m);
SomModel som_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MergeTrace& t);
MergeTrace merge_trace_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RegionReport& r);
nlohmann::json to_json(const PartitionMetrics& m);
PartitionMetrics metrics_from_json(const nlohmann::json& j);

}  // namespace regio
