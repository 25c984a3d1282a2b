#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "regio/embedding.hpp"
#include "regio/geo_grid.hpp"
#include "regio/metrics.hpp"
#include "regio/partition.hpp"
#include "regio/refine.hpp"
#include "regio/scsom.hpp"
#include "regio/variogram.hpp"

namespace regio {

/// Per-cell vectors averaged into region means during refinement.
enum class Representation { BmuWeight, Latent, Standardized };

struct PipelineConfig {
    std::vector<std::string> features;
    std::size_t k = 8;
    std::uint64_t seed = 0;
    std::optional<double> threshold_km;  // bypasses the variogram when set
    double threshold_fraction = 0.2;     // SOM threshold as a fraction of the variogram threshold
    std::size_t bins = kDefaultVariogramBins;
    AutoencoderConfig autoencoder;
    SomConfig som;
    RefineConfig refine;
    Representation representation = Representation::BmuWeight;
};

nlohmann::json to_json(const PipelineConfig& config);
/// Strict parse; missing fields take defaults. Type or range problems raise a
/// Validation error listing every offending field path.
PipelineConfig config_from_json(const nlohmann::json& j);
/// Applies a partial config (changed fields only) on top of `base`.
PipelineConfig apply_config_delta(const PipelineConfig& base, const nlohmann::json& delta);

/// Field-level checks against the grid (Validation) and k feasibility (Infeasible).
void validate_config(const PipelineConfig& config, const GridRaster& grid);
void check_feasible(const PipelineConfig& config, const GridRaster& grid);

inline constexpr std::array<std::string_view, 6> kStageNames = {"standardized", "threshold", "embedding",
                                                                "som",          "regions",   "metrics"};

struct RunArtifacts {
    nlohmann::json config;
    std::vector<std::string> completed;  // stage names in execution order
    std::map<std::string, nlohmann::json> stages;
    std::map<std::string, std::string> hashes;  // stage name or "regions.geojson" -> sha256 hex
    std::string geojson;
    RegionPartition partition;
    PartitionMetrics metrics;
};

/// standardize -> threshold -> autoencoder -> SOM -> refine -> metrics.
/// With a run directory, each stage is written before the next starts.
RunArtifacts run_pipeline(const GridRaster& grid, const PipelineConfig& config,
                          const std::optional<std::filesystem::path>& run_dir = std::nullopt);

/// Reads `<run_dir>/<stage>.json` and verifies its embedded hash.
nlohmann::json load_stage(const std::filesystem::path& run_dir, std::string_view stage);

/// Stage hashes recorded in `<run_dir>/manifest.json`.
std::map<std::string, std::string> load_manifest(const std::filesystem::path& run_dir);

std::string sha256_hex(std::string_view bytes);

}  // namespace regio
