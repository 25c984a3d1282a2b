#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "regio/geo_grid.hpp"
#include "regio/matrix.hpp"
#include "regio/partition.hpp"

namespace regio {

enum class MergePhase { Dissolve, Grow };

struct MergeEvent {
    MergePhase phase = MergePhase::Grow;
    std::size_t a = 0;  // ids before the merge, a < b
    std::size_t b = 0;
    double cost = 0.0;
    std::size_t result = 0;  // id of the merged region after renumbering

    bool operator==(const MergeEvent&) const = default;
};

struct MergeTrace {
    std::vector<MergeEvent> events;
    std::size_t initial_count = 0;
    std::size_t final_count = 0;
};

struct RefineConfig {
    std::size_t min_size = 4;
    double lambda_geo = 0.0;
};

struct RefineResult {
    RegionPartition partition;
    MergeTrace trace;
};

/// Connected components of equal-label cells. `vectors` supplies the per-cell
/// representation averaged into each region's mean.
RegionPartition initial_regions(std::span<const std::size_t> labels, const AdjacencyIndex& adjacency,
                                const Matrix& vectors, std::span<const GeoPoint> centroids);

/// Ward linkage plus an optional squared centroid-distance penalty.
double merge_cost(const Region& a, const Region& b, double lambda_geo = 0.0);

/// Dissolves regions below min_size into their cheapest neighbour, then
/// merges the globally cheapest adjacent pair until k regions remain.
RefineResult grow_to_k(const RegionPartition& partition, const AdjacencyIndex& adjacency, std::size_t k,
                       const Matrix& vectors, std::span<const GeoPoint> centroids, const RefineConfig& config = {});

struct RegionReport {
    std::size_t id = 0;
    std::size_t size = 0;
    std::vector<double> feature_mean;  // raw units
    GeoPoint centroid;
    BoundingBox bounds;
};

/// Per-region size, raw-feature means, centroid and extent.
std::vector<RegionReport> region_summaries(const RegionPartition& partition, const GridRaster& raw_grid);

/// True when every region's members form one rook-connected component.
bool regions_connected(const RegionPartition& partition, const AdjacencyIndex& adjacency);

}  // namespace regio
