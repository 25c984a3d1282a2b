#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "regio/geo_grid.hpp"
#include "regio/matrix.hpp"

namespace regio {

struct Region {
    std::vector<std::size_t> members;  // ascending cell ids
    std::vector<double> mean;          // mean of the members' representation vectors
    GeoPoint centroid;                 // mean of member centroids

    std::size_t size() const noexcept { return members.size(); }
};

// Assignment of every active cell to a region. Region ids are dense and
// ordered by each region's first (lowest) member cell id.
struct RegionPartition {
    std::vector<std::size_t> labels;
    std::vector<Region> regions;

    std::size_t region_count() const noexcept { return regions.size(); }
    std::size_t cell_count() const noexcept { return labels.size(); }
};

/// Renumbers `labels` densely by first-member order and recomputes every
/// region summary from its members. `vectors` may have zero columns.
RegionPartition build_partition(std::span<const std::size_t> labels, const Matrix& vectors,
                                std::span<const GeoPoint> centroids);

/// Dense relabeling by order of first appearance.
std::vector<std::size_t> canonical_labels(std::span<const std::size_t> labels);

}  // namespace regio
