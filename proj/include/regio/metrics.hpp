#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "regio/geo_grid.hpp"
#include "regio/matrix.hpp"
#include "regio/partition.hpp"

namespace regio {

struct PartitionMetrics {
    double within_region_sse = 0.0;
    std::vector<double> compactness;
    double mean_compactness = 0.0;
    std::size_t fragmentation = 0;
    std::size_t region_count = 0;
};

/// Sum over regions of squared distances from members to the region mean of x.
double within_region_sse(std::span<const std::size_t> labels, const Matrix& x);

/// 16a/p^2 per region, a = cell count, p = cell edges not shared within the region.
std::vector<double> compactness(std::span<const std::size_t> labels, const GridRaster& grid);

/// Rook components of equal-label cells minus distinct labels.
std::size_t fragmentation(std::span<const std::size_t> labels, const AdjacencyIndex& adjacency);

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Balanced multi-source growth from k seeded cells.
RegionPartition random_contiguous_partition(const GridRaster& grid, const AdjacencyIndex& adjacency, std::size_t k,
                                            std::uint64_t seed);

PartitionMetrics evaluate_partition(std::span<const std::size_t> labels, const Matrix& x, const GridRaster& grid,
                                    const AdjacencyIndex& adjacency);

}  // namespace regio
