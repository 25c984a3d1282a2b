#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "regio/geo_grid.hpp"

namespace regio {

struct PlantedGridSpec {
    std::size_t rows = 32;
    std::size_t cols = 32;
    std::size_t features = 3;
    double separation = 5.0;  // block-mean gap in units of the noise std
    double noise_std = 1.0;
    GeoPoint origin{30.20, -81.80};
    double cell_size_deg = 0.01;
    std::uint64_t seed = 0;
};

struct PlantedGrid {
    GridRaster grid;
    std::vector<std::size_t> truth;  // quadrant id per active cell
};

/// Four quadrant blocks with distinct mean profiles plus Gaussian noise.
/// Every pair of block means differs by `separation * noise_std` in at least
/// two features.
PlantedGrid planted_quadrants(const PlantedGridSpec& spec);

/// Fixture study area for demos: a coastal grid (ocean cells masked on the
/// east side) whose columns match the shipped feature catalog. The fields
/// are smooth synthetic surfaces plus noise, not observed data.
GridRaster demo_study_area(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace regio
