#include "regio/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "regio/error.hpp"

namespace regio {

PlantedGrid planted_quadrants(const PlantedGridSpec& spec) {
    require(spec.rows >= 2 && spec.cols >= 2, "planted grid needs at least 2x2 cells");
    require(spec.features >= 1, "planted grid needs at least one feature");
    // Pairwise Hamming distance 2 between block codes.
    static constexpr int kCodes[4][3] = {{0, 0, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 0}};

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    const std::size_t n = spec.rows * spec.cols;
    Matrix x(n, spec.features);
    std::vector<std::size_t> truth(n);
    for (std::size_t r = 0; r < spec.rows; ++r) {
        for (std::size_t c = 0; c < spec.cols; ++c) {
            const std::size_t block = (r < spec.rows / 2 ? 0 : 2) + (c < spec.cols / 2 ? 0 : 1);
            const std::size_t id = r * spec.cols + c;
            truth[id] = block;
            for (std::size_t f = 0; f < spec.features; ++f) {
                const double mean = spec.separation * spec.noise_std * kCodes[block][f % 3];
                x(id, f) = mean + noise(rng);
            }
        }
    }
    std::vector<std::string> names;
    for (std::size_t f = 0; f < spec.features; ++f) names.push_back("f" + std::to_string(f));
    return {GridRaster::make(spec.rows, spec.cols, spec.origin, spec.cell_size_deg,
                             std::vector<std::uint8_t>(n, 1), std::move(names), std::move(x)),
            std::move(truth)};
}

GridRaster demo_study_area(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    require(rows >= 4 && cols >= 4, "demo grid needs at least 4x4 cells");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::vector<std::string> names = {
        "median_income", "pct_elderly", "pct_no_vehicle", "population_density",
        "pct_renters",   "impervious_surface", "elevation", "slope",
        "dist_to_water", "tree_canopy", "storm_drain_density", "road_density"};

    std::vector<std::uint8_t> mask(rows * cols, 1);
    std::vector<std::array<double, 12>> values;
    for (std::size_t r = 0; r < rows; ++r) {
        const double v = static_cast<double>(r) / static_cast<double>(rows - 1);
        // Coastline bends east to west moving north.
        const double coast = 0.88 - 0.12 * v;
        for (std::size_t c = 0; c < cols; ++c) {
            const double u = static_cast<double>(c) / static_cast<double>(cols - 1);
            if (u > coast) {
                mask[r * cols + c] = 0;
                continue;
            }
            const double river = std::abs(v - (0.45 + 0.15 * std::sin(3.0 * u)));
            const double to_water = std::min(river, coast - u) * 40.0;
            const double core = std::exp(-((u - 0.45) * (u - 0.45) + (v - 0.5) * (v - 0.5)) / 0.04);
            const double elevation = 2.0 + 18.0 * std::min(1.0, to_water / 8.0) + 6.0 * (1.0 - u);
            std::array<double, 12> row{};
            row[0] = 38000 + 45000 * (1.0 - core) * (0.5 + 0.5 * v) + 4000 * noise(rng);
            row[1] = 12 + 10 * (1.0 - core) * u + 2.0 * noise(rng);
            row[2] = 3 + 14 * core + 1.5 * noise(rng);
            row[3] = 300 + 4200 * core + 250 * noise(rng);
            row[4] = 25 + 35 * core + 4 * noise(rng);
            row[5] = 10 + 70 * core + 8 * (1.0 - v) + 3 * noise(rng);
            row[6] = elevation + 0.8 * noise(rng);
            row[7] = 0.4 + 1.6 * std::exp(-to_water / 4.0) + 0.3 * std::abs(noise(rng));
            row[8] = to_water + 0.3 * std::abs(noise(rng));
            row[9] = 45 - 30 * core + 5 * noise(rng);
            row[10] = 2 + 9 * core + 1.0 * noise(rng);
            row[11] = 4 + 12 * core + 1.2 * noise(rng);
            values.push_back(row);
        }
    }
    Matrix x(values.size(), names.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t f = 0; f < names.size(); ++f) x(i, f) = std::max(0.0, values[i][f]);
    }
    return GridRaster::make(rows, cols, GeoPoint{30.20, -81.80}, 0.01, std::move(mask), names, std::move(x));
}

}  // namespace regio
