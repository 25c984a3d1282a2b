#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "regio/geo_grid.hpp"

namespace regio {

struct Semivariogram {
    std::vector<double> lag_bin_edges;  // B+1 ascending km values, first is 0
    std::vector<double> gamma;          // B values, 0 where the bin is empty
    std::vector<std::size_t> pair_counts;

    std::size_t bin_count() const noexcept { return gamma.size(); }
    double h_max() const noexcept { return lag_bin_edges.back(); }
    double bin_center(std::size_t i) const { return 0.5 * (lag_bin_edges[i] + lag_bin_edges[i + 1]); }
    bool empty_bin(std::size_t i) const { return pair_counts[i] == 0; }
};

struct ThresholdEstimate {
    std::vector<std::string> feature_names;  // non-constant features that produced a range
    std::vector<double> per_feature_range_km;
    double threshold_km = 0.0;
    double lower_clamp_km = 0.0;
    double upper_clamp_km = 0.0;
    bool clamp_applied = false;
};

inline constexpr std::size_t kDefaultVariogramBins = 15;
inline constexpr double kSillFraction = 0.95;

/// Uniform lag bins over [0, h_max], h_max = half the largest pairwise
/// distance. Bins are left-closed and right-open except the last.
Semivariogram empirical_semivariogram(std::span<const double> values, std::span<const GeoPoint> centroids,
                                      std::size_t bins = kDefaultVariogramBins);

/// Center of the first nonempty bin reaching 0.95 * sill, or h_max.
double estimate_range(const Semivariogram& sv, double sill);

/// Median (lower-middle for even counts) of the ranges, clamped to [lower, upper].
/// When lower exceeds upper the floor wins.
ThresholdEstimate aggregate_threshold(std::vector<std::string> names, std::vector<double> ranges,
                                      double lower_clamp_km, double upper_clamp_km);

/// Largest cell-diagonal length over the grid's active rows.
double cell_diagonal_km(const GridRaster& grid);

ThresholdEstimate geographic_threshold(const GridRaster& standardized, std::size_t bins = kDefaultVariogramBins);

/// Per-feature semivariograms as used by geographic_threshold (constant features included).
std::vector<Semivariogram> feature_semivariograms(const GridRaster& grid, std::size_t bins = kDefaultVariogramBins);

}  // namespace regio
