#include "regio/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "regio/error.hpp"

namespace regio {

namespace {

// Lag-bin assignment of every unordered pair (i < j), enumerated in a fixed
// order so accumulation is deterministic. Pairs beyond h_max get kNoBin.
struct PairBins {
    static constexpr std::uint16_t kNoBin = 0xFFFF;
    std::vector<double> edges;
    std::vector<std::uint16_t> bin;  // packed upper triangle
};

PairBins bin_pairs(std::span<const GeoPoint> centroids, std::size_t bins) {
    const auto n = centroids.size();
    require(n >= 2, "semivariogram needs at least 2 cells");
    require(bins >= 1 && bins < PairBins::kNoBin, "bin count must be in [1, 65534]");

    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    double max_d = 0.0;
    double min_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = haversine_km(centroids[i], centroids[j]);
            dist.push_back(d);
            max_d = std::max(max_d, d);
            min_d = std::min(min_d, d);
        }
    }
    // Half the largest separation, widened to the closest pair so tiny
    // inputs (e.g. two cells) still populate a bin.
    const double h_max = std::max(max_d / 2.0, min_d);
    require(h_max > 0.0, "all cells share one location");

    PairBins out;
    out.edges.resize(bins + 1);
    const double width = h_max / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) out.edges[b] = width * static_cast<double>(b);
    out.edges[bins] = h_max;

    out.bin.resize(dist.size());
    for (std::size_t p = 0; p < dist.size(); ++p) {
        const double d = dist[p];
        if (d > h_max) {
            out.bin[p] = PairBins::kNoBin;
            continue;
        }
        auto b = std::min(static_cast<std::size_t>(d / width), bins - 1);
        // Division can land one bin off near an edge; settle against the stored edges.
        while (b > 0 && d < out.edges[b]) --b;
        while (b + 1 < bins && d >= out.edges[b + 1]) ++b;
        out.bin[p] = static_cast<std::uint16_t>(b);
    }
    return out;
}

Semivariogram accumulate(const PairBins& pairs, std::span<const double> values) {
    const auto bins = pairs.edges.size() - 1;
    Semivariogram sv;
    sv.lag_bin_edges = pairs.edges;
    sv.gamma.assign(bins, 0.0);
    sv.pair_counts.assign(bins, 0);
    const auto n = values.size();
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j, ++p) {
            const auto b = pairs.bin[p];
            if (b == PairBins::kNoBin) continue;
            const double diff = values[i] - values[j];
            sv.gamma[b] += diff * diff;
            ++sv.pair_counts[b];
        }
    }
    for (std::size_t b = 0; b < bins; ++b) {
        if (sv.pair_counts[b] > 0) sv.gamma[b] /= 2.0 * static_cast<double>(sv.pair_counts[b]);
    }
    return sv;
}

}  // namespace

Semivariogram empirical_semivariogram(std::span<const double> values, std::span<const GeoPoint> centroids,
                                      std::size_t bins) {
    require(values.size() == centroids.size(), "values and centroids must have equal length");
    return accumulate(bin_pairs(centroids, bins), values);
}

double estimate_range(const Semivariogram& sv, double sill) {
    require(sill > 0.0 && std::isfinite(sill), "sill must be positive");
    bool any = false;
    for (std::size_t b = 0; b < sv.bin_count(); ++b) {
        if (sv.empty_bin(b)) continue;
        any = true;
        if (sv.gamma[b] >= kSillFraction * sill) return sv.bin_center(b);
    }
    if (!any) fail(ErrorKind::Estimation, "semivariogram has no nonempty bins");
    return sv.h_max();
}

ThresholdEstimate aggregate_threshold(std::vector<std::string> names, std::vector<double> ranges,
                                      double lower_clamp_km, double upper_clamp_km) {
    if (ranges.empty()) fail(ErrorKind::Estimation, "no non-constant features to estimate a range from");
    require(names.size() == ranges.size(), "names and ranges must align");
    std::vector<double> sorted = ranges;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[(sorted.size() - 1) / 2];

    ThresholdEstimate est;
    est.feature_names = std::move(names);
    est.per_feature_range_km = std::move(ranges);
    est.lower_clamp_km = lower_clamp_km;
    est.upper_clamp_km = upper_clamp_km;
    double t = std::min(median, upper_clamp_km);
    t = std::max(t, lower_clamp_km);
    est.threshold_km = t;
    est.clamp_applied = t != median;
    return est;
}

double cell_diagonal_km(const GridRaster& grid) {
    const double h = grid.cell_size_deg() / 2.0;
    double best = 0.0;
    std::size_t last_row = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < grid.active_count(); ++i) {
        const auto row = grid.position(i).row;
        if (row == last_row) continue;
        last_row = row;
        const auto c = grid.centroid(i);
        best = std::max(best, haversine_km({c.lat - h, c.lon - h}, {c.lat + h, c.lon + h}));
    }
    return best;
}

std::vector<Semivariogram> feature_semivariograms(const GridRaster& grid, std::size_t bins) {
    const auto centroids = grid.centroids();
    const auto pairs = bin_pairs(centroids, bins);
    std::vector<Semivariogram> out;
    std::vector<double> column(grid.active_count());
    for (std::size_t f = 0; f < grid.feature_count(); ++f) {
        for (std::size_t i = 0; i < grid.active_count(); ++i) column[i] = grid.features()(i, f);
        out.push_back(accumulate(pairs, column));
    }
    return out;
}

ThresholdEstimate geographic_threshold(const GridRaster& standardized, std::size_t bins) {
    require(standardized.active_count() >= 2, "geographic threshold needs at least 2 active cells");
    const auto svs = feature_semivariograms(standardized, bins);
    const auto n = static_cast<double>(standardized.active_count());
    std::vector<std::string> names;
    std::vector<double> ranges;
    for (std::size_t f = 0; f < standardized.feature_count(); ++f) {
        double mean = 0.0;
        for (std::size_t i = 0; i < standardized.active_count(); ++i) mean += standardized.features()(i, f);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < standardized.active_count(); ++i) {
            const double d = standardized.features()(i, f) - mean;
            var += d * d;
        }
        var /= n;
        if (!(var > 0.0)) continue;  // constant
        names.push_back(standardized.feature_names()[f]);
        ranges.push_back(estimate_range(svs[f], var));
    }
    if (ranges.empty()) fail(ErrorKind::Estimation, "all features are constant");
    return aggregate_threshold(std::move(names), std::move(ranges), 2.0 * cell_diagonal_km(standardized),
                               svs.front().h_max());
}

}  // namespace regio
