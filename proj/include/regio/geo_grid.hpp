#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regio/matrix.hpp"

namespace regio {

struct RegionPartition;

/// IUGG mean Earth radius.
inline constexpr double kEarthRadiusKm = 6371.0088;

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    bool operator==(const GeoPoint&) const = default;
};

bool is_valid(const GeoPoint& p) noexcept;

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept;

struct CellPos {
    std::size_t row = 0;
    std::size_t col = 0;

    bool operator==(const CellPos&) const = default;
};

struct BoundingBox {
    double min_lat = 0.0;
    double min_lon = 0.0;
    double max_lat = 0.0;
    double max_lon = 0.0;

    bool operator==(const BoundingBox&) const = default;
};

// Masked rectangular grid. Active cells are numbered 0..N-1 in row-major
// order; that id is what every other module calls a "cell".
class GridRaster {
public:
    static GridRaster make(std::size_t rows, std::size_t cols, GeoPoint origin, double cell_size_deg,
                           std::vector<std::uint8_t> mask, std::vector<std::string> feature_names,
                           Matrix features, std::vector<std::size_t> missing_counts = {});

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const GeoPoint& origin() const noexcept { return origin_; }
    double cell_size_deg() const noexcept { return cell_size_deg_; }
    const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    const Matrix& features() const noexcept { return features_; }
    /// Missing values seen at ingestion, per feature (before imputation).
    const std::vector<std::size_t>& missing_counts() const noexcept { return missing_counts_; }

    std::size_t active_count() const noexcept { return positions_.size(); }
    std::size_t feature_count() const noexcept { return feature_names_.size(); }
    bool active(std::size_t row, std::size_t col) const noexcept;
    /// Active cell id at (row, col), or nullopt when outside or masked.
    std::optional<std::size_t> cell_id(std::size_t row, std::size_t col) const noexcept;
    CellPos position(std::size_t cell) const { return positions_.at(cell); }
    GeoPoint centroid(std::size_t cell) const;
    GeoPoint centroid_at(std::size_t row, std::size_t col) const noexcept;
    std::vector<GeoPoint> centroids() const;
    /// Extent of the cell square.
    BoundingBox cell_bounds(std::size_t cell) const;
    std::optional<std::size_t> feature_index(const std::string& name) const;

    /// Same geometry with a subset of features, in the requested order.
    GridRaster select_features(std::span<const std::string> names) const;
    GridRaster with_features(Matrix features) const;

private:
    GridRaster() = default;

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    GeoPoint origin_;
    double cell_size_deg_ = 0.0;
    std::vector<std::uint8_t> mask_;
    std::vector<std::string> feature_names_;
    Matrix features_;
    std::vector<std::size_t> missing_counts_;
    std::vector<CellPos> positions_;
    std::vector<std::int64_t> index_;
};

enum class AdjacencyScheme { Rook, Queen };

struct AdjacencyIndex {
    AdjacencyScheme scheme = AdjacencyScheme::Rook;
    std::vector<std::vector<std::size_t>> neighbors;  // sorted, per active cell

    std::size_t size() const noexcept { return neighbors.size(); }
};

AdjacencyIndex build_adjacency(const GridRaster& grid, AdjacencyScheme scheme = AdjacencyScheme::Rook);

/// Connected components of the whole active set; returns component id per cell.
std::vector<std::size_t> connected_components(const AdjacencyIndex& adjacency, std::size_t* count = nullptr);

struct GridSchema {
    /// Cell side in degrees. Inferred from the rows when absent.
    std::optional<double> cell_size_deg;
    double geometry_tolerance_deg = 1e-9;
};

/// Reads `row,col,lat,lon,<feature>...`. Empty fields are missing values and
/// get the feature's mean over present values.
GridRaster load_grid_csv(const std::filesystem::path& path, const GridSchema& schema = {});
GridRaster parse_grid_csv(const std::string& text, const GridSchema& schema = {});
std::string write_grid_csv(const GridRaster& grid);

struct StandardizationParams {
    std::vector<double> mean;
    std::vector<double> std;  // population
    std::vector<bool> constant;

    bool operator==(const StandardizationParams&) const = default;
};

struct Standardized {
    GridRaster grid;
    StandardizationParams params;
};

Standardized standardize(const GridRaster& grid);

/// One Polygon Feature per active cell, row-major, properties row/col/region_id.
std::string export_regions_geojson(const GridRaster& grid, const RegionPartition& partition);
std::string export_regions_geojson(const GridRaster& grid, std::span<const std::size_t> labels);

/// Label vector (row-major active cell order) recovered from an exported document.
std::vector<std::size_t> parse_regions_geojson(const std::string& document, const GridRaster& grid);

}  // namespace regio
