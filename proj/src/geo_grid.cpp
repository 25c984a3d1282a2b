#include "regio/geo_grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "regio/error.hpp"
#include "regio/partition.hpp"

namespace regio {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

[[noreturn]] void parse_fail(long line, const std::string& message) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + message).with_line(line);
}

std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::optional<std::size_t> parse_index(std::string_view s) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return value;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

bool is_valid(const GeoPoint& p) noexcept {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lon >= -180.0 && p.lon < 180.0;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double sdphi = std::sin((phi2 - phi1) / 2.0);
    const double sdlambda = std::sin((b.lon - a.lon) * kDegToRad / 2.0);
    double h = sdphi * sdphi + std::cos(phi1) * std::cos(phi2) * sdlambda * sdlambda;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

// --- GridRaster ------------------------------------------------------------

GridRaster GridRaster::make(std::size_t rows, std::size_t cols, GeoPoint origin, double cell_size_deg,
                            std::vector<std::uint8_t> mask, std::vector<std::string> feature_names,
                            Matrix features, std::vector<std::size_t> missing_counts) {
    require(rows > 0 && cols > 0, "grid must have positive rows and cols");
    require(std::isfinite(cell_size_deg) && cell_size_deg > 0.0, "cell_size_deg must be positive");
    require(mask.size() == rows * cols, "mask size must equal rows*cols");
    GridRaster g;
    g.rows_ = rows;
    g.cols_ = cols;
    g.origin_ = origin;
    g.cell_size_deg_ = cell_size_deg;
    g.mask_ = std::move(mask);
    g.feature_names_ = std::move(feature_names);
    g.index_.assign(rows * cols, -1);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (g.mask_[r * cols + c]) {
                g.index_[r * cols + c] = static_cast<std::int64_t>(g.positions_.size());
                g.positions_.push_back({r, c});
            }
        }
    }
    if (g.positions_.empty()) fail(ErrorKind::Schema, "grid has no active cells");
    const GeoPoint far{origin.lat + static_cast<double>(rows - 1) * cell_size_deg,
                       origin.lon + static_cast<double>(cols - 1) * cell_size_deg};
    if (!is_valid(origin) || !is_valid(far)) {
        fail(ErrorKind::Geometry, "grid centroids fall outside the valid lat/lon range");
    }
    std::unordered_set<std::string> seen;
    for (const auto& name : g.feature_names_) {
        if (!seen.insert(name).second) fail(ErrorKind::Schema, "duplicate feature name '" + name + "'");
    }
    require(features.rows() == g.positions_.size(), "feature matrix must have one row per active cell");
    require(features.cols() == g.feature_names_.size(), "feature matrix must have one column per feature");
    for (double v : features.data()) {
        require(std::isfinite(v), "feature values must be finite");
    }
    g.features_ = std::move(features);
    if (missing_counts.empty()) missing_counts.assign(g.feature_names_.size(), 0);
    require(missing_counts.size() == g.feature_names_.size(), "missing_counts size mismatch");
    g.missing_counts_ = std::move(missing_counts);
    return g;
}

bool GridRaster::active(std::size_t row, std::size_t col) const noexcept {
    return row < rows_ && col < cols_ && mask_[row * cols_ + col] != 0;
}

std::optional<std::size_t> GridRaster::cell_id(std::size_t row, std::size_t col) const noexcept {
    if (!active(row, col)) return std::nullopt;
    return static_cast<std::size_t>(index_[row * cols_ + col]);
}

GeoPoint GridRaster::centroid_at(std::size_t row, std::size_t col) const noexcept {
    return {origin_.lat + static_cast<double>(row) * cell_size_deg_,
            origin_.lon + static_cast<double>(col) * cell_size_deg_};
}

GeoPoint GridRaster::centroid(std::size_t cell) const {
    const auto p = positions_.at(cell);
    return centroid_at(p.row, p.col);
}

std::vector<GeoPoint> GridRaster::centroids() const {
    std::vector<GeoPoint> out;
    out.reserve(positions_.size());
    for (const auto& p : positions_) out.push_back(centroid_at(p.row, p.col));
    return out;
}

BoundingBox GridRaster::cell_bounds(std::size_t cell) const {
    const GeoPoint c = centroid(cell);
    const double h = cell_size_deg_ / 2.0;
    return {c.lat - h, c.lon - h, c.lat + h, c.lon + h};
}

std::optional<std::size_t> GridRaster::feature_index(const std::string& name) const {
    auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
    if (it == feature_names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - feature_names_.begin());
}

GridRaster GridRaster::select_features(std::span<const std::string> names) const {
    std::vector<std::size_t> columns;
    for (const auto& name : names) {
        auto idx = feature_index(name);
        if (!idx) fail(ErrorKind::Validation, "unknown feature '" + name + "'");
        columns.push_back(*idx);
    }
    Matrix sub(active_count(), columns.size());
    std::vector<std::size_t> missing;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t i = 0; i < active_count(); ++i) sub(i, j) = features_(i, columns[j]);
        missing.push_back(missing_counts_[columns[j]]);
    }
    return make(rows_, cols_, origin_, cell_size_deg_, mask_,
                std::vector<std::string>(names.begin(), names.end()), std::move(sub), std::move(missing));
}

GridRaster GridRaster::with_features(Matrix features) const {
    return make(rows_, cols_, origin_, cell_size_deg_, mask_, feature_names_, std::move(features),
                missing_counts_);
}

// --- adjacency -------------------------------------------------------------

AdjacencyIndex build_adjacency(const GridRaster& grid, AdjacencyScheme scheme) {
    AdjacencyIndex adj;
    adj.scheme = scheme;
    adj.neighbors.resize(grid.active_count());
    for (std::size_t id = 0; id < grid.active_count(); ++id) {
        const auto p = grid.position(id);
        auto& out = adj.neighbors[id];
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                if (scheme == AdjacencyScheme::Rook && dr != 0 && dc != 0) continue;
                const auto r = static_cast<std::int64_t>(p.row) + dr;
                const auto c = static_cast<std::int64_t>(p.col) + dc;
                if (r < 0 || c < 0) continue;
                if (auto nb = grid.cell_id(static_cast<std::size_t>(r), static_cast<std::size_t>(c))) {
                    out.push_back(*nb);
                }
            }
        }
        std::sort(out.begin(), out.end());
    }
    return adj;
}

std::vector<std::size_t> connected_components(const AdjacencyIndex& adjacency, std::size_t* count) {
    constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> comp(adjacency.size(), kUnset);
    std::size_t next = 0;
    std::queue<std::size_t> frontier;
    for (std::size_t start = 0; start < adjacency.size(); ++start) {
        if (comp[start] != kUnset) continue;
        comp[start] = next;
        frontier.push(start);
        while (!frontier.empty()) {
            const auto u = frontier.front();
            frontier.pop();
            for (auto v : adjacency.neighbors[u]) {
                if (comp[v] == kUnset) {
                    comp[v] = next;
                    frontier.push(v);
                }
            }
        }
        ++next;
    }
    if (count) *count = next;
    return comp;
}

// --- CSV -------------------------------------------------------------------

GridRaster parse_grid_csv(const std::string& text, const GridSchema& schema) {
    struct RawRow {
        std::size_t row, col;
        double lat, lon;
        std::vector<std::optional<double>> values;
        long line;
    };

    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    std::vector<std::string> header;
    std::vector<RawRow> raw;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (header.empty()) {
            if (fields.size() < 5) parse_fail(line_no, "header needs row,col,lat,lon and at least one feature");
            static const char* kLead[] = {"row", "col", "lat", "lon"};
            for (int i = 0; i < 4; ++i) {
                if (lower(fields[static_cast<std::size_t>(i)]) != kLead[i]) {
                    parse_fail(line_no, std::string("expected header column '") + kLead[i] + "'");
                }
            }
            for (auto f : fields) header.emplace_back(f);
            continue;
        }
        if (fields.size() != header.size()) {
            parse_fail(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
        }
        RawRow r{};
        r.line = line_no;
        auto row = parse_index(fields[0]);
        auto col = parse_index(fields[1]);
        if (!row || !col) parse_fail(line_no, "row/col must be nonnegative integers");
        auto lat = parse_double(fields[2]);
        auto lon = parse_double(fields[3]);
        if (!lat || !lon) parse_fail(line_no, "lat/lon must be finite numbers");
        r.row = *row;
        r.col = *col;
        r.lat = *lat;
        r.lon = *lon;
        for (std::size_t j = 4; j < fields.size(); ++j) {
            if (fields[j].empty()) {
                r.values.emplace_back(std::nullopt);
                continue;
            }
            auto v = parse_double(fields[j]);
            if (!v) parse_fail(line_no, "field '" + header[j] + "' is not a finite number");
            r.values.emplace_back(*v);
        }
        raw.push_back(std::move(r));
    }
    if (header.empty()) fail(ErrorKind::Parse, "empty CSV");
    if (raw.empty()) fail(ErrorKind::Schema, "CSV has no data rows");

    std::size_t rows = 0, cols = 0;
    for (const auto& r : raw) {
        rows = std::max(rows, r.row + 1);
        cols = std::max(cols, r.col + 1);
    }

    // Cell size from the widest row span or col span, origin from the extreme cells.
    const auto by_row = std::minmax_element(raw.begin(), raw.end(),
                                            [](const RawRow& a, const RawRow& b) { return a.row < b.row; });
    const auto by_col = std::minmax_element(raw.begin(), raw.end(),
                                            [](const RawRow& a, const RawRow& b) { return a.col < b.col; });
    const std::size_t row_span = by_row.second->row - by_row.first->row;
    const std::size_t col_span = by_col.second->col - by_col.first->col;
    double cell = 0.0;
    if (schema.cell_size_deg) {
        cell = *schema.cell_size_deg;
    } else if (row_span >= col_span && row_span > 0) {
        cell = (by_row.second->lat - by_row.first->lat) / static_cast<double>(row_span);
    } else if (col_span > 0) {
        cell = (by_col.second->lon - by_col.first->lon) / static_cast<double>(col_span);
    } else {
        fail(ErrorKind::Geometry, "cannot infer cell size from a single cell; supply cell_size_deg");
    }
    if (!(cell > 0.0) || !std::isfinite(cell)) fail(ErrorKind::Geometry, "inferred cell size is not positive");
    const GeoPoint origin{by_row.first->lat - static_cast<double>(by_row.first->row) * cell,
                          by_col.first->lon - static_cast<double>(by_col.first->col) * cell};

    const double tol = schema.geometry_tolerance_deg;
    std::vector<std::uint8_t> mask(rows * cols, 0);
    for (const auto& r : raw) {
        const double want_lat = origin.lat + static_cast<double>(r.row) * cell;
        const double want_lon = origin.lon + static_cast<double>(r.col) * cell;
        if (std::abs(r.lat - want_lat) > tol || std::abs(r.lon - want_lon) > tol) {
            throw Error(ErrorKind::Geometry, "line " + std::to_string(r.line) +
                                                 ": lat/lon inconsistent with grid geometry")
                .with_line(r.line);
        }
        auto& m = mask[r.row * cols + r.col];
        if (m) parse_fail(r.line, "duplicate cell (" + std::to_string(r.row) + "," + std::to_string(r.col) + ")");
        m = 1;
    }

    std::vector<const RawRow*> ordered;
    for (const auto& r : raw) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](const RawRow* a, const RawRow* b) {
        return a->row != b->row ? a->row < b->row : a->col < b->col;
    });

    const std::size_t f_count = header.size() - 4;
    Matrix features(ordered.size(), f_count);
    std::vector<std::size_t> missing(f_count, 0);
    for (std::size_t j = 0; j < f_count; ++j) {
        double sum = 0.0;
        std::size_t present = 0;
        for (const auto* r : ordered) {
            if (r->values[j]) {
                sum += *r->values[j];
                ++present;
            }
        }
        if (present == 0) fail(ErrorKind::Schema, "feature '" + header[j + 4] + "' has no values");
        const double mean = sum / static_cast<double>(present);
        missing[j] = ordered.size() - present;
        for (std::size_t i = 0; i < ordered.size(); ++i) {
            features(i, j) = ordered[i]->values[j].value_or(mean);
        }
    }
    return GridRaster::make(rows, cols, origin, cell, std::move(mask),
                            std::vector<std::string>(header.begin() + 4, header.end()), std::move(features),
                            std::move(missing));
}

GridRaster load_grid_csv(const std::filesystem::path& path, const GridSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::NotFound, "cannot open grid CSV " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_grid_csv(ss.str(), schema);
}

std::string write_grid_csv(const GridRaster& grid) {
    std::string out = "row,col,lat,lon";
    for (const auto& name : grid.feature_names()) out += "," + name;
    out += "\n";
    for (std::size_t i = 0; i < grid.active_count(); ++i) {
        const auto p = grid.position(i);
        const auto c = grid.centroid(i);
        out += std::to_string(p.row) + "," + std::to_string(p.col) + "," + format_double(c.lat) + "," +
               format_double(c.lon);
        for (double v : grid.features().row(i)) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

// --- standardization -------------------------------------------------------

Standardized standardize(const GridRaster& grid) {
    const auto n = grid.active_count();
    const auto f = grid.feature_count();
    const auto& x = grid.features();
    StandardizationParams params;
    params.mean.assign(f, 0.0);
    params.std.assign(f, 0.0);
    params.constant.assign(f, false);
    Matrix z(n, f);
    for (std::size_t j = 0; j < f; ++j) {
        double sum = 0.0;
        double lo = x(0, j), hi = x(0, j);
        for (std::size_t i = 0; i < n; ++i) {
            sum += x(i, j);
            lo = std::min(lo, x(i, j));
            hi = std::max(hi, x(i, j));
        }
        const double mean = sum / static_cast<double>(n);
        params.mean[j] = mean;
        if (lo == hi) {
            params.constant[j] = true;
            continue;  // z column stays zero
        }
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        params.std[j] = sd;
        for (std::size_t i = 0; i < n; ++i) z(i, j) = (x(i, j) - mean) / sd;
    }
    return {grid.with_features(std::move(z)), std::move(params)};
}

// --- GeoJSON ---------------------------------------------------------------

std::string export_regions_geojson(const GridRaster& grid, std::span<const std::size_t> labels) {
    require(labels.size() == grid.active_count(), "partition cell count does not match grid active cells");
    std::size_t k = 0;
    for (auto l : labels) k = std::max(k, l + 1);
    std::vector<bool> used(k, false);
    for (auto l : labels) used[l] = true;
    require(std::all_of(used.begin(), used.end(), [](bool b) { return b; }), "region ids must be dense 0..k-1");

    using ojson = nlohmann::ordered_json;
    ojson features = ojson::array();
    const double h = grid.cell_size_deg() / 2.0;
    for (std::size_t i = 0; i < grid.active_count(); ++i) {
        const auto p = grid.position(i);
        const auto c = grid.centroid(i);
        const double w = c.lon - h, e = c.lon + h, s = c.lat - h, n = c.lat + h;
        ojson ring = ojson::array({ojson::array({w, s}), ojson::array({e, s}), ojson::array({e, n}),
                                   ojson::array({w, n}), ojson::array({w, s})});
        ojson feature;
        feature["type"] = "Feature";
        feature["geometry"] = {{"type", "Polygon"}, {"coordinates", ojson::array({ring})}};
        feature["properties"] = {{"row", p.row}, {"col", p.col}, {"region_id", labels[i]}};
        features.push_back(std::move(feature));
    }
    ojson doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = std::move(features);
    return doc.dump();
}

std::string export_regions_geojson(const GridRaster& grid, const RegionPartition& partition) {
    return export_regions_geojson(grid, std::span<const std::size_t>(partition.labels));
}

std::vector<std::size_t> parse_regions_geojson(const std::string& document, const GridRaster& grid) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("invalid GeoJSON: ") + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features") || !doc["features"].is_array()) {
        fail(ErrorKind::Parse, "document is not a FeatureCollection");
    }
    constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> labels(grid.active_count(), kUnset);
    try {
        for (const auto& f : doc["features"]) {
            const auto& props = f.at("properties");
            const auto row = props.at("row").get<std::size_t>();
            const auto col = props.at("col").get<std::size_t>();
            auto id = grid.cell_id(row, col);
            if (!id) fail(ErrorKind::Parse, "feature references an inactive cell");
            if (labels[*id] != kUnset) fail(ErrorKind::Parse, "cell listed twice");
            labels[*id] = props.at("region_id").get<std::size_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("malformed feature: ") + e.what());
    }
    if (std::find(labels.begin(), labels.end(), kUnset) != labels.end()) {
        fail(ErrorKind::Parse, "document does not cover every active cell");
    }
    return labels;
}

}  // namespace regio
