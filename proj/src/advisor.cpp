#include "regio/advisor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "regio/error.hpp"

namespace regio {

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::NotFound, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

nlohmann::json bounds_json(const BoundingBox& b) {
    return {{"min_lat", b.min_lat}, {"min_lon", b.min_lon}, {"max_lat", b.max_lat}, {"max_lon", b.max_lon}};
}

}  // namespace

FeatureCatalog FeatureCatalog::from_json(const nlohmann::json& doc) {
    FeatureCatalog catalog;
    std::set<std::string> names;
    try {
        for (const auto& e : doc.at("features")) {
            CatalogEntry entry;
            entry.name = e.at("name").get<std::string>();
            entry.description = e.value("description", "");
            entry.category = e.value("category", "");
            entry.source_column = e.value("source_column", entry.name);
            for (const auto& [tag, weight] : e.at("hazards").items()) {
                const double w = weight.get<double>();
                if (!(w > 0.0 && w <= 1.0)) {
                    fail(ErrorKind::Schema, "catalog entry '" + entry.name + "': weight for '" + tag + "' outside (0,1]");
                }
                entry.hazard_weights[tag] = w;
            }
            if (entry.hazard_weights.empty()) fail(ErrorKind::Schema, "catalog entry '" + entry.name + "' has no tags");
            if (!names.insert(entry.name).second) fail(ErrorKind::Schema, "duplicate catalog entry '" + entry.name + "'");
            catalog.entries_.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Schema, std::string("malformed catalog: ") + e.what());
    }
    return catalog;
}

FeatureCatalog FeatureCatalog::load(const std::filesystem::path& path) { return from_json(read_json(path)); }

const CatalogEntry* FeatureCatalog::find_by_column(const std::string& column) const {
    for (const auto& e : entries_) {
        if (e.source_column == column) return &e;
    }
    for (const auto& e : entries_) {
        if (e.name == column) return &e;
    }
    return nullptr;
}

std::vector<Suggestion> suggest_features(const FeatureCatalog& catalog, const std::string& hazard,
                                         std::span<const std::string> available) {
    require(!hazard.empty(), "hazard must be nonempty");
    require(!available.empty(), "no available features to rank");
    std::vector<Suggestion> out;
    for (const auto& column : available) {
        Suggestion s{column, 0.0, "", ""};
        if (const auto* entry = catalog.find_by_column(column)) {
            s.description = entry->description;
            s.category = entry->category;
            if (auto it = entry->hazard_weights.find(hazard); it != entry->hazard_weights.end()) s.score = it->second;
        }
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) {
        return a.score != b.score ? a.score > b.score : a.feature < b.feature;
    });
    return out;
}

DatasetSummary summarize_dataset(const GridRaster& grid) {
    DatasetSummary s;
    s.active_cells = grid.active_count();
    const auto n = static_cast<double>(grid.active_count());
    for (std::size_t f = 0; f < grid.feature_count(); ++f) {
        FeatureStats st;
        st.name = grid.feature_names()[f];
        st.missing = grid.missing_counts()[f];
        st.min = st.max = grid.features()(0, f);
        double sum = 0.0;
        for (std::size_t i = 0; i < grid.active_count(); ++i) {
            const double v = grid.features()(i, f);
            st.min = std::min(st.min, v);
            st.max = std::max(st.max, v);
            sum += v;
        }
        st.mean = sum / n;
        if (st.min == st.max) {
            st.mean = st.min;
        } else {
            double ss = 0.0;
            for (std::size_t i = 0; i < grid.active_count(); ++i) {
                const double d = grid.features()(i, f) - st.mean;
                ss += d * d;
            }
            st.std = std::sqrt(ss / n);
        }
        s.features.push_back(std::move(st));
    }
    s.bounds = grid.cell_bounds(0);
    for (std::size_t i = 1; i < grid.active_count(); ++i) {
        const auto b = grid.cell_bounds(i);
        s.bounds.min_lat = std::min(s.bounds.min_lat, b.min_lat);
        s.bounds.min_lon = std::min(s.bounds.min_lon, b.min_lon);
        s.bounds.max_lat = std::max(s.bounds.max_lat, b.max_lat);
        s.bounds.max_lon = std::max(s.bounds.max_lon, b.max_lon);
    }
    return s;
}

std::string normalize_place_name(const std::string& name) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : name) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

Gazetteer Gazetteer::from_json(const nlohmann::json& doc) {
    Gazetteer g;
    try {
        for (const auto& p : doc.at("places")) {
            Place place;
            place.name = p.at("name").get<std::string>();
            place.point = {p.at("lat").get<double>(), p.at("lon").get<double>()};
            const auto& b = p.at("bbox");
            place.bounds = {b.at("min_lat").get<double>(), b.at("min_lon").get<double>(),
                            b.at("max_lat").get<double>(), b.at("max_lon").get<double>()};
            if (!is_valid(place.point)) fail(ErrorKind::Schema, "place '" + place.name + "' has invalid coordinates");
            auto key = normalize_place_name(place.name);
            if (key.empty()) fail(ErrorKind::Schema, "place name is blank");
            if (!g.places_.emplace(key, std::move(place)).second) {
                fail(ErrorKind::Schema, "duplicate place name '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Schema, std::string("malformed gazetteer: ") + e.what());
    }
    return g;
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) { return from_json(read_json(path)); }

const Place& Gazetteer::geocode(const std::string& query) const {
    const auto key = normalize_place_name(query);
    require(!key.empty(), "geocode query must be nonempty");
    if (auto it = places_.find(key); it != places_.end()) return it->second;

    const auto first_word = key.substr(0, key.find(' '));
    std::vector<std::string> candidates;
    for (const auto& [k, place] : places_) {
        if (k.rfind(key, 0) == 0 || k.rfind(first_word, 0) == 0 || key.rfind(k, 0) == 0) candidates.push_back(place.name);
    }
    std::string message = "no place named '" + query + "'";
    if (!candidates.empty()) {
        message += "; did you mean:";
        for (std::size_t i = 0; i < candidates.size(); ++i) message += (i ? ", " : " ") + candidates[i];
    }
    throw Error(ErrorKind::NotFound, message).with_fields(candidates);
}

nlohmann::json to_json(const DatasetSummary& summary) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& f : summary.features) {
        features.push_back({{"name", f.name},
                            {"min", f.min},
                            {"max", f.max},
                            {"mean", f.mean},
                            {"std", f.std},
                            {"missing", f.missing}});
    }
    return {{"features", features}, {"active_cells", summary.active_cells}, {"bbox", bounds_json(summary.bounds)}};
}

nlohmann::json to_json(const std::vector<Suggestion>& suggestions) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : suggestions) {
        out.push_back({{"feature", s.feature},
                       {"score", s.score},
                       {"description", s.description},
                       {"category", s.category}});
    }
    return out;
}

nlohmann::json to_json(const Place& place) {
    return {{"name", place.name},
            {"lat", place.point.lat},
            {"lon", place.point.lon},
            {"bbox", bounds_json(place.bounds)}};
}

}  // namespace regio
