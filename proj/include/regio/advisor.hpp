#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "regio/geo_grid.hpp"

namespace regio {

struct CatalogEntry {
    std::string name;
    std::string description;
    std::string category;  // socioeconomic | environmental | infrastructure
    std::map<std::string, double> hazard_weights;  // hazard tag -> relevance in (0, 1]
    std::string source_column;
};

class FeatureCatalog {
public:
    static FeatureCatalog from_json(const nlohmann::json& doc);
    static FeatureCatalog load(const std::filesystem::path& path);

    const std::vector<CatalogEntry>& entries() const noexcept { return entries_; }
    /// Entry whose source column (or name) equals `column`.
    const CatalogEntry* find_by_column(const std::string& column) const;

private:
    std::vector<CatalogEntry> entries_;
};

struct Suggestion {
    std::string feature;  // grid column name
    double score = 0.0;
    std::string description;
    std::string category;

    bool operator==(const Suggestion&) const = default;
};

/// Extension point for the feature-suggestion step. The shipped provider is
/// the deterministic catalog scorer; a conversational adapter would plug in here.
class SuggestionProvider {
public:
    virtual ~SuggestionProvider() = default;
    virtual std::vector<Suggestion> suggest(const std::string& hazard,
                                            std::span<const std::string> available) const = 0;
};

/// Ranked by (score desc, name asc); score is the catalog weight for the hazard, 0 otherwise.
std::vector<Suggestion> suggest_features(const FeatureCatalog& catalog, const std::string& hazard,
                                         std::span<const std::string> available);

class CatalogSuggestionProvider final : public SuggestionProvider {
public:
    explicit CatalogSuggestionProvider(FeatureCatalog catalog) : catalog_(std::move(catalog)) {}
    std::vector<Suggestion> suggest(const std::string& hazard, std::span<const std::string> available) const override {
        return suggest_features(catalog_, hazard, available);
    }

private:
    FeatureCatalog catalog_;
};

struct FeatureStats {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;  // population
    std::size_t missing = 0;
};

struct DatasetSummary {
    std::vector<FeatureStats> features;
    std::size_t active_cells = 0;
    BoundingBox bounds;
};

DatasetSummary summarize_dataset(const GridRaster& grid);

struct Place {
    std::string name;
    GeoPoint point;
    BoundingBox bounds;
};

class Gazetteer {
public:
    static Gazetteer from_json(const nlohmann::json& doc);
    static Gazetteer load(const std::filesystem::path& path);

    /// Case-insensitive, whitespace-normalized exact lookup.
    const Place& geocode(const std::string& query) const;
    std::size_t size() const noexcept { return places_.size(); }

private:
    std::map<std::string, Place> places_;  // keyed by normalized name
};

/// Trim, collapse internal whitespace runs to one space, lowercase.
std::string normalize_place_name(const std::string& name);

nlohmann::json to_json(const DatasetSummary& summary);
nlohmann::json to_json(const std::vector<Suggestion>& suggestions);
nlohmann::json to_json(const Place& place);

}  // namespace regio
