#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "regio/advisor.hpp"
#include "regio/error.hpp"
#include "support.hpp"

using namespace regio;
using nlohmann::json;

namespace {

const std::filesystem::path kData = REGIO_DATA_DIR;

FeatureCatalog two_feature_catalog() {
    return FeatureCatalog::from_json(json::parse(R"({"features": [
        {"name": "slope", "category": "environmental", "hazards": {"flooding": 0.6}},
        {"name": "impervious_surface", "category": "environmental", "hazards": {"flooding": 0.9, "heat": 0.7}},
        {"name": "income", "category": "socioeconomic", "hazards": {"heat": 0.4}},
        {"name": "canopy", "category": "environmental", "hazards": {"heat": 0.4}}
    ]})"));
}

std::vector<std::string> names_of(const std::vector<Suggestion>& s) {
    std::vector<std::string> out;
    for (const auto& x : s) out.push_back(x.feature);
    return out;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected a regio::Error");
    return ErrorKind::Contract;
}

}  // namespace

TEST_SUITE("suggest_features") {
    TEST_CASE("ranked by hazard weight") {
        const auto c = two_feature_catalog();
        const std::vector<std::string> available = {"slope", "impervious_surface"};
        const auto s = suggest_features(c, "flooding", available);
        CHECK(names_of(s) == std::vector<std::string>{"impervious_surface", "slope"});
        CHECK(s[0].score == 0.9);
        CHECK(s[1].score == 0.6);
    }

    TEST_CASE("unknown hazard is alphabetical with zero scores") {
        const auto c = two_feature_catalog();
        const std::vector<std::string> available = {"slope", "income", "impervious_surface", "canopy"};
        const auto s = suggest_features(c, "zzz", available);
        CHECK(names_of(s) == std::vector<std::string>{"canopy", "impervious_surface", "income", "slope"});
        for (const auto& x : s) CHECK(x.score == 0.0);
    }

    TEST_CASE("ties break alphabetically; untagged and uncatalogued columns score zero") {
        const auto c = two_feature_catalog();
        const std::vector<std::string> available = {"income", "slope", "canopy", "elevation_raw"};
        const auto s = suggest_features(c, "heat", available);
        CHECK(names_of(s) == std::vector<std::string>{"canopy", "income", "elevation_raw", "slope"});
        CHECK(s[2].score == 0.0);
    }

    TEST_CASE("only available features are returned; empty inputs are contract errors") {
        const auto c = two_feature_catalog();
        const std::vector<std::string> available = {"slope"};
        CHECK(names_of(suggest_features(c, "flooding", available)) == available);
        CHECK(kind_of([&] { suggest_features(c, "flooding", {}); }) == ErrorKind::Contract);
        CHECK(kind_of([&] { suggest_features(c, "", available); }) == ErrorKind::Contract);
    }

    TEST_CASE("the order is total and stable under input permutation") {
        const auto c = FeatureCatalog::load(kData / "catalog.json");
        std::vector<std::string> available;
        for (const auto& e : c.entries()) available.push_back(e.source_column);
        std::mt19937_64 rng(1);
        const auto base = suggest_features(c, "flooding", available);
        for (int i = 0; i < 10; ++i) {
            std::shuffle(available.begin(), available.end(), rng);
            CHECK(suggest_features(c, "flooding", available) == base);
        }
        for (std::size_t i = 1; i < base.size(); ++i) {
            CHECK((base[i - 1].score > base[i].score ||
                   (base[i - 1].score == base[i].score && base[i - 1].feature < base[i].feature)));
        }
    }

    TEST_CASE("shipped catalog covers three classes and leads with impervious surface for flooding") {
        const auto c = FeatureCatalog::load(kData / "catalog.json");
        CHECK(c.entries().size() >= 10);
        std::set<std::string> classes;
        for (const auto& e : c.entries()) classes.insert(e.category);
        CHECK(classes == std::set<std::string>{"environmental", "infrastructure", "socioeconomic"});
        const std::vector<std::string> available = {"slope", "impervious_surface"};
        CHECK(names_of(suggest_features(c, "flooding", available)) ==
              std::vector<std::string>{"impervious_surface", "slope"});
    }

    TEST_CASE("catalog schema violations") {
        auto bad = [](const char* text) { return kind_of([&] { FeatureCatalog::from_json(json::parse(text)); }); };
        CHECK(bad(R"({"features": [{"name": "a", "hazards": {"flooding": 1.5}}]})") == ErrorKind::Schema);
        CHECK(bad(R"({"features": [{"name": "a", "hazards": {"flooding": 0}}]})") == ErrorKind::Schema);
        CHECK(bad(R"({"features": [{"name": "a", "hazards": {}}]})") == ErrorKind::Schema);
        CHECK(bad(R"({"features": [{"name": "a", "hazards": {"x": 1}}, {"name": "a", "hazards": {"x": 1}}]})") ==
              ErrorKind::Schema);
        CHECK(bad(R"({"nope": []})") == ErrorKind::Schema);
    }

    TEST_CASE("provider interface forwards to the scorer") {
        const CatalogSuggestionProvider provider(two_feature_catalog());
        const SuggestionProvider& p = provider;
        const std::vector<std::string> available = {"slope", "impervious_surface"};
        CHECK(p.suggest("flooding", available) == suggest_features(two_feature_catalog(), "flooding", available));
    }
}

TEST_SUITE("summarize_dataset") {
    TEST_CASE("exact stats for a tiny feature, constant feature, missing counts") {
        Matrix x(4, 2);
        for (std::size_t i = 0; i < 4; ++i) {
            x(i, 0) = static_cast<double>(i + 1);
            x(i, 1) = 5.0;
        }
        const auto g = GridRaster::make(2, 2, {30, -81}, 0.01, {1, 1, 1, 1}, {"a", "c"}, x);
        const auto s = summarize_dataset(g);
        CHECK(s.active_cells == 4);
        CHECK(s.features[0].mean == 2.5);
        CHECK(s.features[0].min == 1.0);
        CHECK(s.features[0].max == 4.0);
        CHECK(s.features[1].std == 0.0);
        CHECK(s.features[1].min == s.features[1].mean);
        CHECK(s.features[1].missing == 0);
        CHECK(s.bounds.min_lat == doctest::Approx(29.995));
        CHECK(s.bounds.max_lon == doctest::Approx(-80.985));

        const auto parsed = parse_grid_csv("row,col,lat,lon,v\n0,0,30,-81,1\n0,1,30,-80.99,\n1,0,30.01,-81,3\n");
        CHECK(summarize_dataset(parsed).features[0].missing == 1);
    }

    TEST_CASE("matches a streaming recomputation") {
        std::mt19937_64 rng(12);
        for (int trial = 0; trial < 10; ++trial) {
            const auto g = testing::random_grid(rng, 7, 8, 3, 0.8);
            const auto s = summarize_dataset(g);
            for (std::size_t f = 0; f < 3; ++f) {
                // Welford's update.
                double mean = 0, m2 = 0, lo = INFINITY, hi = -INFINITY;
                for (std::size_t i = 0; i < g.active_count(); ++i) {
                    const double v = g.features()(i, f);
                    const double delta = v - mean;
                    mean += delta / static_cast<double>(i + 1);
                    m2 += delta * (v - mean);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                CHECK(std::abs(s.features[f].mean - mean) <= 1e-12);
                CHECK(std::abs(s.features[f].std - std::sqrt(m2 / g.active_count())) <= 1e-12);
                CHECK(s.features[f].min == lo);
                CHECK(s.features[f].max == hi);
                CHECK(s.features[f].min <= s.features[f].mean);
                CHECK(s.features[f].mean <= s.features[f].max);
            }
        }
    }
}

TEST_SUITE("geocode") {
    TEST_CASE("exact and normalized lookups") {
        const auto gz = Gazetteer::load(kData / "gazetteer.json");
        const auto& p = gz.geocode("Jacksonville, FL");
        CHECK(p.name == "Jacksonville, FL");
        CHECK(p.point.lat == doctest::Approx(30.3322));
        CHECK(p.bounds.min_lat < p.point.lat);
        CHECK(&gz.geocode("  jacksonville,   fl ") == &p);
        for (const std::string q : {"JACKSONVILLE, FL", "\tTampa,  fl", "miami, fl"}) {
            CHECK(&gz.geocode(normalize_place_name(q)) == &gz.geocode(q));
        }
    }

    TEST_CASE("misses are not-found errors listing prefix candidates") {
        const auto gz = Gazetteer::load(kData / "gazetteer.json");
        CHECK(kind_of([&] { gz.geocode("Atlantis"); }) == ErrorKind::NotFound);
        try {
            gz.geocode("Jacksonville");
            FAIL("expected not found");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NotFound);
            CHECK(e.fields() == std::vector<std::string>{"Jacksonville Beach, FL", "Jacksonville, FL"});
        }
    }

    TEST_CASE("names must be unique after normalization") {
        const auto doc = json::parse(R"({"places": [
            {"name": "A  B", "lat": 0, "lon": 0, "bbox": {"min_lat": 0, "min_lon": 0, "max_lat": 1, "max_lon": 1}},
            {"name": "a b", "lat": 0, "lon": 0, "bbox": {"min_lat": 0, "min_lon": 0, "max_lat": 1, "max_lon": 1}}]})");
        CHECK(kind_of([&] { Gazetteer::from_json(doc); }) == ErrorKind::Schema);
        CHECK(normalize_place_name("  A \t B  ") == "a b");
    }
}
