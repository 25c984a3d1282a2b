// regio: command-line front end for the regionalization pipeline and service.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "regio/advisor.hpp"
#include "regio/error.hpp"
#include "regio/geo_grid.hpp"
#include "regio/http_service.hpp"
#include "regio/pipeline.hpp"
#include "regio/serialize.hpp"
#include "regio/session_store.hpp"
#include "regio/synthetic.hpp"

namespace {

using nlohmann::json;
using regio::Error;
using regio::ErrorKind;

regio::HttpService* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Contract, "cannot write " + path);
    out << text;
}

struct RunArgs {
    std::string grid, catalog, hazard, features, out, dump_stages;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::optional<double> threshold_km;
};

int run_command(const RunArgs& a) {
    const auto grid = regio::load_grid_csv(a.grid);
    const auto catalog = regio::FeatureCatalog::load(a.catalog);

    regio::PipelineConfig config;
    if (a.features == "auto") {
        // Every feature the catalog tags for the hazard.
        for (const auto& s : regio::suggest_features(catalog, a.hazard, grid.feature_names())) {
            if (s.score > 0.0) config.features.push_back(s.feature);
        }
        if (config.features.empty()) {
            throw Error(ErrorKind::Validation, "no grid feature is tagged for hazard '" + a.hazard + "'")
                .with_fields({"features"});
        }
    } else {
        config.features = split_csv(a.features);
    }
    config.k = a.k;
    config.seed = a.seed;
    config.threshold_km = a.threshold_km;
    // Re-read through the strict parser so CLI input gets the same checks as the service.
    config = regio::config_from_json(regio::to_json(config));

    std::optional<std::filesystem::path> dir;
    if (!a.dump_stages.empty()) dir = a.dump_stages;
    const auto run = regio::run_pipeline(grid, config, dir);
    write_text(a.out, run.geojson);
    std::cout << json{{"regions", run.partition.region_count()},
                      {"features", config.features},
                      {"metrics", regio::to_json(run.metrics)},
                      {"geojson_sha256", run.hashes.at("regions.geojson")}}
                     .dump()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Demand-oriented regionalization of gridded study areas"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run the pipeline once and write regions as GeoJSON");
    run->add_option("--grid", run_args.grid, "Grid CSV (row,col,lat,lon,features...)")->required();
    run->add_option("--catalog", run_args.catalog, "Feature catalog JSON")->required();
    run->add_option("--hazard", run_args.hazard, "Hazard tag, e.g. flooding")->required();
    run->add_option("--features", run_args.features, "Comma-separated feature names, or 'auto'")->required();
    run->add_option("--k", run_args.k, "Number of regions")->required();
    run->add_option("--seed", run_args.seed, "Random seed")->required();
    run->add_option("--threshold-km", run_args.threshold_km, "Override the geographic threshold");
    run->add_option("--out", run_args.out, "Output GeoJSON path")->required();
    run->add_option("--dump-stages", run_args.dump_stages, "Directory for stage artifacts");

    std::string grid_path, catalog_path, gazetteer_path, data_dir, host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Start the HTTP session service");
    serve->add_option("--grid", grid_path, "Grid CSV")->required();
    serve->add_option("--catalog", catalog_path, "Feature catalog JSON")->required();
    serve->add_option("--gazetteer", gazetteer_path, "Gazetteer JSON")->required();
    serve->add_option("--data-dir", data_dir, "Session storage directory")->required();
    serve->add_option("--port", port, "TCP port")->required();
    serve->add_option("--host", host, "Bind address");

    std::string synth_kind = "demo", synth_out, truth_out;
    std::size_t synth_rows = 24, synth_cols = 24;
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "Write a synthetic grid CSV");
    synth->add_option("--kind", synth_kind, "demo | planted")->check(CLI::IsMember({"demo", "planted"}));
    synth->add_option("--rows", synth_rows, "Grid rows");
    synth->add_option("--cols", synth_cols, "Grid columns");
    synth->add_option("--seed", synth_seed, "Random seed");
    synth->add_option("--out", synth_out, "Output CSV path")->required();
    synth->add_option("--truth", truth_out, "Planted block labels as JSON (planted only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << "\n";
        return 2;
    }

    try {
        if (*run) return run_command(run_args);
        if (*serve) {
            regio::SessionStore store(data_dir, regio::load_grid_csv(grid_path),
                                      regio::FeatureCatalog::load(catalog_path),
                                      regio::Gazetteer::load(gazetteer_path));
            regio::HttpService service(store);
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on " << host << ":" << port << "\n";
            if (!service.listen(host, port)) throw Error(ErrorKind::Contract, "cannot listen on port " + std::to_string(port));
            g_service = nullptr;
            return 0;
        }
        if (*synth) {
            if (synth_kind == "demo") {
                write_text(synth_out, regio::write_grid_csv(regio::demo_study_area(synth_rows, synth_cols, synth_seed)));
            } else {
                regio::PlantedGridSpec spec;
                spec.rows = synth_rows;
                spec.cols = synth_cols;
                spec.seed = synth_seed;
                const auto planted = regio::planted_quadrants(spec);
                write_text(synth_out, regio::write_grid_csv(planted.grid));
                if (!truth_out.empty()) write_text(truth_out, json(planted.truth).dump() + "\n");
            }
            return 0;
        }
    } catch (const Error& e) {
        json err = {{"kind", regio::to_string(e.kind())}, {"message", e.what()}};
        if (!e.stage().empty()) err["stage"] = e.stage();
        if (!e.fields().empty()) err["fields"] = e.fields();
        if (e.line() >= 0) err["line"] = e.line();
        std::cerr << json{{"error", err}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 0;
}
