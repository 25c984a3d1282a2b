#include "regio/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "regio/error.hpp"
#include "regio/serialize.hpp"

namespace regio {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view representation_name(Representation r) {
    switch (r) {
        case Representation::BmuWeight: return "bmu_weight";
        case Representation::Latent: return "latent";
        case Representation::Standardized: return "standardized";
    }
    return "bmu_weight";
}

// Collects field-path problems while reading a config document.
class FieldReader {
public:
    explicit FieldReader(const json& doc) : doc_(doc) {}

    template <typename T>
    void read(std::string_view path, T& out) {
        const json* node = find(path);
        if (!node) return;
        try {
            out = node->get<T>();
        } catch (const json::exception&) {
            errors_.emplace_back(path);
        }
    }

    void read_count(std::string_view path, std::size_t& out) {
        const json* node = find(path);
        if (!node) return;
        if (!node->is_number_integer() || node->get<long long>() < 0) {
            errors_.emplace_back(path);
            return;
        }
        out = node->get<std::size_t>();
    }

    void read_number(std::string_view path, double& out) {
        const json* node = find(path);
        if (!node) return;
        if (!node->is_number()) {
            errors_.emplace_back(path);
            return;
        }
        out = node->get<double>();
    }

    const json* find(std::string_view path) const {
        const json* node = &doc_;
        std::string_view rest = path;
        while (!rest.empty()) {
            const auto dot = rest.find('.');
            const std::string key(rest.substr(0, dot));
            if (!node->is_object() || !node->contains(key)) return nullptr;
            node = &(*node)[key];
            rest = dot == std::string_view::npos ? std::string_view{} : rest.substr(dot + 1);
        }
        return node->is_null() ? nullptr : node;
    }

    void error(std::string path) { errors_.push_back(std::move(path)); }
    const std::vector<std::string>& errors() const { return errors_; }

private:
    const json& doc_;
    std::vector<std::string> errors_;
};

[[noreturn]] void invalid(const std::vector<std::string>& fields) {
    std::string message = "invalid config field(s):";
    for (const auto& f : fields) message += " " + f;
    throw Error(ErrorKind::Validation, message).with_fields(fields);
}

template <typename Fn>
auto in_stage(std::string_view stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (Error& e) {
        if (e.stage().empty()) e.with_stage(std::string(stage));
        throw;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Corruption, e.what()).with_stage(std::string(stage));
    }
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Contract, "cannot write " + path.string());
    out << bytes;
    if (!out) fail(ErrorKind::Contract, "failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::NotFound, "missing file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        fail(ErrorKind::Contract, "sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

// --- config ----------------------------------------------------------------

json to_json(const PipelineConfig& c) {
    return {{"features", c.features},
            {"k", c.k},
            {"seed", c.seed},
            {"threshold_km", c.threshold_km ? json(*c.threshold_km) : json(nullptr)},
            {"threshold_fraction", c.threshold_fraction},
            {"bins", c.bins},
            {"autoencoder",
             {{"latent_dim", c.autoencoder.latent_dim},
              {"hidden_dim", c.autoencoder.hidden_dim},
              {"epochs", c.autoencoder.epochs},
              {"step", c.autoencoder.step}}},
            {"som", {{"epochs", c.som.epochs}, {"sigma_final_fraction", c.som.sigma_final_fraction}}},
            {"refine", {{"min_size", c.refine.min_size}, {"lambda_geo", c.refine.lambda_geo}}},
            {"representation", representation_name(c.representation)}};
}

PipelineConfig config_from_json(const json& j) {
    if (!j.is_object()) invalid({"$"});
    static const std::set<std::string> kKnown = {"features",  "k",           "seed", "threshold_km", "threshold_fraction",
                                                 "bins",      "autoencoder", "som",  "refine",       "representation"};
    PipelineConfig c;
    FieldReader r(j);
    for (const auto& [key, value] : j.items()) {
        if (!kKnown.count(key)) r.error(key);
    }
    if (const auto* f = r.find("features")) {
        if (!f->is_array()) {
            r.error("features");
        } else {
            c.features.clear();
            for (std::size_t i = 0; i < f->size(); ++i) {
                if ((*f)[i].is_string()) {
                    c.features.push_back((*f)[i].get<std::string>());
                } else {
                    r.error("features[" + std::to_string(i) + "]");
                }
            }
        }
    }
    r.read_count("k", c.k);
    if (const auto* s = r.find("seed")) {
        if (s->is_number_unsigned() || (s->is_number_integer() && s->get<long long>() >= 0)) {
            c.seed = s->get<std::uint64_t>();
        } else {
            r.error("seed");
        }
    }
    if (r.find("threshold_km")) {
        double t = 0.0;
        r.read_number("threshold_km", t);
        c.threshold_km = t;
    }
    r.read_number("threshold_fraction", c.threshold_fraction);
    r.read_count("bins", c.bins);
    r.read_count("autoencoder.latent_dim", c.autoencoder.latent_dim);
    r.read_count("autoencoder.hidden_dim", c.autoencoder.hidden_dim);
    r.read_count("autoencoder.epochs", c.autoencoder.epochs);
    r.read_number("autoencoder.step", c.autoencoder.step);
    r.read_count("som.epochs", c.som.epochs);
    r.read_number("som.sigma_final_fraction", c.som.sigma_final_fraction);
    r.read_count("refine.min_size", c.refine.min_size);
    r.read_number("refine.lambda_geo", c.refine.lambda_geo);
    if (const auto* rep = r.find("representation")) {
        const auto name = rep->is_string() ? rep->get<std::string>() : "";
        if (name == "bmu_weight") c.representation = Representation::BmuWeight;
        else if (name == "latent") c.representation = Representation::Latent;
        else if (name == "standardized") c.representation = Representation::Standardized;
        else r.error("representation");
    }

    auto errors = r.errors();
    if (c.k < 1) errors.emplace_back("k");
    if (c.threshold_km && !(*c.threshold_km > 0.0 && std::isfinite(*c.threshold_km))) errors.emplace_back("threshold_km");
    if (!(c.threshold_fraction > 0.0 && c.threshold_fraction <= 1.0)) errors.emplace_back("threshold_fraction");
    if (c.bins < 1) errors.emplace_back("bins");
    if (c.autoencoder.epochs < 1) errors.emplace_back("autoencoder.epochs");
    if (!(c.autoencoder.step > 0.0)) errors.emplace_back("autoencoder.step");
    if (c.som.epochs < 1) errors.emplace_back("som.epochs");
    if (!(c.som.sigma_final_fraction > 0.0 && c.som.sigma_final_fraction <= 1.0)) {
        errors.emplace_back("som.sigma_final_fraction");
    }
    if (!(c.refine.lambda_geo >= 0.0)) errors.emplace_back("refine.lambda_geo");
    std::sort(errors.begin(), errors.end());
    errors.erase(std::unique(errors.begin(), errors.end()), errors.end());
    if (!errors.empty()) invalid(errors);
    return c;
}

PipelineConfig apply_config_delta(const PipelineConfig& base, const json& delta) {
    if (!delta.is_object()) invalid({"delta"});
    json merged = to_json(base);
    merged.merge_patch(delta);
    // merge_patch treats null as deletion; keep an explicit null override reset.
    if (delta.contains("threshold_km") && delta["threshold_km"].is_null()) merged["threshold_km"] = nullptr;
    return config_from_json(merged);
}

void validate_config(const PipelineConfig& config, const GridRaster& grid) {
    std::vector<std::string> errors;
    if (config.features.empty()) errors.emplace_back("features");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < config.features.size(); ++i) {
        const auto& f = config.features[i];
        if (!grid.feature_index(f) || !seen.insert(f).second) errors.push_back("features[" + std::to_string(i) + "]");
    }
    if (config.k < 1) errors.emplace_back("k");
    if (config.autoencoder.latent_dim != 0 && config.autoencoder.latent_dim <= config.features.size()) {
        errors.emplace_back("autoencoder.latent_dim");
    }
    std::sort(errors.begin(), errors.end());
    if (!errors.empty()) invalid(errors);
}

void check_feasible(const PipelineConfig& config, const GridRaster& grid) {
    if (config.k > grid.active_count()) {
        throw Error(ErrorKind::Infeasible, "k = " + std::to_string(config.k) + " exceeds the " +
                                               std::to_string(grid.active_count()) + " active cells")
            .with_fields({"k"});
    }
    std::size_t components = 0;
    connected_components(build_adjacency(grid), &components);
    if (config.k < components) {
        throw Error(ErrorKind::Infeasible, "k = " + std::to_string(config.k) + " is below the " +
                                               std::to_string(components) + " disconnected parts of the grid")
            .with_fields({"k"});
    }
}

// --- run -------------------------------------------------------------------

RunArtifacts run_pipeline(const GridRaster& grid, const PipelineConfig& config, const std::optional<fs::path>& run_dir) {
    validate_config(config, grid);
    check_feasible(config, grid);

    RunArtifacts run;
    run.config = to_json(config);
    if (run_dir) {
        fs::create_directories(*run_dir);
        write_file(*run_dir / "config.json", run.config.dump(2) + "\n");
    }
    auto record = [&](std::string_view name, json data) {
        const std::string key(name);
        const auto hash = sha256_hex(data.dump());
        if (run_dir) {
            const json file = {{"stage", key}, {"sha256", hash}, {"data", data}};
            write_file(*run_dir / (key + ".json"), file.dump(1) + "\n");
        }
        run.hashes[key] = hash;
        run.stages[key] = std::move(data);
        run.completed.push_back(key);
    };

    const auto selected = grid.select_features(config.features);
    const auto adjacency = build_adjacency(selected);
    const auto centroids = selected.centroids();

    const auto standardized = in_stage("standardized", [&] { return standardize(selected); });
    record("standardized", {{"feature_names", selected.feature_names()},
                            {"params", to_json(standardized.params)},
                            {"values", to_json(standardized.grid.features())}});

    const double som_threshold = in_stage("threshold", [&] {
        json data;
        double t = 0.0;
        if (config.threshold_km) {
            t = *config.threshold_km;
            data = {{"source", "override"}, {"estimate", nullptr}, {"semivariograms", json::array()}};
        } else {
            const auto estimate = geographic_threshold(standardized.grid, config.bins);
            json svs = json::array();
            for (const auto& sv : feature_semivariograms(standardized.grid, config.bins)) svs.push_back(to_json(sv));
            t = std::max(estimate.lower_clamp_km,
                         std::min(config.threshold_fraction * estimate.threshold_km, estimate.upper_clamp_km));
            data = {{"source", "variogram"}, {"estimate", to_json(estimate)}, {"semivariograms", svs}};
        }
        data["threshold_fraction"] = config.threshold_fraction;
        data["som_threshold_km"] = t;
        record("threshold", std::move(data));
        return t;
    });

    const auto& x = standardized.grid.features();
    const auto latent = in_stage("embedding", [&] {
        auto trained = train_autoencoder(x, config.autoencoder, config.seed);
        auto z = encode(trained.model, x);
        record("embedding", {{"model", to_json(trained.model)}, {"log", to_json(trained.log)}, {"latent", to_json(z)}});
        return z;
    });

    const auto labels = in_stage("som", [&] {
        const auto initial = init_representatives(latent, centroids, som_threshold);
        auto fitted = fit(initial, latent, centroids, config.som);
        auto assignment = assign_labels(fitted.model, latent, centroids);
        record("som", {{"model", to_json(fitted.model)},
                       {"initial_weights", to_json(initial)["neurons"]},
                       {"epoch_quantization_error", fitted.epoch_quantization_error},
                       {"epochs_run", fitted.epochs_run},
                       {"labels", assignment.bmu},
                       {"fallback", assignment.fallback},
                       {"quantization_error", assignment.quantization_error}});
        return std::make_pair(std::move(assignment), std::move(fitted.model));
    });

    run.partition = in_stage("regions", [&] {
        const auto& [assignment, som] = labels;
        Matrix vectors;
        switch (config.representation) {
            case Representation::BmuWeight:
                vectors = Matrix(latent.rows(), latent.cols());
                for (std::size_t i = 0; i < latent.rows(); ++i) {
                    const auto& w = som.neurons[assignment.bmu[i]].weight;
                    std::copy(w.begin(), w.end(), vectors.row(i).begin());
                }
                break;
            case Representation::Latent: vectors = latent; break;
            case Representation::Standardized: vectors = x; break;
        }
        const auto initial = initial_regions(assignment.bmu, adjacency, vectors, centroids);
        if (config.k > initial.region_count()) {
            throw Error(ErrorKind::Infeasible, "k = " + std::to_string(config.k) + " exceeds the " +
                                                   std::to_string(initial.region_count()) +
                                                   " initial regions produced by the SOM")
                .with_fields({"k"});
        }
        auto refined = grow_to_k(initial, adjacency, config.k, vectors, centroids, config.refine);
        json summaries = json::array();
        for (const auto& s : region_summaries(refined.partition, selected)) summaries.push_back(to_json(s));
        record("regions", {{"labels", refined.partition.labels},
                           {"region_count", refined.partition.region_count()},
                           {"representation", representation_name(config.representation)},
                           {"trace", to_json(refined.trace)},
                           {"summaries", summaries}});
        return std::move(refined.partition);
    });

    run.metrics = in_stage("metrics", [&] {
        auto m = evaluate_partition(run.partition.labels, x, selected, adjacency);
        record("metrics", to_json(m));
        return m;
    });

    run.geojson = export_regions_geojson(selected, run.partition);
    run.hashes["regions.geojson"] = sha256_hex(run.geojson);
    if (run_dir) {
        write_file(*run_dir / "regions.geojson", run.geojson);
        const json manifest = {{"stages", run.completed}, {"hashes", run.hashes}};
        write_file(*run_dir / "manifest.json", manifest.dump(2) + "\n");
    }
    return run;
}

json load_stage(const fs::path& run_dir, std::string_view stage) {
    if (std::find(kStageNames.begin(), kStageNames.end(), stage) == kStageNames.end()) {
        fail(ErrorKind::NotFound, "unknown stage '" + std::string(stage) + "'");
    }
    const auto path = run_dir / (std::string(stage) + ".json");
    if (!fs::exists(path)) fail(ErrorKind::NotFound, "stage '" + std::string(stage) + "' not present in run");
    json file;
    try {
        file = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::Corruption, "stage '" + std::string(stage) + "' is not valid JSON: " + e.what());
    }
    if (!file.is_object() || !file.contains("data") || !file.contains("sha256") || !file["sha256"].is_string() ||
        file.value("stage", "") != stage) {
        fail(ErrorKind::Corruption, "stage '" + std::string(stage) + "' file is malformed");
    }
    if (sha256_hex(file["data"].dump()) != file["sha256"].get<std::string>()) {
        fail(ErrorKind::Corruption, "stage '" + std::string(stage) + "' hash mismatch");
    }
    return file["data"];
}

std::map<std::string, std::string> load_manifest(const fs::path& run_dir) {
    try {
        return json::parse(read_file(run_dir / "manifest.json")).at("hashes").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Corruption, std::string("manifest unreadable: ") + e.what());
    }
}

}  // namespace regio
