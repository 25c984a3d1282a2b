#include "regio/serialize.hpp"

#include "regio/error.hpp"

namespace regio {

namespace {

nlohmann::json point_json(const GeoPoint& p) { return {{"lat", p.lat}, {"lon", p.lon}}; }

GeoPoint point_from_json(const nlohmann::json& j) { return {j.at("lat").get<double>(), j.at("lon").get<double>()}; }

std::string_view phase_name(MergePhase p) { return p == MergePhase::Dissolve ? "dissolve" : "grow"; }

}  // namespace

nlohmann::json to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.rows() * m.cols()) fail(ErrorKind::Corruption, "matrix data size mismatch");
    m.data() = std::move(data);
    return m;
}

nlohmann::json to_json(const StandardizationParams& p) {
    return {{"mean", p.mean}, {"std", p.std}, {"constant", p.constant}};
}

StandardizationParams standardization_from_json(const nlohmann::json& j) {
    return {j.at("mean").get<std::vector<double>>(), j.at("std").get<std::vector<double>>(),
            j.at("constant").get<std::vector<bool>>()};
}

nlohmann::json to_json(const Semivariogram& sv) {
    return {{"lag_bin_edges", sv.lag_bin_edges}, {"gamma", sv.gamma}, {"pair_counts", sv.pair_counts}};
}

Semivariogram semivariogram_from_json(const nlohmann::json& j) {
    return {j.at("lag_bin_edges").get<std::vector<double>>(), j.at("gamma").get<std::vector<double>>(),
            j.at("pair_counts").get<std::vector<std::size_t>>()};
}

nlohmann::json to_json(const ThresholdEstimate& t) {
    return {{"feature_names", t.feature_names},
            {"per_feature_range_km", t.per_feature_range_km},
            {"threshold_km", t.threshold_km},
            {"lower_clamp_km", t.lower_clamp_km},
            {"upper_clamp_km", t.upper_clamp_km},
            {"clamp_applied", t.clamp_applied}};
}

ThresholdEstimate threshold_from_json(const nlohmann::json& j) {
    ThresholdEstimate t;
    t.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    t.per_feature_range_km = j.at("per_feature_range_km").get<std::vector<double>>();
    t.threshold_km = j.at("threshold_km").get<double>();
    t.lower_clamp_km = j.at("lower_clamp_km").get<double>();
    t.upper_clamp_km = j.at("upper_clamp_km").get<double>();
    t.clamp_applied = j.at("clamp_applied").get<bool>();
    return t;
}

nlohmann::json to_json(const AutoencoderModel& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : m.layers) {
        layers.push_back({{"in", l.in}, {"out", l.out}, {"weight", l.weight}, {"bias", l.bias},
                          {"activation", l.tanh ? "tanh" : "identity"}});
    }
    return {{"input_dim", m.input_dim}, {"hidden_dim", m.hidden_dim}, {"latent_dim", m.latent_dim},
            {"seed", m.seed},           {"layers", layers}};
}

AutoencoderModel autoencoder_from_json(const nlohmann::json& j) {
    AutoencoderModel m;
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    m.latent_dim = j.at("latent_dim").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& layers = j.at("layers");
    if (layers.size() != m.layers.size()) fail(ErrorKind::Corruption, "autoencoder must have 4 layers");
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        auto& l = m.layers[i];
        l.in = layers[i].at("in").get<std::size_t>();
        l.out = layers[i].at("out").get<std::size_t>();
        l.weight = layers[i].at("weight").get<std::vector<double>>();
        l.bias = layers[i].at("bias").get<std::vector<double>>();
        l.tanh = layers[i].at("activation").get<std::string>() == "tanh";
        if (l.weight.size() != l.in * l.out || l.bias.size() != l.out) {
            fail(ErrorKind::Corruption, "autoencoder layer shape mismatch");
        }
    }
    return m;
}

nlohmann::json to_json(const TrainingLog& log) {
    return {{"epoch_loss", log.epoch_loss}, {"epochs", log.epochs}, {"final_loss", log.final_loss}};
}

TrainingLog training_log_from_json(const nlohmann::json& j) {
    return {j.at("epoch_loss").get<std::vector<double>>(), j.at("epochs").get<std::size_t>(),
            j.at("final_loss").get<double>()};
}

nlohmann::json to_json(const SomModel& m) {
    nlohmann::json neurons = nlohmann::json::array();
    for (const auto& n : m.neurons) {
        neurons.push_back({{"cell", n.cell}, {"anchor", point_json(n.anchor)}, {"weight", n.weight}});
    }
    return {{"threshold_km", m.threshold_km}, {"sigma_schedule", m.sigma_schedule}, {"neurons", neurons}};
}

SomModel som_from_json(const nlohmann::json& j) {
    SomModel m;
    m.threshold_km = j.at("threshold_km").get<double>();
    m.sigma_schedule = j.at("sigma_schedule").get<std::vector<double>>();
    for (const auto& n : j.at("neurons")) {
        m.neurons.push_back({n.at("cell").get<std::size_t>(), point_from_json(n.at("anchor")),
                             n.at("weight").get<std::vector<double>>()});
    }
    return m;
}

nlohmann::json to_json(const MergeTrace& t) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : t.events) {
        events.push_back({{"phase", phase_name(e.phase)}, {"a", e.a}, {"b", e.b}, {"cost", e.cost}, {"result", e.result}});
    }
    return {{"initial_count", t.initial_count}, {"final_count", t.final_count}, {"events", events}};
}

MergeTrace merge_trace_from_json(const nlohmann::json& j) {
    MergeTrace t;
    t.initial_count = j.at("initial_count").get<std::size_t>();
    t.final_count = j.at("final_count").get<std::size_t>();
    for (const auto& e : j.at("events")) {
        t.events.push_back({e.at("phase").get<std::string>() == "dissolve" ? MergePhase::Dissolve : MergePhase::Grow,
                            e.at("a").get<std::size_t>(), e.at("b").get<std::size_t>(), e.at("cost").get<double>(),
                            e.at("result").get<std::size_t>()});
    }
    return t;
}

nlohmann::json to_json(const RegionReport& r) {
    return {{"id", r.id},
            {"size", r.size},
            {"feature_mean", r.feature_mean},
            {"centroid", point_json(r.centroid)},
            {"bbox",
             {{"min_lat", r.bounds.min_lat},
              {"min_lon", r.bounds.min_lon},
              {"max_lat", r.bounds.max_lat},
              {"max_lon", r.bounds.max_lon}}}};
}

nlohmann::json to_json(const PartitionMetrics& m) {
    return {{"within_region_sse", m.within_region_sse},
            {"compactness", m.compactness},
            {"mean_compactness", m.mean_compactness},
            {"fragmentation", m.fragmentation},
            {"region_count", m.region_count}};
}

PartitionMetrics metrics_from_json(const nlohmann::json& j) {
    PartitionMetrics m;
    m.within_region_sse = j.at("within_region_sse").get<double>();
    m.compactness = j.at("compactness").get<std::vector<double>>();
    m.mean_compactness = j.at("mean_compactness").get<double>();
    m.fragmentation = j.at("fragmentation").get<std::size_t>();
    m.region_count = j.at("region_count").get<std::size_t>();
    return m;
}

}  // namespace regio
