#include "regio/scsom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regio/error.hpp"

namespace regio {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void check_inputs(const Matrix& latent, std::span<const GeoPoint> centroids) {
    require(latent.rows() == centroids.size(), "latent rows must match centroid count");
    for (double v : latent.data()) require(std::isfinite(v), "latent input must be finite");
}

// Anchors never move, so each cell's in-range neuron set is fixed for a fit.
struct CandidateIndex {
    std::vector<std::vector<std::size_t>> in_range;  // ascending neuron ids
    std::vector<std::size_t> nearest;                // used when in_range is empty
};

CandidateIndex build_candidates(const SomModel& model, std::span<const GeoPoint> centroids) {
    CandidateIndex idx;
    idx.in_range.resize(centroids.size());
    idx.nearest.resize(centroids.size());
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < model.neurons.size(); ++j) {
            const double d = haversine_km(model.neurons[j].anchor, centroids[i]);
            if (d <= model.threshold_km) idx.in_range[i].push_back(j);
            if (d < best) {
                best = d;
                idx.nearest[i] = j;
            }
        }
    }
    return idx;
}

Bmu indexed_bmu(const SomModel& model, const CandidateIndex& idx, std::size_t cell, std::span<const double> latent) {
    const auto& cands = idx.in_range[cell];
    if (cands.empty()) return {idx.nearest[cell], true};
    std::size_t best = cands.front();
    double best_d = squared_distance(latent, model.neurons[best].weight);
    for (std::size_t c = 1; c < cands.size(); ++c) {
        const double d = squared_distance(latent, model.neurons[cands[c]].weight);
        if (d < best_d) {
            best_d = d;
            best = cands[c];
        }
    }
    return {best, false};
}

LabelAssignment assign_indexed(const SomModel& model, const CandidateIndex& idx, const Matrix& latent) {
    LabelAssignment out;
    out.bmu.resize(latent.rows());
    out.fallback.resize(latent.rows());
    double qe = 0.0;
    for (std::size_t i = 0; i < latent.rows(); ++i) {
        const auto b = indexed_bmu(model, idx, i, latent.row(i));
        out.bmu[i] = b.neuron;
        out.fallback[i] = b.fallback;
        qe += std::sqrt(squared_distance(latent.row(i), model.neurons[b.neuron].weight));
    }
    out.quantization_error = latent.rows() ? qe / static_cast<double>(latent.rows()) : 0.0;
    return out;
}

}  // namespace

std::size_t LabelAssignment::fallback_count() const {
    return static_cast<std::size_t>(std::count(fallback.begin(), fallback.end(), true));
}

SomModel init_representatives(const Matrix& latent, std::span<const GeoPoint> centroids, double threshold_km) {
    const auto n = centroids.size();
    require(n >= 1, "need at least one cell");
    require(threshold_km > 0.0 && std::isfinite(threshold_km), "threshold must be positive");
    require(latent.rows() == n, "latent rows must match centroid count");

    GeoPoint mean{0.0, 0.0};
    for (const auto& c : centroids) {
        mean.lat += c.lat;
        mean.lon += c.lon;
    }
    mean.lat /= static_cast<double>(n);
    mean.lon /= static_cast<double>(n);

    std::size_t first = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = haversine_km(centroids[i], mean);
        if (d < best) {
            best = d;
            first = i;
        }
    }

    SomModel model;
    model.threshold_km = threshold_km;
    auto add = [&](std::size_t cell) {
        const auto row = latent.row(cell);
        model.neurons.push_back({cell, centroids[cell], std::vector<double>(row.begin(), row.end())});
    };
    add(first);

    std::vector<double> min_dist(n);
    for (std::size_t i = 0; i < n; ++i) min_dist[i] = haversine_km(centroids[i], centroids[first]);
    while (true) {
        std::size_t pick = 0;
        double far = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (min_dist[i] > far) {
                far = min_dist[i];
                pick = i;
            }
        }
        if (far < threshold_km) break;
        add(pick);
        for (std::size_t i = 0; i < n; ++i) {
            min_dist[i] = std::min(min_dist[i], haversine_km(centroids[i], centroids[pick]));
        }
    }
    return model;
}

Bmu find_bmu(const SomModel& model, std::span<const double> cell_latent, const GeoPoint& cell_centroid) {
    require(!model.neurons.empty(), "model has no neurons");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t j = 0; j < model.neurons.size(); ++j) {
        const auto& nj = model.neurons[j];
        if (haversine_km(nj.anchor, cell_centroid) > model.threshold_km) continue;
        const double d = squared_distance(cell_latent, nj.weight);
        if (!found || d < best_d) {
            best = j;
            best_d = d;
            found = true;
        }
    }
    if (found) return {best, false};

    best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < model.neurons.size(); ++j) {
        const double d = haversine_km(model.neurons[j].anchor, cell_centroid);
        if (d < best_d) {
            best = j;
            best_d = d;
        }
    }
    return {best, true};
}

std::vector<double> sigma_schedule(double threshold_km, double final_fraction, std::size_t epochs) {
    require(final_fraction > 0.0, "sigma final fraction must be positive");
    std::vector<double> out(epochs);
    for (std::size_t t = 0; t < epochs; ++t) {
        const double progress = epochs > 1 ? static_cast<double>(t) / static_cast<double>(epochs - 1) : 0.0;
        out[t] = threshold_km * std::pow(final_fraction, progress);
    }
    return out;
}

LabelAssignment assign_labels(const SomModel& model, const Matrix& latent, std::span<const GeoPoint> centroids) {
    check_inputs(latent, centroids);
    require(!model.neurons.empty(), "model has no neurons");
    return assign_indexed(model, build_candidates(model, centroids), latent);
}

SomFit fit(const SomModel& model, const Matrix& latent, std::span<const GeoPoint> centroids, const SomConfig& config) {
    require(config.epochs >= 1, "SOM needs at least one epoch");
    check_inputs(latent, centroids);
    require(!model.neurons.empty(), "model has no neurons");
    const auto k = model.neurons.size();
    const auto dim = latent.cols();
    for (const auto& n : model.neurons) require(n.weight.size() == dim, "neuron weight dimension mismatch");

    SomFit out{model, {}, 0};
    auto& som = out.model;
    som.sigma_schedule = sigma_schedule(model.threshold_km, config.sigma_final_fraction, config.epochs);

    Matrix anchor_sq(k, k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            const double d = haversine_km(som.neurons[a].anchor, som.neurons[b].anchor);
            anchor_sq(a, b) = d * d;
        }
    }

    const auto candidates = build_candidates(som, centroids);
    Matrix sums(k, dim);
    std::vector<double> counts(k);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto labels = assign_indexed(som, candidates, latent);
        const double qe = labels.quantization_error;
        out.epoch_quantization_error.push_back(qe);
        out.epochs_run = epoch + 1;
        if (epoch > 0) {
            const double prev = out.epoch_quantization_error[epoch - 1];
            const double rel = prev > 0.0 ? std::abs(qe - prev) / prev : std::abs(qe - prev);
            if (rel < config.tolerance) break;
        }

        // Per-BMU sums, then kernel-weighted means: sum_i h(j,b_i) x_i / sum_i h(j,b_i).
        std::fill(sums.data().begin(), sums.data().end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0.0);
        for (std::size_t i = 0; i < latent.rows(); ++i) {
            const auto b = labels.bmu[i];
            counts[b] += 1.0;
            auto s = sums.row(b);
            const auto x = latent.row(i);
            for (std::size_t d = 0; d < dim; ++d) s[d] += x[d];
        }
        const double sigma = som.sigma_schedule[epoch];
        const double inv = 1.0 / (2.0 * sigma * sigma);
        std::vector<double> acc(dim);
        for (std::size_t j = 0; j < k; ++j) {
            std::fill(acc.begin(), acc.end(), 0.0);
            double mass = 0.0;
            for (std::size_t b = 0; b < k; ++b) {
                if (counts[b] == 0.0) continue;
                const double h = std::exp(-anchor_sq(j, b) * inv);
                if (h == 0.0) continue;
                mass += h * counts[b];
                const auto s = sums.row(b);
                for (std::size_t d = 0; d < dim; ++d) acc[d] += h * s[d];
            }
            if (mass > 0.0) {
                for (std::size_t d = 0; d < dim; ++d) som.neurons[j].weight[d] = acc[d] / mass;
            }
        }
    }
    return out;
}

}  // namespace regio
