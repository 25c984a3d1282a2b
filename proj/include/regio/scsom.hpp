#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "regio/geo_grid.hpp"
#include "regio/matrix.hpp"

namespace regio {

struct Neuron {
    std::size_t cell = 0;  // representative cell the neuron was seeded from
    GeoPoint anchor;
    std::vector<double> weight;

    bool operator==(const Neuron&) const = default;
};

struct SomModel {
    std::vector<Neuron> neurons;
    double threshold_km = 0.0;
    std::vector<double> sigma_schedule;  // km, one per planned epoch

    std::size_t size() const noexcept { return neurons.size(); }
    bool operator==(const SomModel&) const = default;
};

struct Bmu {
    std::size_t neuron = 0;
    bool fallback = false;  // no anchor within threshold; nearest anchor used

    bool operator==(const Bmu&) const = default;
};

struct LabelAssignment {
    std::vector<std::size_t> bmu;
    std::vector<bool> fallback;
    double quantization_error = 0.0;

    std::size_t fallback_count() const;
};

struct SomConfig {
    std::size_t epochs = 50;
    double sigma_final_fraction = 0.25;  // sigma decays from threshold to threshold * fraction
    double tolerance = 1e-6;             // early stop on relative quantization-error change
};

struct SomFit {
    SomModel model;
    std::vector<double> epoch_quantization_error;
    std::size_t epochs_run = 0;
};

/// Farthest-point sampling over cell centroids, starting from the cell
/// nearest the mean centroid. Stops once the best candidate is closer than
/// threshold_km to every chosen anchor.
SomModel init_representatives(const Matrix& latent, std::span<const GeoPoint> centroids, double threshold_km);

/// Nearest-in-latent-space neuron among those anchored within threshold_km.
Bmu find_bmu(const SomModel& model, std::span<const double> cell_latent, const GeoPoint& cell_centroid);

/// Geometric sigma decay from threshold_km to threshold_km * final_fraction.
std::vector<double> sigma_schedule(double threshold_km, double final_fraction, std::size_t epochs);

/// Batch SOM with a Gaussian kernel over anchor-to-anchor distance. Anchors stay fixed.
SomFit fit(const SomModel& model, const Matrix& latent, std::span<const GeoPoint> centroids,
           const SomConfig& config = {});

LabelAssignment assign_labels(const SomModel& model, const Matrix& latent, std::span<const GeoPoint> centroids);

}  // namespace regio
