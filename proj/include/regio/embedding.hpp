#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "regio/matrix.hpp"

namespace regio {

// Fully connected layer, weight stored out x in row-major.
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weight;
    std::vector<double> bias;
    bool tanh = true;

    bool operator==(const DenseLayer&) const = default;
};

// D -> H -> L -> H -> D. The first two layers are the encoder.
struct AutoencoderModel {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t latent_dim = 0;
    std::uint64_t seed = 0;
    std::array<DenseLayer, 4> layers;

    std::size_t parameter_count() const noexcept;
    std::vector<double> parameters() const;
    void set_parameters(const std::vector<double>& flat);

    bool operator==(const AutoencoderModel&) const = default;
};

struct AutoencoderConfig {
    std::size_t latent_dim = 0;  // 0 selects 2 * D
    std::size_t hidden_dim = 0;  // 0 selects max(8, 2 * D)
    std::size_t epochs = 200;
    double step = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainingLog {
    std::vector<double> epoch_loss;  // loss at the start of each epoch
    std::size_t epochs = 0;
    double final_loss = 0.0;  // loss after the last update

    bool operator==(const TrainingLog&) const = default;
};

struct TrainedAutoencoder {
    AutoencoderModel model;
    TrainingLog log;
};

/// Glorot-uniform weights from a seeded generator, zero biases.
AutoencoderModel init_autoencoder(std::size_t input_dim, const AutoencoderConfig& config, std::uint64_t seed);

/// Full-batch Adam on mean squared reconstruction error. Deterministic in
/// (x, config, seed).
TrainedAutoencoder train_autoencoder(const Matrix& x, const AutoencoderConfig& config, std::uint64_t seed);

/// Latent rows tanh(W2 tanh(W1 x + b1) + b2).
Matrix encode(const AutoencoderModel& model, const Matrix& x);
Matrix reconstruct(const AutoencoderModel& model, const Matrix& x);

/// Mean over all N*D entries of the squared reconstruction residual.
double reconstruction_loss(const AutoencoderModel& model, const Matrix& x);

/// Analytic gradient of reconstruction_loss, flattened in parameters() order.
std::vector<double> loss_gradient(const AutoencoderModel& model, const Matrix& x, double* loss = nullptr);

/// Max relative error between the analytic gradient and central differences.
double gradient_check(const AutoencoderModel& model, const Matrix& x, double h = 1e-4);

}  // namespace regio
