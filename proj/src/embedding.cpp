#include "regio/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "regio/error.hpp"

namespace regio {

namespace {

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

DenseLayer make_layer(std::size_t in, std::size_t out, bool tanh, std::mt19937_64& rng) {
    DenseLayer layer{in, out, std::vector<double>(in * out), std::vector<double>(out, 0.0), tanh};
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (auto& w : layer.weight) w = (2.0 * unit_uniform(rng) - 1.0) * limit;
    return layer;
}

void check_input(const AutoencoderModel& model, const Matrix& x) {
    require(x.cols() == model.input_dim,
            "input has " + std::to_string(x.cols()) + " columns, model expects " + std::to_string(model.input_dim));
}

// Activations of every layer for one sample; acts[0] is the input.
using Activations = std::array<std::vector<double>, 5>;

void forward(const AutoencoderModel& model, std::span<const double> x, Activations& acts, std::size_t depth = 4) {
    acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < depth; ++l) {
        const auto& layer = model.layers[l];
        auto& out = acts[l + 1];
        out.resize(layer.out);
        for (std::size_t o = 0; o < layer.out; ++o) {
            double z = layer.bias[o];
            const double* w = layer.weight.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) z += w[i] * acts[l][i];
            out[o] = layer.tanh ? std::tanh(z) : z;
        }
    }
}

}  // namespace

std::size_t AutoencoderModel::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
}

std::vector<double> AutoencoderModel::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& l : layers) {
        flat.insert(flat.end(), l.weight.begin(), l.weight.end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

void AutoencoderModel::set_parameters(const std::vector<double>& flat) {
    require(flat.size() == parameter_count(), "parameter vector size mismatch");
    auto it = flat.begin();
    for (auto& l : layers) {
        std::copy_n(it, l.weight.size(), l.weight.begin());
        it += static_cast<std::ptrdiff_t>(l.weight.size());
        std::copy_n(it, l.bias.size(), l.bias.begin());
        it += static_cast<std::ptrdiff_t>(l.bias.size());
    }
}

AutoencoderModel init_autoencoder(std::size_t input_dim, const AutoencoderConfig& config, std::uint64_t seed) {
    require(input_dim >= 1, "autoencoder needs at least one input feature");
    AutoencoderModel m;
    m.input_dim = input_dim;
    m.latent_dim = config.latent_dim ? config.latent_dim : 2 * input_dim;
    m.hidden_dim = config.hidden_dim ? config.hidden_dim : std::max<std::size_t>(8, 2 * input_dim);
    require(m.latent_dim > input_dim, "latent dimension must exceed the input dimension");
    m.seed = seed;
    std::mt19937_64 rng(seed);
    m.layers[0] = make_layer(input_dim, m.hidden_dim, true, rng);
    m.layers[1] = make_layer(m.hidden_dim, m.latent_dim, true, rng);
    m.layers[2] = make_layer(m.latent_dim, m.hidden_dim, true, rng);
    m.layers[3] = make_layer(m.hidden_dim, input_dim, false, rng);
    return m;
}

double reconstruction_loss(const AutoencoderModel& model, const Matrix& x) {
    check_input(model, x);
    if (x.rows() == 0) return 0.0;
    Activations acts;
    double sum = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        forward(model, x.row(r), acts);
        for (std::size_t d = 0; d < model.input_dim; ++d) {
            const double e = acts[4][d] - x(r, d);
            sum += e * e;
        }
    }
    return sum / static_cast<double>(x.rows() * model.input_dim);
}

std::vector<double> loss_gradient(const AutoencoderModel& model, const Matrix& x, double* loss) {
    check_input(model, x);
    std::array<std::vector<double>, 4> gw, gb;
    for (std::size_t l = 0; l < 4; ++l) {
        gw[l].assign(model.layers[l].weight.size(), 0.0);
        gb[l].assign(model.layers[l].bias.size(), 0.0);
    }
    const double scale = x.rows() ? 2.0 / static_cast<double>(x.rows() * model.input_dim) : 0.0;
    Activations acts;
    std::vector<double> delta, prev;
    double sum = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        forward(model, x.row(r), acts);
        delta.resize(model.input_dim);
        for (std::size_t d = 0; d < model.input_dim; ++d) {
            const double e = acts[4][d] - x(r, d);
            sum += e * e;
            delta[d] = scale * e;
        }
        // delta holds dLoss/dz for layer l (pre-activation) on entry to each step.
        for (std::size_t l = 4; l-- > 0;) {
            const auto& layer = model.layers[l];
            const auto& input = acts[l];
            for (std::size_t o = 0; o < layer.out; ++o) {
                gb[l][o] += delta[o];
                double* g = gw[l].data() + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) g[i] += delta[o] * input[i];
            }
            if (l == 0) break;
            prev.assign(layer.in, 0.0);
            for (std::size_t o = 0; o < layer.out; ++o) {
                const double* w = layer.weight.data() + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) prev[i] += w[i] * delta[o];
            }
            if (model.layers[l - 1].tanh) {
                for (std::size_t i = 0; i < layer.in; ++i) prev[i] *= 1.0 - input[i] * input[i];
            }
            delta.swap(prev);
        }
    }
    if (loss) *loss = x.rows() ? sum / static_cast<double>(x.rows() * model.input_dim) : 0.0;
    std::vector<double> flat;
    flat.reserve(model.parameter_count());
    for (std::size_t l = 0; l < 4; ++l) {
        flat.insert(flat.end(), gw[l].begin(), gw[l].end());
        flat.insert(flat.end(), gb[l].begin(), gb[l].end());
    }
    return flat;
}

TrainedAutoencoder train_autoencoder(const Matrix& x, const AutoencoderConfig& config, std::uint64_t seed) {
    require(x.rows() >= 1 && x.cols() >= 1, "training data must be nonempty");
    for (double v : x.data()) require(std::isfinite(v), "training data must be finite");
    require(config.step > 0.0, "step size must be positive");

    TrainedAutoencoder out{init_autoencoder(x.cols(), config, seed), {}};
    auto& model = out.model;
    auto theta = model.parameters();
    std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0);
    double b1t = 1.0, b2t = 1.0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double loss = 0.0;
        const auto grad = loss_gradient(model, x, &loss);
        if (!std::isfinite(loss)) {
            throw Error(ErrorKind::Divergence, "autoencoder loss became non-finite at epoch " + std::to_string(epoch))
                .with_epoch(static_cast<long>(epoch));
        }
        out.log.epoch_loss.push_back(loss);
        b1t *= config.beta1;
        b2t *= config.beta2;
        for (std::size_t p = 0; p < theta.size(); ++p) {
            m[p] = config.beta1 * m[p] + (1.0 - config.beta1) * grad[p];
            v[p] = config.beta2 * v[p] + (1.0 - config.beta2) * grad[p] * grad[p];
            const double mhat = m[p] / (1.0 - b1t);
            const double vhat = v[p] / (1.0 - b2t);
            theta[p] -= config.step * mhat / (std::sqrt(vhat) + config.epsilon);
        }
        model.set_parameters(theta);
    }
    out.log.epochs = config.epochs;
    out.log.final_loss = reconstruction_loss(model, x);
    if (!std::isfinite(out.log.final_loss)) {
        throw Error(ErrorKind::Divergence, "autoencoder loss became non-finite after the final epoch")
            .with_epoch(static_cast<long>(config.epochs));
    }
    return out;
}

Matrix encode(const AutoencoderModel& model, const Matrix& x) {
    check_input(model, x);
    Matrix z(x.rows(), model.latent_dim);
    Activations acts;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        forward(model, x.row(r), acts, 2);
        std::copy(acts[2].begin(), acts[2].end(), z.row(r).begin());
    }
    return z;
}

Matrix reconstruct(const AutoencoderModel& model, const Matrix& x) {
    check_input(model, x);
    Matrix y(x.rows(), model.input_dim);
    Activations acts;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        forward(model, x.row(r), acts);
        std::copy(acts[4].begin(), acts[4].end(), y.row(r).begin());
    }
    return y;
}

double gradient_check(const AutoencoderModel& model, const Matrix& x, double h) {
    const auto analytic = loss_gradient(model, x);
    auto probe = model;
    auto theta = model.parameters();
    double worst = 0.0;
    for (std::size_t p = 0; p < theta.size(); ++p) {
        const double saved = theta[p];
        theta[p] = saved + h;
        probe.set_parameters(theta);
        const double up = reconstruction_loss(probe, x);
        theta[p] = saved - h;
        probe.set_parameters(theta);
        const double down = reconstruction_loss(probe, x);
        theta[p] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic[p];
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-12});
        worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    return worst;
}

}  // namespace regio
