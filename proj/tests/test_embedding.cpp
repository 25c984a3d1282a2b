#include <doctest.h>

#include <cmath>
#include <random>

#include "regio/embedding.hpp"
#include "regio/error.hpp"

using namespace regio;

namespace {

Matrix gaussian(std::mt19937_64& rng, std::size_t n, std::size_t d, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix x(n, d);
    for (auto& v : x.data()) v = g(rng);
    return x;
}

std::vector<double> dense(const DenseLayer& l, const std::vector<double>& in) {
    std::vector<double> out(l.out);
    for (std::size_t o = 0; o < l.out; ++o) {
        double s = l.bias[o];
        for (std::size_t i = 0; i < l.in; ++i) s += l.weight[o * l.in + i] * in[i];
        out[o] = l.tanh ? std::tanh(s) : s;
    }
    return out;
}

AutoencoderModel small_model(std::size_t d, std::size_t h, std::size_t l, std::uint64_t seed) {
    AutoencoderConfig c;
    c.hidden_dim = h;
    c.latent_dim = l;
    return init_autoencoder(d, c, seed);
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

TEST_SUITE("init") {
    TEST_CASE("default dimensions and Glorot bounds") {
        const auto m = init_autoencoder(3, {}, 7);
        CHECK(m.hidden_dim == 8);
        CHECK(m.latent_dim == 6);
        CHECK(init_autoencoder(6, {}, 7).hidden_dim == 12);
        const std::size_t dims[5] = {3, 8, 6, 8, 3};
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& l = m.layers[k];
            CHECK(l.in == dims[k]);
            CHECK(l.out == dims[k + 1]);
            CHECK(l.tanh == (k < 3));
            const double bound = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
            for (auto w : l.weight) CHECK(std::abs(w) <= bound);
            for (auto b : l.bias) CHECK(b == 0.0);
        }
        CHECK(m.parameter_count() == m.parameters().size());
    }

    TEST_CASE("latent must exceed input") {
        AutoencoderConfig c;
        c.latent_dim = 3;
        CHECK(kind_of([&] { init_autoencoder(3, c, 0); }) == ErrorKind::Contract);
    }
}

TEST_SUITE("encode") {
    TEST_CASE("single row matches a hand-rolled forward pass") {
        std::mt19937_64 rng(3);
        const auto m = small_model(3, 8, 6, 11);
        const auto x = gaussian(rng, 1, 3);
        const auto z = encode(m, x);
        const std::vector<double> in(x.row(0).begin(), x.row(0).end());
        const auto oracle = dense(m.layers[1], dense(m.layers[0], in));
        const auto recon = dense(m.layers[3], dense(m.layers[2], oracle));
        const auto r = reconstruct(m, x);
        for (std::size_t j = 0; j < oracle.size(); ++j) CHECK(std::abs(z(0, j) - oracle[j]) <= 1e-12);
        for (std::size_t j = 0; j < recon.size(); ++j) CHECK(std::abs(r(0, j) - recon[j]) <= 1e-12);
    }

    TEST_CASE("empty input and zero parameters") {
        auto m = small_model(2, 8, 4, 1);
        CHECK(encode(m, Matrix(0, 2)).cols() == 4);
        CHECK(encode(m, Matrix(0, 2)).rows() == 0);
        m.set_parameters(std::vector<double>(m.parameter_count(), 0.0));
        std::mt19937_64 rng(4);
        const auto z = encode(m, gaussian(rng, 5, 2));
        for (auto v : z.data()) CHECK(v == 0.0);
    }

    TEST_CASE("outputs lie strictly inside (-1, 1)") {
        std::mt19937_64 rng(5);
        const auto m = small_model(4, 8, 8, 2);
        for (auto v : encode(m, gaussian(rng, 50, 4, 3.0)).data()) {
            CHECK(v > -1.0);
            CHECK(v < 1.0);
        }
    }

    TEST_CASE("dimension mismatch is a contract error") {
        const auto m = small_model(2, 8, 4, 1);
        CHECK(kind_of([&] { encode(m, Matrix(3, 3)); }) == ErrorKind::Contract);
    }
}

TEST_SUITE("gradient") {
    TEST_CASE("central differences agree on random small models") {
        std::mt19937_64 rng(12);
        for (int trial = 0; trial < 6; ++trial) {
            const auto m = small_model(2, 8, 4, 100 + trial);
            const auto x = gaussian(rng, 4, 2);
            CHECK(gradient_check(m, x, 1e-4) < 1e-5);
        }
    }

    TEST_CASE("zero input and zero parameters is stationary") {
        auto m = small_model(2, 8, 4, 1);
        m.set_parameters(std::vector<double>(m.parameter_count(), 0.0));
        for (auto g : loss_gradient(m, Matrix(3, 2))) CHECK(std::abs(g) <= 1e-10);
    }

    TEST_CASE("duplicating every row leaves the gradient unchanged") {
        std::mt19937_64 rng(6);
        const auto m = small_model(3, 8, 6, 9);
        const auto x = gaussian(rng, 5, 3);
        Matrix twice(10, 3);
        for (std::size_t i = 0; i < 10; ++i) {
            for (std::size_t j = 0; j < 3; ++j) twice(i, j) = x(i % 5, j);
        }
        double l1 = 0, l2 = 0;
        const auto g1 = loss_gradient(m, x, &l1);
        const auto g2 = loss_gradient(m, twice, &l2);
        CHECK(l1 == doctest::Approx(l2).epsilon(1e-14));
        for (std::size_t p = 0; p < g1.size(); ++p) CHECK(std::abs(g1[p] - g2[p]) <= 1e-14 * (1.0 + std::abs(g1[p])));
    }
}

TEST_SUITE("training") {
    TEST_CASE("deterministic per seed") {
        std::mt19937_64 rng(1);
        const auto x = gaussian(rng, 20, 3);
        AutoencoderConfig c;
        c.epochs = 30;
        const auto a = train_autoencoder(x, c, 5);
        const auto b = train_autoencoder(x, c, 5);
        CHECK(a.model == b.model);
        CHECK(a.log == b.log);
        CHECK_FALSE(train_autoencoder(x, c, 6).model == a.model);
    }

    TEST_CASE("64x3 Gaussian data: loss decreases over 200 epochs") {
        std::mt19937_64 rng(64);
        const auto x = gaussian(rng, 64, 3);
        const auto t = train_autoencoder(x, {}, 1);
        REQUIRE(t.log.epoch_loss.size() == 200);
        CHECK(t.log.epochs == 200);
        CHECK(t.log.final_loss < t.log.epoch_loss.front());
        for (auto l : t.log.epoch_loss) CHECK((std::isfinite(l) && l >= 0.0));
    }

    TEST_CASE("a single point is fitted better than at initialization") {
        std::mt19937_64 rng(2);
        const auto x = gaussian(rng, 1, 2);
        const auto t = train_autoencoder(x, {}, 3);
        CHECK(t.log.final_loss < reconstruction_loss(init_autoencoder(2, {}, 3), x));
    }

    TEST_CASE("row permutation leaves the trained model unchanged up to rounding") {
        std::mt19937_64 rng(8);
        const auto x = gaussian(rng, 12, 2);
        Matrix flipped(12, 2);
        for (std::size_t i = 0; i < 12; ++i) {
            for (std::size_t j = 0; j < 2; ++j) flipped(i, j) = x(11 - i, j);
        }
        AutoencoderConfig c;
        c.epochs = 40;
        const auto a = train_autoencoder(x, c, 4).model.parameters();
        const auto b = train_autoencoder(flipped, c, 4).model.parameters();
        for (std::size_t p = 0; p < a.size(); ++p) CHECK(std::abs(a[p] - b[p]) <= 1e-10);
    }

    TEST_CASE("non-finite input and divergence") {
        Matrix x(2, 2, 1.0);
        x(1, 1) = NAN;
        CHECK(kind_of([&] { train_autoencoder(x, {}, 0); }) == ErrorKind::Contract);

        std::mt19937_64 rng(3);
        AutoencoderConfig wild;
        wild.step = 1e305;
        wild.epochs = 20;
        try {
            train_autoencoder(gaussian(rng, 8, 2, 1e3), wild, 0);
            FAIL("expected divergence");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Divergence);
            CHECK(e.epoch() >= 1);
        }
    }
}
