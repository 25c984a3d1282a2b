#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "regio/error.hpp"
#include "regio/scsom.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace regio;
using namespace regio::oracles;

namespace {

Matrix uniform(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::uniform_real_distribution<double> u(-1, 1);
    Matrix x(n, d);
    for (auto& v : x.data()) v = u(rng);
    return x;
}

double max_pairwise(const std::vector<GeoPoint>& at) {
    double m = 0;
    for (std::size_t i = 0; i < at.size(); ++i) {
        for (std::size_t j = i + 1; j < at.size(); ++j) m = std::max(m, haversine_km(at[i], at[j]));
    }
    return m;
}

}  // namespace

TEST_SUITE("init_representatives") {
    TEST_CASE("spacing and coverage on random grids, matching the FPS oracle") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> frac(0.05, 0.6);
        for (int trial = 0; trial < 15; ++trial) {
            const auto g = testing::random_grid(rng, 10, 10, 1, trial % 3 ? 0.8 : 1.0);
            const auto at = g.centroids();
            const double threshold = frac(rng) * max_pairwise(at);
            const auto latent = uniform(rng, at.size(), 3);
            const auto m = init_representatives(latent, at, threshold);
            CHECK(m.threshold_km == threshold);
            const auto oracle = fps_oracle(at, threshold);
            REQUIRE(m.size() == oracle.size());
            for (std::size_t j = 0; j < m.size(); ++j) {
                CHECK(m.neurons[j].cell == oracle[j]);
                CHECK(m.neurons[j].anchor == at[oracle[j]]);
                CHECK(std::equal(m.neurons[j].weight.begin(), m.neurons[j].weight.end(),
                                 latent.row(oracle[j]).begin()));
                for (std::size_t k = j + 1; k < m.size(); ++k) {
                    CHECK(haversine_km(m.neurons[j].anchor, m.neurons[k].anchor) >= threshold);
                }
            }
            for (const auto& p : at) {
                bool covered = false;
                for (const auto& n : m.neurons) covered = covered || haversine_km(p, n.anchor) < threshold;
                CHECK(covered);
            }
        }
    }

    TEST_CASE("stopping rule extremes") {
        std::mt19937_64 rng(2);
        const auto g = testing::random_grid(rng, 5, 5, 1);
        const auto at = g.centroids();
        const auto latent = uniform(rng, at.size(), 2);
        const auto one = init_representatives(latent, at, max_pairwise(at) + 1.0);
        REQUIRE(one.size() == 1);
        CHECK(one.neurons[0].cell == *g.cell_id(2, 2));
        const auto all = init_representatives(latent, at, 0.5);
        CHECK(all.size() == at.size());
    }
}

TEST_SUITE("find_bmu") {
    TEST_CASE("single neuron") {
        SomModel m;
        m.threshold_km = 5;
        m.neurons.push_back({0, {30, -81}, {0.5, 0.5}});
        const std::vector<double> x = {0.1, 0.2};
        CHECK(find_bmu(m, x, {30.01, -81}) == Bmu{0, false});
    }

    TEST_CASE("equal latent distance picks the lower index") {
        SomModel m;
        m.threshold_km = 50;
        m.neurons.push_back({0, {30, -81}, {1.0, 0.0}});
        m.neurons.push_back({1, {30.1, -81}, {-1.0, 0.0}});
        const std::vector<double> x = {0.0, 0.0};
        CHECK(find_bmu(m, x, {30.05, -81}).neuron == 0);
    }

    TEST_CASE("out of range neurons are skipped; no candidate falls back to the nearest anchor") {
        SomModel m;
        m.threshold_km = 5;
        m.neurons.push_back({0, {30, -81}, {0.0}});
        m.neurons.push_back({1, {30.5, -81}, {10.0}});
        const std::vector<double> x = {9.0};
        CHECK(find_bmu(m, x, {30.001, -81}) == Bmu{0, false});
        CHECK(find_bmu(m, x, {30.3, -81}) == Bmu{1, true});
    }

    TEST_CASE("matches the two-stage oracle on random queries") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> lat(29.8, 30.2), lon(-81.2, -80.8), thr(2.0, 25.0);
        for (int model_i = 0; model_i < 10; ++model_i) {
            SomModel m;
            m.threshold_km = thr(rng);
            const auto w = uniform(rng, 20, 3);
            for (std::size_t j = 0; j < 20; ++j) {
                m.neurons.push_back({j, {lat(rng), lon(rng)}, {w.row(j).begin(), w.row(j).end()}});
            }
            // Duplicate one weight so latent ties occur.
            m.neurons[7].weight = m.neurons[3].weight;
            for (int q = 0; q < 200; ++q) {
                const auto x = uniform(rng, 1, 3);
                const GeoPoint at{lat(rng), lon(rng)};
                CHECK(find_bmu(m, x.row(0), at) == bmu_oracle(m, x.row(0), at));
            }
        }
    }
}

TEST_SUITE("fit") {
    TEST_CASE("single neuron lands on the mean after one epoch") {
        std::mt19937_64 rng(4);
        const auto g = testing::random_grid(rng, 6, 6, 1);
        const auto at = g.centroids();
        const auto latent = uniform(rng, at.size(), 4);
        const auto init = init_representatives(latent, at, 1e4);
        REQUIRE(init.size() == 1);
        SomConfig c;
        c.epochs = 1;
        const auto f = fit(init, latent, at, c);
        for (std::size_t d = 0; d < 4; ++d) {
            double mean = 0;
            for (std::size_t i = 0; i < latent.rows(); ++i) mean += latent(i, d);
            mean /= static_cast<double>(latent.rows());
            CHECK(std::abs(f.model.neurons[0].weight[d] - mean) <= 1e-12);
        }
        CHECK(f.epochs_run == 1);
    }

    TEST_CASE("two separated clusters converge to their means") {
        // Two 3x3 patches a degree of latitude apart; anchors one per patch.
        std::vector<GeoPoint> at;
        for (int p = 0; p < 2; ++p) {
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) at.push_back({30.0 + p + 0.01 * r, -81.0 + 0.01 * c});
            }
        }
        std::mt19937_64 rng(5);
        auto latent = uniform(rng, at.size(), 2);
        for (std::size_t i = 9; i < 18; ++i) latent(i, 0) += 5.0;
        SomModel m;
        m.threshold_km = 20.0;
        m.neurons.push_back({4, at[4], {latent.row(4).begin(), latent.row(4).end()}});
        m.neurons.push_back({13, at[13], {latent.row(13).begin(), latent.row(13).end()}});
        SomConfig c;
        c.tolerance = 0.0;
        const auto f = fit(m, latent, at, c);
        CHECK(f.epochs_run == c.epochs);
        for (std::size_t p = 0; p < 2; ++p) {
            for (std::size_t d = 0; d < 2; ++d) {
                double mean = 0;
                for (std::size_t i = 9 * p; i < 9 * p + 9; ++i) mean += latent(i, d);
                CHECK(std::abs(f.model.neurons[p].weight[d] - mean / 9.0) <= 1e-6);
            }
        }
    }

    TEST_CASE("deterministic and permutation equivariant") {
        std::mt19937_64 rng(6);
        const auto g = testing::random_grid(rng, 8, 8, 1);
        const auto at = g.centroids();
        const auto latent = uniform(rng, at.size(), 3);
        const auto init = init_representatives(latent, at, 0.3 * max_pairwise(at));
        const auto a = fit(init, latent, at, {});
        const auto b = fit(init, latent, at, {});
        CHECK(a.model == b.model);
        CHECK(a.epoch_quantization_error == b.epoch_quantization_error);

        std::vector<std::size_t> order(at.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
        std::vector<GeoPoint> at2;
        Matrix latent2(latent.rows(), latent.cols());
        for (std::size_t i = 0; i < order.size(); ++i) {
            at2.push_back(at[order[i]]);
            std::copy(latent.row(order[i]).begin(), latent.row(order[i]).end(), latent2.row(i).begin());
        }
        const auto c = fit(init, latent2, at2, {});
        REQUIRE(c.model.size() == a.model.size());
        for (std::size_t j = 0; j < a.model.size(); ++j) {
            for (std::size_t d = 0; d < 3; ++d) {
                CHECK(std::abs(c.model.neurons[j].weight[d] - a.model.neurons[j].weight[d]) <= 1e-12);
            }
        }
    }

    TEST_CASE("sigma decays geometrically to the final fraction") {
        const auto s = sigma_schedule(8.0, 0.25, 50);
        REQUIRE(s.size() == 50);
        CHECK(s.front() == 8.0);
        CHECK(s.back() == doctest::Approx(2.0).epsilon(1e-12));
        for (std::size_t t = 1; t + 1 < s.size(); ++t) {
            CHECK(s[t] / s[t - 1] == doctest::Approx(s[t + 1] / s[t]).epsilon(1e-12));
        }
    }

    TEST_CASE("non-finite latent input is a contract error") {
        Matrix latent(2, 1, 0.0);
        latent(1, 0) = NAN;
        const std::vector<GeoPoint> at = {{30, -81}, {30.01, -81}};
        SomModel m;
        m.threshold_km = 5;
        m.neurons.push_back({0, at[0], {0.0}});
        CHECK_THROWS_AS(fit(m, latent, at, {}), Error);
    }
}

TEST_SUITE("assign_labels") {
    TEST_CASE("labels agree with find_bmu and the quantization error recomputes") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 8; ++trial) {
            const auto g = testing::random_grid(rng, 7, 9, 1, 0.85);
            const auto at = g.centroids();
            const auto latent = uniform(rng, at.size(), 3);
            // Small thresholds on odd trials force fallbacks.
            const double thr = trial % 2 ? 0.2 : 0.35 * max_pairwise(at);
            auto model = fit(init_representatives(latent, at, std::max(thr, 1.0)), latent, at, {}).model;
            model.threshold_km = thr;
            const auto labels = assign_labels(model, latent, at);
            double qe = 0;
            for (std::size_t i = 0; i < at.size(); ++i) {
                const auto b = find_bmu(model, latent.row(i), at[i]);
                CHECK(labels.bmu[i] == b.neuron);
                CHECK(labels.fallback[i] == b.fallback);
                CHECK((b.fallback || haversine_km(at[i], model.neurons[b.neuron].anchor) <= thr));
                qe += latent_dist(latent.row(i), model.neurons[b.neuron].weight);
            }
            CHECK(std::abs(labels.quantization_error - qe / static_cast<double>(at.size())) <= 1e-12);
        }
    }

    TEST_CASE("a cell equal to an in-range neuron weight contributes nothing") {
        const std::vector<GeoPoint> at = {{30, -81}};
        Matrix latent(1, 2);
        latent(0, 0) = 0.25;
        latent(0, 1) = -0.5;
        SomModel m;
        m.threshold_km = 3;
        m.neurons.push_back({0, at[0], {0.25, -0.5}});
        const auto labels = assign_labels(m, latent, at);
        CHECK(labels.bmu[0] == 0);
        CHECK(labels.quantization_error == 0.0);
        CHECK(labels.fallback_count() == 0);
    }
}
