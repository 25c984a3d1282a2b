#include "regio/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "regio/error.hpp"
#include "regio/refine.hpp"

namespace regio {

namespace {

std::size_t label_count(std::span<const std::size_t> labels) {
    std::size_t k = 0;
    for (auto l : labels) k = std::max(k, l + 1);
    return k;
}

// Unbiased index in [0, n) by rejection.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
}

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

double within_region_sse(std::span<const std::size_t> labels, const Matrix& x) {
    require(labels.size() == x.rows(), "labels must cover every row of x");
    const auto k = label_count(labels);
    Matrix mean(k, x.cols());
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        count[labels[i]] += 1.0;
        auto m = mean.row(labels[i]);
        const auto v = x.row(i);
        for (std::size_t d = 0; d < v.size(); ++d) m[d] += v[d];
    }
    for (std::size_t r = 0; r < k; ++r) {
        if (count[r] == 0.0) continue;
        for (auto& v : mean.row(r)) v /= count[r];
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto m = mean.row(labels[i]);
        const auto v = x.row(i);
        for (std::size_t d = 0; d < v.size(); ++d) sse += (v[d] - m[d]) * (v[d] - m[d]);
    }
    return sse;
}

std::vector<double> compactness(std::span<const std::size_t> labels, const GridRaster& grid) {
    require(labels.size() == grid.active_count(), "labels must cover every active cell");
    const auto k = label_count(labels);
    std::vector<double> area(k, 0.0), perimeter(k, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto p = grid.position(i);
        area[labels[i]] += 1.0;
        const std::pair<long, long> steps[] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        for (auto [dr, dc] : steps) {
            const long r = static_cast<long>(p.row) + dr, c = static_cast<long>(p.col) + dc;
            std::optional<std::size_t> nb;
            if (r >= 0 && c >= 0) nb = grid.cell_id(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
            if (!nb || labels[*nb] != labels[i]) perimeter[labels[i]] += 1.0;
        }
    }
    std::vector<double> out(k, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        if (area[r] > 0.0) out[r] = 16.0 * area[r] / (perimeter[r] * perimeter[r]);
    }
    return out;
}

std::size_t fragmentation(std::span<const std::size_t> labels, const AdjacencyIndex& adjacency) {
    const auto comps = initial_regions(labels, adjacency, Matrix(labels.size(), 0),
                                       std::vector<GeoPoint>(labels.size()));
    const std::set<std::size_t> distinct(labels.begin(), labels.end());
    return comps.region_count() - distinct.size();
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) fail(ErrorKind::Contract, "label vectors must have equal length");
    const double n = static_cast<double>(a.size());
    std::map<std::pair<std::size_t, std::size_t>, double> table;
    std::map<std::size_t, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, c] : table) index += choose2(c);
    for (const auto& [key, c] : rows) sum_a += choose2(c);
    for (const auto& [key, c] : cols) sum_b += choose2(c);
    const double total = choose2(n);
    const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    if (denom == 0.0) return index == expected ? 1.0 : 0.0;
    return (index - expected) / denom;
}

RegionPartition random_contiguous_partition(const GridRaster& grid, const AdjacencyIndex& adjacency, std::size_t k,
                                            std::uint64_t seed) {
    const auto n = grid.active_count();
    require(adjacency.size() == n, "adjacency does not match grid");
    if (k < 1 || k > n) fail(ErrorKind::Contract, "k must be in [1, active cell count]");
    std::size_t components = 0;
    connected_components(adjacency, &components);
    if (components != 1) fail(ErrorKind::Contract, "random contiguous partition needs a connected grid");

    constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> label(n, kUnset);
    std::vector<std::size_t> size(k, 1);
    std::vector<std::set<std::size_t>> frontier(k);
    for (std::size_t r = 0; r < k; ++r) {  // partial Fisher-Yates
        const auto j = r + uniform_index(rng, n - r);
        std::swap(pool[r], pool[j]);
        label[pool[r]] = r;
    }
    for (std::size_t r = 0; r < k; ++r) {
        for (auto nb : adjacency.neighbors[pool[r]]) {
            if (label[nb] == kUnset) frontier[r].insert(nb);
        }
    }
    for (std::size_t assigned = k; assigned < n; ++assigned) {
        std::size_t pick = kUnset;
        for (std::size_t r = 0; r < k; ++r) {
            if (frontier[r].empty()) continue;
            if (pick == kUnset || size[r] < size[pick]) pick = r;
        }
        const auto cell = *frontier[pick].begin();
        label[cell] = pick;
        ++size[pick];
        for (auto& f : frontier) f.erase(cell);
        for (auto nb : adjacency.neighbors[cell]) {
            if (label[nb] == kUnset) frontier[pick].insert(nb);
        }
    }
    return build_partition(label, Matrix(n, 0), grid.centroids());
}

PartitionMetrics evaluate_partition(std::span<const std::size_t> labels, const Matrix& x, const GridRaster& grid,
                                    const AdjacencyIndex& adjacency) {
    PartitionMetrics m;
    m.within_region_sse = within_region_sse(labels, x);
    m.compactness = compactness(labels, grid);
    double sum = 0.0;
    for (double c : m.compactness) sum += c;
    m.mean_compactness = m.compactness.empty() ? 0.0 : sum / static_cast<double>(m.compactness.size());
    m.fragmentation = fragmentation(labels, adjacency);
    m.region_count = label_count(labels);
    return m;
}

}  // namespace regio
