#include "regio/refine.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <utility>

#include "regio/error.hpp"

namespace regio {

namespace {

constexpr auto kUnset = std::numeric_limits<std::size_t>::max();

Region summarize(std::vector<std::size_t> members, const Matrix& vectors, std::span<const GeoPoint> centroids) {
    Region r;
    r.members = std::move(members);
    r.mean.assign(vectors.cols(), 0.0);
    for (auto m : r.members) {
        const auto v = vectors.row(m);
        for (std::size_t d = 0; d < v.size(); ++d) r.mean[d] += v[d];
        r.centroid.lat += centroids[m].lat;
        r.centroid.lon += centroids[m].lon;
    }
    const auto n = static_cast<double>(r.members.size());
    for (auto& x : r.mean) x /= n;
    r.centroid.lat /= n;
    r.centroid.lon /= n;
    return r;
}

// Region-level adjacency as ordered (low id, high id) pairs.
std::set<std::pair<std::size_t, std::size_t>> region_edges(std::span<const std::size_t> labels,
                                                           const AdjacencyIndex& adjacency) {
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < adjacency.size(); ++i) {
        for (auto j : adjacency.neighbors[i]) {
            const auto a = labels[i], b = labels[j];
            if (a < b) edges.emplace(a, b);
        }
    }
    return edges;
}

}  // namespace

std::vector<std::size_t> canonical_labels(std::span<const std::size_t> labels) {
    std::map<std::size_t, std::size_t> remap;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = remap.try_emplace(labels[i], remap.size());
        out[i] = it->second;
    }
    return out;
}

RegionPartition build_partition(std::span<const std::size_t> labels, const Matrix& vectors,
                                std::span<const GeoPoint> centroids) {
    require(centroids.size() == labels.size(), "centroid count must match label count");
    require(vectors.rows() == labels.size() || vectors.cols() == 0, "vector rows must match label count");
    RegionPartition p;
    p.labels = canonical_labels(labels);
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
        if (p.labels[i] == members.size()) members.emplace_back();
        members[p.labels[i]].push_back(i);
    }
    const Matrix empty(labels.size(), 0);
    const Matrix& v = vectors.cols() == 0 ? empty : vectors;
    p.regions.reserve(members.size());
    for (auto& m : members) p.regions.push_back(summarize(std::move(m), v, centroids));
    return p;
}

RegionPartition initial_regions(std::span<const std::size_t> labels, const AdjacencyIndex& adjacency,
                                const Matrix& vectors, std::span<const GeoPoint> centroids) {
    require(labels.size() == adjacency.size(), "labels must cover every active cell");
    std::vector<std::size_t> comp(labels.size(), kUnset);
    std::size_t next = 0;
    std::queue<std::size_t> frontier;
    for (std::size_t s = 0; s < labels.size(); ++s) {
        if (comp[s] != kUnset) continue;
        comp[s] = next;
        frontier.push(s);
        while (!frontier.empty()) {
            const auto u = frontier.front();
            frontier.pop();
            for (auto v : adjacency.neighbors[u]) {
                if (comp[v] == kUnset && labels[v] == labels[u]) {
                    comp[v] = next;
                    frontier.push(v);
                }
            }
        }
        ++next;
    }
    return build_partition(comp, vectors, centroids);
}

double merge_cost(const Region& a, const Region& b, double lambda_geo) {
    require(!a.members.empty() && !b.members.empty(), "merge_cost needs nonempty regions");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double sq = 0.0;
    for (std::size_t d = 0; d < a.mean.size(); ++d) {
        const double diff = a.mean[d] - b.mean[d];
        sq += diff * diff;
    }
    double cost = na * nb / (na + nb) * sq;
    if (lambda_geo != 0.0) {
        const double g = haversine_km(a.centroid, b.centroid);
        cost += lambda_geo * g * g;
    }
    return cost;
}

bool regions_connected(const RegionPartition& partition, const AdjacencyIndex& adjacency) {
    const auto comps = initial_regions(partition.labels, adjacency, Matrix(partition.labels.size(), 0),
                                       std::vector<GeoPoint>(partition.labels.size()));
    return comps.region_count() == partition.region_count();
}

RefineResult grow_to_k(const RegionPartition& partition, const AdjacencyIndex& adjacency, std::size_t k,
                       const Matrix& vectors, std::span<const GeoPoint> centroids, const RefineConfig& config) {
    require(partition.labels.size() == adjacency.size(), "partition must cover every active cell");
    require(k >= 1, "k must be at least 1");
    if (k > partition.region_count()) {
        fail(ErrorKind::Contract, "k = " + std::to_string(k) + " exceeds the " +
                                      std::to_string(partition.region_count()) + " available regions");
    }
    std::size_t components = 0;
    connected_components(adjacency, &components);
    if (k < components) {
        fail(ErrorKind::Infeasible, "k = " + std::to_string(k) + " is below the " + std::to_string(components) +
                                        " disconnected parts of the grid");
    }

    RefineResult out;
    out.trace.initial_count = partition.region_count();
    auto current = build_partition(partition.labels, vectors, centroids);

    auto merge = [&](std::size_t a, std::size_t b, double cost, MergePhase phase) {
        const auto anchor_cell = current.regions[a].members.front();
        std::vector<std::size_t> labels = current.labels;
        for (auto& l : labels) {
            if (l == b) l = a;
        }
        current = build_partition(labels, vectors, centroids);
        out.trace.events.push_back({phase, a, b, cost, current.labels[anchor_cell]});
    };

    // Phase 1: dissolve undersized regions into their cheapest neighbour.
    while (current.region_count() > k) {
        const auto edges = region_edges(current.labels, adjacency);
        std::vector<std::vector<std::size_t>> nbrs(current.region_count());
        for (auto [a, b] : edges) {
            nbrs[a].push_back(b);
            nbrs[b].push_back(a);
        }
        std::size_t small = kUnset;
        for (std::size_t r = 0; r < current.region_count(); ++r) {
            if (current.regions[r].size() >= config.min_size || nbrs[r].empty()) continue;
            if (small == kUnset || current.regions[r].size() < current.regions[small].size()) small = r;
        }
        if (small == kUnset) break;
        std::size_t target = kUnset;
        double best = std::numeric_limits<double>::infinity();
        for (auto n : nbrs[small]) {  // ascending ids
            const double c = merge_cost(current.regions[small], current.regions[n], config.lambda_geo);
            if (c < best) {
                best = c;
                target = n;
            }
        }
        merge(std::min(small, target), std::max(small, target), best, MergePhase::Dissolve);
    }

    // Phase 2: global cheapest adjacent pair, ties to the smallest (low, high) pair.
    while (current.region_count() > k) {
        const auto edges = region_edges(current.labels, adjacency);
        if (edges.empty()) fail(ErrorKind::Infeasible, "no adjacent regions left to merge");
        std::pair<std::size_t, std::size_t> pick{kUnset, kUnset};
        double best = std::numeric_limits<double>::infinity();
        for (auto [a, b] : edges) {  // lexicographic order
            const double c = merge_cost(current.regions[a], current.regions[b], config.lambda_geo);
            if (c < best) {
                best = c;
                pick = {a, b};
            }
        }
        merge(pick.first, pick.second, best, MergePhase::Grow);
    }

    out.trace.final_count = current.region_count();
    out.partition = std::move(current);
    return out;
}

std::vector<RegionReport> region_summaries(const RegionPartition& partition, const GridRaster& raw_grid) {
    require(partition.labels.size() == raw_grid.active_count(), "partition does not match grid");
    std::vector<RegionReport> out;
    const auto f = raw_grid.feature_count();
    for (std::size_t r = 0; r < partition.region_count(); ++r) {
        const auto& region = partition.regions[r];
        RegionReport rep;
        rep.id = r;
        rep.size = region.size();
        rep.feature_mean.assign(f, 0.0);
        bool first = true;
        for (auto m : region.members) {
            const auto x = raw_grid.features().row(m);
            for (std::size_t j = 0; j < f; ++j) rep.feature_mean[j] += x[j];
            const auto c = raw_grid.centroid(m);
            rep.centroid.lat += c.lat;
            rep.centroid.lon += c.lon;
            const auto bb = raw_grid.cell_bounds(m);
            if (first) {
                rep.bounds = bb;
                first = false;
            } else {
                rep.bounds.min_lat = std::min(rep.bounds.min_lat, bb.min_lat);
                rep.bounds.min_lon = std::min(rep.bounds.min_lon, bb.min_lon);
                rep.bounds.max_lat = std::max(rep.bounds.max_lat, bb.max_lat);
                rep.bounds.max_lon = std::max(rep.bounds.max_lon, bb.max_lon);
            }
        }
        const auto n = static_cast<double>(region.size());
        for (auto& v : rep.feature_mean) v /= n;
        rep.centroid.lat /= n;
        rep.centroid.lon /= n;
        out.push_back(std::move(rep));
    }
    return out;
}

}  // namespace regio
