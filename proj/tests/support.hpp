#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "regio/geo_grid.hpp"

namespace regio::testing {

// Random-featured grid. With keep < 1, cells are masked at random but the
// result always has at least one active cell.
inline GridRaster random_grid(std::mt19937_64& rng, std::size_t rows, std::size_t cols, std::size_t features,
                              double keep = 1.0, double cell_size_deg = 0.01, GeoPoint origin = {29.5, -82.4}) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::uint8_t> mask(rows * cols, 1);
    std::size_t active = rows * cols;
    if (keep < 1.0) {
        active = 0;
        for (auto& m : mask) {
            m = u(rng) < keep;
            active += m;
        }
        if (active == 0) {
            mask[0] = 1;
            active = 1;
        }
    }
    Matrix x(active, features);
    for (auto& v : x.data()) v = g(rng);
    std::vector<std::string> names;
    for (std::size_t f = 0; f < features; ++f) names.push_back("f" + std::to_string(f));
    return GridRaster::make(rows, cols, origin, cell_size_deg, std::move(mask), std::move(names), std::move(x));
}

// Rook flood fill straight off the grid mask, independent of AdjacencyIndex.
inline std::size_t flood_fill_components(const GridRaster& grid, const std::vector<std::size_t>& labels) {
    const std::size_t rows = grid.rows(), cols = grid.cols();
    std::vector<int> seen(rows * cols, 0);
    std::size_t components = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const auto start = grid.cell_id(r, c);
            if (!start || seen[r * cols + c]) continue;
            ++components;
            std::deque<std::pair<std::size_t, std::size_t>> queue{{r, c}};
            seen[r * cols + c] = 1;
            while (!queue.empty()) {
                auto [qr, qc] = queue.front();
                queue.pop_front();
                const long dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
                for (int d = 0; d < 4; ++d) {
                    const long nr = static_cast<long>(qr) + dr[d], nc = static_cast<long>(qc) + dc[d];
                    if (nr < 0 || nc < 0 || nr >= static_cast<long>(rows) || nc >= static_cast<long>(cols)) continue;
                    const auto id = grid.cell_id(nr, nc);
                    if (!id || seen[nr * cols + nc]) continue;
                    if (labels[*id] != labels[*grid.cell_id(qr, qc)]) continue;
                    seen[nr * cols + nc] = 1;
                    queue.emplace_back(nr, nc);
                }
            }
        }
    }
    return components;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("regio-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace regio::testing
