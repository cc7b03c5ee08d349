// SPDX-License-Identifier: Apache-2.0
// Synthetic rasters shared by the test binaries.
#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "agc/error.hpp"
#include "agc/raster.hpp"

namespace fixtures {

/// Grid whose value at each pixel centre is f(x, y).
inline agc::RasterGrid grid_from(long width, long height, double cell, const std::function<double(double, double)>& f,
                                 double origin_x = 0.0, double origin_y = 0.0) {
    std::vector<double> v(static_cast<std::size_t>(width * height));
    for (long r = 0; r < height; ++r) {
        for (long c = 0; c < width; ++c) {
            const double x = origin_x + (c + 0.5) * cell;
            const double y = origin_y + (height - r - 0.5) * cell;
            v[static_cast<std::size_t>(r * width + c)] = f(x, y);
        }
    }
    return {origin_x, origin_y, cell, width, height, -9999.0, std::move(v)};
}

inline agc::RasterGrid constant(long width, long height, double cell, double value) {
    return grid_from(width, height, cell, [value](double, double) { return value; });
}

/// Sum of random Gaussian bumps, heights in [0, ~amplitude].
inline agc::RasterGrid random_hills(long n, double cell, std::uint64_t seed, double amplitude = 60.0, int bumps = 8) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(0.0, n * cell);
    std::uniform_real_distribution<double> height(0.2, 1.0);
    std::uniform_real_distribution<double> width(2.0 * cell, 8.0 * cell);
    struct Bump {
        double x, y, h, w;
    };
    std::vector<Bump> bumps_v;
    for (int i = 0; i < bumps; ++i) bumps_v.push_back({pos(rng), pos(rng), height(rng) * amplitude, width(rng)});
    return grid_from(n, n, cell, [&](double x, double y) {
        double z = 0.0;
        for (const auto& b : bumps_v) z += b.h * std::exp(-((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) / (2 * b.w * b.w));
        return z;
    });
}

/// Scratch directory under the system temp dir, emptied on creation.
inline std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("agc_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

template <class F>
agc::ErrorCode error_of(F&& f) {
    try {
        f();
    } catch (const agc::Error& e) {
        return e.code();
    }
    return static_cast<agc::ErrorCode>(0);
}

}  // namespace fixtures
