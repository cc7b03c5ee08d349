// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "agc/geometry.hpp"
#include "agc/landcover.hpp"
#include "agc/raster.hpp"
#include "agc/terrain.hpp"

namespace agc {

struct ReflectionWeights {
    double slope = 0.4;
    double roughness = 0.4;
    double curvature = 0.2;
    void validate() const;
};

/// Terrain reflection score T in [0, 1]: flat, smooth and concave pixels
/// score high. Slope and roughness are min-max scaled between their 1st and
/// 99th percentiles; curvature is scaled by the 99th percentile of |K|.
RasterGrid terrain_reflect_score(const TerrainDerivatives& derivs, const ReflectionWeights& weights = {});

/// R = T * (1 + beta) per land-cover class. Pixels without a class are nodata.
RasterGrid apply_landcover(const RasterGrid& score, const RasterGrid& landcover, const ClassTable& classes);

/// Everything needed to search for specular points around a terminal.
struct ReflectionSurface {
    RasterGrid dem;
    RasterGrid r;
    RasterGrid slope;
    RasterGrid aspect;
    std::vector<std::uint8_t> flat;
};

ReflectionSurface build_reflection_surface(const RasterGrid& dem, const RasterGrid& landcover,
                                           const ClassTable& classes, const ReflectionWeights& weights = {});

struct RingOptions {
    double r_min = 10.0;
    double r_max = 5000.0;
    double growth = 1.5;
    double percentile = 90.0;   ///< keep samples strictly above this percentile of sampled R
    double r_floor = 0.3;       ///< and strictly above this absolute value
    double tolerance_deg = 5.0;
};

struct ReflectionCandidate {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double r_value = 0.0;
    double incident_deg = 0.0;   ///< angle between the satellite direction and the surface normal
    double reflected_deg = 0.0;  ///< angle between the point-to-UT direction and the normal
    double angular_error_deg = 0.0;
    bool validated = false;
    double excess_delay_s = 0.0;
    double relative_power_db = 0.0;
};

/// Ring radii from r_min growing geometrically up to r_max.
std::vector<double> ring_radii(const RingOptions& options);

/// Samples rings around the UT, keeps the high-R points and checks the
/// mirror condition against the local surface normal.
std::vector<ReflectionCandidate> candidate_ring(const LinkSpec& link, const ReflectionSurface& surface,
                                                const RingOptions& options = {});

/// Strongest validated candidate, or nullptr.
const ReflectionCandidate* strongest_reflection(const std::vector<ReflectionCandidate>& candidates);

}  // namespace agc
