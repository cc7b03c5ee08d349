// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "agc/raster.hpp"

namespace agc {

/// Per-pixel terrain layers sharing the DEM geometry. Nodata DEM cells are
/// nodata in every layer.
struct TerrainDerivatives {
    RasterGrid slope;      ///< degrees, [0, 90)
    RasterGrid aspect;     ///< degrees, [0, 360), compass bearing of the uphill gradient
    RasterGrid roughness;  ///< metres, max - min of the 3x3 window
    RasterGrid curvature;  ///< 1/m, negative = concave
    RasterGrid tpi;        ///< metres, centre minus mean of the 8-neighbourhood
    RasterGrid tri;        ///< metres, RMS of centre-vs-neighbour differences
    std::vector<std::uint8_t> flat;         ///< aspect undefined
    std::vector<std::uint8_t> sparse_window;  ///< fewer than 4 valid neighbours
};

TerrainDerivatives derive_terrain(const RasterGrid& dem);

/// Topographic position index over an annulus of pixel radii
/// (inner_radius, outer_radius]; the centre is always excluded. Near the
/// border the window reads the grid mirrored about its edge.
RasterGrid compute_tpi(const RasterGrid& dem, double inner_radius, double outer_radius);

enum class WeissClass : std::uint8_t {
    Valley = 0,
    LowerSlope = 1,
    Flat = 2,
    MiddleSlope = 3,
    UpperSlope = 4,
    Ridge = 5,
};

inline constexpr int kWeissClassCount = 6;

const char* weiss_class_name(WeissClass c);

struct WeissThresholds {
    double ridge_sigma = 1.0;       ///< standardized TPI at or above -> ridge
    double valley_sigma = -1.0;     ///< standardized TPI at or below -> valley
    double slope_sigma = 0.5;       ///< |z_small| split between middle and upper/lower slope
    double slope_flat_deg = 5.0;    ///< flat requires slope strictly below this
    double small_radius_px = 3.0;
    double large_radius_px = 15.0;
};

/// Two-scale TPI landform classes. Nodata pixels are nodata (255) in the
/// output raster; every other pixel gets exactly one class.
RasterGrid classify_weiss(const RasterGrid& tpi_small, const RasterGrid& tpi_large,
                          const RasterGrid& slope, const WeissThresholds& thresholds = {});

/// Convenience: TPI layers at both configured radii, then classify_weiss.
RasterGrid classify_weiss(const RasterGrid& dem, const TerrainDerivatives& derivs,
                          const WeissThresholds& thresholds = {});

}  // namespace agc
