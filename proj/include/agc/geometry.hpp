// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "agc/raster.hpp"

namespace agc {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kEffectiveEarthRadiusM = kEarthRadiusM * 4.0 / 3.0;
inline constexpr double kSpeedOfLight = 299792458.0;

/// One UT-to-satellite geometry.
struct LinkSpec {
    double ut_x = 0.0;
    double ut_y = 0.0;
    double ut_height_agl = 1.5;  ///< antenna height above ground, m
    double elevation_deg = 45.0;
    double azimuth_deg = 0.0;    ///< compass bearing, clockwise from north
    double altitude_km = 500.0;
    double frequency_hz = 12e9;

    double wavelength() const { return kSpeedOfLight / frequency_hz; }
    void validate() const;
};

/// Spherical-earth slant range from a ground terminal to a satellite at
/// `altitude_km` seen at `elevation_deg`.
double slant_range_km(double elevation_deg, double altitude_km);

/// Unit vector (east, north, up) pointing from the UT toward the satellite.
struct Direction3 {
    double e = 0.0, n = 0.0, u = 0.0;
};
Direction3 satellite_direction(double elevation_deg, double azimuth_deg);

struct SegmentOptions {
    /// The traced segment stops once the link clears max terrain by this much.
    double margin_m = 100.0;
    /// Truncate where the curvature-corrected height clears the terrain
    /// rather than the raw straight line.
    bool curvature_aware = true;
};

/// Horizontal projection of a link, from the UT (start) toward the
/// satellite azimuth (end).
struct GroundSegment {
    WorldPoint start;
    WorldPoint end;
    double length_h = 0.0;        ///< horizontal length, m
    double dir_x = 0.0;           ///< unit horizontal direction (east)
    double dir_y = 0.0;           ///< unit horizontal direction (north)
    double antenna_height = 0.0;  ///< terrain at UT + antenna AGL, m
    double elevation_rad = 0.0;
    double slant_range_m = 0.0;   ///< full UT-satellite distance
    bool hit_boundary = false;    ///< truncated by the raster extent rather than clearance

    WorldPoint at(double dist_h) const { return {start.x + dir_x * dist_h, start.y + dir_y * dist_h}; }
    /// Straight-line link height above the datum at a horizontal distance.
    double raw_height(double dist_h) const;
    /// 3D distance from the UT to the ray point above dist_h.
    double ut_distance(double dist_h) const;
};

GroundSegment ground_segment(const LinkSpec& link, const BoundingBox& roi, double ut_ground_height,
                             double max_terrain_height, const SegmentOptions& options = {});

}  // namespace agc
