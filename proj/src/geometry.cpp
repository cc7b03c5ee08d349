// SPDX-License-Identifier: Apache-2.0
#include "agc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "agc/error.hpp"

namespace agc {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

void LinkSpec::validate() const {
    if (!(elevation_deg > 0.0 && elevation_deg <= 90.0)) {
        fail(ErrorCode::InvalidArgument, "elevation must be in (0, 90] degrees");
    }
    if (!(azimuth_deg >= 0.0 && azimuth_deg < 360.0)) {
        fail(ErrorCode::InvalidArgument, "azimuth must be in [0, 360) degrees");
    }
    if (!(altitude_km > 0.0)) fail(ErrorCode::InvalidArgument, "altitude must be positive");
    if (!(frequency_hz > 0.0)) fail(ErrorCode::InvalidArgument, "frequency must be positive");
    if (!(ut_height_agl >= 0.0)) fail(ErrorCode::InvalidArgument, "antenna height must be >= 0");
}

double slant_range_km(double elevation_deg, double altitude_km) {
    if (!(elevation_deg > 0.0 && elevation_deg <= 90.0)) {
        fail(ErrorCode::InvalidArgument, "elevation must be in (0, 90] degrees");
    }
    const double re = kEarthRadiusM / 1000.0;
    const double s = std::sin(elevation_deg * kDegToRad);
    if (elevation_deg == 90.0) return altitude_km;
    return std::sqrt(re * re * s * s + 2.0 * re * altitude_km + altitude_km * altitude_km) - re * s;
}

Direction3 satellite_direction(double elevation_deg, double azimuth_deg) {
    const double el = elevation_deg * kDegToRad;
    const double az = azimuth_deg * kDegToRad;
    return {std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el)};
}

double GroundSegment::raw_height(double dist_h) const {
    return antenna_height + dist_h * std::tan(elevation_rad);
}

double GroundSegment::ut_distance(double dist_h) const { return dist_h / std::cos(elevation_rad); }

GroundSegment ground_segment(const LinkSpec& link, const BoundingBox& roi, double ut_ground_height,
                             double max_terrain_height, const SegmentOptions& options) {
    link.validate();
    if (!roi.contains(link.ut_x, link.ut_y)) {
        std::ostringstream s;
        s << "UT (" << link.ut_x << ", " << link.ut_y << ") outside loaded rasters";
        fail(ErrorCode::OutOfDomain, s.str());
    }
    GroundSegment seg;
    seg.start = {link.ut_x, link.ut_y};
    seg.elevation_rad = link.elevation_deg * kDegToRad;
    const double az = link.azimuth_deg * kDegToRad;
    seg.dir_x = std::sin(az);
    seg.dir_y = std::cos(az);
    // Snap axis-aligned directions so due-north/east segments stay on the axis.
    if (std::abs(seg.dir_x) < 1e-15) seg.dir_x = 0.0;
    if (std::abs(seg.dir_y) < 1e-15) seg.dir_y = 0.0;
    seg.antenna_height = ut_ground_height + link.ut_height_agl;
    seg.slant_range_m = slant_range_km(link.elevation_deg, link.altitude_km) * 1000.0;

    // Distance to the extent boundary along the ray.
    double boundary = std::numeric_limits<double>::infinity();
    if (seg.dir_x > 0) boundary = std::min(boundary, (roi.max_x - link.ut_x) / seg.dir_x);
    if (seg.dir_x < 0) boundary = std::min(boundary, (roi.min_x - link.ut_x) / seg.dir_x);
    if (seg.dir_y > 0) boundary = std::min(boundary, (roi.max_y - link.ut_y) / seg.dir_y);
    if (seg.dir_y < 0) boundary = std::min(boundary, (roi.min_y - link.ut_y) / seg.dir_y);
    boundary = std::max(0.0, boundary);

    // Horizontal distance where the link clears the highest terrain + margin.
    const double target = max_terrain_height + options.margin_m;
    double clear_at = 0.0;
    if (seg.antenna_height < target) {
        const double sin_el = std::sin(seg.elevation_rad);
        const double cos_el = std::cos(seg.elevation_rad);
        if (link.elevation_deg == 90.0) {
            clear_at = 0.0;
        } else if (options.curvature_aware) {
            // H(u) = H0 + u sin(el) - (S - u) u / (2 R_eff), u = UT-side 3D distance.
            const double a = 1.0 / (2.0 * kEffectiveEarthRadiusM);
            const double b = sin_el - seg.slant_range_m / (2.0 * kEffectiveEarthRadiusM);
            const double c = seg.antenna_height - target;
            const double u = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
            clear_at = std::min(u, seg.slant_range_m) * cos_el;
        } else {
            clear_at = (target - seg.antenna_height) / std::tan(seg.elevation_rad);
        }
    }
    seg.hit_boundary = boundary <= clear_at;
    seg.length_h = std::min(boundary, clear_at);
    seg.end = seg.at(seg.length_h);
    return seg;
}

}  // namespace agc
