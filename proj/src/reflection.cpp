// SPDX-License-Identifier: Apache-2.0
#include "agc/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "agc/error.hpp"
#include "agc/stats.hpp"

namespace agc {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::vector<double> valid_values(const RasterGrid& g) {
    std::vector<double> out;
    out.reserve(g.size());
    for (double v : g.values()) {
        if (!g.is_nodata(v)) out.push_back(v);
    }
    return out;
}

// Robust min-max between the 1st and 99th percentiles, clamped to [0, 1].
struct RobustScale {
    double lo = 0.0;
    double hi = 0.0;
    double operator()(double v) const {
        if (!(hi > lo)) return v > hi ? 1.0 : 0.0;
        return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
    }
};

RobustScale robust_scale(const RasterGrid& g) {
    const auto v = valid_values(g);
    if (v.empty()) return {};
    return {percentile(v, 1.0), percentile(v, 99.0)};
}

struct Vec3 {
    double x, y, z;
};
double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
double angle_deg(const Vec3& a, const Vec3& b) {
    const double c = std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0);
    return std::acos(c) * kRadToDeg;
}

}  // namespace

void ReflectionWeights::validate() const {
    if (slope < 0.0 || roughness < 0.0 || curvature < 0.0) {
        fail(ErrorCode::InvalidArgument, "reflection weights must be non-negative");
    }
    if (std::abs(slope + roughness + curvature - 1.0) > 1e-9) {
        fail(ErrorCode::InvalidArgument, "reflection weights must sum to 1");
    }
}

RasterGrid terrain_reflect_score(const TerrainDerivatives& derivs, const ReflectionWeights& weights) {
    weights.validate();
    const auto& s = derivs.slope;
    if (s.size() == 0 || derivs.roughness.size() == 0 || derivs.curvature.size() == 0) {
        fail(ErrorCode::InvalidArgument, "reflection score needs slope, roughness and curvature layers");
    }
    if (!s.same_geometry(derivs.roughness) || !s.same_geometry(derivs.curvature)) {
        fail(ErrorCode::Geometry, "derivative layers differ in geometry");
    }
    const auto s_scale = robust_scale(s);
    const auto r_scale = robust_scale(derivs.roughness);
    auto abs_k = valid_values(derivs.curvature);
    for (double& k : abs_k) k = std::abs(k);
    const double k_ref = abs_k.empty() ? 0.0 : percentile(abs_k, 99.0);

    auto out = RasterGrid::filled_like(s, s.nodata());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double sv = s.values()[i];
        const double rv = derivs.roughness.values()[i];
        const double kv = derivs.curvature.values()[i];
        if (s.is_nodata(sv) || derivs.roughness.is_nodata(rv) || derivs.curvature.is_nodata(kv)) continue;
        const double k_norm = k_ref > 0.0 ? std::clamp(kv / k_ref, -1.0, 1.0) : 0.0;
        const double concave = std::clamp((-k_norm + 1.0) / 2.0, 0.0, 1.0);
        out.values()[i] = weights.slope * (1.0 - s_scale(sv)) + weights.roughness * (1.0 - r_scale(rv)) +
                          weights.curvature * concave;
    }
    return out;
}

RasterGrid apply_landcover(const RasterGrid& score, const RasterGrid& landcover, const ClassTable& classes) {
    if (!score.same_geometry(landcover)) fail(ErrorCode::Geometry, "score and land cover differ in geometry");
    auto out = RasterGrid::filled_like(score, score.nodata());
    for (std::size_t i = 0; i < score.size(); ++i) {
        const double t = score.values()[i];
        const double lc = landcover.values()[i];
        if (score.is_nodata(t) || landcover.is_nodata(lc)) continue;
        const double beta = classes.lookup(lc).beta_reflect;
        if (beta < -1.0) fail(ErrorCode::Validation, "beta below -1 would make R negative");
        out.values()[i] = t * (1.0 + beta);
    }
    return out;
}

ReflectionSurface build_reflection_surface(const RasterGrid& dem, const RasterGrid& landcover,
                                           const ClassTable& classes, const ReflectionWeights& weights) {
    auto derivs = derive_terrain(dem);
    ReflectionSurface s;
    s.r = apply_landcover(terrain_reflect_score(derivs, weights), landcover, classes);
    s.dem = dem;
    s.slope = std::move(derivs.slope);
    s.aspect = std::move(derivs.aspect);
    s.flat = std::move(derivs.flat);
    return s;
}

std::vector<double> ring_radii(const RingOptions& options) {
    if (!(options.r_min > 0.0) || !(options.growth > 1.0) || !(options.r_max >= options.r_min)) {
        fail(ErrorCode::InvalidArgument, "ring spacing needs r_min > 0, growth > 1, r_max >= r_min");
    }
    std::vector<double> radii;
    for (double r = options.r_min; r <= options.r_max * (1.0 + 1e-12); r *= options.growth) radii.push_back(r);
    return radii;
}

std::vector<ReflectionCandidate> candidate_ring(const LinkSpec& link, const ReflectionSurface& surface,
                                                const RingOptions& options) {
    link.validate();
    const auto& dem = surface.dem;
    if (!dem.contains(link.ut_x, link.ut_y)) fail(ErrorCode::OutOfDomain, "UT outside the reflection surface");
    const Vec3 ut{link.ut_x, link.ut_y, sample_height(dem, link.ut_x, link.ut_y) + link.ut_height_agl};
    const auto sd = satellite_direction(link.elevation_deg, link.azimuth_deg);
    const Vec3 sat{sd.e, sd.n, sd.u};
    const double direct = slant_range_km(link.elevation_deg, link.altitude_km) * 1000.0;

    // Ring samples; angles start at the satellite azimuth.
    struct Sample {
        double x, y;
        std::size_t idx;
        double r;
    };
    std::vector<Sample> samples;
    for (double radius : ring_radii(options)) {
        const double step = radius * (options.growth - 1.0);
        const int n = std::max(8, static_cast<int>(std::ceil(2.0 * std::numbers::pi * radius / step)));
        for (int k = 0; k < n; ++k) {
            const double az = link.azimuth_deg * kDegToRad + 2.0 * std::numbers::pi * k / n;
            const double x = link.ut_x + radius * std::sin(az);
            const double y = link.ut_y + radius * std::cos(az);
            if (!surface.r.contains(x, y)) continue;
            const auto p = surface.r.world_to_pixel(x, y);
            const double rv = surface.r.at(p.row, p.col);
            if (surface.r.is_nodata(rv)) continue;
            samples.push_back({x, y, surface.r.index(p.row, p.col), rv});
        }
    }
    std::vector<ReflectionCandidate> out;
    if (samples.empty()) return out;
    std::vector<double> rs;
    rs.reserve(samples.size());
    for (const auto& s : samples) rs.push_back(s.r);
    const double cutoff = percentile(rs, options.percentile);

    for (const auto& s : samples) {
        if (!(s.r > cutoff) || !(s.r > options.r_floor)) continue;
        ReflectionCandidate c;
        c.x = s.x;
        c.y = s.y;
        c.r_value = s.r;
        if (surface.dem.is_nodata(surface.dem.values()[s.idx])) continue;
        c.z = sample_height(dem, s.x, s.y);

        Vec3 normal{0.0, 0.0, 1.0};
        if (!surface.flat.empty() && !surface.flat[s.idx]) {
            const double slope = surface.slope.values()[s.idx] * kDegToRad;
            const double aspect = surface.aspect.values()[s.idx] * kDegToRad;
            normal = {-std::sin(aspect) * std::sin(slope), -std::cos(aspect) * std::sin(slope), std::cos(slope)};
        }
        const Vec3 to_ut{ut.x - c.x, ut.y - c.y, ut.z - c.z};
        const double sn = dot(sat, normal);
        const Vec3 mirror{2.0 * sn * normal.x - sat.x, 2.0 * sn * normal.y - sat.y, 2.0 * sn * normal.z - sat.z};
        c.incident_deg = angle_deg(sat, normal);
        c.reflected_deg = angle_deg(to_ut, normal);
        c.angular_error_deg = angle_deg(mirror, to_ut);
        c.validated = sn > 0.0 && dot(to_ut, normal) > 0.0 && c.angular_error_deg <= options.tolerance_deg;

        // Plane-wave excess path: UT->P->satellite minus UT->satellite.
        const double leg = norm(to_ut);
        const double excess = leg + dot(to_ut, sat);
        c.excess_delay_s = excess / kSpeedOfLight;
        const double r_power = std::clamp(c.r_value, 1e-12, 1.0);
        c.relative_power_db = 20.0 * std::log10(r_power) - 20.0 * std::log10((direct + excess) / direct);
        out.push_back(c);
    }
    return out;
}

const ReflectionCandidate* strongest_reflection(const std::vector<ReflectionCandidate>& candidates) {
    const ReflectionCandidate* best = nullptr;
    for (const auto& c : candidates) {
        if (!c.validated) continue;
        if (!best || c.relative_power_db > best->relative_power_db) best = &c;
    }
    return best;
}

}  // namespace agc
