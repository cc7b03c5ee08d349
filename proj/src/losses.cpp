// SPDX-License-Identifier: Apache-2.0
#include "agc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "agc/error.hpp"

namespace agc {

double fspl_db(double frequency_hz, double distance_m) {
    if (!(frequency_hz > 0.0) || !(distance_m > 0.0)) {
        fail(ErrorCode::InvalidArgument, "free-space loss needs positive frequency and distance");
    }
    return 20.0 * std::log10(distance_m / 1000.0) + 20.0 * std::log10(frequency_hz / 1e6) + 32.45;
}

double knife_edge_loss(double nu) {
    if (nu <= -0.78) return 0.0;
    const double v = nu - 0.1;
    return 6.9 + 20.0 * std::log10(std::sqrt(v * v + 1.0) + v);
}

double fresnel_nu(double height, double d1, double d2, double wavelength) {
    if (!(d1 > 0.0) || !(d2 > 0.0) || !(wavelength > 0.0)) {
        fail(ErrorCode::InvalidArgument, "Fresnel parameter needs positive distances and wavelength");
    }
    return height * std::sqrt(2.0 * (d1 + d2) / (wavelength * d1 * d2));
}

namespace {

struct EdgePoint {
    double d = 0.0;  // UT-side distance along the link
    double h = 0.0;  // height above the direct ray
};

struct EdgeSolution {
    double nu = 0.0;
    double d = 0.0;
    double h = 0.0;
};

// Bullington construction in the frame of the direct ray, where both
// terminals sit at height zero.
EdgeSolution bullington_edge(const std::vector<EdgePoint>& pts, double total, double wavelength) {
    double s_tim = -std::numeric_limits<double>::infinity();
    double s_rim = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        s_tim = std::max(s_tim, p.h / p.d);
        s_rim = std::max(s_rim, p.h / (total - p.d));
    }
    EdgeSolution best;
    if (s_tim > 0.0 && s_rim > 0.0) {
        // Intersection of the steepest terminal-side lines.
        best.d = s_rim * total / (s_tim + s_rim);
        best.h = s_tim * best.d;
        best.nu = fresnel_nu(best.h, best.d, total - best.d, wavelength);
        return best;
    }
    // Every point at or below the ray: strongest single point.
    best.nu = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        const double nu = fresnel_nu(p.h, p.d, total - p.d, wavelength);
        if (nu > best.nu) best = {nu, p.d, p.h};
    }
    return best;
}

// Smooth-sphere loss at the critical point: zero once the clearance
// reaches 0.552 R1, ramping to the grazing knife-edge value, then J(nu) below grazing.
double spherical_earth_loss(const std::vector<EdgePoint>& smooth, double total, double wavelength) {
    double loss = 0.0;
    for (const auto& p : smooth) {
        const double clearance = -p.h;
        const double r1 = std::sqrt(wavelength * p.d * (total - p.d) / total);
        const double required = 0.552 * r1;
        double l = 0.0;
        if (clearance < 0.0) {
            l = knife_edge_loss(fresnel_nu(p.h, p.d, total - p.d, wavelength));
        } else if (clearance < required) {
            l = knife_edge_loss(0.0) * (1.0 - clearance / required);
        }
        loss = std::max(loss, l);
    }
    return loss;
}

}  // namespace

BullingtonResult bullington(const PathProfile& profile, const LinkSpec& link) {
    BullingtonResult out;
    if (profile.entries.empty()) return out;
    const double total = profile.segment.slant_range_m;
    const double lambda = link.wavelength();
    const double ut_ground = profile.segment.antenna_height - link.ut_height_agl;

    std::vector<EdgePoint> pts;
    std::vector<EdgePoint> smooth;
    pts.reserve(profile.entries.size());
    for (const auto& e : profile.entries) {
        // Points at the terminals carry no diffraction geometry.
        if (!(e.ut_distance > 0.0) || !(e.ut_distance < total)) continue;
        pts.push_back({e.ut_distance, -e.clearance});
        // Same ray over a smooth earth at the UT ground level.
        smooth.push_back({e.ut_distance, -(e.clearance + e.terrain_height - ut_ground)});
    }
    if (pts.empty()) return out;

    const auto edge = bullington_edge(pts, total, lambda);
    out.nu = edge.nu;
    out.edge_distance = edge.d;
    out.edge_height = edge.h;
    out.edge_loss_db = knife_edge_loss(edge.nu);

    const auto smooth_edge = bullington_edge(smooth, total, lambda);
    const double smooth_bullington = knife_edge_loss(smooth_edge.nu);
    const double sphere = spherical_earth_loss(smooth, total, lambda);
    out.spherical_delta_db = std::max(sphere - smooth_bullington, 0.0);
    out.loss_db = out.edge_loss_db + out.spherical_delta_db;
    return out;
}

// ---------------------------------------------------------------------------
// Vegetation

std::vector<VegSegment> segment_vegetation(const TypeOracle& type_at, double s_max, double step,
                                           double tolerance, const VegetationPredicate& is_vegetation) {
    if (!(step > tolerance) || !(tolerance > 0.0)) {
        fail(ErrorCode::InvalidArgument, "vegetation segmentation needs step > tolerance > 0");
    }
    std::vector<VegSegment> out;
    if (!(s_max > 0.0)) return out;

    int prev = type_at(0.0);
    bool open = is_vegetation(prev);
    VegSegment current{0.0, 0.0, prev};
    double s = 0.0;
    while (s < s_max) {
        const double s_next = std::min(s + step, s_max);
        const int t = type_at(s_next);
        if (t != prev) {
            // Boundary lies in (s, s_next]: keep Type(L) == prev on the left.
            double lo = s;
            double hi = s_next;
            const int left_type = type_at(lo);
            while (hi - lo > tolerance) {
                const double mid = 0.5 * (lo + hi);
                if (type_at(mid) == left_type) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            const double boundary = 0.5 * (lo + hi);
            if (open && (!is_vegetation(t) || t != current.landcover)) {
                current.s_out = boundary;
                out.push_back(current);
                open = false;
            }
            if (!open && is_vegetation(t)) {
                current = {boundary, 0.0, t};
                open = true;
            }
        }
        prev = t;
        s = s_next;
    }
    if (open) {
        current.s_out = s_max;
        out.push_back(current);
    }
    return out;
}

double vegetation_loss(const std::vector<VegSegment>& segments, double frequency_hz, const ClassTable& classes) {
    const double f_mhz = frequency_hz / 1e6;
    double total = 0.0;
    for (const auto& seg : segments) {
        const double depth = seg.s_out - seg.s_in;
        if (depth < 0.0) fail(ErrorCode::Validation, "vegetation segment with negative length");
        const auto& cls = classes[seg.landcover];
        const double raw = cls.veg_a * std::pow(f_mhz, cls.veg_b) * std::pow(depth, cls.veg_c);
        total += cls.veg_max_db > 0.0 ? cls.veg_max_db * (1.0 - std::exp(-raw / cls.veg_max_db)) : 0.0;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Atmosphere

AtmosphereTable AtmosphereTable::defaults() {
    AtmosphereTable t;
    // freq GHz, gas zenith dB, cloud dB per kg/m^2, rain k, rain alpha
    t.rows = {
        {1.0, 0.035, 0.0006, 0.0000387, 0.912},
        {2.0, 0.038, 0.0025, 0.000154, 0.963},
        {4.0, 0.040, 0.010, 0.000650, 1.121},
        {6.0, 0.043, 0.022, 0.00175, 1.308},
        {8.0, 0.046, 0.040, 0.00454, 1.327},
        {10.0, 0.050, 0.060, 0.0101, 1.276},
        {12.0, 0.058, 0.087, 0.0188, 1.217},
        {15.0, 0.075, 0.135, 0.0367, 1.154},
        {20.0, 0.250, 0.240, 0.0751, 1.099},
        {22.0, 0.450, 0.290, 0.0990, 1.080},
        {25.0, 0.280, 0.360, 0.124, 1.061},
        {30.0, 0.200, 0.520, 0.187, 1.021},
        {35.0, 0.250, 0.700, 0.263, 0.979},
        {40.0, 0.330, 0.900, 0.350, 0.939},
        {50.0, 2.000, 1.300, 0.536, 0.873},
    };
    return t;
}

AtmosphereRow AtmosphereTable::at(double frequency_hz) const {
    if (rows.empty()) fail(ErrorCode::InvalidArgument, "empty atmosphere table");
    const double f = frequency_hz / 1e9;
    if (rows.size() == 1 || f <= rows.front().frequency_ghz) return rows.front();
    if (f >= rows.back().frequency_ghz) return rows.back();
    const auto hi = std::upper_bound(rows.begin(), rows.end(), f,
                                     [](double v, const AtmosphereRow& r) { return v < r.frequency_ghz; });
    const auto lo = hi - 1;
    const double w = std::log(f / lo->frequency_ghz) / std::log(hi->frequency_ghz / lo->frequency_ghz);
    auto lin = [w](double a, double b) { return a + w * (b - a); };
    auto logl = [w](double a, double b) {
        return (a > 0.0 && b > 0.0) ? std::exp(std::log(a) + w * (std::log(b) - std::log(a))) : a + w * (b - a);
    };
    return {f, lin(lo->gas_zenith_db, hi->gas_zenith_db), lin(lo->cloud_coeff, hi->cloud_coeff),
            logl(lo->rain_k, hi->rain_k), lin(lo->rain_alpha, hi->rain_alpha)};
}

double rain_specific_attenuation(double k, double alpha, double rain_mm_h) {
    if (rain_mm_h <= 0.0) return 0.0;
    return k * std::pow(rain_mm_h, alpha);
}

AtmosphereBreakdown atmosphere_breakdown(double elevation_deg, double frequency_hz,
                                         const WeatherRecord& weather, const AtmosphereTable& table) {
    if (!(elevation_deg > 0.0) || elevation_deg > 90.0) {
        fail(ErrorCode::InvalidArgument, "atmospheric loss needs elevation in (0, 90]");
    }
    const auto row = table.at(frequency_hz);
    const double csc = 1.0 / std::sin(elevation_deg * std::numbers::pi / 180.0);
    AtmosphereBreakdown b;
    b.gas_db = row.gas_zenith_db * (weather.pressure_hpa / 1013.25) * csc;
    b.cloud_db = row.cloud_coeff * std::max(weather.cloud_lwc, 0.0) * csc;
    b.rain_db = rain_specific_attenuation(row.rain_k, row.rain_alpha, weather.rain_mm_h) *
                table.rain_height_km * csc;
    return b;
}

// ---------------------------------------------------------------------------
// Multipath

TwdpResult twdp_stats(double direct_power_db, std::optional<double> reflection_power_db, double diffuse_power_db) {
    if (!std::isfinite(direct_power_db)) fail(ErrorCode::InvalidArgument, "direct path power must be finite");
    const double pd = std::pow(10.0, direct_power_db / 10.0);
    const double pr = reflection_power_db ? std::pow(10.0, *reflection_power_db / 10.0) : 0.0;
    const double pdiff = std::pow(10.0, diffuse_power_db / 10.0);
    TwdpResult out;
    out.k_db = 10.0 * std::log10((pd + pr) / pdiff);
    out.delta = pr > 0.0 ? 2.0 * std::sqrt(pd * pr) / (pd + pr) : 0.0;

    const double a = std::sqrt(pd);
    const double b = std::sqrt(pr);
    double power_sum = 0.0;
    double db_sum = 0.0;
    for (int j = 0; j < kTwdpQuadraturePoints; ++j) {
        const double phi = 2.0 * std::numbers::pi * (j + 0.5) / kTwdpQuadraturePoints;
        const double p = a * a + b * b + 2.0 * a * b * std::cos(phi) + pdiff;
        power_sum += p;
        db_sum += 10.0 * std::log10(p);
    }
    out.mean_power = power_sum / kTwdpQuadraturePoints;
    // Without a validated reflection there is no two-wave interaction to report.
    out.multipath_db = reflection_power_db ? -(db_sum / kTwdpQuadraturePoints - direct_power_db) : 0.0;
    return out;
}

}  // namespace agc
