// SPDX-License-Identifier: Apache-2.0
#include "agc/terrain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "agc/error.hpp"

namespace agc {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Neighbour offsets in row-major order a..i, skipping the centre.
constexpr std::array<std::array<int, 2>, 8> kNeighbours{{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

struct Window {
    // z[dr + 1][dc + 1]; missing cells reconstructed by linear extrapolation
    // through the centre, or the centre value when the opposite cell is also missing.
    double z[3][3];
    int valid = 0;
};

Window gather(const RasterGrid& dem, long r, long c) {
    Window w{};
    bool ok[3][3]{};
    const double e = dem.at(r, c);
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            const long rr = r + dr;
            const long cc = c + dc;
            if (dem.in_bounds(rr, cc) && dem.valid(rr, cc)) {
                ok[dr + 1][dc + 1] = true;
                w.z[dr + 1][dc + 1] = dem.at(rr, cc);
                if (dr != 0 || dc != 0) ++w.valid;
            }
        }
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (ok[i][j]) continue;
            w.z[i][j] = ok[2 - i][2 - j] ? 2.0 * e - w.z[2 - i][2 - j] : e;
        }
    }
    return w;
}

RasterGrid nodata_like(const RasterGrid& dem) {
    return RasterGrid::filled_like(dem, dem.nodata());
}

void require_same(const RasterGrid& a, const RasterGrid& b, const char* what) {
    if (!a.same_geometry(b)) fail(ErrorCode::Geometry, std::string("geometry mismatch: ") + what);
}

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments moments(const RasterGrid& g) {
    double sum = 0.0;
    double sq = 0.0;
    std::size_t n = 0;
    for (double v : g.values()) {
        if (g.is_nodata(v)) continue;
        sum += v;
        ++n;
    }
    if (n == 0) return {};
    const double mean = sum / static_cast<double>(n);
    for (double v : g.values()) {
        if (g.is_nodata(v)) continue;
        sq += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(sq / static_cast<double>(n))};
}

}  // namespace

TerrainDerivatives derive_terrain(const RasterGrid& dem) {
    if (dem.width() < 3 || dem.height() < 3) {
        fail(ErrorCode::Size, "terrain derivatives need at least a 3x3 DEM, got " +
                                  std::to_string(dem.width()) + "x" + std::to_string(dem.height()));
    }
    TerrainDerivatives d{nodata_like(dem), nodata_like(dem), nodata_like(dem), nodata_like(dem),
                         nodata_like(dem), nodata_like(dem),
                         std::vector<std::uint8_t>(dem.size(), 0),
                         std::vector<std::uint8_t>(dem.size(), 0)};
    const double cs = dem.cell_size();
    bool any_full_window = false;
    for (long r = 0; r < dem.height(); ++r) {
        for (long c = 0; c < dem.width(); ++c) {
            if (!dem.valid(r, c)) continue;
            const std::size_t idx = dem.index(r, c);
            const Window w = gather(dem, r, c);
            any_full_window = any_full_window || w.valid == 8;
            const auto& z = w.z;
            const double e = z[1][1];

            // Horn gradients; row -1 is north.
            const double dzdx = ((z[0][2] + 2 * z[1][2] + z[2][2]) - (z[0][0] + 2 * z[1][0] + z[2][0])) / (8 * cs);
            const double dzdy = ((z[0][0] + 2 * z[0][1] + z[0][2]) - (z[2][0] + 2 * z[2][1] + z[2][2])) / (8 * cs);
            const double grad = std::hypot(dzdx, dzdy);
            d.slope.values()[idx] = std::atan(grad) * kRadToDeg;
            if (grad < 1e-12) {
                d.aspect.values()[idx] = 0.0;
                d.flat[idx] = 1;
            } else {
                double a = std::atan2(dzdx, dzdy) * kRadToDeg;
                if (a < 0.0) a += 360.0;
                if (a >= 360.0) a -= 360.0;
                d.aspect.values()[idx] = a;
            }

            d.curvature.values()[idx] = -(z[0][1] + z[2][1] + z[1][0] + z[1][2] - 4 * e) / (cs * cs);

            double lo = e;
            double hi = e;
            double sum = 0.0;
            double sq = 0.0;
            int n = 0;
            for (const auto& off : kNeighbours) {
                const long rr = r + off[0];
                const long cc = c + off[1];
                if (!dem.in_bounds(rr, cc) || !dem.valid(rr, cc)) continue;
                const double v = dem.at(rr, cc);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                sum += v;
                sq += (v - e) * (v - e);
                ++n;
            }
            d.roughness.values()[idx] = hi - lo;
            d.tpi.values()[idx] = n ? e - sum / n : 0.0;
            d.tri.values()[idx] = n ? std::sqrt(sq / n) : 0.0;
            d.sparse_window[idx] = n < 4 ? 1 : 0;
        }
    }
    if (!any_full_window) fail(ErrorCode::Size, "DEM has no fully valid 3x3 neighbourhood");
    return d;
}

RasterGrid compute_tpi(const RasterGrid& dem, double inner_radius, double outer_radius) {
    if (!(outer_radius > inner_radius) || inner_radius < 0.0) {
        fail(ErrorCode::InvalidArgument, "TPI annulus needs 0 <= inner < outer");
    }
    std::vector<std::array<long, 2>> offsets;
    const long reach = static_cast<long>(std::floor(outer_radius));
    for (long dr = -reach; dr <= reach; ++dr) {
        for (long dc = -reach; dc <= reach; ++dc) {
            const double dist = std::hypot(static_cast<double>(dr), static_cast<double>(dc));
            if (dist > inner_radius && dist <= outer_radius && (dr != 0 || dc != 0)) {
                offsets.push_back({dr, dc});
            }
        }
    }
    // Windows reaching past the border read the grid reflected about its edge.
    auto fold = [](long i, long n) {
        const long m = ((i % (2 * n)) + 2 * n) % (2 * n);
        return m < n ? m : 2 * n - 1 - m;
    };
    RasterGrid out = nodata_like(dem);
    for (long r = 0; r < dem.height(); ++r) {
        for (long c = 0; c < dem.width(); ++c) {
            if (!dem.valid(r, c)) continue;
            double sum = 0.0;
            int n = 0;
            for (const auto& o : offsets) {
                const long rr = fold(r + o[0], dem.height());
                const long cc = fold(c + o[1], dem.width());
                if (!dem.valid(rr, cc)) continue;
                sum += dem.at(rr, cc);
                ++n;
            }
            out.at(r, c) = n ? dem.at(r, c) - sum / n : 0.0;
        }
    }
    return out;
}

const char* weiss_class_name(WeissClass c) {
    switch (c) {
        case WeissClass::Valley: return "valley";
        case WeissClass::LowerSlope: return "lower_slope";
        case WeissClass::Flat: return "flat";
        case WeissClass::MiddleSlope: return "middle_slope";
        case WeissClass::UpperSlope: return "upper_slope";
        case WeissClass::Ridge: return "ridge";
    }
    return "unknown";
}

RasterGrid classify_weiss(const RasterGrid& tpi_small, const RasterGrid& tpi_large,
                          const RasterGrid& slope, const WeissThresholds& th) {
    require_same(tpi_small, tpi_large, "small/large TPI");
    require_same(tpi_small, slope, "TPI/slope");
    const Moments ms = moments(tpi_small);
    const Moments ml = moments(tpi_large);
    auto standardize = [](double v, const Moments& m) { return m.sd > 1e-12 ? (v - m.mean) / m.sd : 0.0; };

    RasterGrid out(tpi_small.origin_x(), tpi_small.origin_y(), tpi_small.cell_size(), tpi_small.width(),
                   tpi_small.height(), 255.0, std::vector<double>(tpi_small.size(), 255.0));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double ts = tpi_small.values()[i];
        const double tl = tpi_large.values()[i];
        const double s = slope.values()[i];
        if (tpi_small.is_nodata(ts) || tpi_large.is_nodata(tl) || slope.is_nodata(s)) continue;
        const double zs = standardize(ts, ms);
        const double zl = standardize(tl, ml);
        WeissClass cls;
        if (zs >= th.ridge_sigma) {
            cls = WeissClass::Ridge;
        } else if (zs <= th.valley_sigma) {
            cls = WeissClass::Valley;
        } else if (zl >= th.ridge_sigma) {
            cls = WeissClass::Ridge;
        } else if (zl <= th.valley_sigma) {
            cls = WeissClass::Valley;
        } else if (s < th.slope_flat_deg) {
            cls = WeissClass::Flat;
        } else if (zs >= th.slope_sigma) {
            cls = WeissClass::UpperSlope;
        } else if (zs <= -th.slope_sigma) {
            cls = WeissClass::LowerSlope;
        } else {
            cls = WeissClass::MiddleSlope;
        }
        out.values()[i] = static_cast<double>(static_cast<int>(cls));
    }
    return out;
}

RasterGrid classify_weiss(const RasterGrid& dem, const TerrainDerivatives& derivs,
                          const WeissThresholds& th) {
    return classify_weiss(compute_tpi(dem, 0.0, th.small_radius_px),
                          compute_tpi(dem, 0.0, th.large_radius_px), derivs.slope, th);
}

}  // namespace agc
