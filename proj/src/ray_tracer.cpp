// SPDX-License-Identifier: Apache-2.0
#include "agc/ray_tracer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "agc/error.hpp"

namespace agc {

// ---------------------------------------------------------------------------
// Terrain

Terrain::Terrain(std::shared_ptr<const TileIndex> dem, std::shared_ptr<const TileIndex> landcover,
                 ClassTable classes)
    : dem_(std::move(dem)), landcover_(std::move(landcover)), classes_(std::move(classes)) {
    if (!dem_ || dem_->empty()) fail(ErrorCode::InvalidArgument, "terrain needs at least one DEM block");
    if (landcover_ && landcover_->empty()) landcover_.reset();
    classes_.validate();
}

Terrain Terrain::from_grids(RasterGrid dem, std::optional<RasterGrid> landcover, ClassTable classes) {
    auto d = std::make_shared<TileIndex>(TileIndex::from_grid(std::move(dem)));
    std::shared_ptr<const TileIndex> lc;
    if (landcover) lc = std::make_shared<TileIndex>(TileIndex::from_grid(std::move(*landcover)));
    return {std::move(d), std::move(lc), std::move(classes)};
}

PixelIndex Terrain::global_pixel(double x, double y) const {
    const auto ext = extent();
    const double cs = cell_size();
    return {static_cast<long>(std::floor((ext.max_y - y) / cs)),
            static_cast<long>(std::floor((x - ext.min_x) / cs))};
}

WorldPoint Terrain::global_center(const PixelIndex& p) const {
    const auto ext = extent();
    const double cs = cell_size();
    return {ext.min_x + (static_cast<double>(p.col) + 0.5) * cs,
            ext.max_y - (static_cast<double>(p.row) + 0.5) * cs};
}

int Terrain::class_at(double x, double y) const {
    if (!landcover_) return -1;
    const auto v = landcover_->value_at(x, y);
    if (!v) return -1;
    return classes_.lookup(*v).class_id;
}

std::optional<Terrain::Pixel> Terrain::pixel(const PixelIndex& p) const {
    const auto c = global_center(p);
    const auto ground = dem_->value_at(c.x, c.y);
    if (!ground) return std::nullopt;
    Pixel px;
    px.ground = *ground;
    px.landcover = class_at(c.x, c.y);
    if (px.landcover >= 0) px.canopy = classes_[px.landcover].canopy_height;
    return px;
}

double Terrain::max_effective_height() const {
    std::call_once(max_once_, [this] {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < dem_->size(); ++t) {
            const auto& g = dem_->grid(t);
            for (long r = 0; r < g.height(); ++r) {
                for (long c = 0; c < g.width(); ++c) {
                    if (!g.valid(r, c)) continue;
                    double h = g.at(r, c);
                    if (landcover_) {
                        const auto ctr = g.pixel_center(r, c);
                        const int cls = class_at(ctr.x, ctr.y);
                        if (cls >= 0) h += classes_[cls].canopy_height;
                    }
                    best = std::max(best, h);
                }
            }
        }
        max_height_ = best;
    });
    return max_height_;
}

// ---------------------------------------------------------------------------
// Block clipping and pixel traversal

std::optional<std::pair<double, double>> liang_barsky(const WorldPoint& p0, const WorldPoint& p1,
                                                      const BoundingBox& box) {
    const double dx = p1.x - p0.x;
    const double dy = p1.y - p0.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {p0.x - box.min_x, box.max_x - p0.x, p0.y - box.min_y, box.max_y - p0.y};
    double t0 = 0.0;
    double t1 = 1.0;
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return std::nullopt;
            continue;
        }
        const double t = q[i] / p[i];
        if (p[i] < 0.0) {
            if (t > t1) return std::nullopt;
            t0 = std::max(t0, t);
        } else {
            if (t < t0) return std::nullopt;
            t1 = std::min(t1, t);
        }
    }
    return std::make_pair(t0, t1);
}

std::vector<BlockHit> clip_blocks(const WorldPoint& p0, const WorldPoint& p1,
                                  const std::vector<BoundingBox>& blocks) {
    if (p0.x == p1.x && p0.y == p1.y) fail(ErrorCode::InvalidArgument, "zero-length segment");
    std::vector<BlockHit> hits;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (const auto t = liang_barsky(p0, p1, blocks[i])) hits.push_back({i, t->first, t->second});
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const BlockHit& a, const BlockHit& b) { return a.t_enter < b.t_enter; });
    return hits;
}

std::vector<BlockHit> clip_blocks(const WorldPoint& p0, const WorldPoint& p1, const TileIndex& tiles) {
    std::vector<BoundingBox> boxes;
    boxes.reserve(tiles.size());
    for (std::size_t i = 0; i < tiles.size(); ++i) boxes.push_back(tiles.bbox(i));
    return clip_blocks(p0, p1, boxes);
}

std::vector<GridPoint> bresenham(GridPoint from, GridPoint to) {
    const long dx = std::labs(to.x - from.x);
    const long dy = std::labs(to.y - from.y);
    const long sx = to.x >= from.x ? 1 : -1;
    const long sy = to.y >= from.y ? 1 : -1;
    std::vector<GridPoint> out;
    out.reserve(static_cast<std::size_t>(std::max(dx, dy) + 1));
    out.push_back(from);
    GridPoint p = from;
    if (dx >= dy) {
        long err = 2 * dy - dx;
        for (long i = 0; i < dx; ++i) {
            p.x += sx;
            if (err > 0) {
                p.y += sy;
                err -= 2 * dx;
            }
            err += 2 * dy;
            out.push_back(p);
        }
    } else {
        long err = 2 * dx - dy;
        for (long i = 0; i < dy; ++i) {
            p.y += sy;
            if (err > 0) {
                p.x += sx;
                err -= 2 * dy;
            }
            err += 2 * dx;
            out.push_back(p);
        }
    }
    return out;
}

std::vector<PixelIndex> traverse_pixels(const WorldPoint& p0, const WorldPoint& p1, const RasterGrid& block) {
    const auto t = liang_barsky(p0, p1, block.bounds());
    if (!t) return {};
    const WorldPoint a{p0.x + (p1.x - p0.x) * t->first, p0.y + (p1.y - p0.y) * t->first};
    const WorldPoint b{p0.x + (p1.x - p0.x) * t->second, p0.y + (p1.y - p0.y) * t->second};
    auto clamp_px = [&block](PixelIndex p) {
        p.row = std::clamp(p.row, 0L, block.height() - 1);
        p.col = std::clamp(p.col, 0L, block.width() - 1);
        return p;
    };
    const auto pa = clamp_px(block.world_to_pixel(a.x, a.y));
    const auto pb = clamp_px(block.world_to_pixel(b.x, b.y));
    std::vector<PixelIndex> out;
    for (const auto& g : bresenham({pa.col, pa.row}, {pb.col, pb.row})) out.push_back({g.y, g.x});
    return out;
}

// ---------------------------------------------------------------------------
// Link evaluation

double curvature_correction(double raw_height, double d1, double d2) {
    return raw_height - d1 * d2 / (2.0 * kEffectiveEarthRadiusM);
}

double fresnel_radius(double wavelength, double d1, double d2) {
    if (!(d1 + d2 > 0.0)) fail(ErrorCode::InvalidArgument, "Fresnel radius needs d1 + d2 > 0");
    return std::sqrt(wavelength * d1 * d2 / (d1 + d2));
}

const char* verdict_name(Verdict v) { return v == Verdict::Los ? "LOS" : "NLOS"; }

PathProfile trace_link(const LinkSpec& link, const Terrain& terrain, const TraceOptions& options) {
    link.validate();
    const auto extent = terrain.extent();
    if (!extent.contains(link.ut_x, link.ut_y)) {
        std::ostringstream s;
        s << "UT (" << link.ut_x << ", " << link.ut_y << ") outside loaded rasters";
        fail(ErrorCode::OutOfDomain, s.str());
    }
    const double ut_ground = terrain.ground_height(link.ut_x, link.ut_y);
    const double max_h = std::isnan(options.max_height_override) ? terrain.max_effective_height()
                                                                 : options.max_height_override;
    PathProfile profile;
    profile.segment = ground_segment(link, extent, ut_ground, max_h, options.segment);
    const auto& seg = profile.segment;
    const double cs = terrain.cell_size();

    // Rasterise once on the mosaic lattice so block boundaries leave no trace in the result.
    std::vector<PixelIndex> pixels;
    if (seg.length_h > 0.0) {
        if (const auto t = liang_barsky(seg.start, seg.end, extent)) {
            const long rows = std::lround((extent.max_y - extent.min_y) / cs);
            const long cols = std::lround((extent.max_x - extent.min_x) / cs);
            auto at = [&](double f) {
                auto p = terrain.global_pixel(seg.start.x + (seg.end.x - seg.start.x) * f,
                                              seg.start.y + (seg.end.y - seg.start.y) * f);
                p.row = std::clamp(p.row, 0L, rows - 1);
                p.col = std::clamp(p.col, 0L, cols - 1);
                return p;
            };
            const auto pa = at(t->first);
            const auto pb = at(t->second);
            for (const auto& g : bresenham({pa.col, pa.row}, {pb.col, pb.row})) pixels.push_back({g.y, g.x});
        }
    }

    const PixelIndex ut_pixel = terrain.global_pixel(link.ut_x, link.ut_y);
    const double lambda = link.wavelength();
    const double cos_el = std::cos(seg.elevation_rad);
    double min_clearance = std::numeric_limits<double>::infinity();
    double min_rho = std::numeric_limits<double>::infinity();
    double gap_from = std::numeric_limits<double>::infinity();
    double gap_to = -std::numeric_limits<double>::infinity();

    for (const auto& p : pixels) {
        if (p == ut_pixel) continue;
        const auto ctr = terrain.global_center(p);
        const double along = (ctr.x - seg.start.x) * seg.dir_x + (ctr.y - seg.start.y) * seg.dir_y;
        const double dist_h = std::clamp(along, 0.0, seg.length_h);
        const auto px = terrain.pixel(p);
        if (!px) {
            gap_from = std::min(gap_from, dist_h);
            gap_to = std::max(gap_to, dist_h);
            continue;
        }
        ++profile.pixels_examined;
        const double d2 = seg.ut_distance(dist_h);
        const double d1 = seg.slant_range_m - d2;
        const double raw = seg.raw_height(dist_h);
        const double h_link = options.earth_curvature ? curvature_correction(raw, d1, d2) : raw;
        const double clearance = h_link - px->effective();

        ProfileEntry e;
        e.dist_h = dist_h;
        e.terrain_height = px->effective();
        e.clearance = clearance;
        e.canopy = px->canopy;
        e.landcover = px->landcover;
        e.ut_distance = d2;
        e.fresnel = fresnel_radius(lambda, d1, d2);
        // rho is ill-defined where R1 -> 0; only evaluate beyond one cell from either end.
        e.rho_evaluated = d1 > cs && d2 > cs;
        if (e.rho_evaluated) {
            e.rho = clearance * cos_el / e.fresnel;
            min_rho = std::min(min_rho, e.rho);
        }
        min_clearance = std::min(min_clearance, clearance);
        if (clearance < 0.0 || (e.rho_evaluated && e.rho < options.rho_threshold)) {
            profile.entries.push_back(e);
        }
    }
    if (gap_to >= gap_from) {
        std::ostringstream s;
        s << "raster coverage gap along link from " << gap_from << " m to " << gap_to
          << " m (horizontal distance from UT)";
        fail(ErrorCode::Coverage, s.str());
    }

    profile.min_clearance = min_clearance;
    profile.min_rho = min_rho;
    if (min_clearance >= 0.0 && min_rho >= options.rho_threshold) {
        profile.verdict = Verdict::Los;
        profile.entries.clear();
        return profile;
    }
    profile.verdict = Verdict::Nlos;
    std::stable_sort(profile.entries.begin(), profile.entries.end(),
                     [](const ProfileEntry& a, const ProfileEntry& b) { return a.dist_h < b.dist_h; });
    // Keep dist_h strictly increasing: equal distances keep the worse clearance.
    std::vector<ProfileEntry> merged;
    for (const auto& e : profile.entries) {
        if (!merged.empty() && merged.back().dist_h == e.dist_h) {
            if (e.clearance < merged.back().clearance) merged.back() = e;
            continue;
        }
        merged.push_back(e);
    }
    profile.entries = std::move(merged);
    return profile;
}

}  // namespace agc
