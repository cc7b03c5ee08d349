// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agc/geometry.hpp"
#include "agc/landcover.hpp"
#include "agc/raster.hpp"

namespace agc {

/// DEM blocks plus aligned land cover, addressed on one global pixel lattice
/// anchored at the north-west corner of the DEM extent.
class Terrain {
public:
    struct Pixel {
        double ground = 0.0;
        double canopy = 0.0;
        int landcover = -1;  ///< -1 when no land-cover value covers the pixel
        double effective() const { return ground + canopy; }
    };

    Terrain(std::shared_ptr<const TileIndex> dem, std::shared_ptr<const TileIndex> landcover,
            ClassTable classes);
    static Terrain from_grids(RasterGrid dem, std::optional<RasterGrid> landcover,
                              ClassTable classes = ClassTable::defaults());

    const TileIndex& dem() const { return *dem_; }
    const TileIndex* landcover() const { return landcover_.get(); }
    const ClassTable& classes() const { return classes_; }
    BoundingBox extent() const { return dem_->extent(); }
    double cell_size() const { return dem_->cell_size(); }

    PixelIndex global_pixel(double x, double y) const;
    WorldPoint global_center(const PixelIndex& p) const;
    /// Pixel data, or nullopt when the DEM has no valid value there.
    std::optional<Pixel> pixel(const PixelIndex& p) const;
    std::optional<Pixel> pixel_at(double x, double y) const { return pixel(global_pixel(x, y)); }
    /// Land-cover class at a world point, or -1.
    int class_at(double x, double y) const;
    /// Bilinear ground height (no canopy).
    double ground_height(double x, double y) const { return dem_->sample_height(x, y); }
    /// Highest effective height over the whole extent (loads every block once).
    double max_effective_height() const;

private:
    std::shared_ptr<const TileIndex> dem_;
    std::shared_ptr<const TileIndex> landcover_;
    ClassTable classes_;
    mutable std::once_flag max_once_;
    mutable double max_height_ = 0.0;
};

/// Parametric entry/exit of a segment through a box (Liang-Barsky); grazing
/// contact counts as intersecting. Returns nullopt when disjoint.
std::optional<std::pair<double, double>> liang_barsky(const WorldPoint& p0, const WorldPoint& p1,
                                                      const BoundingBox& box);

struct BlockHit {
    std::size_t block = 0;
    double t_enter = 0.0;
    double t_exit = 0.0;
};

/// Blocks intersected by the segment, ordered by entry parameter.
std::vector<BlockHit> clip_blocks(const WorldPoint& p0, const WorldPoint& p1,
                                  const std::vector<BoundingBox>& blocks);
std::vector<BlockHit> clip_blocks(const WorldPoint& p0, const WorldPoint& p1, const TileIndex& tiles);

struct GridPoint {
    long x = 0;
    long y = 0;
    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Integer Bresenham line, 8-connected, endpoints included. Ties on the
/// minor axis resolve toward the start point.
std::vector<GridPoint> bresenham(GridPoint from, GridPoint to);

/// Pixels (row, col local to `block`) along the part of the segment inside the block.
std::vector<PixelIndex> traverse_pixels(const WorldPoint& p0, const WorldPoint& p1,
                                        const RasterGrid& block);

/// Link height lowered by the 4/3-earth bulge d1*d2 / (2 R_eff).
double curvature_correction(double raw_height, double d1, double d2);
/// First Fresnel zone radius.
double fresnel_radius(double wavelength, double d1, double d2);

enum class Verdict { Los, Nlos };
const char* verdict_name(Verdict v);

struct ProfileEntry {
    double dist_h = 0.0;          ///< horizontal distance from the UT, m
    double terrain_height = 0.0;  ///< effective height (ground + canopy), m
    double clearance = 0.0;       ///< corrected link height minus terrain_height, m
    double canopy = 0.0;
    int landcover = -1;
    double ut_distance = 0.0;     ///< 3D distance from the UT along the link, m
    double fresnel = 0.0;         ///< first Fresnel radius at this point, m
    bool rho_evaluated = false;
    double rho = 0.0;
};

struct PathProfile {
    std::vector<ProfileEntry> entries;  ///< obstructed samples, ascending dist_h
    double min_clearance = 0.0;
    double min_rho = 0.0;
    Verdict verdict = Verdict::Los;
    GroundSegment segment;
    std::size_t pixels_examined = 0;
};

struct TraceOptions {
    SegmentOptions segment;
    double rho_threshold = 0.6;
    bool earth_curvature = true;
    /// Override for the truncation reference height; NaN uses the terrain maximum.
    double max_height_override = std::numeric_limits<double>::quiet_NaN();
};

PathProfile trace_link(const LinkSpec& link, const Terrain& terrain, const TraceOptions& options = {});

}  // namespace agc
