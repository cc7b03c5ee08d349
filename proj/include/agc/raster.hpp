// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace agc {

enum class BandKind { Dem, Landcover, Function };

BandKind parse_band_kind(const std::string& name);

/// Integer pixel address; row 0 is the northern edge.
struct PixelIndex {
    long row = 0;
    long col = 0;
    friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned bounding box in projected metres.
struct BoundingBox {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

    bool contains(double x, double y) const {
        return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
    }
    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
};

/// Plausibility window applied to DEM values on load.
struct DemWindow {
    double min_m = -500.0;
    double max_m = 9000.0;
};

/// Georeferenced single-band grid. origin_x/origin_y is the lower-left
/// (south-west) corner; values are row-major starting at the north-west cell.
class RasterGrid {
public:
    RasterGrid() = default;
    RasterGrid(double origin_x, double origin_y, double cell_size, long width, long height,
               double nodata, std::vector<double> values);
    /// Grid with the same geometry as `like`, every cell set to `fill`.
    static RasterGrid filled_like(const RasterGrid& like, double fill);

    double origin_x() const { return origin_x_; }
    double origin_y() const { return origin_y_; }
    double cell_size() const { return cell_size_; }
    long width() const { return width_; }
    long height() const { return height_; }
    double nodata() const { return nodata_; }
    std::size_t size() const { return values_.size(); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool is_nodata(double v) const;
    bool valid(long row, long col) const { return !is_nodata(at(row, col)); }
    bool in_bounds(long row, long col) const {
        return row >= 0 && col >= 0 && row < height_ && col < width_;
    }

    double at(long row, long col) const { return values_[index(row, col)]; }
    double& at(long row, long col) { return values_[index(row, col)]; }
    std::size_t index(long row, long col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    BoundingBox bounds() const;
    WorldPoint pixel_center(long row, long col) const;
    /// Owning pixel of a world point; points on the eastern/southern outer
    /// edge map to the last column/row.
    PixelIndex world_to_pixel(double x, double y) const;
    bool contains(double x, double y) const { return bounds().contains(x, y); }
    bool same_geometry(const RasterGrid& other) const;

private:
    double origin_x_ = 0.0;
    double origin_y_ = 0.0;
    double cell_size_ = 1.0;
    long width_ = 0;
    long height_ = 0;
    double nodata_ = -9999.0;
    std::vector<double> values_;
};

RasterGrid read_ascii_grid(std::istream& in, const std::string& source_name = "<stream>");
RasterGrid read_agt1(std::istream& in, const std::string& source_name = "<stream>");
void write_ascii_grid(const RasterGrid& grid, std::ostream& out);
void write_agt1(const RasterGrid& grid, std::ostream& out);
void save_raster(const RasterGrid& grid, const std::filesystem::path& path);

/// Reads an ESRI ASCII grid (.asc) or AGT1 tile (detected by magic), then
/// validates it for the given band kind.
RasterGrid load_raster(const std::filesystem::path& path, BandKind kind,
                       const DemWindow& window = {});
void validate_band(const RasterGrid& grid, BandKind kind, const DemWindow& window = {});

/// Bilinear interpolation between pixel centres. Falls back to the nearest
/// valid neighbour when fewer than four neighbours are valid.
double sample_height(const RasterGrid& grid, double x, double y);

/// Collection of aligned raster blocks with lazily loaded contents.
class TileIndex {
public:
    TileIndex() = default;
    TileIndex(const TileIndex&) = delete;
    TileIndex& operator=(const TileIndex&) = delete;
    TileIndex(TileIndex&&) noexcept = default;
    TileIndex& operator=(TileIndex&&) noexcept = default;

    static TileIndex from_grid(RasterGrid grid);
    static TileIndex from_grids(std::vector<RasterGrid> grids);
    /// Indexes every .asc/.agt file in `dir`; only headers are read up front.
    static TileIndex from_directory(const std::filesystem::path& dir, BandKind kind,
                                    const DemWindow& window = {});
    static TileIndex from_path(const std::filesystem::path& path, BandKind kind,
                               const DemWindow& window = {});

    std::size_t size() const { return tiles_.size(); }
    bool empty() const { return tiles_.empty(); }
    const BoundingBox& bbox(std::size_t i) const { return tiles_[i]->bbox; }
    const std::filesystem::path& path(std::size_t i) const { return tiles_[i]->path; }
    bool loaded(std::size_t i) const;
    double cell_size() const { return cell_size_; }
    BoundingBox extent() const { return extent_; }

    /// Loads the tile on first access; concurrent first calls load once.
    const RasterGrid& grid(std::size_t i) const;
    /// Owning tile for a point; shared edges resolve to the tile whose
    /// half-open box [min, max) contains the point.
    std::optional<std::size_t> find(double x, double y) const;
    /// Value of the pixel containing (x, y), or nullopt outside coverage/nodata.
    std::optional<double> value_at(double x, double y) const;
    double sample_height(double x, double y) const;
    /// Single grid covering the full extent; uncovered cells are nodata.
    RasterGrid mosaic() const;

private:
    struct Entry {
        BoundingBox bbox;
        std::filesystem::path path;
        BandKind kind = BandKind::Dem;
        DemWindow window;
        mutable std::once_flag once;
        mutable std::shared_ptr<const RasterGrid> data;
    };
    void add(std::unique_ptr<Entry> entry, double cell_size);

    std::vector<std::unique_ptr<Entry>> tiles_;
    double cell_size_ = 0.0;
    BoundingBox extent_{};
};

}  // namespace agc
