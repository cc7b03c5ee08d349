// SPDX-License-Identifier: Apache-2.0
#include "agc/raster.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "agc/error.hpp"
#include "agc/landcover.hpp"

namespace agc {

namespace {

constexpr std::array<char, 4> kAgt1Magic{'A', 'G', 'T', '1'};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::string& source, const char* field) {
    T value{};
    const auto offset = static_cast<long long>(in.tellg());
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        fail(ErrorCode::Parse, source + ": truncated AGT1 header field '" + field +
                                   "' at byte offset " + std::to_string(offset));
    }
    return value;
}

struct AsciiHeader {
    long ncols = -1;
    long nrows = -1;
    double x = std::numeric_limits<double>::quiet_NaN();
    double y = std::numeric_limits<double>::quiet_NaN();
    bool center = false;
    double cellsize = std::numeric_limits<double>::quiet_NaN();
    double nodata = -9999.0;
};

// Reads the header lines; leaves the stream at the first value.
AsciiHeader read_ascii_header(std::istream& in, const std::string& source) {
    AsciiHeader h;
    for (;;) {
        in >> std::ws;
        const auto offset = static_cast<long long>(in.tellg());
        const int next = in.peek();
        if (next == EOF || !(std::isalpha(next))) break;
        std::string key;
        std::string raw;
        in >> key >> raw;
        key = lower(key);
        char* end = nullptr;
        const double v = std::strtod(raw.c_str(), &end);
        if (raw.empty() || end == raw.c_str() || *end != '\0') {
            fail(ErrorCode::Parse, source + ": bad value '" + raw + "' for header key '" + key +
                                       "' at byte offset " + std::to_string(offset));
        }
        if (key == "ncols") {
            h.ncols = static_cast<long>(v);
        } else if (key == "nrows") {
            h.nrows = static_cast<long>(v);
        } else if (key == "xllcorner" || key == "xllcenter") {
            h.x = v;
            h.center = h.center || key == "xllcenter";
        } else if (key == "yllcorner" || key == "yllcenter") {
            h.y = v;
            h.center = h.center || key == "yllcenter";
        } else if (key == "cellsize") {
            h.cellsize = v;
        } else if (key == "nodata_value") {
            h.nodata = v;
        } else {
            fail(ErrorCode::Parse, source + ": unknown header key '" + key +
                                       "' at byte offset " + std::to_string(offset));
        }
    }
    const auto offset = std::to_string(static_cast<long long>(in.tellg()));
    if (h.ncols <= 0 || h.nrows <= 0) {
        fail(ErrorCode::Parse, source + ": ncols/nrows must be positive (header ends at byte offset " +
                                   offset + ")");
    }
    if (!(h.cellsize > 0.0)) {
        fail(ErrorCode::Parse, source + ": cellsize must be positive (header ends at byte offset " +
                                   offset + ")");
    }
    if (std::isnan(h.x) || std::isnan(h.y)) {
        fail(ErrorCode::Parse, source + ": missing xll/yll corner (header ends at byte offset " +
                                   offset + ")");
    }
    if (h.center) {
        h.x -= 0.5 * h.cellsize;
        h.y -= 0.5 * h.cellsize;
    }
    return h;
}

struct AgtHeader {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell_size = 0.0;
    float nodata = 0.0F;
};

AgtHeader read_agt1_header(std::istream& in, const std::string& source) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || magic != kAgt1Magic) {
        fail(ErrorCode::Parse, source + ": missing AGT1 magic at byte offset 0");
    }
    AgtHeader h;
    h.width = get_le<std::uint32_t>(in, source, "width");
    h.height = get_le<std::uint32_t>(in, source, "height");
    h.origin_x = get_le<double>(in, source, "origin_x");
    h.origin_y = get_le<double>(in, source, "origin_y");
    h.cell_size = get_le<double>(in, source, "cell_size");
    h.nodata = get_le<float>(in, source, "nodata");
    if (h.width == 0 || h.height == 0) {
        fail(ErrorCode::Parse, source + ": zero width/height at byte offset 4");
    }
    if (!(h.cell_size > 0.0) || !std::isfinite(h.cell_size)) {
        fail(ErrorCode::Parse, source + ": non-positive cell size at byte offset 28");
    }
    return h;
}

bool has_agt1_magic(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::array<char, 4> magic{};
    return in.read(magic.data(), 4) && magic == kAgt1Magic;
}

BoundingBox header_bbox(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open raster '" + path.string() + "'");
    if (has_agt1_magic(path)) {
        const auto h = read_agt1_header(in, path.string());
        return {h.origin_x, h.origin_y, h.origin_x + h.width * h.cell_size,
                h.origin_y + h.height * h.cell_size};
    }
    const auto h = read_ascii_header(in, path.string());
    return {h.x, h.y, h.x + h.ncols * h.cellsize, h.y + h.nrows * h.cellsize};
}

double header_cell_size(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (has_agt1_magic(path)) return read_agt1_header(in, path.string()).cell_size;
    return read_ascii_header(in, path.string()).cellsize;
}

}  // namespace

BandKind parse_band_kind(const std::string& name) {
    const auto n = lower(name);
    if (n == "dem") return BandKind::Dem;
    if (n == "landcover") return BandKind::Landcover;
    if (n == "function") return BandKind::Function;
    fail(ErrorCode::InvalidArgument, "unknown band kind '" + name + "'");
}

RasterGrid::RasterGrid(double origin_x, double origin_y, double cell_size, long width,
                       long height, double nodata, std::vector<double> values)
    : origin_x_(origin_x),
      origin_y_(origin_y),
      cell_size_(cell_size),
      width_(width),
      height_(height),
      nodata_(nodata),
      values_(std::move(values)) {
    if (!(cell_size > 0.0)) fail(ErrorCode::InvalidArgument, "cell_size must be > 0");
    if (width < 1 || height < 1) fail(ErrorCode::InvalidArgument, "raster dimensions must be >= 1");
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        fail(ErrorCode::InvalidArgument, "raster value count " + std::to_string(values_.size()) +
                                             " does not match " + std::to_string(width) + "x" +
                                             std::to_string(height));
    }
}

RasterGrid RasterGrid::filled_like(const RasterGrid& like, double fill) {
    return {like.origin_x_, like.origin_y_, like.cell_size_, like.width_, like.height_,
            like.nodata_, std::vector<double>(like.size(), fill)};
}

bool RasterGrid::is_nodata(double v) const {
    if (std::isnan(v)) return true;
    return v == nodata_;
}

BoundingBox RasterGrid::bounds() const {
    return {origin_x_, origin_y_, origin_x_ + width_ * cell_size_,
            origin_y_ + height_ * cell_size_};
}

WorldPoint RasterGrid::pixel_center(long row, long col) const {
    return {origin_x_ + (static_cast<double>(col) + 0.5) * cell_size_,
            origin_y_ + (static_cast<double>(height_ - row) - 0.5) * cell_size_};
}

PixelIndex RasterGrid::world_to_pixel(double x, double y) const {
    const double top = origin_y_ + height_ * cell_size_;
    long col = static_cast<long>(std::floor((x - origin_x_) / cell_size_));
    long row = static_cast<long>(std::floor((top - y) / cell_size_));
    if (col == width_ && x <= origin_x_ + width_ * cell_size_) col = width_ - 1;
    if (row == height_ && y >= origin_y_) row = height_ - 1;
    return {row, col};
}

bool RasterGrid::same_geometry(const RasterGrid& other) const {
    return origin_x_ == other.origin_x_ && origin_y_ == other.origin_y_ &&
           cell_size_ == other.cell_size_ && width_ == other.width_ && height_ == other.height_;
}

RasterGrid read_ascii_grid(std::istream& in, const std::string& source_name) {
    const auto h = read_ascii_header(in, source_name);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(h.ncols) * static_cast<std::size_t>(h.nrows));
    std::string token;
    while (values.size() < values.capacity()) {
        in >> std::ws;
        const auto offset = static_cast<long long>(in.tellg());
        if (!(in >> token)) {
            fail(ErrorCode::Parse, source_name + ": expected " + std::to_string(values.capacity()) +
                                       " values, found " + std::to_string(values.size()) +
                                       " (end of data at byte offset " + std::to_string(offset) + ")");
        }
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0') {
            fail(ErrorCode::Parse, source_name + ": bad value '" + token + "' at byte offset " +
                                       std::to_string(offset));
        }
        values.push_back(v);
    }
    return {h.x, h.y, h.cellsize, h.ncols, h.nrows, h.nodata, std::move(values)};
}

RasterGrid read_agt1(std::istream& in, const std::string& source_name) {
    const auto h = read_agt1_header(in, source_name);
    const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
    std::vector<float> raw(n);
    const auto offset = static_cast<long long>(in.tellg());
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(float)))) {
        fail(ErrorCode::Parse, source_name + ": truncated AGT1 payload starting at byte offset " +
                                   std::to_string(offset));
    }
    std::vector<double> values(raw.begin(), raw.end());
    return {h.origin_x, h.origin_y, h.cell_size, static_cast<long>(h.width),
            static_cast<long>(h.height), static_cast<double>(h.nodata), std::move(values)};
}

void write_ascii_grid(const RasterGrid& grid, std::ostream& out) {
    out.precision(17);
    out << "ncols " << grid.width() << "\nnrows " << grid.height() << "\nxllcorner "
        << grid.origin_x() << "\nyllcorner " << grid.origin_y() << "\ncellsize "
        << grid.cell_size() << "\nNODATA_value " << grid.nodata() << "\n";
    for (long r = 0; r < grid.height(); ++r) {
        for (long c = 0; c < grid.width(); ++c) {
            if (c) out << ' ';
            out << grid.at(r, c);
        }
        out << '\n';
    }
}

void write_agt1(const RasterGrid& grid, std::ostream& out) {
    out.write(kAgt1Magic.data(), 4);
    put_le(out, static_cast<std::uint32_t>(grid.width()));
    put_le(out, static_cast<std::uint32_t>(grid.height()));
    put_le(out, grid.origin_x());
    put_le(out, grid.origin_y());
    put_le(out, grid.cell_size());
    put_le(out, static_cast<float>(grid.nodata()));
    for (double v : grid.values()) put_le(out, static_cast<float>(v));
}

void save_raster(const RasterGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write raster '" + path.string() + "'");
    if (lower(path.extension().string()) == ".asc") {
        write_ascii_grid(grid, out);
    } else {
        write_agt1(grid, out);
    }
    if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

void validate_band(const RasterGrid& grid, BandKind kind, const DemWindow& window) {
    std::vector<std::string> offenders;
    std::size_t count = 0;
    for (long r = 0; r < grid.height(); ++r) {
        for (long c = 0; c < grid.width(); ++c) {
            const double v = grid.at(r, c);
            if (grid.is_nodata(v)) continue;
            bool bad = false;
            switch (kind) {
                case BandKind::Dem:
                    bad = !std::isfinite(v) || v < window.min_m || v > window.max_m;
                    break;
                case BandKind::Landcover:
                    bad = v != std::floor(v) || v < 0.0 || v >= static_cast<double>(kLandCoverClassCount);
                    break;
                case BandKind::Function:
                    bad = v != std::floor(v) || v < 0.0;
                    break;
            }
            if (bad) {
                ++count;
                if (offenders.size() < 10) {
                    std::ostringstream s;
                    s << "(" << r << "," << c << ")=" << v;
                    offenders.push_back(s.str());
                }
            }
        }
    }
    if (count == 0) return;
    std::string what = std::to_string(count) + " cell(s) out of range for ";
    what += kind == BandKind::Dem ? "DEM window" : kind == BandKind::Landcover ? "land-cover classes 0..18" : "function classes";
    what += ":";
    for (const auto& o : offenders) what += " " + o;
    if (count > offenders.size()) what += " ...";
    fail(ErrorCode::Validation, what);
}

RasterGrid load_raster(const std::filesystem::path& path, BandKind kind, const DemWindow& window) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open raster '" + path.string() + "'");
    RasterGrid grid = has_agt1_magic(path) ? read_agt1(in, path.string())
                                           : read_ascii_grid(in, path.string());
    validate_band(grid, kind, window);
    return grid;
}

double sample_height(const RasterGrid& grid, double x, double y) {
    if (!grid.contains(x, y)) {
        std::ostringstream s;
        s << "point (" << x << ", " << y << ") outside raster bounds";
        fail(ErrorCode::OutOfDomain, s.str());
    }
    const double cs = grid.cell_size();
    const double top = grid.origin_y() + grid.height() * cs;
    // Continuous pixel-centre coordinates.
    const double fc = std::clamp((x - grid.origin_x()) / cs - 0.5, 0.0, static_cast<double>(grid.width() - 1));
    const double fr = std::clamp((top - y) / cs - 0.5, 0.0, static_cast<double>(grid.height() - 1));
    const long c0 = static_cast<long>(std::floor(fc));
    const long r0 = static_cast<long>(std::floor(fr));
    const long c1 = std::min(c0 + 1, grid.width() - 1);
    const long r1 = std::min(r0 + 1, grid.height() - 1);
    const double tx = fc - static_cast<double>(c0);
    const double ty = fr - static_cast<double>(r0);

    const std::array<PixelIndex, 4> corners{{{r0, c0}, {r0, c1}, {r1, c0}, {r1, c1}}};
    const std::array<double, 4> weights{(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    int valid = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        if (grid.valid(corners[i].row, corners[i].col)) {
            ++valid;
            sum += weights[i] * grid.at(corners[i].row, corners[i].col);
        }
    }
    if (valid == 4) return sum;
    if (valid == 0) {
        std::ostringstream s;
        s << "all neighbours of (" << x << ", " << y << ") are nodata";
        fail(ErrorCode::Nodata, s.str());
    }
    // Nearest valid neighbour by centre distance.
    double best = std::numeric_limits<double>::infinity();
    double value = 0.0;
    for (const auto& p : corners) {
        if (!grid.valid(p.row, p.col)) continue;
        const double d = std::hypot(static_cast<double>(p.col) - fc, static_cast<double>(p.row) - fr);
        if (d < best) {
            best = d;
            value = grid.at(p.row, p.col);
        }
    }
    return value;
}

// ---------------------------------------------------------------------------
// TileIndex

void TileIndex::add(std::unique_ptr<Entry> entry, double cell_size) {
    const auto& b = entry->bbox;
    if (!(b.max_x > b.min_x) || !(b.max_y > b.min_y)) {
        fail(ErrorCode::Geometry, "degenerate tile bounding box for '" + entry->path.string() + "'");
    }
    if (tiles_.empty()) {
        cell_size_ = cell_size;
        extent_ = b;
    } else {
        if (std::abs(cell_size - cell_size_) > 1e-9 * cell_size_) {
            fail(ErrorCode::Geometry, "tile '" + entry->path.string() + "' has a different cell size");
        }
        extent_.min_x = std::min(extent_.min_x, b.min_x);
        extent_.min_y = std::min(extent_.min_y, b.min_y);
        extent_.max_x = std::max(extent_.max_x, b.max_x);
        extent_.max_y = std::max(extent_.max_y, b.max_y);
    }
    for (const auto& t : tiles_) {
        const double ox = std::min(b.max_x, t->bbox.max_x) - std::max(b.min_x, t->bbox.min_x);
        const double oy = std::min(b.max_y, t->bbox.max_y) - std::max(b.min_y, t->bbox.min_y);
        if (ox > 1e-9 && oy > 1e-9) {
            fail(ErrorCode::Geometry, "tiles '" + t->path.string() + "' and '" + entry->path.string() +
                                          "' overlap beyond a shared edge");
        }
    }
    tiles_.push_back(std::move(entry));
}

TileIndex TileIndex::from_grid(RasterGrid grid) {
    std::vector<RasterGrid> grids;
    grids.push_back(std::move(grid));
    return from_grids(std::move(grids));
}

TileIndex TileIndex::from_grids(std::vector<RasterGrid> grids) {
    TileIndex index;
    for (std::size_t i = 0; i < grids.size(); ++i) {
        auto e = std::make_unique<Entry>();
        e->bbox = grids[i].bounds();
        e->path = "<memory:" + std::to_string(i) + ">";
        const double cs = grids[i].cell_size();
        e->data = std::make_shared<const RasterGrid>(std::move(grids[i]));
        std::call_once(e->once, [] {});
        index.add(std::move(e), cs);
    }
    return index;
}

TileIndex TileIndex::from_path(const std::filesystem::path& path, BandKind kind, const DemWindow& window) {
    if (std::filesystem::is_directory(path)) return from_directory(path, kind, window);
    TileIndex index;
    auto e = std::make_unique<Entry>();
    e->bbox = header_bbox(path);
    e->path = path;
    e->kind = kind;
    e->window = window;
    index.add(std::move(e), header_cell_size(path));
    return index;
}

TileIndex TileIndex::from_directory(const std::filesystem::path& dir, BandKind kind, const DemWindow& window) {
    if (!std::filesystem::is_directory(dir)) {
        fail(ErrorCode::Io, "tile directory '" + dir.string() + "' does not exist");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& de : std::filesystem::directory_iterator(dir)) {
        const auto ext = lower(de.path().extension().string());
        if (de.is_regular_file() && (ext == ".asc" || ext == ".agt")) files.push_back(de.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) fail(ErrorCode::Io, "no .asc/.agt tiles in '" + dir.string() + "'");
    TileIndex index;
    for (const auto& f : files) {
        auto e = std::make_unique<Entry>();
        e->bbox = header_bbox(f);
        e->path = f;
        e->kind = kind;
        e->window = window;
        index.add(std::move(e), header_cell_size(f));
    }
    return index;
}

bool TileIndex::loaded(std::size_t i) const {
    return std::atomic_load(&tiles_[i]->data) != nullptr;
}

const RasterGrid& TileIndex::grid(std::size_t i) const {
    const auto& e = *tiles_.at(i);
    std::call_once(e.once, [&e] {
        auto g = std::make_shared<const RasterGrid>(load_raster(e.path, e.kind, e.window));
        std::atomic_store(&e.data, std::shared_ptr<const RasterGrid>(std::move(g)));
    });
    return *std::atomic_load(&e.data);
}

std::optional<std::size_t> TileIndex::find(double x, double y) const {
    for (std::size_t i = 0; i < tiles_.size(); ++i) {
        const auto& b = tiles_[i]->bbox;
        if (x >= b.min_x && x < b.max_x && y >= b.min_y && y < b.max_y) return i;
    }
    // Points on the outer max edges of the extent.
    for (std::size_t i = 0; i < tiles_.size(); ++i) {
        if (tiles_[i]->bbox.contains(x, y)) return i;
    }
    return std::nullopt;
}

std::optional<double> TileIndex::value_at(double x, double y) const {
    const auto t = find(x, y);
    if (!t) return std::nullopt;
    const auto& g = grid(*t);
    const auto p = g.world_to_pixel(x, y);
    if (!g.in_bounds(p.row, p.col) || !g.valid(p.row, p.col)) return std::nullopt;
    return g.at(p.row, p.col);
}

double TileIndex::sample_height(double x, double y) const {
    const auto t = find(x, y);
    if (!t) {
        std::ostringstream s;
        s << "point (" << x << ", " << y << ") not covered by any tile";
        fail(ErrorCode::OutOfDomain, s.str());
    }
    return agc::sample_height(grid(*t), x, y);
}

RasterGrid TileIndex::mosaic() const {
    if (tiles_.empty()) fail(ErrorCode::InvalidArgument, "empty tile index");
    if (tiles_.size() == 1) return grid(0);
    const double cs = cell_size_;
    const long w = std::lround(extent_.width() / cs);
    const long h = std::lround(extent_.height() / cs);
    const double nodata = grid(0).nodata();
    RasterGrid out(extent_.min_x, extent_.min_y, cs, w, h, nodata,
                   std::vector<double>(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), nodata));
    for (std::size_t i = 0; i < tiles_.size(); ++i) {
        const auto& g = grid(i);
        const long col0 = std::lround((g.origin_x() - extent_.min_x) / cs);
        const long row0 = std::lround((extent_.max_y - (g.origin_y() + g.height() * cs)) / cs);
        for (long r = 0; r < g.height(); ++r) {
            for (long c = 0; c < g.width(); ++c) {
                const double v = g.at(r, c);
                out.at(row0 + r, col0 + c) = g.is_nodata(v) ? nodata : v;
            }
        }
    }
    return out;
}

}  // namespace agc
