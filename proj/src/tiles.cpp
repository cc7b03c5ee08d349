// SPDX-License-Identifier: Apache-2.0
#include "agc/tiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>
#include <zlib.h>

#include "agc/error.hpp"
#include "agc/stats.hpp"

namespace agc {

namespace {

constexpr char kMagic[4] = {'A', 'G', 'X', '1'};
constexpr std::size_t kHeaderBytes = 5 * 4;

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::string& buf, float f) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, 4);
    put_u32(buf, bits);
}

float get_f32(const unsigned char* p) {
    const std::uint32_t bits = get_u32(p);
    float f = 0.0f;
    std::memcpy(&f, &bits, 4);
    return f;
}

std::uint32_t crc_of(const std::string& bytes) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

}  // namespace

TileSample::TileSample(std::uint32_t h, std::uint32_t w) : height(h), width(w) {
    const std::size_t n = static_cast<std::size_t>(h) * w;
    for (int i = 0; i < kTilePlaneCount; ++i) plane(i).assign(n, 0.0f);
}

std::vector<float>& TileSample::plane(int i) {
    return const_cast<std::vector<float>&>(static_cast<const TileSample&>(*this).plane(i));
}

const std::vector<float>& TileSample::plane(int i) const {
    switch (i) {
        case 0: return dem_norm;
        case 1: return slope_norm;
        case 2: return aspect_sin;
        case 3: return aspect_cos;
        case 4: return landcover;
        case 5: return obs_z;
        case 6: return mask;
        default: fail(ErrorCode::InvalidArgument, "tile plane index out of range");
    }
}

double TileSample::observed_fraction() const {
    if (mask.empty()) return 0.0;
    std::size_t on = 0;
    for (float m : mask) on += m == 1.0f;
    return static_cast<double>(on) / static_cast<double>(mask.size());
}

void TileSample::validate() const {
    if (height == 0 || width == 0) fail(ErrorCode::Size, "tile dimensions must be positive");
    const std::size_t n = static_cast<std::size_t>(height) * width;
    for (int i = 0; i < kTilePlaneCount; ++i) {
        if (plane(i).size() != n) fail(ErrorCode::Size, "tile plane " + std::to_string(i) + " has the wrong size");
    }
    for (float m : mask) {
        if (m != 0.0f && m != 1.0f) fail(ErrorCode::Validation, "tile mask must be 0 or 1");
    }
}

void write_tile_payload(const TileSample& tile, std::ostream& out) {
    tile.validate();
    std::string payload;
    const std::size_t n = static_cast<std::size_t>(tile.height) * tile.width;
    payload.reserve(kHeaderBytes + n * 4 * kTilePlaneCount);
    put_u32(payload, kTileVersion);
    put_u32(payload, tile.height);
    put_u32(payload, tile.width);
    put_u32(payload, kTileCondChannels);
    put_u32(payload, tile.flags);
    for (int i = 0; i < kTilePlaneCount; ++i) {
        for (float v : tile.plane(i)) put_f32(payload, v);
    }
    std::string footer;
    put_u32(footer, crc_of(payload));
    out.write(kMagic, 4);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.write(footer.data(), 4);
    if (!out) fail(ErrorCode::Io, "failed to write tile");
}

TileSample read_tile_payload(std::istream& in, const std::string& source_name) {
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        fail(ErrorCode::Parse, source_name + ": not an AGX1 tile (bad magic)");
    }
    if (bytes.size() < 4 + kHeaderBytes + 4) fail(ErrorCode::Checksum, source_name + ": tile truncated");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::string payload = bytes.substr(4, bytes.size() - 8);
    const std::uint32_t stored = get_u32(p + bytes.size() - 4);
    if (crc_of(payload) != stored) fail(ErrorCode::Checksum, source_name + ": CRC32 mismatch, tile is corrupt");

    const std::uint32_t version = get_u32(p + 4);
    if (version != kTileVersion) {
        fail(ErrorCode::Parse, source_name + ": unsupported tile version " + std::to_string(version));
    }
    TileSample t;
    t.height = get_u32(p + 8);
    t.width = get_u32(p + 12);
    const std::uint32_t n_cond = get_u32(p + 16);
    t.flags = get_u32(p + 20);
    if (n_cond != kTileCondChannels) {
        fail(ErrorCode::Parse, source_name + ": expected " + std::to_string(kTileCondChannels) +
                                   " conditioning channels, header says " + std::to_string(n_cond));
    }
    const std::size_t n = static_cast<std::size_t>(t.height) * t.width;
    if (payload.size() != kHeaderBytes + n * 4 * kTilePlaneCount) {
        fail(ErrorCode::Size, source_name + ": payload size does not match " + std::to_string(t.height) + "x" +
                                  std::to_string(t.width));
    }
    const unsigned char* cursor = p + 4 + kHeaderBytes;
    for (int i = 0; i < kTilePlaneCount; ++i) {
        auto& pl = t.plane(i);
        pl.resize(n);
        for (std::size_t j = 0; j < n; ++j, cursor += 4) pl[j] = get_f32(cursor);
    }
    t.validate();
    return t;
}

std::filesystem::path sidecar_path(const std::filesystem::path& tile_path) {
    auto p = tile_path;
    p.replace_extension(".meta.json");
    return p;
}

void write_tile(const TileSample& tile, const std::filesystem::path& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
        write_tile_payload(tile, out);
    }
    nlohmann::json meta = {
        {"elev_deg", tile.meta.elev_deg},
        {"az_deg", tile.meta.az_deg},
        {"alt_km", tile.meta.alt_km},
        {"eta", tile.meta.normalizer.eta},
        {"mu", tile.meta.normalizer.mu},
        {"sigma", tile.meta.normalizer.sigma},
        {"geo", {{"origin_x", tile.meta.origin_x}, {"origin_y", tile.meta.origin_y}, {"cell_size", tile.meta.cell_size}}},
    };
    std::ofstream side(sidecar_path(path));
    if (!side) fail(ErrorCode::Io, "cannot write sidecar for " + path.string());
    side << meta.dump(2) << '\n';
}

TileSample read_tile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open tile " + path.string());
    auto t = read_tile_payload(in, path.string());
    const auto side = sidecar_path(path);
    std::ifstream ms(side);
    if (!ms) fail(ErrorCode::Io, "missing sidecar " + side.string());
    try {
        const auto j = nlohmann::json::parse(ms);
        t.meta.elev_deg = j.at("elev_deg").get<double>();
        t.meta.az_deg = j.at("az_deg").get<double>();
        t.meta.alt_km = j.at("alt_km").get<double>();
        t.meta.normalizer.eta = j.at("eta").get<double>();
        t.meta.normalizer.mu = j.at("mu").get<double>();
        t.meta.normalizer.sigma = j.at("sigma").get<double>();
        const auto& geo = j.at("geo");
        t.meta.origin_x = geo.at("origin_x").get<double>();
        t.meta.origin_y = geo.at("origin_y").get<double>();
        t.meta.cell_size = geo.at("cell_size").get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, side.string() + ": " + e.what());
    }
    if (!(t.meta.cell_size > 0.0) || !(t.meta.normalizer.eta > 0.0) || !(t.meta.normalizer.sigma > 0.0)) {
        fail(ErrorCode::Validation, side.string() + ": cell_size, eta and sigma must be positive");
    }
    return t;
}

std::vector<TileSample> build_tiles(const TileExportInputs& in) {
    if (!in.dem || !in.slope || !in.aspect) fail(ErrorCode::InvalidArgument, "tile export needs dem, slope and aspect");
    if (in.tile_size == 0) fail(ErrorCode::InvalidArgument, "tile size must be positive");
    const auto& dem = *in.dem;
    if (!dem.same_geometry(*in.slope) || !dem.same_geometry(*in.aspect) ||
        (in.landcover && !dem.same_geometry(*in.landcover))) {
        fail(ErrorCode::Geometry, "tile export layers differ in geometry");
    }
    if (in.flat && in.flat->size() != dem.size()) fail(ErrorCode::Geometry, "flat mask size mismatch");

    std::vector<double> valid;
    for (double v : dem.values()) {
        if (!dem.is_nodata(v)) valid.push_back(v);
    }
    if (valid.empty()) fail(ErrorCode::Nodata, "DEM has no valid pixels");
    const double lo = percentile(valid, 1.0);
    const double hi = percentile(valid, 99.0);

    // Observations binned per pixel, averaged in z.
    std::map<std::size_t, std::pair<double, int>> obs;
    for (const auto& o : in.observations) {
        if (!dem.contains(o.x, o.y)) continue;
        const auto px = dem.world_to_pixel(o.x, o.y);
        auto& slot = obs[dem.index(px.row, px.col)];
        slot.first += normalize(in.normalizer, o.excess_db);
        slot.second += 1;
    }

    std::vector<TileSample> tiles;
    const long ts = static_cast<long>(in.tile_size);
    for (long r0 = 0; r0 < dem.height(); r0 += ts) {
        for (long c0 = 0; c0 < dem.width(); c0 += ts) {
            const long h = std::min(ts, dem.height() - r0);
            const long w = std::min(ts, dem.width() - c0);
            TileSample t(static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w));
            for (long r = 0; r < h; ++r) {
                for (long c = 0; c < w; ++c) {
                    const std::size_t src = dem.index(r0 + r, c0 + c);
                    const std::size_t dst = static_cast<std::size_t>(r * w + c);
                    const double z = dem.values()[src];
                    if (!dem.is_nodata(z)) {
                        t.dem_norm[dst] = static_cast<float>(hi > lo ? std::clamp((z - lo) / (hi - lo), 0.0, 1.0) : 0.0);
                    }
                    const double s = in.slope->values()[src];
                    if (!in.slope->is_nodata(s)) t.slope_norm[dst] = static_cast<float>(std::clamp(s / 90.0, 0.0, 1.0));
                    const double a = in.aspect->values()[src];
                    const bool flat = in.flat && (*in.flat)[src];
                    if (!flat && !in.aspect->is_nodata(a)) {
                        const double rad = a * std::numbers::pi / 180.0;
                        t.aspect_sin[dst] = static_cast<float>(std::sin(rad));
                        t.aspect_cos[dst] = static_cast<float>(std::cos(rad));
                    }
                    if (in.landcover) {
                        const double l = in.landcover->values()[src];
                        t.landcover[dst] = in.landcover->is_nodata(l) ? -1.0f : static_cast<float>(l);
                    }
                    const auto it = obs.find(src);
                    if (it != obs.end()) {
                        t.obs_z[dst] = static_cast<float>(it->second.first / it->second.second);
                        t.mask[dst] = 1.0f;
                    }
                }
            }
            const auto corner = dem.pixel_center(r0 + h - 1, c0);
            t.meta.elev_deg = in.elev_deg;
            t.meta.az_deg = in.az_deg;
            t.meta.alt_km = in.alt_km;
            t.meta.normalizer = in.normalizer;
            t.meta.cell_size = dem.cell_size();
            t.meta.origin_x = corner.x - dem.cell_size() / 2.0;
            t.meta.origin_y = corner.y - dem.cell_size() / 2.0;
            tiles.push_back(std::move(t));
        }
    }
    return tiles;
}

std::vector<std::filesystem::path> export_tiles(const TileExportInputs& inputs, const std::filesystem::path& out_dir,
                                                const std::string& prefix) {
    std::filesystem::create_directories(out_dir);
    const auto tiles = build_tiles(inputs);
    const long ts = static_cast<long>(inputs.tile_size);
    const long cols = (inputs.dem->width() + ts - 1) / ts;
    std::vector<std::filesystem::path> paths;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        const long tr = static_cast<long>(i) / cols;
        const long tc = static_cast<long>(i) % cols;
        auto path = out_dir / (prefix + "_" + std::to_string(tr) + "_" + std::to_string(tc) + ".agx");
        write_tile(tiles[i], path);
        paths.push_back(std::move(path));
    }
    return paths;
}

RasterGrid tile_to_raster(const TileSample& tile) {
    tile.validate();
    constexpr double kNodata = -9999.0;
    std::vector<double> values(tile.obs_z.size(), kNodata);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (tile.mask[i] == 1.0f) values[i] = denormalize(tile.meta.normalizer, tile.obs_z[i]);
    }
    return RasterGrid(tile.meta.origin_x, tile.meta.origin_y, tile.meta.cell_size, tile.width, tile.height, kNodata,
                      std::move(values));
}

std::vector<RasterGrid> import_predictions(const std::vector<std::filesystem::path>& files) {
    std::vector<RasterGrid> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(tile_to_raster(read_tile(f)));
    return out;
}

}  // namespace agc
