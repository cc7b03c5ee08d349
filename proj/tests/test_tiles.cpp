// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <zlib.h>

#include "agc/terrain.hpp"
#include "agc/tiles.hpp"
#include "fixtures.hpp"

using namespace agc;

namespace {

const std::filesystem::path kData = AGC_TEST_DATA;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& s, float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(s, v);
}

TileSample sample_tile(std::uint32_t h, std::uint32_t w) {
    TileSample t(h, w);
    for (int p = 0; p < kTilePlaneCount; ++p) {
        for (std::size_t i = 0; i < t.plane(p).size(); ++i) {
            t.plane(p)[i] = p == 6 ? static_cast<float>(i % 2) : static_cast<float>(std::sin(1.0 + p * 13 + i));
        }
    }
    t.meta.elev_deg = 55;
    t.meta.az_deg = 240;
    t.meta.alt_km = 1200;
    t.meta.normalizer = {3.5, 0.25, 0.75};
    t.meta.origin_x = -300;
    t.meta.origin_y = 4500;
    t.meta.cell_size = 30;
    return t;
}

}  // namespace

TEST_SUITE("tiles") {

TEST_CASE("payload bytes match an independent encoder") {
    const auto t = sample_tile(2, 3);
    std::string payload;
    put_u32(payload, 1);
    put_u32(payload, 2);
    put_u32(payload, 3);
    put_u32(payload, 5);
    put_u32(payload, 0);
    for (int p = 0; p < kTilePlaneCount; ++p) {
        for (float v : t.plane(p)) put_f32(payload, v);
    }
    std::string want = "AGX1" + payload;
    put_u32(want, static_cast<std::uint32_t>(
                      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size()))));
    std::stringstream buf;
    write_tile_payload(t, buf);
    CHECK(buf.str() == want);
}

TEST_CASE("golden tile decodes and re-encodes byte for byte") {
    const auto t = read_tile(kData / "golden_tile.agx");
    CHECK(t.height == 3);
    CHECK(t.width == 4);
    CHECK(t.flags == 0);
    CHECK(t.dem_norm[11] == 1.0f);
    CHECK(t.aspect_sin[1] == 1.0f);
    CHECK(t.aspect_cos[2] == -1.0f);
    CHECK(t.landcover[7] == 7.0f);
    CHECK(t.obs_z[3] == -0.5f);
    CHECK(t.observed_fraction() == doctest::Approx(4.0 / 12.0));
    CHECK(t.meta.elev_deg == 40.0);
    CHECK(t.meta.alt_km == 850.0);
    CHECK(t.meta.normalizer.eta == 2.5);
    CHECK(t.meta.cell_size == 30.0);
    std::stringstream buf;
    write_tile_payload(t, buf);
    CHECK(buf.str() == slurp(kData / "golden_tile.agx"));
}

TEST_CASE("file round trip keeps every plane and the sidecar") {
    const auto dir = fixtures::scratch("tiles_rt");
    const auto t = sample_tile(5, 7);
    write_tile(t, dir / "a.agx");
    CHECK(sidecar_path(dir / "a.agx") == dir / "a.meta.json");
    const auto j = nlohmann::json::parse(slurp(dir / "a.meta.json"));
    CHECK(j.at("eta").get<double>() == 3.5);
    CHECK(j.at("geo").at("origin_y").get<double>() == 4500.0);
    const auto back = read_tile(dir / "a.agx");
    for (int p = 0; p < kTilePlaneCount; ++p) CHECK(back.plane(p) == t.plane(p));
    CHECK(back.meta.az_deg == 240.0);
    CHECK(back.meta.normalizer.mu == 0.25);
    CHECK(back.meta.normalizer.sigma == 0.75);
}

TEST_CASE("corruption and malformed containers are detected") {
    std::stringstream buf;
    write_tile_payload(sample_tile(4, 4), buf);
    const std::string good = buf.str();
    for (std::size_t pos : {std::size_t{5}, std::size_t{40}, good.size() - 6}) {
        auto bad = good;
        bad[pos] ^= 0x10;
        std::istringstream in(bad);
        CHECK(fixtures::error_of([&] { read_tile_payload(in); }) == ErrorCode::Checksum);
    }
    std::istringstream cut(good.substr(0, good.size() - 9));
    CHECK(fixtures::error_of([&] { read_tile_payload(cut); }) == ErrorCode::Checksum);
    std::istringstream magic("AGT1" + good.substr(4));
    CHECK(fixtures::error_of([&] { read_tile_payload(magic); }) == ErrorCode::Parse);
    auto t = sample_tile(2, 2);
    t.mask[0] = 0.5f;
    std::stringstream sink;
    CHECK(fixtures::error_of([&] { write_tile_payload(t, sink); }) == ErrorCode::Validation);
    const auto dir = fixtures::scratch("tiles_nosidecar");
    write_tile(sample_tile(2, 2), dir / "x.agx");
    std::filesystem::remove(dir / "x.meta.json");
    CHECK(fixtures::error_of([&] { read_tile(dir / "x.agx"); }) == ErrorCode::Io);
}

TEST_CASE("conditioning planes: DEM percentiles, slope scale, aspect circle") {
    // 10x10 ramp: values 0..99, so the 1st and 99th percentiles are 0.99 and 98.01
    const auto dem = fixtures::grid_from(10, 10, 10, [](double x, double y) {
        return std::floor(x / 10.0) + 10.0 * std::floor((100.0 - y) / 10.0);
    });
    auto slope = RasterGrid::filled_like(dem, 45.0);
    auto aspect = RasterGrid::filled_like(dem, 0.0);
    aspect.at(0, 1) = 90.0;
    aspect.at(0, 2) = 180.0;
    std::vector<std::uint8_t> flat(dem.size(), 0);
    flat[dem.index(0, 3)] = 1;
    TileExportInputs in;
    in.dem = &dem;
    in.slope = &slope;
    in.aspect = &aspect;
    in.flat = &flat;
    in.tile_size = 16;
    const auto tiles = build_tiles(in);
    REQUIRE(tiles.size() == 1);
    const auto& t = tiles[0];
    const double lo = 0.99, hi = 98.01;
    for (std::size_t i = 0; i < 100; ++i) {
        const double want = std::clamp((static_cast<double>(i) - lo) / (hi - lo), 0.0, 1.0);
        CHECK(t.dem_norm[i] == doctest::Approx(want).epsilon(1e-6));
        CHECK(t.slope_norm[i] == 0.5f);
    }
    CHECK(t.dem_norm[0] == 0.0f);
    CHECK(t.dem_norm[99] == 1.0f);
    CHECK(t.aspect_sin[0] == 0.0f);
    CHECK(t.aspect_cos[0] == 1.0f);
    CHECK(t.aspect_sin[1] == 1.0f);
    CHECK(std::abs(t.aspect_cos[1]) < 1e-7f);
    CHECK(t.aspect_cos[2] == -1.0f);
    CHECK(t.aspect_sin[3] == 0.0f);
    CHECK(t.aspect_cos[3] == 0.0f);
}

TEST_CASE("observations land in their pixels and survive import") {
    const auto dem = fixtures::random_hills(20, 30, 4);
    const auto d = derive_terrain(dem);
    TileExportInputs in;
    in.dem = &dem;
    in.slope = &d.slope;
    in.aspect = &d.aspect;
    in.flat = &d.flat;
    in.normalizer = {2.0, 1.0, 0.5};
    in.elev_deg = 25;
    in.az_deg = 60;
    in.alt_km = 500;
    in.tile_size = 8;
    for (int i = 0; i < 12; ++i) {
        const auto c = dem.pixel_center(i, (i * 7) % 20);
        in.observations.push_back({c.x, c.y, 3.0 + i});
    }
    const auto dir = fixtures::scratch("tiles_export");
    const auto paths = export_tiles(in, dir);
    // 20 = 8 + 8 + 4 in each direction
    REQUIRE(paths.size() == 9);
    CHECK(paths[5].filename() == "tile_1_2.agx");
    const auto rasters = import_predictions(paths);
    long seen = 0;
    for (const auto& r : rasters) {
        CHECK(r.cell_size() == 30.0);
        for (long rr = 0; rr < r.height(); ++rr) {
            for (long cc = 0; cc < r.width(); ++cc) {
                if (!r.valid(rr, cc)) continue;
                ++seen;
                const auto c = r.pixel_center(rr, cc);
                const auto src = dem.world_to_pixel(c.x, c.y);
                CHECK(r.at(rr, cc) == doctest::Approx(3.0 + src.row).epsilon(1e-5));
            }
        }
    }
    CHECK(seen == 12);
    CHECK(read_tile(paths[8]).width == 4);
    CHECK(read_tile(paths[8]).meta.origin_x == doctest::Approx(dem.origin_x() + 16 * 30.0));
    CHECK(read_tile(paths[0]).meta.origin_y == doctest::Approx(dem.origin_y() + 12 * 30.0));
}

}
