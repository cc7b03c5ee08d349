// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <memory>
#include <numbers>
#include <sstream>

#include "agc/engine.hpp"
#include "agc/landcover.hpp"
#include "fixtures.hpp"

using namespace agc;

namespace {

double rad(double deg) { return deg * std::numbers::pi / 180.0; }

// 40 x 11 cells of 10 m; the UT sits in the middle row at x = 5.
constexpr double kUtX = 5.0;
constexpr double kUtY = 55.0;

std::shared_ptr<const Terrain> shared_terrain(RasterGrid dem, std::optional<RasterGrid> lc) {
    std::shared_ptr<const TileIndex> l;
    if (lc) l = std::make_shared<TileIndex>(TileIndex::from_grid(std::move(*lc)));
    return std::make_shared<const Terrain>(std::make_shared<TileIndex>(TileIndex::from_grid(std::move(dem))), l,
                                           ClassTable::defaults());
}

Scene make_scene(RasterGrid dem, std::optional<RasterGrid> lc) { return Scene(shared_terrain(std::move(dem), std::move(lc))); }

AtmosphereTable no_atmosphere() {
    AtmosphereTable t;
    t.rows = {AtmosphereRow{12.0, 0.0, 0.0, 0.0, 1.0}};
    return t;
}

LinkSpec east(double el) {
    LinkSpec l;
    l.ut_x = kUtX;
    l.ut_y = kUtY;
    l.elevation_deg = el;
    l.azimuth_deg = 90.0;
    return l;
}

double knife_edge_oracle(double nu) {
    if (nu <= -0.78) return 0.0;
    return 6.9 + 20.0 * std::log10(std::sqrt((nu - 0.1) * (nu - 0.1) + 1.0) + nu - 0.1);
}

double weissberger_oracle(double depth_m, double f_ghz, double cap) {
    const double raw = 0.25 * std::pow(f_ghz * 1000.0, 0.39) * std::pow(depth_m, 0.25);
    return cap * (1.0 - std::exp(-raw / cap));
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("flat barren ground at high elevation has no excess beyond the clear-sky atmosphere") {
    const auto scene = make_scene(fixtures::constant(40, 11, 10, 0.0), fixtures::constant(40, 11, 10, landcover::kBarren));
    EngineConfig cfg;
    const auto e = estimate_link(east(85.0), scene, cfg);
    CHECK(e.verdict == Verdict::Los);
    CHECK(e.breakdown.diffraction_db == 0.0);
    CHECK(e.breakdown.vegetation_db == 0.0);
    CHECK(e.breakdown.multipath_db == 0.0);
    CHECK_FALSE(e.reflection.has_value());
    CHECK(e.breakdown.total_excess_db == doctest::Approx(e.breakdown.atmosphere_db));
    CHECK(e.breakdown.total_excess_db < 0.1);

    cfg.atmosphere = no_atmosphere();
    CHECK(estimate_link(east(85.0), scene, cfg).breakdown.total_excess_db == 0.0);
}

TEST_CASE("a single wall costs exactly its knife-edge loss") {
    auto dem = fixtures::constant(40, 11, 10, 0.0);
    dem.at(5, 10) = 50.0;
    const auto scene = make_scene(dem, std::nullopt);
    EngineConfig cfg;
    cfg.atmosphere = no_atmosphere();
    cfg.reflections = false;
    const auto link = east(25.0);
    const auto e = estimate_link(link, scene, cfg);
    REQUIRE(e.verdict == Verdict::Nlos);

    const double d2 = 100.0 / std::cos(rad(25.0));
    const double total = slant_range_km(25.0, 500.0) * 1000.0;
    const double d1 = total - d2;
    const double ray = 1.5 + 100.0 * std::tan(rad(25.0)) - d1 * d2 / (2.0 * kEffectiveEarthRadiusM);
    const double h = 50.0 - ray;
    const double nu = h * std::sqrt(2.0 * (d1 + d2) / (link.wavelength() * d1 * d2));
    const double expect = knife_edge_oracle(nu);
    CHECK(expect > 10.0);
    CHECK(std::abs(e.breakdown.diffraction_db - expect) < 0.01);
    CHECK(std::abs(e.breakdown.total_excess_db - expect) < 0.01);
    CHECK(e.breakdown.total_db == doctest::Approx(e.breakdown.fspl_db + e.breakdown.total_excess_db));
}

TEST_CASE("a forest belt on an open path adds only vegetation loss") {
    const auto dem = fixtures::constant(40, 11, 10, 0.0);
    auto lc = fixtures::constant(40, 11, 10, landcover::kBarren);
    for (long r = 0; r < 11; ++r) {
        for (long c = 3; c <= 5; ++c) lc.at(r, c) = landcover::kNeedleleafTemperate;  // 15 m canopy, x in [30, 60)
    }
    const auto scene = make_scene(dem, lc);
    EngineConfig cfg;
    cfg.atmosphere = no_atmosphere();
    cfg.trace.earth_curvature = false;
    const double el = 20.0;
    const auto e = estimate_link(east(el), scene, cfg);

    // The ray enters the belt at 25 m and leaves through the canopy top.
    const double t = std::tan(rad(el));
    const double c = std::cos(rad(el));
    const double s_in = 25.0 / c;
    const double s_out = (15.0 - 1.5) / t / c;
    REQUIRE(e.vegetation.size() == 1);
    CHECK(std::abs(e.vegetation[0].s_in - s_in) <= 0.5);
    CHECK(std::abs(e.vegetation[0].s_out - s_out) <= 0.5);
    CHECK(e.vegetation[0].landcover == landcover::kNeedleleafTemperate);

    const double expect = weissberger_oracle(s_out - s_in, 12.0, 30.0);
    CHECK(std::abs(e.breakdown.vegetation_db - expect) < 0.2);
    CHECK(e.breakdown.diffraction_db == 0.0);
    CHECK(e.breakdown.multipath_db == 0.0);
    CHECK(e.breakdown.total_excess_db == doctest::Approx(e.breakdown.vegetation_db));
}

TEST_CASE("losses add up on a random region") {
    const auto dem = fixtures::random_hills(48, 10, 7);
    auto lc = fixtures::constant(48, 48, 10, landcover::kGrasslandTemperate);
    for (long r = 10; r < 30; ++r) {
        for (long c = 10; c < 30; ++c) lc.at(r, c) = landcover::kBroadleafDeciduousTemperate;
    }
    const auto scene = make_scene(dem, lc);
    EngineConfig cfg;
    cfg.threads = 1;
    for (double el : {25.0, 45.0, 70.0}) {
        for (double az : {0.0, 135.0, 270.0}) {
            LinkSpec l;
            l.ut_x = 205.0;
            l.ut_y = 245.0;
            l.elevation_deg = el;
            l.azimuth_deg = az;
            const auto e = estimate_link(l, scene, cfg);
            const auto& b = e.breakdown;
            CHECK(b.total_excess_db ==
                  doctest::Approx(b.diffraction_db + b.vegetation_db + b.atmosphere_db + b.multipath_db));
            CHECK(b.total_db == doctest::Approx(b.fspl_db + b.total_excess_db));
            CHECK(b.fspl_db == doctest::Approx(fspl_db(12e9, e.profile.segment.slant_range_m)));
            if (e.verdict == Verdict::Los) CHECK(b.diffraction_db == 0.0);
        }
    }
}

TEST_CASE("errors carry the link description") {
    const auto scene = make_scene(fixtures::constant(10, 10, 10, 0.0), std::nullopt);
    LinkSpec l;
    l.ut_x = -500.0;
    l.ut_y = 50.0;
    try {
        estimate_link(l, scene, EngineConfig{});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfDomain);
        CHECK(std::string(e.what()).find("link at (-500, 50)") != std::string::npos);
    }
}

TEST_CASE("sweeps are deterministic and independent of the thread count") {
    const auto scene = make_scene(fixtures::random_hills(48, 10, 21), std::nullopt);
    std::vector<GroundSample> pts;
    for (long i = 0; i < 12; ++i) pts.push_back({i, 45.0 + 30.0 * static_cast<double>(i % 4), 45.0 + 100.0 * static_cast<double>(i / 4)});
    const std::vector<SatGeometry> geoms{{25, 0, 500}, {40, 90, 500}, {55, 200, 800}, {85, 300, 500}};
    EngineConfig one;
    one.threads = 1;
    EngineConfig many = one;
    many.threads = 4;
    const auto a = region_sweep(pts, geoms, scene, one);
    const auto b = region_sweep(pts, geoms, scene, many);
    const auto c = region_sweep(pts, geoms, scene, one);
    REQUIRE(a.outcomes.size() == pts.size() * geoms.size());
    REQUIRE(b.outcomes.size() == a.outcomes.size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        CHECK(a.outcomes[i].task.point_id == b.outcomes[i].task.point_id);
        REQUIRE(a.outcomes[i].estimate.has_value());
        REQUIRE(b.outcomes[i].estimate.has_value());
        CHECK(a.outcomes[i].estimate->breakdown.total_db == b.outcomes[i].estimate->breakdown.total_db);
        CHECK(a.outcomes[i].estimate->breakdown.total_db == c.outcomes[i].estimate->breakdown.total_db);
    }
    for (const auto& [el, st] : a.by_elevation) {
        CHECK(st.links == 12);
        CHECK(st.rate() == b.by_elevation.at(el).rate());
    }
    CHECK(a.failures == 0);
}

TEST_CASE("open flat ground is line of sight at every elevation") {
    const auto scene = make_scene(fixtures::constant(30, 30, 10, 120.0), fixtures::constant(30, 30, 10, landcover::kBarren));
    std::vector<GroundSample> pts{{1, 55, 55, 0, 0, 0, 0}, {2, 155, 205, 0, 0, 0, 0}, {3, 245, 95, 0, 0, 0, 0}};
    const auto geoms = satellite_grid(SatelliteGridSpec{});
    EngineConfig cfg;
    cfg.threads = 2;
    const auto rep = region_sweep(pts, geoms, scene, cfg);
    CHECK(rep.failures == 0);
    for (const auto& [el, st] : rep.by_elevation) CHECK(st.rate() == 0.0);
}

TEST_CASE("a single point gives rates of zero or one") {
    const auto scene = make_scene(fixtures::random_hills(40, 10, 5), std::nullopt);
    const std::vector<GroundSample> pts{{7, 195, 205, 0, 0, 0, 0}};
    std::vector<SatGeometry> geoms;
    for (double el : {25.0, 40.0, 55.0, 70.0, 85.0}) geoms.push_back({el, 45.0, 500.0});
    EngineConfig cfg;
    cfg.threads = 1;
    const auto rep = region_sweep(pts, geoms, scene, cfg);
    CHECK(rep.by_elevation.size() == 5);
    for (const auto& [el, st] : rep.by_elevation) {
        CHECK(st.links == 1);
        CHECK((st.rate() == 0.0 || st.rate() == 1.0));
        CHECK(rep.attenuation.at(el).width() == 40);
    }
    CHECK_THROWS_AS(region_sweep({}, geoms, scene, cfg), Error);
}

TEST_CASE("inverse-distance maps pin sampled pixels") {
    const BoundingBox box{0.0, 0.0, 30.0, 10.0};
    const auto g = idw_raster({{5.0, 5.0, 1.0}, {25.0, 5.0, 3.0}}, box, 10.0);
    REQUIRE(g.width() == 3);
    REQUIRE(g.height() == 1);
    CHECK(g.at(0, 0) == 1.0);
    CHECK(g.at(0, 2) == 3.0);
    CHECK(g.at(0, 1) == doctest::Approx(2.0));

    // power 1 at (15, 5) from samples 10 and 20 m away
    const auto h = idw_raster({{5.0, 5.0, 0.0}, {35.0, 5.0, 6.0}}, BoundingBox{0, 0, 20, 10}, 10.0, 1.0);
    const double w0 = 1.0 / 10.0, w1 = 1.0 / 20.0;
    CHECK(h.at(0, 1) == doctest::Approx((w1 * 6.0) / (w0 + w1)));

    const auto empty = idw_raster({}, box, 10.0);
    CHECK(empty.at(0, 1) == empty.nodata());
    CHECK(fixtures::error_of([&] { idw_raster({}, box, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("estimate tables round-trip, including failed links") {
    const auto scene = make_scene(fixtures::random_hills(32, 10, 3), std::nullopt);
    EngineConfig cfg;
    cfg.threads = 1;
    std::vector<LinkTask> tasks{{1, 105, 105, {30, 0, 500}}, {2, 205, 155, {60, 180, 550}}, {3, -900, 0, {45, 0, 500}}};
    const auto out = run_links(tasks, scene, cfg);
    REQUIRE(out[0].estimate.has_value());
    REQUIRE_FALSE(out[2].estimate.has_value());
    CHECK(out[2].error.find("point 3") == 0);

    std::stringstream ss;
    write_estimates_csv(out, ss);
    const auto rows = read_estimates_csv(ss);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(rows[i].ok);
        CHECK(rows[i].point_id == tasks[i].point_id);
        CHECK(rows[i].x == tasks[i].x);
        CHECK(rows[i].geometry == tasks[i].geometry);
        CHECK(rows[i].verdict == out[i].estimate->verdict);
        CHECK(rows[i].total_excess_db == doctest::Approx(out[i].estimate->breakdown.total_excess_db).epsilon(1e-9));
    }
    CHECK_FALSE(rows[2].ok);

    std::istringstream bad("point_id,x,y\n1,2,3\n");
    CHECK(fixtures::error_of([&] { read_estimates_csv(bad); }) == ErrorCode::Parse);
}

TEST_CASE("weather tables feed the nearest record") {
    std::istringstream in("x,y,rain_mm_h,pressure_hpa\n0,0,0,1013.25\n1000,0,25,900\n");
    auto w = read_weather_csv(in);
    REQUIRE(w.size() == 2);
    CHECK(w[1].rain_mm_h == 25.0);
    CHECK(w[1].cloud_lwc == 0.0);
    const Scene scene(shared_terrain(fixtures::constant(5, 5, 10, 0.0), std::nullopt), w);
    CHECK(scene.weather_at(800, 10).rain_mm_h == 25.0);
    CHECK(scene.weather_at(10, 10).rain_mm_h == 0.0);

    std::istringstream negative("x,y,rain_mm_h\n0,0,-1\n");
    CHECK(fixtures::error_of([&] { read_weather_csv(negative); }) == ErrorCode::Validation);
    std::istringstream headless("a,b\n1,2\n");
    CHECK(fixtures::error_of([&] { read_weather_csv(headless); }) == ErrorCode::Parse);
    std::istringstream ragged("x,y,rain_mm_h\n0,0\n");
    CHECK(fixtures::error_of([&] { read_weather_csv(ragged); }) == ErrorCode::Parse);
}

TEST_CASE("estimate JSON carries the breakdown") {
    auto dem = fixtures::constant(40, 11, 10, 0.0);
    dem.at(5, 10) = 50.0;
    const auto scene = make_scene(dem, std::nullopt);
    auto e = estimate_link(east(25.0), scene, EngineConfig{});
    e.point_id = 42;
    e.timestamp = "2026-01-01T00:00:00Z";
    const auto j = nlohmann::json::parse(estimate_json(e));
    CHECK(j["point_id"] == 42);
    CHECK(j["verdict"] == "NLOS");
    CHECK(j["losses"]["total_db"].get<double>() == doctest::Approx(e.breakdown.total_db));
    CHECK(j["profile"].size() == e.profile.entries.size());
    CHECK(j["timestamp"] == "2026-01-01T00:00:00Z");
    const auto t = nlohmann::json::parse(trace_json(42, e.link, e.profile));
    CHECK(t["min_clearance_m"].get<double>() == doctest::Approx(e.profile.min_clearance));
    CHECK_FALSE(t.contains("losses"));
}

}  // TEST_SUITE
