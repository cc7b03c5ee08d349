// SPDX-License-Identifier: Apache-2.0
// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <string>
#include <vector>

#include "agc/agc.h"

namespace fs = std::filesystem;

namespace {

fs::path workdir() {
    const auto dir = fs::temp_directory_path() / "agc_capi_test";
    static const bool fresh = [&] {
        fs::remove_all(dir);
        fs::create_directories(dir);
        return true;
    }();
    (void)fresh;
    return dir;
}

std::string take(char* s) {
    std::string out = s ? s : "";
    agc_free_string(s);
    return out;
}

long count_lines(const fs::path& p) {
    std::ifstream in(p);
    long n = 0;
    for (std::string line; std::getline(in, line);) n += line.empty() ? 0 : 1;
    return n;
}

// 48 x 48 hills of 30 m cells with a forest block in the north-east.
void write_region(const fs::path& dir) {
    const long n = 48;
    std::vector<double> dem(n * n), lc(n * n);
    for (long r = 0; r < n; ++r) {
        for (long c = 0; c < n; ++c) {
            const double x = static_cast<double>(c) / n, y = static_cast<double>(r) / n;
            dem[r * n + c] = 300.0 + 80.0 * std::sin(2 * std::numbers::pi * x) * std::cos(3 * std::numbers::pi * y) +
                             25.0 * std::sin(9.0 * x + 4.0 * y);
            lc[r * n + c] = (r < 16 && c > 30) ? 4 : (c < 6 ? 17 : 9);
        }
    }
    for (auto [vals, name] : {std::pair{&dem, "dem.asc"}, std::pair{&lc, "lc.asc"}}) {
        agc_raster* g = nullptr;
        REQUIRE(agc_raster_create(1000, 2000, 30, n, n, -9999, vals->data(), &g) == AGC_OK);
        REQUIRE(agc_raster_save(g, (dir / name).c_str()) == AGC_OK);
        agc_raster_destroy(g);
    }
}

}  // namespace

TEST_CASE("version, status names and numerical helpers") {
    CHECK(std::strlen(agc_version()) > 0);
    CHECK(std::string(agc_status_name(AGC_OK)) == "ok");
    CHECK(std::string(agc_status_name(AGC_ERR_INTERNAL)) == "internal");
    CHECK(std::string(agc_status_name(static_cast<agc_status>(99))) == "unknown");
    for (int s = AGC_ERR_INVALID_ARGUMENT; s <= AGC_ERR_RUNTIME; ++s) {
        CHECK(std::string(agc_status_name(static_cast<agc_status>(s))) != "unknown");
    }

    CHECK(agc_fspl_db(12e9, 1000e3) == doctest::Approx(32.45 + 20 * std::log10(12e3) + 20 * std::log10(1000.0)));
    CHECK(agc_knife_edge_db(0.0) == doctest::Approx(6.9 + 20 * std::log10(std::sqrt(1.01) - 0.1)));
    CHECK(agc_knife_edge_db(-1.0) == 0.0);
    CHECK(agc_slant_range_km(90.0, 500.0) == doctest::Approx(500.0));
    CHECK(agc_fresnel_radius(0.025, 400, 400) == doctest::Approx(std::sqrt(0.025 * 400 * 400 / 800.0)));
    CHECK(std::isnan(agc_fspl_db(-1.0, 10.0)));
    CHECK(std::string(agc_last_error()).size() > 0);
}

TEST_CASE("statistics through plain arrays") {
    const double x[] = {1, 2, 3, 4, 5, 6};
    const double y[] = {3, 5, 7, 9, 11, 13};
    double r = 0, p = 1;
    REQUIRE(agc_pearson(x, y, 6, &r, &p) == AGC_OK);
    CHECK(r == doctest::Approx(1.0));
    CHECK(p < 1e-6);
    const double flat[] = {2, 2, 2, 2, 2, 2};
    CHECK(agc_pearson(x, flat, 6, &r, &p) == AGC_ERR_UNDEFINED_CORRELATION);
    CHECK(std::string(agc_last_error()).find("variance") != std::string::npos);
    double agree = 0;
    const double dy[] = {1, -1, 1};
    const double dz[] = {2, -3, -1};
    REQUIRE(agc_sign_agreement(dy, dz, 3, &agree) == AGC_OK);
    CHECK(agree == doctest::Approx(2.0 / 3.0));
    CHECK(agc_pearson(nullptr, y, 6, &r, &p) == AGC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("raster handles") {
    const double v[] = {0, 10, 20, 30, 40, 50};
    agc_raster* g = nullptr;
    REQUIRE(agc_raster_create(0, 0, 10, 3, 2, -9999, v, &g) == AGC_OK);
    agc_raster_info info{};
    REQUIRE(agc_raster_info_get(g, &info) == AGC_OK);
    CHECK(info.width == 3);
    CHECK(info.height == 2);
    CHECK(info.cell_size == 10.0);
    CHECK(agc_raster_values(g)[4] == 40.0);
    double h = 0;
    REQUIRE(agc_raster_sample(g, 15, 15, &h) == AGC_OK);
    CHECK(h == doctest::Approx(10.0));
    CHECK(agc_raster_sample(g, 100, 5, &h) == AGC_ERR_OUT_OF_DOMAIN);

    const auto path = workdir() / "small.agt";
    REQUIRE(agc_raster_save(g, path.c_str()) == AGC_OK);
    agc_raster* back = nullptr;
    REQUIRE(agc_raster_load(path.c_str(), "dem", &back) == AGC_OK);
    for (int i = 0; i < 6; ++i) CHECK(agc_raster_values(back)[i] == v[i]);
    agc_raster_destroy(back);
    agc_raster_destroy(g);

    CHECK(agc_raster_load((workdir() / "missing.agt").c_str(), "dem", &back) == AGC_ERR_IO);
    CHECK(back == nullptr);
    CHECK(agc_raster_load(path.c_str(), "elevation", &back) != AGC_OK);
    CHECK(agc_raster_create(0, 0, 10, 0, 2, -9999, v, &g) == AGC_ERR_INVALID_ARGUMENT);
    CHECK(agc_raster_values(nullptr) == nullptr);
    agc_raster_destroy(nullptr);
}

TEST_CASE("context settings") {
    agc_context* ctx = nullptr;
    REQUIRE(agc_context_create(nullptr, &ctx) == AGC_OK);
    char* s = nullptr;
    REQUIRE(agc_context_get(ctx, "trace.rho_threshold", &s) == AGC_OK);
    CHECK(take(s) == "0.6");
    CHECK(agc_context_set(ctx, "trace.rho_threshold", "0.5") == AGC_OK);
    REQUIRE(agc_context_get(ctx, "trace.rho_threshold", &s) == AGC_OK);
    CHECK(take(s) == "0.5");
    CHECK(agc_context_set(ctx, "trace.rho", "0.5") == AGC_ERR_VALIDATION);
    CHECK(std::string(agc_last_error()).find("trace.rho") != std::string::npos);
    CHECK(agc_context_validate(ctx) == AGC_OK);
    CHECK(agc_context_set(ctx, "diffusion.steps", "0") == AGC_OK);
    CHECK(agc_context_validate(ctx) == AGC_ERR_VALIDATION);

    const auto lock = workdir() / "lock" / "run.lock.json";
    REQUIRE(agc_context_write_lock(ctx, lock.c_str()) == AGC_OK);
    std::ifstream in(lock);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("agc-run-lock/1") != std::string::npos);
    agc_context_destroy(ctx);

    CHECK(agc_context_create((workdir() / "none.toml").c_str(), &ctx) == AGC_ERR_IO);
    CHECK(ctx == nullptr);
    CHECK(agc_context_set(nullptr, "a", "b") == AGC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("the full pipeline on a small region") {
    const auto dir = workdir() / "region";
    fs::create_directories(dir);
    write_region(dir);
    agc_context* ctx = nullptr;
    REQUIRE(agc_context_create(nullptr, &ctx) == AGC_OK);
    const std::pair<const char*, std::string> settings[] = {
        {"paths.data_dir", dir.string()},
        {"paths.dem", "dem.asc"},
        {"paths.landcover", "lc.asc"},
        {"paths.out", (dir / "out").string()},
        {"paths.manifest", (dir / "out" / "manifest.csv").string()},
        {"sampling.S", "40"},
        {"sampling.k", "4"},
        {"terrain.tpi_large_px", "6"},
        {"satellites.az_step", "120"},
        {"satellites.altitudes_km", "[550]"},
        {"run.threads", "1"},
        {"diffusion.tile_size", "16"},
    };
    for (const auto& [k, v] : settings) REQUIRE_MESSAGE(agc_context_set(ctx, k, v.c_str()) == AGC_OK, agc_last_error());

    char* js = nullptr;
    REQUIRE_MESSAGE(agc_ingest(ctx, &js) == AGC_OK, agc_last_error());
    CHECK(take(js).find("\"classes\"") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "ingest.json"));

    REQUIRE_MESSAGE(agc_terrain(ctx, nullptr) == AGC_OK, agc_last_error());
    CHECK(fs::exists(dir / "out" / "terrain" / "weiss.agt"));

    REQUIRE_MESSAGE(agc_cluster(ctx, nullptr, &js) == AGC_OK, agc_last_error());
    agc_free_string(js);
    CHECK(fs::exists(dir / "out" / "clusters.csv"));

    REQUIRE_MESSAGE(agc_sample(ctx, nullptr, &js) == AGC_OK, agc_last_error());
    // s_min floors may push the total past S; the summary reports by how much.
    const auto summary = nlohmann::json::parse(take(js));
    const long points = summary["points"].get<long>();
    CHECK(points == 40 + summary["overflow"].get<long>());
    CHECK(count_lines(dir / "out" / "manifest.csv") == points + 1);

    REQUIRE(agc_trace_point(ctx, 1, 25, 180, &js) == AGC_OK);
    const auto trace = take(js);
    CHECK(trace.find("\"point_id\":1") != std::string::npos);
    CHECK(trace.find("\"verdict\"") != std::string::npos);
    CHECK(agc_trace_point(ctx, 9999, 25, 180, &js) == AGC_ERR_VALIDATION);
    REQUIRE(agc_trace_xy(ctx, 1700, 2700, 60, 0, 550, &js) == AGC_OK);
    agc_free_string(js);
    CHECK(agc_trace_xy(ctx, 0, 0, 60, 0, 550, &js) == AGC_ERR_OUT_OF_DOMAIN);

    long failures = -1;
    REQUIRE_MESSAGE(agc_estimate(ctx, nullptr, &failures) == AGC_OK, agc_last_error());
    CHECK(failures == 0);
    CHECK(count_lines(dir / "out" / "estimates.csv") == points + 1);
    CHECK(count_lines(dir / "out" / "estimates.jsonl") == points);

    REQUIRE_MESSAGE(agc_map(ctx, nullptr, &js) == AGC_OK, agc_last_error());
    CHECK(take(js).find("nlos_rate") != std::string::npos);
    CHECK(count_lines(dir / "out" / "map" / "obstruction.csv") == 6);

    long tiles = 0;
    REQUIRE_MESSAGE(agc_export_tiles(ctx, nullptr, (dir / "tiles").c_str(), 40, 0, 550, &tiles) == AGC_OK,
                    agc_last_error());
    CHECK(tiles == 9);
    CHECK(fs::exists(dir / "tiles" / "tile_0_0.agx"));
    CHECK(fs::exists(dir / "tiles" / "tile_0_0.meta.json"));
    long rasters = 0;
    REQUIRE_MESSAGE(agc_import_predictions((dir / "tiles").c_str(), (dir / "pred").c_str(), &rasters) == AGC_OK,
                    agc_last_error());
    CHECK(rasters == 9);
    CHECK(agc_export_tiles(ctx, (dir / "out" / "estimates.csv").c_str(), (dir / "t2").c_str(), 41, 0, 550, &tiles) ==
          AGC_ERR_VALIDATION);

    {
        std::ofstream(dir / "a.csv") << "v\n1\n2\n4\n3\n5\n";
        std::ofstream(dir / "b.csv") << "v\n2\n4\n8\n6\n10\n";
    }
    REQUIRE(agc_metrics_files("pearson", (dir / "a.csv").c_str(), (dir / "b.csv").c_str(), "v", 1, &js) == AGC_OK);
    CHECK(take(js).find("\"r\":1") != std::string::npos);
    REQUIRE(agc_metrics_files("sign", (dir / "a.csv").c_str(), (dir / "b.csv").c_str(), nullptr, 1, &js) == AGC_OK);
    CHECK(take(js).find("\"agreement\":1") != std::string::npos);
    CHECK(agc_metrics_files("spearman", (dir / "a.csv").c_str(), (dir / "b.csv").c_str(), nullptr, 1, &js) ==
          AGC_ERR_INVALID_ARGUMENT);

    agc_context_destroy(ctx);
}
