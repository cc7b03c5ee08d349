// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "agc/config.hpp"
#include "agc/landcover.hpp"
#include "fixtures.hpp"

using namespace agc;

namespace {

std::map<std::string, std::string> toml(const std::string& text) {
    std::istringstream in(text);
    return parse_toml(in, "run.toml");
}

std::string message_of(const std::string& text) {
    try {
        toml(text);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

// RunConfig reads AGC_DATA_DIR at construction; keep it out of these tests.
RunConfig fresh() {
    unsetenv("AGC_DATA_DIR");
    return RunConfig{};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("tables, comments and quoting") {
    const auto v = toml(R"(# run
seed = 4
[paths]
dem = "dem # not a comment.asc"   # trailing
out = 'plain'
[satellites]
altitudes_km = [500, 850]
[trace]
earth_curvature = false
)");
    CHECK(v.at("seed") == "4");
    CHECK(v.at("paths.dem") == "dem # not a comment.asc");
    CHECK(v.at("paths.out") == "plain");
    CHECK(v.at("satellites.altitudes_km") == "[500, 850]");
    CHECK(v.at("trace.earth_curvature") == "false");
    CHECK(v.size() == 5);
    CHECK(toml("s = \"a\\tb\"").at("s") == "a\tb");
}

TEST_CASE("syntax errors name the file and line") {
    CHECK(fixtures::error_of([] { toml("a = 1\nb\n"); }) == ErrorCode::Parse);
    CHECK(message_of("a = 1\nb\n").find("run.toml:2") != std::string::npos);
    CHECK(message_of("[paths\n").find("run.toml:1") != std::string::npos);
    CHECK(message_of("x = \"open\n").find("unterminated") != std::string::npos);
    CHECK(message_of("= 3\n").find("empty key") != std::string::npos);
    const auto dup = message_of("[a]\nk = 1\n[a]\nk = 2\n");
    CHECK(dup.find("run.toml:4") != std::string::npos);
    CHECK(dup.find("duplicate key a.k") != std::string::npos);
}

TEST_CASE("every key has a default") {
    const auto c = fresh();
    CHECK(c.integer("run.seed") == 1);
    CHECK(c.number("trace.rho_threshold") == 0.6);
    CHECK(c.boolean("trace.earth_curvature"));
    CHECK(c.numbers("satellites.altitudes_km") == std::vector<double>{500, 850, 1200});
    CHECK(c.text("sampling.preset") == "balanced");
    CHECK(c.values().count("paths.dem") == 1);
    CHECK_FALSE(c.is_explicit("run.seed"));
    CHECK_NOTHROW(c.validate());
    CHECK(c.seed() == 1u);
    const auto w = c.dem_window();
    CHECK(w.min_m == -500.0);
    CHECK(w.max_m == 9000.0);
}

TEST_CASE("unknown keys and ill-typed values are rejected") {
    auto c = fresh();
    CHECK(fixtures::error_of([&] { c.set("trace.margin", "5"); }) == ErrorCode::Validation);
    CHECK(fixtures::error_of([&] { c.set("run.seed", "1.5"); }) == ErrorCode::Validation);
    CHECK(fixtures::error_of([&] { c.set("trace.rho_threshold", "high"); }) == ErrorCode::Validation);
    CHECK(fixtures::error_of([&] { c.set("trace.earth_curvature", "yes"); }) == ErrorCode::Validation);
    CHECK(fixtures::error_of([&] { c.set("satellites.altitudes_km", "500"); }) == ErrorCode::Validation);
    CHECK(fixtures::error_of([&] { c.set("landcover.3.colour", "1"); }) == ErrorCode::Validation);
    CHECK(fixtures::error_of([&] { c.text("no.such"); }) == ErrorCode::Validation);

    // well-typed but out of range values fail when the typed view is built
    c.set("landcover.40.beta", "0.1");
    CHECK(fixtures::error_of([&] { c.classes(); }) == ErrorCode::Validation);
    auto d = fresh();
    d.set("diffusion.steps", "0");
    CHECK(fixtures::error_of([&] { d.validate(); }) == ErrorCode::Validation);
    auto e = fresh();
    e.set("sampling.preset", "nope");
    CHECK(fixtures::error_of([&] { e.sampling(); }) == ErrorCode::Validation);
    auto f = fresh();
    f.set("raster.dem_max_m", "-600");
    CHECK(fixtures::error_of([&] { f.dem_window(); }) == ErrorCode::Validation);
    auto g = fresh();
    g.set("factors.terrain", "[1, 2]");
    CHECK(fixtures::error_of([&] { g.sampling(); }) == ErrorCode::Validation);
}

TEST_CASE("presets fill in what the user left out") {
    auto c = fresh();
    c.set("sampling.preset", "los");
    auto s = c.sampling();
    const auto los = sampling_preset("los");
    CHECK(s.coeffs.terrain == los.coeffs.terrain);
    CHECK(s.coeffs.elevation == los.coeffs.elevation);

    c.set("sampling.alpha", "0.7");
    c.set("sampling.delta", "0.1");
    s = c.sampling();
    CHECK(s.coeffs.terrain == 0.7);
    CHECK(s.coeffs.elevation == 0.1);
    CHECK(s.coeffs.function == los.coeffs.function);
    CHECK(s.factors.landcover[landcover::kWater] == los.factors.landcover[landcover::kWater]);

    c.set("factors.function.3", "4");
    c.set("sampling.S", "120");
    s = c.sampling();
    CHECK(s.factors.function.at(3) == 4.0);
    CHECK(s.budget == 120);
}

TEST_CASE("typed views carry the configured values") {
    auto c = fresh();
    c.set("landcover.0.canopy_height", "22");
    c.set("landcover.15.is_vegetation", "true");
    c.set("trace.earth_curvature", "false");
    c.set("link.frequency_hz", "20e9");
    c.set("reflection.enabled", "false");
    c.set("terrain.tpi_large_px", "9");
    const auto classes = c.classes();
    CHECK(classes[0].canopy_height == 22.0);
    CHECK(classes[15].is_vegetation);
    CHECK(classes[1].canopy_height == ClassTable::defaults()[1].canopy_height);
    const auto e = c.engine();
    CHECK_FALSE(e.trace.earth_curvature);
    CHECK(e.frequency_hz == 20e9);
    CHECK_FALSE(e.reflections);
    CHECK(c.weiss().large_radius_px == 9.0);
    CHECK(c.schedule().steps == 250);
}

TEST_CASE("input paths resolve against the data directory") {
    auto c = fresh();
    c.set("paths.dem", "dem.asc");
    c.set("paths.out", "results");
    CHECK(c.path("paths.dem") == std::filesystem::path("dem.asc"));
    c.set("paths.data_dir", "/data/region");
    CHECK(c.path("paths.dem") == std::filesystem::path("/data/region/dem.asc"));
    CHECK(c.path("paths.out") == std::filesystem::path("results"));
    c.set("paths.landcover", "/abs/lc.asc");
    CHECK(c.path("paths.landcover") == std::filesystem::path("/abs/lc.asc"));

    setenv("AGC_DATA_DIR", "/env/root", 1);
    RunConfig from_env;
    unsetenv("AGC_DATA_DIR");
    from_env.set("paths.weather", "wx.csv");
    CHECK(from_env.path("paths.weather") == std::filesystem::path("/env/root/wx.csv"));
}

TEST_CASE("config files load and lock") {
    const auto dir = fixtures::scratch("config");
    const auto file = dir / "run.toml";
    {
        std::ofstream out(file);
        out << "[run]\nseed = 9\n[sampling]\npreset = \"reflection\"\n";
    }
    unsetenv("AGC_DATA_DIR");
    const auto c = RunConfig::from_file(file);
    CHECK(c.seed() == 9u);
    CHECK(c.is_explicit("sampling.preset"));
    const auto lock = nlohmann::json::parse(c.lock_json());
    CHECK(lock["format"] == "agc-run-lock/1");
    CHECK(lock["config"]["run.seed"] == "9");
    CHECK(lock["explicit"] == nlohmann::json::array({"run.seed", "sampling.preset"}));
    CHECK(lock["config"].size() == c.values().size());

    CHECK(fixtures::error_of([&] { RunConfig::from_file(dir / "missing.toml"); }) == ErrorCode::Io);
    {
        std::ofstream out(dir / "bad.toml");
        out << "[run]\nspeed = 3\n";
    }
    CHECK(fixtures::error_of([&] { RunConfig::from_file(dir / "bad.toml"); }) == ErrorCode::Validation);
}

}  // TEST_SUITE
