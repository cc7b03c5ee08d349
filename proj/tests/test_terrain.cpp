// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "agc/terrain.hpp"
#include "fixtures.hpp"

using namespace agc;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

// Interior pixels only; borders use partial windows.
template <class F>
void each_interior(const RasterGrid& g, long margin, F&& f) {
    for (long r = margin; r < g.height() - margin; ++r) {
        for (long c = margin; c < g.width() - margin; ++c) f(r, c);
    }
}

RasterGrid rotate90(const RasterGrid& g) {
    // Clockwise: new(r, c) = old(n - 1 - c, r), square grids only.
    auto out = g;
    const long n = g.width();
    for (long r = 0; r < n; ++r) {
        for (long c = 0; c < n; ++c) out.at(r, c) = g.at(n - 1 - c, r);
    }
    return out;
}

}  // namespace

TEST_SUITE("terrain") {

TEST_CASE("constant DEM has zero derivatives and flat aspect") {
    const auto d = derive_terrain(fixtures::constant(6, 5, 10, 321.0));
    for (std::size_t i = 0; i < d.slope.size(); ++i) {
        CHECK(d.slope.values()[i] == 0.0);
        CHECK(d.roughness.values()[i] == 0.0);
        CHECK(d.curvature.values()[i] == 0.0);
        CHECK(d.tpi.values()[i] == 0.0);
        CHECK(d.tri.values()[i] == 0.0);
        CHECK(d.flat[i] == 1);
    }
    const auto plain = fixtures::constant(20, 20, 10, 5.0);
    const auto w = classify_weiss(plain, derive_terrain(plain));
    for (double v : w.values()) CHECK(v == static_cast<double>(WeissClass::Flat));
}

TEST_CASE("east-rising plane: Horn slope, uphill aspect, zero curvature") {
    const auto dem = fixtures::grid_from(7, 7, 10, [](double x, double) { return x / 10.0; });
    const auto d = derive_terrain(dem);
    const double expected = std::atan(0.1) * kDeg;
    each_interior(dem, 1, [&](long r, long c) {
        CHECK(d.slope.at(r, c) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(d.aspect.at(r, c) == doctest::Approx(90.0).epsilon(1e-12));
        CHECK(d.curvature.at(r, c) == doctest::Approx(0.0).scale(1.0));
        CHECK(d.tpi.at(r, c) == doctest::Approx(0.0).scale(1.0));
        CHECK(d.roughness.at(r, c) == doctest::Approx(2.0));
    });
    CHECK(expected == doctest::Approx(5.71).epsilon(1e-3));
}

TEST_CASE("bowl centre is concave with TPI -1") {
    auto dem = fixtures::constant(3, 3, 10, 10.0);
    dem.at(1, 1) = 9.0;
    const auto d = derive_terrain(dem);
    CHECK(d.tpi.at(1, 1) == doctest::Approx(-1.0));
    CHECK(d.curvature.at(1, 1) < 0.0);
    // RMS of eight 1 m differences
    CHECK(d.tri.at(1, 1) == doctest::Approx(1.0));
    CHECK(d.roughness.at(1, 1) == doctest::Approx(1.0));
    CHECK(d.slope.at(1, 1) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("grids smaller than 3x3 are rejected") {
    CHECK(fixtures::error_of([] { derive_terrain(fixtures::constant(2, 5, 10, 1.0)); }) == ErrorCode::Size);
}

TEST_CASE("aspect follows the uphill bearing on all four axes") {
    struct Case {
        double gx, gy, bearing;
    };
    for (const auto& k : {Case{0, 1, 0}, Case{1, 0, 90}, Case{0, -1, 180}, Case{-1, 0, 270}, Case{1, 1, 45}}) {
        const auto dem = fixtures::grid_from(5, 5, 10, [&](double x, double y) { return 100 + k.gx * x + k.gy * y; });
        const auto d = derive_terrain(dem);
        CHECK(d.aspect.at(2, 2) == doctest::Approx(k.bearing));
        CHECK(d.flat[dem.index(2, 2)] == 0);
    }
}

TEST_CASE("rotation, offset and scale invariants on random hills") {
    const auto dem = fixtures::random_hills(24, 10, 7);
    const auto base = derive_terrain(dem);

    const auto rot = derive_terrain(rotate90(dem));
    each_interior(dem, 1, [&](long r, long c) {
        const long n = dem.width();
        // rotated pixel (r, c) came from (n-1-c, r)
        const long sr = n - 1 - c, sc = r;
        CHECK(rot.slope.at(r, c) == doctest::Approx(base.slope.at(sr, sc)).epsilon(1e-9));
        CHECK(rot.roughness.at(r, c) == doctest::Approx(base.roughness.at(sr, sc)).epsilon(1e-9));
        CHECK(rot.tri.at(r, c) == doctest::Approx(base.tri.at(sr, sc)).epsilon(1e-9));
        CHECK(std::abs(rot.curvature.at(r, c)) ==
              doctest::Approx(std::abs(base.curvature.at(sr, sc))).epsilon(1e-9).scale(1e-9));
        if (!base.flat[dem.index(sr, sc)]) {
            const double diff = std::fmod(rot.aspect.at(r, c) - base.aspect.at(sr, sc) + 720.0, 360.0);
            CHECK(std::min(std::abs(diff - 90.0), 360.0 - std::abs(diff - 90.0)) < 1e-6);
        }
    });

    auto shifted = dem;
    for (auto& v : shifted.values()) v += 250.0;
    const auto sh = derive_terrain(shifted);
    auto scaled = dem;
    for (auto& v : scaled.values()) v *= 3.0;
    const auto sc = derive_terrain(scaled);
    for (std::size_t i = 0; i < dem.size(); ++i) {
        CHECK(sh.slope.values()[i] == doctest::Approx(base.slope.values()[i]).epsilon(1e-9));
        CHECK(sh.tpi.values()[i] == doctest::Approx(base.tpi.values()[i]).scale(1.0).epsilon(1e-9));
        CHECK(std::tan(sc.slope.values()[i] / kDeg) ==
              doctest::Approx(3.0 * std::tan(base.slope.values()[i] / kDeg)).epsilon(1e-9));
        CHECK(sc.roughness.values()[i] == doctest::Approx(3.0 * base.roughness.values()[i]).epsilon(1e-9));
        CHECK(sc.tri.values()[i] == doctest::Approx(3.0 * base.tri.values()[i]).epsilon(1e-9));
    }
}

TEST_CASE("annulus TPI excludes the centre") {
    auto dem = fixtures::constant(11, 11, 10, 0.0);
    dem.at(5, 5) = 12.0;
    const auto tpi = compute_tpi(dem, 0.0, 1.0);
    CHECK(tpi.at(5, 5) == doctest::Approx(12.0));
    // neighbour sees the spike as one of its (up to 4) radius-1 neighbours
    CHECK(tpi.at(5, 4) == doctest::Approx(-3.0));
    const auto ring = compute_tpi(dem, 1.0, 3.0);
    CHECK(ring.at(5, 5) == doctest::Approx(12.0));
}

TEST_CASE("Gaussian ridge: crest is ridge, no valleys") {
    const auto dem = fixtures::grid_from(40, 40, 10, [](double x, double) {
        const double u = (x - 200.0) / 100.0;  // broad enough that the toe stays above -1 sigma
        return 100.0 * std::exp(-u * u);
    });
    const auto d = derive_terrain(dem);
    const auto w = classify_weiss(dem, d);
    for (long r = 0; r < 40; ++r) {
        CHECK(w.at(r, 19) == static_cast<double>(WeissClass::Ridge));
        CHECK(w.at(r, 20) == static_cast<double>(WeissClass::Ridge));
        for (long c = 0; c < 40; ++c) CHECK(w.at(r, c) != static_cast<double>(WeissClass::Valley));
    }
}

TEST_CASE("zero flat threshold leaves no flat pixels on varied terrain") {
    const auto dem = fixtures::random_hills(30, 10, 3);
    const auto d = derive_terrain(dem);
    WeissThresholds t;
    t.slope_flat_deg = 0.0;
    const auto w = classify_weiss(dem, d, t);
    for (double v : w.values()) CHECK(v != static_cast<double>(WeissClass::Flat));
}

TEST_CASE("every valid pixel gets exactly one landform; nodata stays nodata") {
    auto dem = fixtures::random_hills(30, 10, 11);
    dem.at(4, 4) = dem.nodata();
    const auto d = derive_terrain(dem);
    const auto w = classify_weiss(dem, d);
    CHECK(w.same_geometry(dem));
    for (long r = 0; r < 30; ++r) {
        for (long c = 0; c < 30; ++c) {
            if (r == 4 && c == 4) {
                CHECK_FALSE(w.valid(r, c));
            } else {
                const double v = w.at(r, c);
                CHECK(v >= 0.0);
                CHECK(v < kWeissClassCount);
            }
        }
    }
    CHECK(d.slope.is_nodata(d.slope.at(4, 4)));
}

TEST_CASE("mismatched layers are a geometry error") {
    const auto a = fixtures::constant(5, 5, 10, 0.0);
    const auto b = fixtures::constant(6, 5, 10, 0.0);
    CHECK(fixtures::error_of([&] { classify_weiss(a, b, a); }) == ErrorCode::Geometry);
}

}
