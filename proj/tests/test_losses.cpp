// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "agc/losses.hpp"
#include "fixtures.hpp"

using namespace agc;

namespace {

double knife_oracle(double nu) {
    if (nu <= -0.78) return 0.0;
    return 6.9 + 20.0 * std::log10(std::sqrt((nu - 0.1) * (nu - 0.1) + 1.0) + nu - 0.1);
}

// Profile with obstacles given as (UT-side 3D distance, height above the ray).
PathProfile profile_of(const std::vector<std::pair<double, double>>& edges, double total) {
    PathProfile p;
    p.verdict = Verdict::Nlos;
    p.segment.slant_range_m = total;
    p.segment.antenna_height = 1.5;
    for (const auto& [d, h] : edges) {
        ProfileEntry e;
        e.ut_distance = d;
        e.dist_h = d;
        e.clearance = -h;
        e.terrain_height = 1.5 + h;
        p.entries.push_back(e);
    }
    return p;
}

bool forest(int t) { return t >= 0; }

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("free-space loss worked values") {
    CHECK(fspl_db(12e9, 1e6) == doctest::Approx(32.45 + 20 * std::log10(12000.0) + 60.0).epsilon(1e-14));
    CHECK(fspl_db(12e9, 1e6) == doctest::Approx(174.03).epsilon(0.005 / 174.03));
    CHECK(fspl_db(1e9, 1000.0) == doctest::Approx(92.45).epsilon(1e-14));
    CHECK(fspl_db(3e9, 2000.0) - fspl_db(3e9, 1000.0) == doctest::Approx(20 * std::log10(2.0)));
    CHECK(fixtures::error_of([] { fspl_db(0.0, 10.0); }) == ErrorCode::InvalidArgument);
    CHECK(fixtures::error_of([] { fspl_db(1e9, -1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("knife edge J(nu)") {
    CHECK(std::abs(knife_edge_loss(0.0) - 6.03) <= 0.01);
    CHECK(std::abs(knife_edge_loss(1.0) - 13.93) <= 0.01);  // 6.9 + 20 log10(2.2454)
    CHECK(knife_edge_loss(1.0) == doctest::Approx(6.9 + 20 * std::log10(std::sqrt(1.81) + 0.9)).epsilon(1e-14));
    CHECK(knife_edge_loss(-0.78) == 0.0);
    CHECK(knife_edge_loss(-3.0) == 0.0);
    double prev = 0.0;
    for (double nu = -0.77; nu < 5.0; nu += 0.01) {
        CHECK(knife_edge_loss(nu) >= prev);
        prev = knife_edge_loss(nu);
    }
    CHECK(fresnel_nu(2.0, 100, 300, 0.025) == doctest::Approx(2.0 * std::sqrt(2 * 400.0 / (0.025 * 100 * 300))));
}

TEST_CASE("Bullington is zero on empty profiles") {
    LinkSpec l;
    PathProfile empty;
    empty.segment.slant_range_m = 1e6;
    CHECK(bullington_loss(empty, l) == 0.0);
}

TEST_CASE("single edge: Bullington collapses to its knife edge") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> frac(0.001, 0.999), height(-5.0, 60.0), total(2e5, 2e6);
    LinkSpec l;
    const double lambda = l.wavelength();
    for (int i = 0; i < 200; ++i) {
        const double s = total(rng);
        const double d = std::min(frac(rng) * 2000.0, 0.5 * s);
        const double h = height(rng);
        const auto r = bullington(profile_of({{d, h}}, s), l);
        const double nu = h * std::sqrt(2.0 * s / (lambda * d * (s - d)));
        CHECK(std::abs(r.edge_loss_db - knife_oracle(nu)) <= 1e-9);
        CHECK(r.edge_distance == doctest::Approx(d).epsilon(1e-12));
        CHECK(r.edge_height == doctest::Approx(h).epsilon(1e-12).scale(1e-9));
        CHECK(r.loss_db >= r.edge_loss_db);
        CHECK(r.spherical_delta_db >= 0.0);
    }
}

TEST_CASE("a dominant edge fixes the equivalent edge") {
    LinkSpec l;
    const double s = 1e6;
    // second edge is lower and interior to both slope lines of the first
    const auto one = bullington(profile_of({{300.0, 40.0}}, s), l);
    const auto two = bullington(profile_of({{200.0, 10.0}, {300.0, 40.0}}, s), l);
    CHECK(two.edge_loss_db == doctest::Approx(one.edge_loss_db).epsilon(1e-12));
    CHECK(two.edge_distance == doctest::Approx(300.0));
    // two genuine edges build a higher virtual edge between them
    const auto pair = bullington(profile_of({{200.0, 30.0}, {400.0, 30.0}}, s), l);
    const double s_tim = 30.0 / 200.0, s_rim = 30.0 / (s - 400.0);
    const double dv = s_rim * s / (s_tim + s_rim);
    CHECK(pair.edge_distance == doctest::Approx(dv).epsilon(1e-12));
    CHECK(pair.edge_height == doctest::Approx(s_tim * dv).epsilon(1e-12));
    CHECK(pair.edge_loss_db >= bullington(profile_of({{400.0, 30.0}}, s), l).edge_loss_db);
}

TEST_CASE("vegetation boundaries land within tolerance") {
    auto belt = [](double s) { return s >= 100.0 && s < 200.0 ? 0 : -1; };
    const auto segs = segment_vegetation(belt, 300.0, 50.0, 0.5, forest);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].s_in >= 99.5);
    CHECK(segs[0].s_in <= 100.5);
    CHECK(segs[0].s_out >= 199.5);
    CHECK(segs[0].s_out <= 200.5);
    CHECK(segs[0].landcover == 0);
    CHECK(segment_vegetation([](double) { return -1; }, 300.0, 50.0, 0.5, forest).empty());
}

TEST_CASE("randomized boundaries, including the end-of-path closure") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> where(0.0, 1.0);
    const double eps = 0.25;
    for (int i = 0; i < 100; ++i) {
        const double s_max = 200.0 + 800.0 * where(rng);
        const double a = 5.0 + 0.4 * s_max * where(rng);
        const double b = a + 20.0 + 0.4 * s_max * where(rng);
        auto belt = [&](double s) { return s >= a && s < b ? 5 : -1; };
        const auto segs = segment_vegetation(belt, s_max, 10.0, eps, forest);
        REQUIRE(segs.size() == 1);
        CHECK(std::abs(segs[0].s_in - a) <= eps);
        CHECK(std::abs(segs[0].s_out - b) <= eps);
    }
    const double s_max = 437.0;
    auto tail = [&](double s) { return s >= s_max - 10.0 ? 1 : -1; };
    const auto segs = segment_vegetation(tail, s_max, 50.0, 0.5, forest);
    REQUIRE(segs.size() == 1);
    CHECK(std::abs(segs[0].s_in - (s_max - 10.0)) <= 0.5);
    CHECK(segs[0].s_out == s_max);
}

TEST_CASE("adjacent vegetation classes split into separate segments") {
    auto mixed = [](double s) { return s < 60.0 ? 0 : (s < 130.0 ? 4 : -1); };
    const auto segs = segment_vegetation(mixed, 200.0, 25.0, 0.1, forest);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].s_in == 0.0);
    CHECK(std::abs(segs[0].s_out - 60.0) <= 0.1);
    CHECK(segs[1].landcover == 4);
    CHECK(std::abs(segs[1].s_in - 60.0) <= 0.1);
    CHECK(std::abs(segs[1].s_out - 130.0) <= 0.1);
    CHECK(fixtures::error_of([&] { segment_vegetation(mixed, 200.0, 0.1, 0.5, forest); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("woodland extinction saturates at the class cap") {
    const auto t = ClassTable::defaults();
    const std::vector<VegSegment> ten{{0.0, 10.0, landcover::kNeedleleafTemperate}};
    const double raw = 0.25 * std::pow(12000.0, 0.39) * std::pow(10.0, 0.25);
    CHECK(raw == doctest::Approx(17.3).epsilon(0.01));
    const double capped = 30.0 * (1.0 - std::exp(-raw / 30.0));
    CHECK(capped == doctest::Approx(13.2).epsilon(0.01));
    CHECK(vegetation_loss(ten, 12e9, t) == doctest::Approx(capped).epsilon(1e-14));
    CHECK(vegetation_loss({}, 12e9, t) == 0.0);

    const std::vector<VegSegment> both{{0, 10, 0}, {50, 60, 0}};
    CHECK(vegetation_loss(both, 12e9, t) > vegetation_loss(ten, 12e9, t));
    double prev = 0.0;
    for (double depth = 1.0; depth < 2000.0; depth *= 1.7) {
        const double v = vegetation_loss({{0.0, depth, 0}}, 12e9, t);
        CHECK(v >= prev);
        CHECK(v <= 30.0);
        prev = v;
    }
    CHECK(vegetation_loss(ten, 20e9, t) >= vegetation_loss(ten, 12e9, t));
    CHECK(fixtures::error_of([&] { vegetation_loss({{10.0, 5.0, 0}}, 12e9, t); }) == ErrorCode::Validation);
}

TEST_CASE("rain power law and cosecant scaling") {
    CHECK(rain_specific_attenuation(0.0188, 1.217, 10.0) == doctest::Approx(0.0188 * std::pow(10.0, 1.217)));
    CHECK(rain_specific_attenuation(0.0188, 1.217, 10.0) == doctest::Approx(0.31).epsilon(0.01));
    const auto row = AtmosphereTable::defaults().at(12e9);
    CHECK(row.rain_k == 0.0188);
    CHECK(row.rain_alpha == 1.217);

    AtmosphereTable zero;
    zero.rows = {{12.0, 0.0, 0.0, 0.0, 1.0}};
    CHECK(atmosphere_loss(30.0, 12e9, WeatherRecord{}, zero) == 0.0);

    AtmosphereTable table = AtmosphereTable::defaults();
    WeatherRecord w;
    w.cloud_lwc = 0.8;
    w.rain_mm_h = 5.0;
    const double z = atmosphere_loss(90.0, 12e9, w, table);
    CHECK(atmosphere_loss(30.0, 12e9, w, table) == doctest::Approx(2.0 * z).epsilon(1e-12));
    for (double el : {5.0, 17.0, 44.0, 71.0}) {
        const auto b = atmosphere_breakdown(el, 12e9, w, table);
        const double s = std::sin(el * std::numbers::pi / 180.0);
        CHECK((b.gas_db + b.cloud_db) * s == doctest::Approx(0.058 + 0.087 * 0.8).epsilon(1e-12));
        CHECK(b.rain_db * s == doctest::Approx(0.0188 * std::pow(5.0, 1.217) * table.rain_height_km).epsilon(1e-12));
    }
    CHECK(fixtures::error_of([&] { atmosphere_loss(0.0, 12e9, w, table); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("TWDP parameters and the no-reflection limit") {
    const auto solo = twdp_stats(-3.0, std::nullopt, -300.0);
    CHECK(solo.delta == 0.0);
    CHECK(solo.multipath_db == doctest::Approx(0.0).scale(1.0));
    const auto equal = twdp_stats(-7.0, -7.0, -27.0);
    CHECK(equal.delta == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(equal.k_db == doctest::Approx(10 * std::log10(2.0) + 20.0).epsilon(1e-12));
    const auto uneven = twdp_stats(0.0, -6.0, -20.0);
    const double pr = std::pow(10.0, -0.6);
    CHECK(uneven.delta == doctest::Approx(2 * std::sqrt(pr) / (1 + pr)).epsilon(1e-14));
}

TEST_CASE("TWDP mean power and fade against Monte Carlo phases") {
    for (const auto& [pd_db, pr_db, pdiff_db] :
         {std::tuple{0.0, 0.0, -20.0}, std::tuple{-10.0, -13.0, -30.0}, std::tuple{-2.0, -8.0, -20.0}}) {
        const auto r = twdp_stats(pd_db, pr_db, pdiff_db);
        const double pd = std::pow(10.0, pd_db / 10), pr = std::pow(10.0, pr_db / 10),
                     pdiff = std::pow(10.0, pdiff_db / 10);
        CHECK(std::abs(r.mean_power / (pd + pr + pdiff) - 1.0) < 1e-3);
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        const int n = 1'000'000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += 10.0 * std::log10(pd + pr + 2.0 * std::sqrt(pd * pr) * std::cos(phase(rng)) + pdiff);
        }
        const double mc_fade = -(acc / n - pd_db);
        CHECK(std::abs(r.multipath_db - mc_fade) < 0.1);
    }
}

}
