// SPDX-License-Identifier: Apache-2.0
#include "agc/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "agc/error.hpp"
#include "agc/text.hpp"

namespace agc {

using nlohmann::json;

Scene::Scene(std::shared_ptr<const Terrain> terrain, std::vector<WeatherRecord> weather)
    : terrain_(std::move(terrain)), weather_(std::move(weather)) {
    if (!terrain_) fail(ErrorCode::InvalidArgument, "scene needs terrain");
}

WeatherRecord Scene::weather_at(double x, double y) const {
    if (weather_.empty()) return WeatherRecord{x, y};
    const WeatherRecord* best = &weather_.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& w : weather_) {
        const double d = std::hypot(w.x - x, w.y - y);
        if (d < best_d) {
            best_d = d;
            best = &w;
        }
    }
    return *best;
}

const ReflectionSurface& Scene::reflection_surface(const ReflectionWeights& weights) const {
    std::call_once(surface_once_, [&] {
        auto dem = terrain_->dem().mosaic();
        // Land cover resampled onto the DEM lattice by pixel-centre lookup.
        auto lc = RasterGrid::filled_like(dem, -1.0);
        if (const auto* lct = terrain_->landcover()) {
            for (long r = 0; r < dem.height(); ++r) {
                for (long c = 0; c < dem.width(); ++c) {
                    const auto p = dem.pixel_center(r, c);
                    if (const auto v = lct->value_at(p.x, p.y)) lc.at(r, c) = *v;
                }
            }
        } else {
            for (auto& v : lc.values()) v = landcover::kBarren;
        }
        RasterGrid lc_grid(dem.origin_x(), dem.origin_y(), dem.cell_size(), dem.width(), dem.height(), -1.0,
                           std::move(lc.values()));
        surface_ = std::make_unique<ReflectionSurface>(
            build_reflection_surface(dem, lc_grid, terrain_->classes(), weights));
    });
    return *surface_;
}

TypeOracle canopy_oracle(const PathProfile& profile, const Terrain& terrain, bool earth_curvature) {
    const auto seg = profile.segment;
    const double cos_el = std::cos(seg.elevation_rad);
    const auto* terrain_ptr = &terrain;
    return [seg, cos_el, terrain_ptr, earth_curvature](double s) -> int {
        const double d = s * cos_el;
        if (d < 0.0 || d > seg.length_h + 1e-9) return -1;
        const auto pos = seg.at(std::min(d, seg.length_h));
        if (!terrain_ptr->extent().contains(pos.x, pos.y)) return -1;
        const auto px = terrain_ptr->pixel_at(pos.x, pos.y);
        if (!px || px->landcover < 0 || !(px->canopy > 0.0)) return -1;
        if (!terrain_ptr->classes()[px->landcover].is_vegetation) return -1;
        const double raw = seg.raw_height(d);
        const double h = earth_curvature ? curvature_correction(raw, seg.slant_range_m - s, s) : raw;
        return (h >= px->ground && h < px->ground + px->canopy) ? px->landcover : -1;
    };
}

PathProfile bare_terrain_profile(const PathProfile& profile, const std::vector<VegSegment>& vegetation,
                                 double rho_threshold, double slack_m) {
    PathProfile out = profile;
    out.entries.clear();
    const double cos_el = std::cos(profile.segment.elevation_rad);
    for (auto e : profile.entries) {
        const bool covered = e.canopy > 0.0 && std::any_of(vegetation.begin(), vegetation.end(), [&](const VegSegment& v) {
                                 return e.ut_distance >= v.s_in - slack_m && e.ut_distance <= v.s_out + slack_m;
                             });
        if (covered) {
            e.terrain_height -= e.canopy;
            e.clearance += e.canopy;
            e.canopy = 0.0;
            if (e.rho_evaluated) e.rho = e.clearance * cos_el / e.fresnel;
        }
        if (e.clearance < 0.0 || (e.rho_evaluated && e.rho < rho_threshold)) out.entries.push_back(e);
    }
    return out;
}

namespace {

ChannelEstimate estimate_link_impl(const LinkSpec& link, const Scene& scene, const EngineConfig& config) {
    const auto& terrain = scene.terrain();
    ChannelEstimate est;
    est.link = link;
    est.profile = trace_link(link, terrain, config.trace);
    est.verdict = est.profile.verdict;
    const auto& seg = est.profile.segment;
    auto& b = est.breakdown;
    b.fspl_db = fspl_db(link.frequency_hz, seg.slant_range_m);

    const double cs = terrain.cell_size();
    const double cos_el = std::cos(seg.elevation_rad);
    if (seg.length_h > 0.0) {
        const double step = config.veg_step_m > 0.0 ? config.veg_step_m : cs;
        const double tol = config.veg_tolerance_m > 0.0 ? config.veg_tolerance_m : cs / 20.0;
        const auto oracle = canopy_oracle(est.profile, terrain, config.trace.earth_curvature);
        est.vegetation = segment_vegetation(oracle, seg.length_h / cos_el, step, tol, [&terrain](int c) {
            return c >= 0 && c < kLandCoverClassCount && terrain.classes()[c].is_vegetation;
        });
        b.vegetation_db = vegetation_loss(est.vegetation, link.frequency_hz, terrain.classes());
    }

    if (est.verdict == Verdict::Nlos) {
        const auto bare = bare_terrain_profile(est.profile, est.vegetation, config.trace.rho_threshold,
                                               cs * std::sqrt(2.0) / cos_el);
        b.diffraction_db = bullington(bare, link).loss_db;
    }

    est.atmosphere = atmosphere_breakdown(link.elevation_deg, link.frequency_hz,
                                          scene.weather_at(link.ut_x, link.ut_y), config.atmosphere);
    b.atmosphere_db = est.atmosphere.total();

    // Direct path power relative to an unobstructed link.
    const double direct_db = -(b.diffraction_db + b.vegetation_db);
    std::optional<double> refl_db;
    if (config.reflections) {
        const auto candidates = candidate_ring(link, scene.reflection_surface(config.reflection_weights), config.rings);
        if (const auto* best = strongest_reflection(candidates)) {
            est.reflection = *best;
            refl_db = best->relative_power_db;
        }
    }
    est.twdp = twdp_stats(direct_db, refl_db, direct_db + config.diffuse_db);
    b.multipath_db = est.twdp.multipath_db;

    b.total_excess_db = b.diffraction_db + b.vegetation_db + b.atmosphere_db + b.multipath_db;
    b.total_db = b.fspl_db + b.total_excess_db;
    return est;
}

std::string describe(const LinkSpec& link) {
    std::ostringstream s;
    s << "link at (" << format_number(link.ut_x) << ", " << format_number(link.ut_y) << ") el "
      << format_number(link.elevation_deg) << " az " << format_number(link.azimuth_deg) << " alt "
      << format_number(link.altitude_km) << " km";
    return s.str();
}

}  // namespace

ChannelEstimate estimate_link(const LinkSpec& link, const Scene& scene, const EngineConfig& config) {
    try {
        return estimate_link_impl(link, scene, config);
    } catch (const Error& e) {
        fail(e.code(), describe(link) + ": " + e.what());
    }
}

std::vector<LinkTask> cross_tasks(const std::vector<GroundSample>& points, const std::vector<SatGeometry>& geometries) {
    std::vector<LinkTask> tasks;
    tasks.reserve(points.size() * geometries.size());
    for (const auto& p : points) {
        for (const auto& g : geometries) tasks.push_back({p.point_id, p.x, p.y, g});
    }
    return tasks;
}

std::vector<LinkOutcome> run_links(const std::vector<LinkTask>& tasks, const Scene& scene, const EngineConfig& config) {
    std::vector<LinkOutcome> out(tasks.size());
    unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(tasks.size(), 1)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const auto& t = tasks[i];
            auto& o = out[i];
            o.task = t;
            LinkSpec link;
            link.ut_x = t.x;
            link.ut_y = t.y;
            link.ut_height_agl = config.ut_height_agl;
            link.elevation_deg = t.geometry.elevation_deg;
            link.azimuth_deg = t.geometry.azimuth_deg;
            link.altitude_km = t.geometry.altitude_km;
            link.frequency_hz = config.frequency_hz;
            try {
                o.estimate = estimate_link(link, scene, config);
                o.estimate->point_id = t.point_id;
            } catch (const std::exception& e) {
                o.error = std::string("point ") + std::to_string(t.point_id) + ": " + e.what();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

RasterGrid idw_raster(const std::vector<IdwSample>& samples, const BoundingBox& extent, double cell_size,
                      double power) {
    if (!(cell_size > 0.0)) fail(ErrorCode::InvalidArgument, "map cell size must be positive");
    const long w = std::max(1L, static_cast<long>(std::ceil(extent.width() / cell_size - 1e-9)));
    const long h = std::max(1L, static_cast<long>(std::ceil(extent.height() / cell_size - 1e-9)));
    constexpr double kNodata = -9999.0;
    RasterGrid g(extent.min_x, extent.max_y - static_cast<double>(h) * cell_size, cell_size, w, h, kNodata,
                 std::vector<double>(static_cast<std::size_t>(w * h), kNodata));
    if (samples.empty()) return g;
    // Samples inside a pixel pin its value (mean when several share it).
    std::vector<double> pinned_sum(g.size(), 0.0);
    std::vector<int> pinned_n(g.size(), 0);
    for (const auto& s : samples) {
        if (!g.contains(s.x, s.y)) continue;
        const auto p = g.world_to_pixel(s.x, s.y);
        pinned_sum[g.index(p.row, p.col)] += s.value;
        ++pinned_n[g.index(p.row, p.col)];
    }
    for (long r = 0; r < h; ++r) {
        for (long c = 0; c < w; ++c) {
            const auto i = g.index(r, c);
            if (pinned_n[i] > 0) {
                g.values()[i] = pinned_sum[i] / pinned_n[i];
                continue;
            }
            const auto ctr = g.pixel_center(r, c);
            double num = 0.0;
            double den = 0.0;
            for (const auto& s : samples) {
                const double d = std::hypot(s.x - ctr.x, s.y - ctr.y);
                const double wgt = 1.0 / std::pow(std::max(d, 1e-9), power);
                num += wgt * s.value;
                den += wgt;
            }
            g.values()[i] = num / den;
        }
    }
    return g;
}

RegionReport region_sweep(const std::vector<GroundSample>& points, const std::vector<SatGeometry>& geometries,
                          const Scene& scene, const EngineConfig& config) {
    if (points.empty() || geometries.empty()) fail(ErrorCode::InvalidArgument, "region sweep needs points and geometries");
    RegionReport report;
    report.outcomes = run_links(cross_tasks(points, geometries), scene, config);

    // elevation -> point -> (sum, n)
    std::map<double, std::map<long, std::pair<double, int>>> per_point;
    std::map<long, WorldPoint> where;
    for (const auto& p : points) where[p.point_id] = {p.x, p.y};
    for (const auto& o : report.outcomes) {
        if (!o.estimate) {
            ++report.failures;
            continue;
        }
        const double el = o.task.geometry.elevation_deg;
        auto& st = report.by_elevation[el];
        ++st.links;
        if (o.estimate->verdict == Verdict::Nlos) ++st.nlos;
        st.mean_excess_db += o.estimate->breakdown.total_excess_db;
        auto& acc = per_point[el][o.task.point_id];
        acc.first += o.estimate->breakdown.total_excess_db;
        acc.second += 1;
    }
    const double cell = config.map_cell_size > 0.0 ? config.map_cell_size : scene.terrain().cell_size();
    for (auto& [el, st] : report.by_elevation) {
        if (st.links > 0) st.mean_excess_db /= static_cast<double>(st.links);
        std::vector<IdwSample> samples;
        for (const auto& [pid, acc] : per_point[el]) {
            const auto p = where[pid];
            samples.push_back({p.x, p.y, acc.first / acc.second});
        }
        report.attenuation.emplace(el, idw_raster(samples, scene.terrain().extent(), cell, config.idw_power));
    }
    return report;
}

std::vector<WeatherRecord> read_weather_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::Parse, "empty weather file");
    const auto header = split_csv_line(line);
    auto col = [&](const char* name) -> long {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<long>(i);
        }
        return -1;
    };
    const long cx = col("x");
    const long cy = col("y");
    if (cx < 0 || cy < 0) fail(ErrorCode::Parse, "weather header needs x and y columns");
    const long cr = col("rain_mm_h");
    const long cl = col("cloud_lwc");
    const long ct = col("temp_c");
    const long cp = col("pressure_hpa");
    std::vector<WeatherRecord> out;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) {
            fail(ErrorCode::Parse, "weather line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(header.size()) + " fields");
        }
        const std::string where = "weather line " + std::to_string(line_no);
        WeatherRecord w;
        w.x = parse_double(f[static_cast<std::size_t>(cx)], where);
        w.y = parse_double(f[static_cast<std::size_t>(cy)], where);
        if (cr >= 0) w.rain_mm_h = parse_double(f[static_cast<std::size_t>(cr)], where);
        if (cl >= 0) w.cloud_lwc = parse_double(f[static_cast<std::size_t>(cl)], where);
        if (ct >= 0) w.temp_c = parse_double(f[static_cast<std::size_t>(ct)], where);
        if (cp >= 0) w.pressure_hpa = parse_double(f[static_cast<std::size_t>(cp)], where);
        if (w.rain_mm_h < 0.0 || w.cloud_lwc < 0.0 || !(w.pressure_hpa > 0.0)) {
            fail(ErrorCode::Validation, where + ": rain and cloud must be >= 0, pressure > 0");
        }
        out.push_back(w);
    }
    return out;
}

namespace {

json profile_json(const PathProfile& profile) {
    json arr = json::array();
    for (const auto& e : profile.entries) {
        arr.push_back({{"d_m", e.dist_h}, {"h_m", e.terrain_height}, {"clr_m", e.clearance}});
    }
    return arr;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json link_json(long point_id, const LinkSpec& link, const PathProfile& profile) {
    return {
        {"point_id", point_id},
        {"elev", link.elevation_deg},
        {"az", link.azimuth_deg},
        {"alt_km", link.altitude_km},
        {"verdict", verdict_name(profile.verdict)},
        {"min_clearance_m", finite_or_null(profile.min_clearance)},
        {"min_rho", finite_or_null(profile.min_rho)},
        {"profile", profile_json(profile)},
    };
}

}  // namespace

std::string trace_json(long point_id, const LinkSpec& link, const PathProfile& profile) {
    return link_json(point_id, link, profile).dump();
}

std::string estimate_json(const ChannelEstimate& e) {
    auto j = link_json(e.point_id, e.link, e.profile);
    const auto& b = e.breakdown;
    j["losses"] = {
        {"fspl_db", b.fspl_db},
        {"diffraction_db", b.diffraction_db},
        {"vegetation_db", b.vegetation_db},
        {"atmosphere_db", b.atmosphere_db},
        {"multipath_db", b.multipath_db},
        {"total_excess_db", b.total_excess_db},
        {"total_db", b.total_db},
    };
    j["atmosphere"] = {{"gas_db", e.atmosphere.gas_db}, {"cloud_db", e.atmosphere.cloud_db}, {"rain_db", e.atmosphere.rain_db}};
    json veg = json::array();
    for (const auto& v : e.vegetation) veg.push_back({{"s_in", v.s_in}, {"s_out", v.s_out}, {"class", v.landcover}});
    j["vegetation"] = veg;
    j["twdp"] = {{"k_db", finite_or_null(e.twdp.k_db)}, {"delta", e.twdp.delta}, {"multipath_db", e.twdp.multipath_db}};
    if (e.reflection) {
        j["reflection"] = {{"x", e.reflection->x},
                           {"y", e.reflection->y},
                           {"r", e.reflection->r_value},
                           {"relative_power_db", e.reflection->relative_power_db},
                           {"excess_delay_s", e.reflection->excess_delay_s}};
    } else {
        j["reflection"] = nullptr;
    }
    if (!e.timestamp.empty()) j["timestamp"] = e.timestamp;
    return j.dump();
}

void write_estimates_csv(const std::vector<LinkOutcome>& outcomes, std::ostream& out) {
    out << "point_id,x,y,elev_deg,az_deg,alt_km,verdict,fspl_db,diffraction_db,vegetation_db,atmosphere_db,"
           "multipath_db,total_excess_db,total_db,error\n";
    for (const auto& o : outcomes) {
        out << o.task.point_id << ',' << format_number(o.task.x) << ',' << format_number(o.task.y) << ','
            << format_number(o.task.geometry.elevation_deg) << ','
            << format_number(o.task.geometry.azimuth_deg) << ',' << format_number(o.task.geometry.altitude_km) << ',';
        if (o.estimate) {
            const auto& b = o.estimate->breakdown;
            out << verdict_name(o.estimate->verdict) << ',' << format_number(b.fspl_db) << ','
                << format_number(b.diffraction_db) << ',' << format_number(b.vegetation_db) << ','
                << format_number(b.atmosphere_db) << ',' << format_number(b.multipath_db) << ','
                << format_number(b.total_excess_db) << ',' << format_number(b.total_db) << ",\n";
        } else {
            std::string msg = o.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out << "ERROR,,,,,,,," << msg << '\n';
        }
    }
}

std::vector<EstimateRow> read_estimates_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::Parse, "estimates: empty file");
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[std::string(trim(header[i]))] = i;
    for (const char* name : {"point_id", "x", "y", "elev_deg", "az_deg", "alt_km", "verdict", "total_excess_db"}) {
        if (!col.count(name)) fail(ErrorCode::Parse, std::string("estimates: missing column ") + name);
    }
    std::vector<EstimateRow> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        const std::string where = "estimates line " + std::to_string(line_no);
        if (f.size() < header.size()) fail(ErrorCode::Parse, where + ": too few fields");
        EstimateRow r;
        r.point_id = parse_long(f[col["point_id"]], where);
        r.x = parse_double(f[col["x"]], where);
        r.y = parse_double(f[col["y"]], where);
        r.geometry = {parse_double(f[col["elev_deg"]], where), parse_double(f[col["az_deg"]], where),
                      parse_double(f[col["alt_km"]], where)};
        const auto verdict = trim(f[col["verdict"]]);
        r.ok = verdict != "ERROR";
        if (r.ok) {
            r.verdict = verdict == "NLOS" ? Verdict::Nlos : Verdict::Los;
            r.total_excess_db = parse_double(f[col["total_excess_db"]], where);
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace agc
