// SPDX-License-Identifier: Apache-2.0
#include "agc/agc.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agc/config.hpp"
#include "agc/diffusion.hpp"
#include "agc/engine.hpp"
#include "agc/error.hpp"
#include "agc/geometry.hpp"
#include "agc/losses.hpp"
#include "agc/metrics.hpp"
#include "agc/ray_tracer.hpp"
#include "agc/sampling.hpp"
#include "agc/terrain.hpp"
#include "agc/text.hpp"
#include "agc/tiles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

struct agc_context {
    agc::RunConfig config;
    std::mutex mu;
    std::shared_ptr<const agc::TileIndex> dem_tiles;
    std::shared_ptr<const agc::TileIndex> landcover_tiles;
    std::shared_ptr<const agc::TileIndex> function_tiles;
    std::shared_ptr<const agc::Terrain> terrain;
    std::shared_ptr<const agc::Scene> scene;
    std::optional<agc::RasterGrid> dem;
    std::optional<agc::RasterGrid> landcover;  // on the DEM lattice, nodata -1
    std::optional<agc::RasterGrid> function;
    std::optional<agc::TerrainDerivatives> derivs;
    std::optional<agc::RasterGrid> weiss;

    void reset() {
        dem_tiles.reset();
        landcover_tiles.reset();
        function_tiles.reset();
        terrain.reset();
        scene.reset();
        dem.reset();
        landcover.reset();
        function.reset();
        derivs.reset();
        weiss.reset();
    }
};

struct agc_raster {
    agc::RasterGrid grid;
};

namespace {

thread_local std::string g_last_error;

template <class F>
agc_status guard(F&& f) noexcept {
    try {
        f();
        g_last_error.clear();
        return AGC_OK;
    } catch (const agc::Error& e) {
        g_last_error = e.what();
        return static_cast<agc_status>(e.code());
    } catch (const fs::filesystem_error& e) {
        g_last_error = e.what();
        return AGC_ERR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return AGC_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return AGC_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(const void* p, const char* what) {
    if (!p) agc::fail(agc::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

fs::path out_root(const agc_context& ctx) { return ctx.config.path("paths.out"); }

fs::path manifest_path(const agc_context& ctx) {
    const auto p = ctx.config.path("paths.manifest");
    return p.empty() ? out_root(ctx) / "manifest.csv" : p;
}

fs::path ensure_dir(const fs::path& dir) {
    if (!dir.empty()) fs::create_directories(dir);
    return dir;
}

// Values of an indexed layer looked up at each DEM pixel centre.
agc::RasterGrid resample_onto(const agc::TileIndex& tiles, const agc::RasterGrid& like) {
    agc::RasterGrid out(like.origin_x(), like.origin_y(), like.cell_size(), like.width(), like.height(), -1.0,
                        std::vector<double>(like.size(), -1.0));
    for (long r = 0; r < like.height(); ++r) {
        for (long c = 0; c < like.width(); ++c) {
            const auto p = like.pixel_center(r, c);
            if (const auto v = tiles.value_at(p.x, p.y)) out.at(r, c) = *v;
        }
    }
    return out;
}

void load_inputs(agc_context& ctx) {
    if (ctx.scene) return;
    const auto& cfg = ctx.config;
    const auto dem_path = cfg.path("paths.dem");
    if (dem_path.empty()) agc::fail(agc::ErrorCode::Validation, "paths.dem is not set (config or --dem)");
    const auto window = cfg.dem_window();
    auto dem_tiles = std::make_shared<agc::TileIndex>(agc::TileIndex::from_path(dem_path, agc::BandKind::Dem, window));
    std::shared_ptr<agc::TileIndex> lc_tiles;
    if (const auto p = cfg.path("paths.landcover"); !p.empty()) {
        lc_tiles = std::make_shared<agc::TileIndex>(agc::TileIndex::from_path(p, agc::BandKind::Landcover));
    }
    std::shared_ptr<agc::TileIndex> fn_tiles;
    if (const auto p = cfg.path("paths.function"); !p.empty()) {
        fn_tiles = std::make_shared<agc::TileIndex>(agc::TileIndex::from_path(p, agc::BandKind::Function));
    }
    std::vector<agc::WeatherRecord> weather;
    if (const auto p = cfg.path("paths.weather"); !p.empty()) {
        std::ifstream in(p);
        if (!in) agc::fail(agc::ErrorCode::Io, "cannot open weather file " + p.string());
        weather = agc::read_weather_csv(in);
    }
    auto terrain = std::make_shared<agc::Terrain>(dem_tiles, lc_tiles, cfg.classes());
    ctx.dem_tiles = dem_tiles;
    ctx.landcover_tiles = lc_tiles;
    ctx.function_tiles = fn_tiles;
    ctx.terrain = terrain;
    ctx.scene = std::make_shared<agc::Scene>(terrain, std::move(weather));
}

const agc::RasterGrid& dem_mosaic(agc_context& ctx) {
    load_inputs(ctx);
    if (!ctx.dem) ctx.dem = ctx.dem_tiles->mosaic();
    return *ctx.dem;
}

const agc::RasterGrid* landcover_layer(agc_context& ctx) {
    if (!ctx.landcover_tiles) return nullptr;
    if (!ctx.landcover) ctx.landcover = resample_onto(*ctx.landcover_tiles, dem_mosaic(ctx));
    return &*ctx.landcover;
}

const agc::RasterGrid* function_layer(agc_context& ctx) {
    if (!ctx.function_tiles) return nullptr;
    if (!ctx.function) ctx.function = resample_onto(*ctx.function_tiles, dem_mosaic(ctx));
    return &*ctx.function;
}

void derive(agc_context& ctx) {
    const auto& dem = dem_mosaic(ctx);
    if (!ctx.derivs) ctx.derivs = agc::derive_terrain(dem);
    if (!ctx.weiss) ctx.weiss = agc::classify_weiss(dem, *ctx.derivs, ctx.config.weiss());
}

agc::SampleDesign design(agc_context& ctx) {
    derive(ctx);
    const auto* lc = landcover_layer(ctx);
    if (!lc) agc::fail(agc::ErrorCode::Validation, "clustering needs paths.landcover");
    agc::SamplingLayers layers;
    layers.dem = &*ctx.dem;
    layers.slope = &ctx.derivs->slope;
    layers.roughness = &ctx.derivs->roughness;
    layers.weiss = &*ctx.weiss;
    layers.landcover = lc;
    layers.function = function_layer(ctx);
    return agc::design_samples(layers, ctx.config.sampling());
}

std::vector<agc::ManifestRow> load_manifest(const agc_context& ctx) {
    const auto p = manifest_path(ctx);
    std::ifstream in(p);
    if (!in) agc::fail(agc::ErrorCode::Io, "cannot open manifest " + p.string() + " (run `sample` first)");
    return agc::read_manifest(in);
}

json raster_summary(const agc::TileIndex& tiles, const agc::RasterGrid& mosaic) {
    long valid = 0;
    double lo = INFINITY;
    double hi = -INFINITY;
    for (double v : mosaic.values()) {
        if (mosaic.is_nodata(v)) continue;
        ++valid;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const auto e = tiles.extent();
    json j;
    j["tiles"] = tiles.size();
    j["cell_size"] = tiles.cell_size();
    j["extent"] = {e.min_x, e.min_y, e.max_x, e.max_y};
    j["width"] = mosaic.width();
    j["height"] = mosaic.height();
    j["valid_cells"] = valid;
    j["nodata_cells"] = static_cast<long>(mosaic.size()) - valid;
    j["min"] = valid ? json(lo) : json(nullptr);
    j["max"] = valid ? json(hi) : json(nullptr);
    return j;
}

json class_counts(const agc::RasterGrid& grid) {
    std::map<long, long> counts;
    for (double v : grid.values()) {
        if (!grid.is_nodata(v)) ++counts[std::lround(v)];
    }
    json j = json::object();
    for (const auto& [k, n] : counts) j[std::to_string(k)] = n;
    return j;
}

agc::LinkSpec make_link(const agc_context& ctx, double x, double y, double elev, double az, double alt) {
    const auto engine = ctx.config.engine();
    agc::LinkSpec link;
    link.ut_x = x;
    link.ut_y = y;
    link.ut_height_agl = engine.ut_height_agl;
    link.elevation_deg = elev;
    link.azimuth_deg = az;
    link.altitude_km = alt;
    link.frequency_hz = engine.frequency_hz;
    link.validate();
    return link;
}

std::string elevation_tag(double elev) { return agc::format_number(elev); }

std::vector<double> read_column(const fs::path& path, const char* column, long window) {
    std::ifstream in(path);
    if (!in) agc::fail(agc::ErrorCode::Io, "cannot open " + path.string());
    std::vector<double> out;
    std::string line;
    std::size_t col = 0;
    bool first = true;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (agc::trim(line).empty()) continue;
        const auto fields = agc::split_csv_line(line);
        if (first) {
            first = false;
            bool numeric = true;
            try {
                for (const auto& f : fields) agc::parse_double(f, "");
            } catch (const agc::Error&) {
                numeric = false;
            }
            if (!numeric) {
                if (column) {
                    const auto it = std::find_if(fields.begin(), fields.end(),
                                                 [&](const std::string& f) { return agc::trim(f) == column; });
                    if (it == fields.end()) {
                        agc::fail(agc::ErrorCode::Validation, path.string() + ": no column '" + column + "'");
                    }
                    col = static_cast<std::size_t>(it - fields.begin());
                }
                continue;
            }
            if (column) agc::fail(agc::ErrorCode::Validation, path.string() + " has no header to select a column");
        }
        if (col >= fields.size()) {
            agc::fail(agc::ErrorCode::Parse, path.string() + ":" + std::to_string(line_no) + ": missing column");
        }
        out.push_back(agc::parse_double(fields[col], path.string() + ":" + std::to_string(line_no)));
    }
    if (window > 1) out = agc::moving_average(out, static_cast<std::size_t>(window));
    return out;
}

}  // namespace

extern "C" {

const char* agc_version(void) { return "0.1.0"; }

const char* agc_status_name(agc_status status) {
    if (status == AGC_OK) return "ok";
    if (status == AGC_ERR_INTERNAL) return "internal";
    if (status >= AGC_ERR_INVALID_ARGUMENT && status <= AGC_ERR_RUNTIME) {
        return agc::error_code_name(static_cast<agc::ErrorCode>(status));
    }
    return "unknown";
}

const char* agc_last_error(void) { return g_last_error.c_str(); }

void agc_free_string(char* s) { std::free(s); }

agc_status agc_context_create(const char* config_path, agc_context** out) {
    return guard([&] {
        require(out, "out");
        *out = nullptr;
        auto ctx = std::make_unique<agc_context>();
        if (config_path && *config_path) ctx->config = agc::RunConfig::from_file(config_path);
        *out = ctx.release();
    });
}

void agc_context_destroy(agc_context* ctx) { delete ctx; }

agc_status agc_context_set(agc_context* ctx, const char* key, const char* value) {
    return guard([&] {
        require(ctx, "context");
        require(key, "key");
        require(value, "value");
        std::lock_guard lock(ctx->mu);
        ctx->config.set(key, value);
        ctx->reset();
    });
}

agc_status agc_context_get(const agc_context* ctx, const char* key, char** out) {
    return guard([&] {
        require(ctx, "context");
        require(key, "key");
        require(out, "out");
        *out = dup_string(ctx->config.text(key));
    });
}

agc_status agc_context_validate(const agc_context* ctx) {
    return guard([&] {
        require(ctx, "context");
        ctx->config.validate();
    });
}

agc_status agc_context_write_lock(const agc_context* ctx, const char* path) {
    return guard([&] {
        require(ctx, "context");
        require(path, "path");
        const fs::path p(path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) agc::fail(agc::ErrorCode::Io, "cannot write " + p.string());
        out << ctx->config.lock_json() << '\n';
    });
}

agc_status agc_ingest(agc_context* ctx, char** report_json) {
    return guard([&] {
        require(ctx, "context");
        std::lock_guard lock(ctx->mu);
        ctx->config.validate();
        const auto& dem = dem_mosaic(*ctx);
        json j;
        j["dem"] = raster_summary(*ctx->dem_tiles, dem);
        j["landcover"] = nullptr;
        j["function"] = nullptr;
        if (const auto* lc = landcover_layer(*ctx)) {
            j["landcover"] = raster_summary(*ctx->landcover_tiles, ctx->landcover_tiles->mosaic());
            j["landcover"]["classes"] = class_counts(*lc);
        }
        if (const auto* fn = function_layer(*ctx)) {
            j["function"] = raster_summary(*ctx->function_tiles, ctx->function_tiles->mosaic());
            j["function"]["classes"] = class_counts(*fn);
        }
        j["weather_records"] = ctx->scene->weather().size();
        const auto text = j.dump(2);
        std::ofstream out(ensure_dir(out_root(*ctx)) / "ingest.json", std::ios::binary);
        out << text << '\n';
        if (!out) agc::fail(agc::ErrorCode::Io, "cannot write ingest.json");
        if (report_json) *report_json = dup_string(text);
    });
}

agc_status agc_terrain(agc_context* ctx, const char* out_dir) {
    return guard([&] {
        require(ctx, "context");
        std::lock_guard lock(ctx->mu);
        derive(*ctx);
        const auto dir = ensure_dir(out_dir ? fs::path(out_dir) : out_root(*ctx) / "terrain");
        const auto& d = *ctx->derivs;
        agc::save_raster(d.slope, dir / "slope.agt");
        agc::save_raster(d.aspect, dir / "aspect.agt");
        agc::save_raster(d.roughness, dir / "roughness.agt");
        agc::save_raster(d.curvature, dir / "curvature.agt");
        agc::save_raster(d.tpi, dir / "tpi.agt");
        agc::save_raster(d.tri, dir / "tri.agt");
        agc::save_raster(*ctx->weiss, dir / "weiss.agt");
    });
}

agc_status agc_cluster(agc_context* ctx, const char* out_dir, char** summary_json) {
    return guard([&] {
        require(ctx, "context");
        std::lock_guard lock(ctx->mu);
        const auto d = design(*ctx);
        const auto dir = ensure_dir(out_dir ? fs::path(out_dir) : out_root(*ctx));
        agc::save_raster(d.cluster_map, dir / "clusters.agt");
        std::ofstream csv(dir / "clusters.csv", std::ios::binary);
        csv << "cluster,size,omega_terrain,omega_function,omega_landcover,mean_elevation,weight,quota\n";
        json arr = json::array();
        for (std::size_t i = 0; i < d.clusters.size(); ++i) {
            const auto& c = d.clusters[i];
            csv << i << ',' << agc::format_number(c.size) << ',' << agc::format_number(c.omega_terrain) << ','
                << agc::format_number(c.omega_function) << ',' << agc::format_number(c.omega_landcover) << ','
                << agc::format_number(c.mean_elevation) << ',' << agc::format_number(d.weights[i]) << ','
                << d.quotas[i] << '\n';
            arr.push_back({{"cluster", i}, {"size", c.size}, {"weight", d.weights[i]}, {"quota", d.quotas[i]}});
        }
        if (!csv) agc::fail(agc::ErrorCode::Io, "cannot write clusters.csv");
        if (summary_json) *summary_json = dup_string(json{{"clusters", arr}}.dump(2));
    });
}

agc_status agc_sample(agc_context* ctx, const char* manifest, char** summary_json) {
    return guard([&] {
        require(ctx, "context");
        std::lock_guard lock(ctx->mu);
        const auto d = design(*ctx);
        const fs::path p = manifest ? fs::path(manifest) : manifest_path(*ctx);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) agc::fail(agc::ErrorCode::Io, "cannot write " + p.string());
        agc::write_manifest(d, out);
        out.close();
        long quota_sum = 0;
        for (long q : d.quotas) quota_sum += q;
        json j;
        j["manifest"] = p.string();
        j["points"] = d.points.size();
        j["budget"] = ctx->config.sampling().budget;
        j["quota_sum"] = quota_sum;
        j["quotas"] = d.quotas;
        j["combinations"] = d.combinations.size();
        j["overflow"] = d.overflow;
        j["shortfall"] = d.shortfall;
        j["geometries"] = d.geometries.size();
        if (summary_json) *summary_json = dup_string(j.dump(2));
    });
}

agc_status agc_trace_xy(agc_context* ctx, double x, double y, double elev_deg, double az_deg, double alt_km,
                        char** json_out) {
    return guard([&] {
        require(ctx, "context");
        require(json_out, "out");
        std::lock_guard lock(ctx->mu);
        load_inputs(*ctx);
        const auto link = make_link(*ctx, x, y, elev_deg, az_deg, alt_km);
        const auto profile = agc::trace_link(link, *ctx->terrain, ctx->config.engine().trace);
        *json_out = dup_string(agc::trace_json(-1, link, profile));
    });
}

agc_status agc_trace_point(agc_context* ctx, long point_id, double elev_deg, double az_deg, char** json_out) {
    return guard([&] {
        require(ctx, "context");
        require(json_out, "out");
        std::lock_guard lock(ctx->mu);
        load_inputs(*ctx);
        const auto rows = load_manifest(*ctx);
        const auto it = std::find_if(rows.begin(), rows.end(),
                                     [&](const agc::ManifestRow& r) { return r.point.point_id == point_id; });
        if (it == rows.end()) {
            agc::fail(agc::ErrorCode::Validation, "point " + std::to_string(point_id) + " is not in the manifest");
        }
        const auto link = make_link(*ctx, it->point.x, it->point.y, elev_deg, az_deg, it->geometry.altitude_km);
        const auto profile = agc::trace_link(link, *ctx->terrain, ctx->config.engine().trace);
        *json_out = dup_string(agc::trace_json(point_id, link, profile));
    });
}

agc_status agc_estimate(agc_context* ctx, const char* out_dir, long* failures) {
    return guard([&] {
        require(ctx, "context");
        std::lock_guard lock(ctx->mu);
        load_inputs(*ctx);
        const auto rows = load_manifest(*ctx);
        std::vector<agc::LinkTask> tasks;
        tasks.reserve(rows.size());
        for (const auto& r : rows) tasks.push_back({r.point.point_id, r.point.x, r.point.y, r.geometry});
        const auto outcomes = agc::run_links(tasks, *ctx->scene, ctx->config.engine());
        const auto dir = ensure_dir(out_dir ? fs::path(out_dir) : out_root(*ctx));
        std::ofstream csv(dir / "estimates.csv", std::ios::binary);
        agc::write_estimates_csv(outcomes, csv);
        std::ofstream jl(dir / "estimates.jsonl", std::ios::binary);
        long failed = 0;
        for (const auto& o : outcomes) {
            if (o.estimate) {
                jl << agc::estimate_json(*o.estimate) << '\n';
            } else {
                ++failed;
                jl << json{{"point_id", o.task.point_id}, {"error", o.error}}.dump() << '\n';
            }
        }
        if (!csv || !jl) agc::fail(agc::ErrorCode::Io, "cannot write estimates to " + dir.string());
        if (failures) *failures = failed;
    });
}

agc_status agc_map(agc_context* ctx, const char* out_dir, char** summary_json) {
    return guard([&] {
        require(ctx, "context");
        std::lock_guard lock(ctx->mu);
        load_inputs(*ctx);
        const auto rows = load_manifest(*ctx);
        std::vector<agc::GroundSample> points;
        std::set<long> seen;
        for (const auto& r : rows) {
            if (seen.insert(r.point.point_id).second) points.push_back(r.point);
        }
        const auto geometries = agc::satellite_grid(ctx->config.sampling().satellites);
        const auto report = agc::region_sweep(points, geometries, *ctx->scene, ctx->config.engine());
        const auto dir = ensure_dir(out_dir ? fs::path(out_dir) : out_root(*ctx) / "map");
        std::ofstream csv(dir / "obstruction.csv", std::ios::binary);
        csv << "elev_deg,links,nlos,nlos_rate,mean_excess_db\n";
        json by = json::array();
        for (const auto& [elev, s] : report.by_elevation) {
            csv << agc::format_number(elev) << ',' << s.links << ',' << s.nlos << ',' << agc::format_number(s.rate())
                << ',' << agc::format_number(s.mean_excess_db) << '\n';
            by.push_back({{"elev_deg", elev},
                          {"links", s.links},
                          {"nlos", s.nlos},
                          {"nlos_rate", s.rate()},
                          {"mean_excess_db", s.mean_excess_db}});
        }
        for (const auto& [elev, grid] : report.attenuation) {
            agc::save_raster(grid, dir / ("attenuation_e" + elevation_tag(elev) + ".agt"));
        }
        if (!csv) agc::fail(agc::ErrorCode::Io, "cannot write obstruction.csv");
        if (summary_json) {
            *summary_json = dup_string(json{{"by_elevation", by}, {"failures", report.failures}}.dump(2));
        }
    });
}

agc_status agc_export_tiles(agc_context* ctx, const char* estimates_csv, const char* out_dir, double elev_deg,
                            double az_deg, double alt_km, long* tile_count) {
    return guard([&] {
        require(ctx, "context");
        std::lock_guard lock(ctx->mu);
        derive(*ctx);
        agc::TileExportInputs inputs;
        std::vector<double> values;
        auto keep = [&](double x, double y, double excess_db) {
            inputs.observations.push_back({x, y, excess_db});
            values.push_back(excess_db);
        };
        if (estimates_csv) {
            std::ifstream in(estimates_csv);
            if (!in) agc::fail(agc::ErrorCode::Io, std::string("cannot open ") + estimates_csv);
            auto same = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
            for (const auto& r : agc::read_estimates_csv(in)) {
                if (r.ok && same(r.geometry.elevation_deg, elev_deg) && same(r.geometry.azimuth_deg, az_deg) &&
                    same(r.geometry.altitude_km, alt_km)) {
                    keep(r.x, r.y, r.total_excess_db);
                }
            }
        } else {
            // Every manifest point evaluated at the requested geometry.
            std::vector<agc::LinkTask> tasks;
            std::set<long> seen;
            for (const auto& r : load_manifest(*ctx)) {
                if (seen.insert(r.point.point_id).second) {
                    tasks.push_back({r.point.point_id, r.point.x, r.point.y, {elev_deg, az_deg, alt_km}});
                }
            }
            for (const auto& o : agc::run_links(tasks, *ctx->scene, ctx->config.engine())) {
                if (o.estimate) keep(o.task.x, o.task.y, o.estimate->breakdown.total_excess_db);
            }
        }
        if (inputs.observations.empty()) {
            agc::fail(agc::ErrorCode::Validation, "no successful estimates match the requested geometry");
        }
        inputs.normalizer = agc::fit_normalizer(values);
        inputs.dem = &*ctx->dem;
        inputs.slope = &ctx->derivs->slope;
        inputs.aspect = &ctx->derivs->aspect;
        inputs.flat = &ctx->derivs->flat;
        inputs.landcover = landcover_layer(*ctx);
        inputs.elev_deg = elev_deg;
        inputs.az_deg = az_deg;
        inputs.alt_km = alt_km;
        const long size = ctx->config.integer("diffusion.tile_size");
        if (size < 1) agc::fail(agc::ErrorCode::Validation, "diffusion.tile_size must be >= 1");
        inputs.tile_size = static_cast<std::uint32_t>(size);
        const auto dir = ensure_dir(out_dir ? fs::path(out_dir) : out_root(*ctx) / "tiles");
        const auto files = agc::export_tiles(inputs, dir, "tile");
        if (tile_count) *tile_count = static_cast<long>(files.size());
    });
}

agc_status agc_import_predictions(const char* tiles_dir, const char* out_dir, long* raster_count) {
    return guard([&] {
        require(tiles_dir, "tiles_dir");
        require(out_dir, "out_dir");
        std::vector<fs::path> files;
        const fs::path src(tiles_dir);
        if (fs::is_directory(src)) {
            for (const auto& e : fs::directory_iterator(src)) {
                if (e.is_regular_file() && e.path().extension() == ".agx") files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
        } else {
            files.push_back(src);
        }
        if (files.empty()) agc::fail(agc::ErrorCode::Validation, "no .agx tiles in " + src.string());
        const auto grids = agc::import_predictions(files);
        const auto dir = ensure_dir(out_dir);
        for (std::size_t i = 0; i < files.size(); ++i) {
            agc::save_raster(grids[i], dir / (files[i].stem().string() + ".agt"));
        }
        if (raster_count) *raster_count = static_cast<long>(grids.size());
    });
}

agc_status agc_metrics_files(const char* metric, const char* a_csv, const char* b_csv, const char* column,
                             long window, char** json_out) {
    return guard([&] {
        require(metric, "metric");
        require(a_csv, "a_csv");
        require(b_csv, "b_csv");
        require(json_out, "out");
        const auto a = read_column(a_csv, column, window);
        const auto b = read_column(b_csv, column, window);
        json j;
        const std::string m = metric;
        if (m == "pearson") {
            const auto r = agc::pearson(a, b);
            j = {{"metric", "pearson"}, {"r", r.r}, {"p_value", r.p_value}, {"n", r.n}};
        } else if (m == "sign") {
            const auto da = agc::differences(a);
            const auto db = agc::differences(b);
            j = {{"metric", "sign"}, {"agreement", agc::sign_agreement(da, db)}, {"n", da.size()}};
        } else {
            agc::fail(agc::ErrorCode::InvalidArgument, "unknown metric '" + m + "' (pearson, sign)");
        }
        *json_out = dup_string(j.dump());
    });
}

agc_status agc_pearson(const double* x, const double* y, size_t n, double* r, double* p_value) {
    return guard([&] {
        require(x, "x");
        require(y, "y");
        const auto res = agc::pearson(std::vector<double>(x, x + n), std::vector<double>(y, y + n));
        if (r) *r = res.r;
        if (p_value) *p_value = res.p_value;
    });
}

agc_status agc_sign_agreement(const double* x, const double* y, size_t n, double* out) {
    return guard([&] {
        require(x, "x");
        require(y, "y");
        require(out, "out");
        *out = agc::sign_agreement(std::vector<double>(x, x + n), std::vector<double>(y, y + n));
    });
}

double agc_fspl_db(double frequency_hz, double distance_m) {
    double v = NAN;
    guard([&] { v = agc::fspl_db(frequency_hz, distance_m); });
    return v;
}

double agc_knife_edge_db(double nu) {
    double v = NAN;
    guard([&] { v = agc::knife_edge_loss(nu); });
    return v;
}

double agc_slant_range_km(double elevation_deg, double altitude_km) {
    double v = NAN;
    guard([&] { v = agc::slant_range_km(elevation_deg, altitude_km); });
    return v;
}

double agc_curvature_correction(double raw_height, double d1, double d2) {
    double v = NAN;
    guard([&] { v = agc::curvature_correction(raw_height, d1, d2); });
    return v;
}

double agc_fresnel_radius(double wavelength, double d1, double d2) {
    double v = NAN;
    guard([&] { v = agc::fresnel_radius(wavelength, d1, d2); });
    return v;
}

agc_status agc_raster_load(const char* path, const char* band, agc_raster** out) {
    return guard([&] {
        require(path, "path");
        require(band, "band");
        require(out, "out");
        *out = nullptr;
        auto r = std::make_unique<agc_raster>();
        r->grid = agc::load_raster(path, agc::parse_band_kind(band));
        *out = r.release();
    });
}

agc_status agc_raster_create(double origin_x, double origin_y, double cell_size, long width, long height,
                             double nodata, const double* values, agc_raster** out) {
    return guard([&] {
        require(values, "values");
        require(out, "out");
        *out = nullptr;
        if (width < 1 || height < 1) agc::fail(agc::ErrorCode::InvalidArgument, "raster dimensions must be >= 1");
        const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
        auto r = std::make_unique<agc_raster>();
        r->grid = agc::RasterGrid(origin_x, origin_y, cell_size, width, height, nodata,
                                  std::vector<double>(values, values + n));
        *out = r.release();
    });
}

void agc_raster_destroy(agc_raster* raster) { delete raster; }

agc_status agc_raster_info_get(const agc_raster* raster, agc_raster_info* out) {
    return guard([&] {
        require(raster, "raster");
        require(out, "out");
        const auto& g = raster->grid;
        *out = {g.origin_x(), g.origin_y(), g.cell_size(), g.width(), g.height(), g.nodata()};
    });
}

const double* agc_raster_values(const agc_raster* raster) { return raster ? raster->grid.values().data() : nullptr; }

agc_status agc_raster_sample(const agc_raster* raster, double x, double y, double* out) {
    return guard([&] {
        require(raster, "raster");
        require(out, "out");
        *out = agc::sample_height(raster->grid, x, y);
    });
}

agc_status agc_raster_save(const agc_raster* raster, const char* path) {
    return guard([&] {
        require(raster, "raster");
        require(path, "path");
        agc::save_raster(raster->grid, path);
    });
}

}  // extern "C"
