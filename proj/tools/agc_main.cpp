// SPDX-License-Identifier: Apache-2.0
// Command-line front end. Talks to the engine only through the C API.
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agc/agc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int exit_code(agc_status s) {
    switch (s) {
        case AGC_OK: return kExitOk;
        case AGC_ERR_INVALID_ARGUMENT:
        case AGC_ERR_PARSE:
        case AGC_ERR_VALIDATION: return kExitValidation;
        default: return kExitRuntime;
    }
}

// Prints the failure and returns the exit code for it.
int report(agc_status s, const char* what) {
    if (s != AGC_OK) std::cerr << "agc " << what << ": " << agc_status_name(s) << ": " << agc_last_error() << '\n';
    return exit_code(s);
}

struct Owned {
    char* p = nullptr;
    ~Owned() { agc_free_string(p); }
};

struct ContextDeleter {
    void operator()(agc_context* c) const { agc_context_destroy(c); }
};
using ContextPtr = std::unique_ptr<agc_context, ContextDeleter>;

struct GlobalOptions {
    std::string config;
    std::optional<long> threads;
    std::optional<long> seed;
    std::optional<long> budget;
    std::string preset;
    std::vector<std::string> overrides;
    std::string dem, landcover, function, weather, manifest, out;
};

void add_global_options(CLI::App& app, GlobalOptions& g) {
    app.add_option("--config", g.config, "TOML run configuration");
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", g.seed, "random seed for every stochastic stage")->check(CLI::NonNegativeNumber);
    app.add_option("-S,--budget", g.budget, "total ground sample budget")->check(CLI::NonNegativeNumber);
    app.add_option("--preset", g.preset, "sampling preset: balanced, los, reflection");
    app.add_option("--set", g.overrides, "override a config key, KEY=VALUE (repeatable)");
    app.add_option("--dem", g.dem, "DEM file or directory of tiles");
    app.add_option("--landcover", g.landcover, "land-cover raster");
    app.add_option("--function", g.function, "functional-region raster");
    app.add_option("--weather", g.weather, "weather CSV");
    app.add_option("--manifest", g.manifest, "sample manifest CSV");
    app.add_option("--out", g.out, "output directory");
}

// Builds the run context: config file, then flag overrides.
agc_status open_context(const GlobalOptions& g, ContextPtr& ctx) {
    agc_context* raw = nullptr;
    const auto s = agc_context_create(g.config.empty() ? nullptr : g.config.c_str(), &raw);
    if (s != AGC_OK) return s;
    ctx.reset(raw);
    auto set = [&](const char* key, const std::string& value) { return agc_context_set(raw, key, value.c_str()); };
    std::vector<std::pair<std::string, std::string>> pairs;
    // Preset first so explicit coefficient overrides still win.
    if (!g.preset.empty()) pairs.emplace_back("sampling.preset", g.preset);
    if (g.threads) pairs.emplace_back("run.threads", std::to_string(*g.threads));
    if (g.seed) pairs.emplace_back("run.seed", std::to_string(*g.seed));
    if (g.budget) pairs.emplace_back("sampling.S", std::to_string(*g.budget));
    if (!g.dem.empty()) pairs.emplace_back("paths.dem", g.dem);
    if (!g.landcover.empty()) pairs.emplace_back("paths.landcover", g.landcover);
    if (!g.function.empty()) pairs.emplace_back("paths.function", g.function);
    if (!g.weather.empty()) pairs.emplace_back("paths.weather", g.weather);
    if (!g.manifest.empty()) pairs.emplace_back("paths.manifest", g.manifest);
    if (!g.out.empty()) pairs.emplace_back("paths.out", g.out);
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "agc: --set expects KEY=VALUE, got '" << kv << "'\n";
            return AGC_ERR_VALIDATION;
        }
        pairs.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [k, v] : pairs) {
        if (const auto st = set(k.c_str(), v); st != AGC_OK) return st;
    }
    if (const auto st = agc_context_validate(raw); st != AGC_OK) return st;
    Owned out;
    if (const auto st = agc_context_get(raw, "paths.out", &out.p); st != AGC_OK) return st;
    return agc_context_write_lock(raw, (std::string(out.p) + "/run.lock.json").c_str());
}

void print_json(const Owned& s) {
    if (s.p) std::cout << s.p << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agc: environment-aware air-to-ground channel modelling"};
    app.require_subcommand(1);
    app.fallthrough();
    app.failure_message(CLI::FailureMessage::help);
    app.set_version_flag("--version", std::string(agc_version()));
    GlobalOptions g;
    add_global_options(app, g);

    auto* ingest = app.add_subcommand("ingest", "load and validate rasters; writes ingest.json");
    auto* terrain = app.add_subcommand("terrain", "derive slope, aspect, roughness, curvature, TPI, TRI, landforms");
    std::string terrain_dir;
    terrain->add_option("--dir", terrain_dir, "output directory (default <out>/terrain)");
    auto* cluster = app.add_subcommand("cluster", "k-means regions; writes clusters.agt and clusters.csv");
    auto* sample = app.add_subcommand("sample", "stratified sample design; writes the manifest");

    auto* trace = app.add_subcommand("trace", "trace one link and print its path profile");
    std::optional<long> point;
    std::optional<double> tx, ty;
    double elev = 0.0, az = 0.0, alt = 500.0;
    auto* point_opt = trace->add_option("--point", point, "manifest point id");
    auto* x_opt = trace->add_option("--x", tx, "UT easting, m");
    auto* y_opt = trace->add_option("--y", ty, "UT northing, m");
    point_opt->excludes(x_opt)->excludes(y_opt);
    x_opt->needs(y_opt);
    y_opt->needs(x_opt);
    trace->add_option("--elev", elev, "elevation, degrees")->required()->check(CLI::Range(0.0, 90.0));
    trace->add_option("--az", az, "azimuth, degrees clockwise from north")->required();
    trace->add_option("--alt", alt, "satellite altitude, km (with --x/--y)");

    auto* estimate = app.add_subcommand("estimate", "loss breakdown for every manifest row");
    auto* map = app.add_subcommand("map", "region sweep over the satellite grid; per-elevation rasters");

    auto* export_tiles = app.add_subcommand("export-tiles", "write AGX1 training tiles for one geometry");
    std::string estimates_csv, tiles_out;
    double ex_elev = 0.0, ex_az = 0.0, ex_alt = 0.0;
    export_tiles->add_option("--estimates", estimates_csv, "estimates CSV to read observations from (default: trace the manifest)");
    export_tiles->add_option("--dir", tiles_out, "output directory (default <out>/tiles)");
    export_tiles->add_option("--elev", ex_elev, "elevation, degrees")->required();
    export_tiles->add_option("--az", ex_az, "azimuth, degrees")->required();
    export_tiles->add_option("--alt", ex_alt, "altitude, km")->required();

    auto* import_preds = app.add_subcommand("import-preds", "convert predicted AGX1 tiles to AGT1 rasters");
    std::string preds_in, preds_out;
    import_preds->add_option("tiles", preds_in, "tile file or directory")->required();
    import_preds->add_option("dest", preds_out, "output directory")->required();

    auto* metrics = app.add_subcommand("metrics", "compare two series (pearson or sign agreement)");
    std::string metric, a_csv, b_csv, column;
    long window = 1;
    metrics->add_option("metric", metric, "pearson or sign")->required()->check(CLI::IsMember({"pearson", "sign"}));
    metrics->add_option("a", a_csv, "first CSV")->required()->check(CLI::ExistingFile);
    metrics->add_option("b", b_csv, "second CSV")->required()->check(CLI::ExistingFile);
    metrics->add_option("--column", column, "column name when the files have a header");
    metrics->add_option("--window", window, "moving-average window applied first")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (metrics->parsed()) {
        Owned out;
        const auto s = agc_metrics_files(metric.c_str(), a_csv.c_str(), b_csv.c_str(),
                                         column.empty() ? nullptr : column.c_str(), window, &out.p);
        if (s != AGC_OK) return report(s, "metrics");
        std::cout << out.p << '\n';
        return kExitOk;
    }
    if (import_preds->parsed()) {
        long n = 0;
        const auto s = agc_import_predictions(preds_in.c_str(), preds_out.c_str(), &n);
        if (s != AGC_OK) return report(s, "import-preds");
        std::cout << "imported " << n << " tile(s) into " << preds_out << '\n';
        return kExitOk;
    }

    ContextPtr ctx;
    if (const auto s = open_context(g, ctx); s != AGC_OK) return report(s, "config");
    agc_context* c = ctx.get();
    Owned out;
    agc_status s = AGC_OK;
    if (ingest->parsed()) {
        s = agc_ingest(c, &out.p);
    } else if (terrain->parsed()) {
        s = agc_terrain(c, terrain_dir.empty() ? nullptr : terrain_dir.c_str());
    } else if (cluster->parsed()) {
        s = agc_cluster(c, nullptr, &out.p);
    } else if (sample->parsed()) {
        s = agc_sample(c, nullptr, &out.p);
    } else if (trace->parsed()) {
        if (point) {
            s = agc_trace_point(c, *point, elev, az, &out.p);
        } else if (tx && ty) {
            s = agc_trace_xy(c, *tx, *ty, elev, az, alt, &out.p);
        } else {
            std::cerr << "agc trace: give --point or --x/--y\n" << trace->help();
            return kExitValidation;
        }
    } else if (estimate->parsed()) {
        long failures = 0;
        s = agc_estimate(c, nullptr, &failures);
        if (s == AGC_OK && failures > 0) std::cerr << "agc estimate: " << failures << " link(s) failed\n";
    } else if (map->parsed()) {
        s = agc_map(c, nullptr, &out.p);
    } else if (export_tiles->parsed()) {
        long n = 0;
        s = agc_export_tiles(c, estimates_csv.empty() ? nullptr : estimates_csv.c_str(),
                             tiles_out.empty() ? nullptr : tiles_out.c_str(), ex_elev, ex_az, ex_alt, &n);
        if (s == AGC_OK) std::cout << "wrote " << n << " tile(s)\n";
    }
    if (s != AGC_OK) return report(s, app.get_subcommands().front()->get_name().c_str());
    print_json(out);
    return kExitOk;
}
