// SPDX-License-Identifier: Apache-2.0
#include "agc/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "agc/error.hpp"
#include "agc/text.hpp"

namespace agc {

namespace {

enum class Kind { Text, Number, Integer, Bool, Array };

struct KeySpec {
    const char* key;
    Kind kind;
    const char* fallback;
};

// clang-format off
const KeySpec kKeys[] = {
    {"paths.data_dir", Kind::Text, ""},
    {"paths.dem", Kind::Text, ""},
    {"paths.landcover", Kind::Text, ""},
    {"paths.function", Kind::Text, ""},
    {"paths.weather", Kind::Text, ""},
    {"paths.manifest", Kind::Text, ""},
    {"paths.out", Kind::Text, "out"},
    {"run.seed", Kind::Integer, "1"},
    {"run.threads", Kind::Integer, "0"},
    {"raster.dem_min_m", Kind::Number, "-500"},
    {"raster.dem_max_m", Kind::Number, "9000"},
    {"terrain.ridge_sigma", Kind::Number, "1"},
    {"terrain.valley_sigma", Kind::Number, "-1"},
    {"terrain.slope_sigma", Kind::Number, "0.5"},
    {"terrain.slope_flat_deg", Kind::Number, "5"},
    {"terrain.tpi_small_px", Kind::Number, "3"},
    {"terrain.tpi_large_px", Kind::Number, "15"},
    {"sampling.preset", Kind::Text, "balanced"},
    {"sampling.alpha", Kind::Number, "0.25"},
    {"sampling.beta", Kind::Number, "0.25"},
    {"sampling.gamma", Kind::Number, "0.25"},
    {"sampling.delta", Kind::Number, "0.25"},
    {"sampling.S", Kind::Integer, "500"},
    {"sampling.s_min", Kind::Integer, "1"},
    {"sampling.d_min", Kind::Number, "0"},
    {"sampling.k", Kind::Integer, "12"},
    {"factors.terrain", Kind::Array, "[]"},
    {"factors.landcover", Kind::Array, "[]"},
    {"satellites.elev_min", Kind::Number, "25"},
    {"satellites.elev_max", Kind::Number, "85"},
    {"satellites.elev_step", Kind::Number, "15"},
    {"satellites.az_min", Kind::Number, "0"},
    {"satellites.az_max", Kind::Number, "300"},
    {"satellites.az_step", Kind::Number, "60"},
    {"satellites.altitudes_km", Kind::Array, "[500, 850, 1200]"},
    {"link.frequency_hz", Kind::Number, "12e9"},
    {"link.ut_height_agl", Kind::Number, "1.5"},
    {"trace.margin_m", Kind::Number, "100"},
    {"trace.rho_threshold", Kind::Number, "0.6"},
    {"trace.earth_curvature", Kind::Bool, "true"},
    {"losses.diffuse_db", Kind::Number, "-20"},
    {"losses.rain_height_km", Kind::Number, "3"},
    {"losses.veg_step_m", Kind::Number, "0"},
    {"losses.veg_tolerance_m", Kind::Number, "0"},
    {"reflection.enabled", Kind::Bool, "true"},
    {"reflection.w_slope", Kind::Number, "0.4"},
    {"reflection.w_roughness", Kind::Number, "0.4"},
    {"reflection.w_curvature", Kind::Number, "0.2"},
    {"reflection.r_min", Kind::Number, "10"},
    {"reflection.r_max", Kind::Number, "5000"},
    {"reflection.growth", Kind::Number, "1.5"},
    {"reflection.percentile", Kind::Number, "90"},
    {"reflection.floor", Kind::Number, "0.3"},
    {"reflection.tolerance_deg", Kind::Number, "5"},
    {"map.cell_size", Kind::Number, "0"},
    {"map.idw_power", Kind::Number, "2"},
    {"diffusion.schedule", Kind::Text, "cosine"},
    {"diffusion.steps", Kind::Integer, "250"},
    {"diffusion.tile_size", Kind::Integer, "256"},
    {"diffusion.gamma", Kind::Number, "1"},
};
// clang-format on

const char* kClassFields[] = {"canopy_height", "beta", "veg_a", "veg_b", "veg_c", "veg_max_db", "is_vegetation"};

// Kind of a key, including the per-class and per-function patterns.
const KeySpec* find_key(const std::string& key, KeySpec& dynamic) {
    for (const auto& k : kKeys) {
        if (key == k.key) return &k;
    }
    if (key.rfind("landcover.", 0) == 0) {
        const auto rest = key.substr(10);
        const auto dot = rest.find('.');
        if (dot != std::string::npos) {
            const auto id = rest.substr(0, dot);
            const auto field = rest.substr(dot + 1);
            const bool numeric = !id.empty() && id.find_first_not_of("0123456789") == std::string::npos;
            for (const char* f : kClassFields) {
                if (numeric && field == f) {
                    dynamic = {nullptr, field == "is_vegetation" ? Kind::Bool : Kind::Number, ""};
                    return &dynamic;
                }
            }
        }
    }
    if (key.rfind("factors.function.", 0) == 0) {
        const auto id = key.substr(17);
        if (!id.empty() && id.find_first_not_of("-0123456789") == std::string::npos) {
            dynamic = {nullptr, Kind::Number, ""};
            return &dynamic;
        }
    }
    return nullptr;
}

std::vector<double> parse_array(const std::string& raw, const std::string& key) {
    const auto t = trim(raw);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
        fail(ErrorCode::Validation, key + ": expected an array like [1, 2, 3], got '" + raw + "'");
    }
    std::vector<double> out;
    const auto inner = trim(t.substr(1, t.size() - 2));
    if (inner.empty()) return out;
    for (const auto& f : split_csv_line(inner)) out.push_back(parse_double(f, key));
    return out;
}

bool parse_bool(const std::string& raw, const std::string& key) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    fail(ErrorCode::Validation, key + ": expected true or false, got '" + raw + "'");
}

void check_value(const std::string& key, Kind kind, const std::string& value) {
    try {
        switch (kind) {
            case Kind::Text: break;
            case Kind::Number: {
                const double v = parse_double(value, key);
                if (!std::isfinite(v)) fail(ErrorCode::Validation, key + " must be finite");
                break;
            }
            case Kind::Integer: parse_long(value, key); break;
            case Kind::Bool: parse_bool(value, key); break;
            case Kind::Array: parse_array(value, key); break;
        }
    } catch (const Error& e) {
        fail(ErrorCode::Validation, std::string("invalid value for ") + key + ": " + e.what());
    }
}

std::string unquote(std::string_view v, const std::string& where) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
        if (v.back() != v.front()) fail(ErrorCode::Parse, where + ": unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v.front() == '"' && v[i] == '\\' && i + 2 < v.size()) {
                const char n = v[++i];
                out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
            } else {
                out.push_back(v[i]);
            }
        }
        return out;
    }
    return std::string(v);
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == '\\' && quote == '"') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            }
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

}  // namespace

std::map<std::string, std::string> parse_toml(std::istream& in, const std::string& source_name) {
    std::map<std::string, std::string> out;
    std::string section;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = source_name + ":" + std::to_string(line_no);
        const auto body = trim(strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']' || body.size() < 3) fail(ErrorCode::Parse, where + ": malformed table header");
            section = std::string(trim(body.substr(1, body.size() - 2)));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) fail(ErrorCode::Parse, where + ": expected key = value");
        const auto key = std::string(trim(body.substr(0, eq)));
        const auto value = trim(body.substr(eq + 1));
        if (key.empty() || value.empty()) fail(ErrorCode::Parse, where + ": empty key or value");
        const auto full = section.empty() ? key : section + "." + key;
        if (out.count(full)) fail(ErrorCode::Parse, where + ": duplicate key " + full);
        out[full] = unquote(value, where);
    }
    return out;
}

RunConfig::RunConfig() {
    for (const auto& k : kKeys) values_[k.key] = k.fallback;
    if (const char* root = std::getenv("AGC_DATA_DIR")) values_["paths.data_dir"] = root;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open config " + path.string());
    RunConfig cfg;
    for (const auto& [k, v] : parse_toml(in, path.string())) cfg.set(k, v);
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    KeySpec dynamic{};
    const auto* spec = find_key(key, dynamic);
    if (!spec) fail(ErrorCode::Validation, "unknown config key '" + key + "'");
    check_value(key, spec->kind, value);
    values_[key] = value;
    explicit_.insert(key);
}

std::string RunConfig::text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) fail(ErrorCode::Validation, "config key '" + key + "' not set");
    return it->second;
}

double RunConfig::number(const std::string& key) const { return parse_double(text(key), key); }
long RunConfig::integer(const std::string& key) const { return parse_long(text(key), key); }
bool RunConfig::boolean(const std::string& key) const { return parse_bool(text(key), key); }
std::vector<double> RunConfig::numbers(const std::string& key) const { return parse_array(text(key), key); }

std::filesystem::path RunConfig::path(const std::string& key) const {
    const std::filesystem::path p = text(key);
    const bool input = key == "paths.dem" || key == "paths.landcover" || key == "paths.function" || key == "paths.weather";
    if (!input || p.empty() || p.is_absolute()) return p;
    const std::filesystem::path root = text("paths.data_dir");
    return root.empty() ? p : root / p;
}

std::uint64_t RunConfig::seed() const {
    const long s = integer("run.seed");
    if (s < 0) fail(ErrorCode::Validation, "run.seed must be non-negative");
    return static_cast<std::uint64_t>(s);
}

ClassTable RunConfig::classes() const {
    auto table = ClassTable::defaults();
    for (const auto& [key, value] : values_) {
        if (key.rfind("landcover.", 0) != 0) continue;
        const auto rest = key.substr(10);
        const auto dot = rest.find('.');
        const long id = parse_long(rest.substr(0, dot), key);
        if (id < 0 || id >= kLandCoverClassCount) fail(ErrorCode::Validation, key + ": class id must be 0..18");
        auto& c = table.mutable_class(static_cast<int>(id));
        const auto field = rest.substr(dot + 1);
        if (field == "is_vegetation") {
            c.is_vegetation = parse_bool(value, key);
            continue;
        }
        const double v = parse_double(value, key);
        if (field == "canopy_height") c.canopy_height = v;
        if (field == "beta") c.beta_reflect = v;
        if (field == "veg_a") c.veg_a = v;
        if (field == "veg_b") c.veg_b = v;
        if (field == "veg_c") c.veg_c = v;
        if (field == "veg_max_db") c.veg_max_db = v;
    }
    table.validate();
    return table;
}

DemWindow RunConfig::dem_window() const {
    const DemWindow w{number("raster.dem_min_m"), number("raster.dem_max_m")};
    if (!(w.max_m > w.min_m)) fail(ErrorCode::Validation, "raster.dem_max_m must exceed raster.dem_min_m");
    return w;
}

WeissThresholds RunConfig::weiss() const {
    WeissThresholds t;
    t.ridge_sigma = number("terrain.ridge_sigma");
    t.valley_sigma = number("terrain.valley_sigma");
    t.slope_sigma = number("terrain.slope_sigma");
    t.slope_flat_deg = number("terrain.slope_flat_deg");
    t.small_radius_px = number("terrain.tpi_small_px");
    t.large_radius_px = number("terrain.tpi_large_px");
    if (!(t.small_radius_px >= 1.0) || !(t.large_radius_px > t.small_radius_px)) {
        fail(ErrorCode::Validation, "terrain.tpi_small_px must be >= 1 and below terrain.tpi_large_px");
    }
    return t;
}

SamplingConfig RunConfig::sampling() const {
    SamplingConfig c;
    try {
        c = sampling_preset(text("sampling.preset"));
    } catch (const Error& e) {
        fail(ErrorCode::Validation, e.what());
    }
    if (is_explicit("sampling.alpha")) c.coeffs.terrain = number("sampling.alpha");
    if (is_explicit("sampling.beta")) c.coeffs.function = number("sampling.beta");
    if (is_explicit("sampling.gamma")) c.coeffs.landcover = number("sampling.gamma");
    if (is_explicit("sampling.delta")) c.coeffs.elevation = number("sampling.delta");
    c.budget = integer("sampling.S");
    c.s_min = integer("sampling.s_min");
    c.d_min = number("sampling.d_min");
    c.clusters = static_cast<int>(integer("sampling.k"));
    c.seed = seed();
    const auto ft = numbers("factors.terrain");
    if (!ft.empty()) {
        if (ft.size() != c.factors.terrain.size()) fail(ErrorCode::Validation, "factors.terrain needs 6 values");
        std::copy(ft.begin(), ft.end(), c.factors.terrain.begin());
    }
    const auto fl = numbers("factors.landcover");
    if (!fl.empty()) {
        if (fl.size() != c.factors.landcover.size()) fail(ErrorCode::Validation, "factors.landcover needs 19 values");
        std::copy(fl.begin(), fl.end(), c.factors.landcover.begin());
    }
    for (const auto& [key, value] : values_) {
        if (key.rfind("factors.function.", 0) == 0) {
            c.factors.function[static_cast<int>(parse_long(key.substr(17), key))] = parse_double(value, key);
        }
    }
    c.satellites.elevation_min = number("satellites.elev_min");
    c.satellites.elevation_max = number("satellites.elev_max");
    c.satellites.elevation_step = number("satellites.elev_step");
    c.satellites.azimuth_min = number("satellites.az_min");
    c.satellites.azimuth_max = number("satellites.az_max");
    c.satellites.azimuth_step = number("satellites.az_step");
    c.satellites.altitudes_km = numbers("satellites.altitudes_km");
    if (c.budget < 0) fail(ErrorCode::Validation, "sampling.S must be >= 0");
    if (c.s_min < 0) fail(ErrorCode::Validation, "sampling.s_min must be >= 0");
    if (c.d_min < 0.0) fail(ErrorCode::Validation, "sampling.d_min must be >= 0");
    if (c.clusters < 1) fail(ErrorCode::Validation, "sampling.k must be >= 1");
    try {
        c.coeffs.validate();
        c.factors.validate();
        satellite_grid(c.satellites);
    } catch (const Error& e) {
        fail(ErrorCode::Validation, e.what());
    }
    return c;
}

EngineConfig RunConfig::engine() const {
    EngineConfig e;
    e.trace.segment.margin_m = number("trace.margin_m");
    e.trace.rho_threshold = number("trace.rho_threshold");
    e.trace.earth_curvature = boolean("trace.earth_curvature");
    e.frequency_hz = number("link.frequency_hz");
    e.ut_height_agl = number("link.ut_height_agl");
    e.diffuse_db = number("losses.diffuse_db");
    e.atmosphere.rain_height_km = number("losses.rain_height_km");
    e.veg_step_m = number("losses.veg_step_m");
    e.veg_tolerance_m = number("losses.veg_tolerance_m");
    e.reflections = boolean("reflection.enabled");
    e.reflection_weights = {number("reflection.w_slope"), number("reflection.w_roughness"),
                            number("reflection.w_curvature")};
    e.rings.r_min = number("reflection.r_min");
    e.rings.r_max = number("reflection.r_max");
    e.rings.growth = number("reflection.growth");
    e.rings.percentile = number("reflection.percentile");
    e.rings.r_floor = number("reflection.floor");
    e.rings.tolerance_deg = number("reflection.tolerance_deg");
    e.map_cell_size = number("map.cell_size");
    e.idw_power = number("map.idw_power");
    const long threads = integer("run.threads");
    if (threads < 0) fail(ErrorCode::Validation, "run.threads must be >= 0");
    e.threads = static_cast<unsigned>(threads);
    if (!(e.frequency_hz > 0.0)) fail(ErrorCode::Validation, "link.frequency_hz must be positive");
    if (!(e.ut_height_agl >= 0.0)) fail(ErrorCode::Validation, "link.ut_height_agl must be >= 0");
    if (!(e.trace.segment.margin_m >= 0.0)) fail(ErrorCode::Validation, "trace.margin_m must be >= 0");
    if (!(e.atmosphere.rain_height_km >= 0.0)) fail(ErrorCode::Validation, "losses.rain_height_km must be >= 0");
    if (e.veg_step_m < 0.0 || e.veg_tolerance_m < 0.0 ||
        (e.veg_step_m > 0.0 && e.veg_tolerance_m > 0.0 && !(e.veg_step_m > e.veg_tolerance_m))) {
        fail(ErrorCode::Validation, "losses.veg_step_m must exceed losses.veg_tolerance_m");
    }
    try {
        e.reflection_weights.validate();
        ring_radii(e.rings);
    } catch (const Error& err) {
        fail(ErrorCode::Validation, err.what());
    }
    if (!(e.rings.percentile >= 0.0 && e.rings.percentile <= 100.0)) {
        fail(ErrorCode::Validation, "reflection.percentile must be in [0, 100]");
    }
    if (e.map_cell_size < 0.0 || !(e.idw_power > 0.0)) {
        fail(ErrorCode::Validation, "map.cell_size must be >= 0 and map.idw_power > 0");
    }
    return e;
}

NoiseSchedule RunConfig::schedule() const {
    const long steps = integer("diffusion.steps");
    if (steps < 1) fail(ErrorCode::Validation, "diffusion.steps must be >= 1");
    ScheduleKind kind{};
    try {
        kind = parse_schedule_kind(text("diffusion.schedule"));
    } catch (const Error& e) {
        fail(ErrorCode::Validation, e.what());
    }
    return kind == ScheduleKind::Cosine ? NoiseSchedule::cosine(static_cast<int>(steps))
                                        : NoiseSchedule::linear(static_cast<int>(steps));
}

void RunConfig::validate() const {
    classes();
    weiss();
    sampling();
    engine();
    schedule();
    seed();
    if (integer("diffusion.tile_size") < 1) fail(ErrorCode::Validation, "diffusion.tile_size must be >= 1");
    if (!(number("diffusion.gamma") > 0.0)) fail(ErrorCode::Validation, "diffusion.gamma must be positive");
    dem_window();
}

std::string RunConfig::lock_json() const {
    nlohmann::json j;
    for (const auto& [k, v] : values_) j["config"][k] = v;
    j["explicit"] = std::vector<std::string>(explicit_.begin(), explicit_.end());
    j["format"] = "agc-run-lock/1";
    return j.dump(2);
}

}  // namespace agc
