// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agc/losses.hpp"
#include "agc/ray_tracer.hpp"
#include "agc/reflection.hpp"
#include "agc/sampling.hpp"

namespace agc {

struct EngineConfig {
    TraceOptions trace;
    double frequency_hz = 12e9;
    double ut_height_agl = 1.5;
    double veg_step_m = 0.0;       ///< slant step of the vegetation scan; 0 = one cell
    double veg_tolerance_m = 0.0;  ///< bisection tolerance; 0 = cell / 20
    AtmosphereTable atmosphere = AtmosphereTable::defaults();
    ReflectionWeights reflection_weights;
    RingOptions rings;
    bool reflections = true;
    double diffuse_db = -20.0;  ///< diffuse power relative to the direct path
    unsigned threads = 0;       ///< 0 = hardware concurrency
    double map_cell_size = 0.0; ///< heat-map resolution; 0 = DEM cell
    double idw_power = 2.0;
};

/// Loaded rasters and weather shared by every link of a run.
class Scene {
public:
    Scene(std::shared_ptr<const Terrain> terrain, std::vector<WeatherRecord> weather = {});

    const Terrain& terrain() const { return *terrain_; }
    const std::vector<WeatherRecord>& weather() const { return weather_; }
    /// Nearest weather record, or clear standard conditions when none loaded.
    WeatherRecord weather_at(double x, double y) const;
    /// Built on first use from the DEM and land-cover mosaics.
    const ReflectionSurface& reflection_surface(const ReflectionWeights& weights) const;

private:
    std::shared_ptr<const Terrain> terrain_;
    std::vector<WeatherRecord> weather_;
    mutable std::once_flag surface_once_;
    mutable std::unique_ptr<ReflectionSurface> surface_;
};

struct LossBreakdown {
    double fspl_db = 0.0;
    double diffraction_db = 0.0;
    double vegetation_db = 0.0;
    double atmosphere_db = 0.0;
    double multipath_db = 0.0;
    double total_excess_db = 0.0;
    double total_db = 0.0;
};

struct ChannelEstimate {
    long point_id = -1;
    LinkSpec link;
    Verdict verdict = Verdict::Los;
    LossBreakdown breakdown;
    PathProfile profile;
    std::vector<VegSegment> vegetation;
    AtmosphereBreakdown atmosphere;
    std::optional<ReflectionCandidate> reflection;
    TwdpResult twdp;
    std::string timestamp;
};

/// Vegetation type along the slant path: the class id where the ray runs
/// inside a canopy, -1 elsewhere.
TypeOracle canopy_oracle(const PathProfile& profile, const Terrain& terrain, bool earth_curvature = true);

/// Profile for the diffraction model with vegetation extinction removed:
/// entries within `slack_m` of a vegetation segment are re-evaluated against
/// bare ground and dropped once they no longer obstruct.
PathProfile bare_terrain_profile(const PathProfile& profile, const std::vector<VegSegment>& vegetation,
                                 double rho_threshold, double slack_m);

ChannelEstimate estimate_link(const LinkSpec& link, const Scene& scene, const EngineConfig& config);

struct LinkTask {
    long point_id = 0;
    double x = 0.0;
    double y = 0.0;
    SatGeometry geometry;
};

struct LinkOutcome {
    LinkTask task;
    std::optional<ChannelEstimate> estimate;
    std::string error;
};

/// Runs every task across `threads` workers; results keep task order.
std::vector<LinkOutcome> run_links(const std::vector<LinkTask>& tasks, const Scene& scene, const EngineConfig& config);

/// Every point crossed with every geometry.
std::vector<LinkTask> cross_tasks(const std::vector<GroundSample>& points, const std::vector<SatGeometry>& geometries);

struct ElevationStats {
    long links = 0;
    long nlos = 0;
    double rate() const { return links > 0 ? static_cast<double>(nlos) / static_cast<double>(links) : 0.0; }
    double mean_excess_db = 0.0;
};

struct RegionReport {
    std::map<double, ElevationStats> by_elevation;
    std::map<double, RasterGrid> attenuation;  ///< IDW of per-point mean excess, per elevation
    std::vector<LinkOutcome> outcomes;
    long failures = 0;
};

RegionReport region_sweep(const std::vector<GroundSample>& points, const std::vector<SatGeometry>& geometries,
                          const Scene& scene, const EngineConfig& config);

struct IdwSample {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
};

/// Inverse-distance-weighted rendering over `extent`. Pixels containing a
/// sample take that sample's value.
RasterGrid idw_raster(const std::vector<IdwSample>& samples, const BoundingBox& extent, double cell_size,
                      double power = 2.0);

std::vector<WeatherRecord> read_weather_csv(std::istream& in);

/// JSON text for one traced link (keys sorted).
std::string trace_json(long point_id, const LinkSpec& link, const PathProfile& profile);
std::string estimate_json(const ChannelEstimate& e);
void write_estimates_csv(const std::vector<LinkOutcome>& outcomes, std::ostream& out);

struct EstimateRow {
    long point_id = 0;
    double x = 0.0;
    double y = 0.0;
    SatGeometry geometry;
    bool ok = false;  ///< false for rows that carry an error
    Verdict verdict = Verdict::Los;
    double total_excess_db = 0.0;
};
std::vector<EstimateRow> read_estimates_csv(std::istream& in);

}  // namespace agc
