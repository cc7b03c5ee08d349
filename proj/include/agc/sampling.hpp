// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "agc/landcover.hpp"
#include "agc/raster.hpp"
#include "agc/terrain.hpp"

namespace agc {

using FeatureMatrix = std::vector<std::vector<double>>;

struct KMeansResult {
    std::vector<int> assignment;
    FeatureMatrix centroids;
    double inertia = 0.0;
    int iterations = 0;
};

/// Lloyd iterations from k-means++ seeds (mt19937_64). Clusters that empty
/// out are re-seeded with the point farthest from its centroid.
KMeansResult kmeans(const FeatureMatrix& points, int k, std::uint64_t seed, int max_iterations = 100);

/// Mixture coefficients alpha, beta, gamma, delta.
struct MixtureCoeffs {
    double terrain = 0.25;
    double function = 0.25;
    double landcover = 0.25;
    double elevation = 0.25;
    void validate() const;
};

/// Per-category sampling factors. Function ids without an entry weigh 1.
struct FactorTables {
    std::array<double, kWeissClassCount> terrain{1, 1, 1, 1, 1, 1};
    std::array<double, kLandCoverClassCount> landcover{};
    std::map<int, double> function;

    FactorTables() { landcover.fill(1.0); }
    double terrain_at(int t) const;
    double landcover_at(int l) const;
    double function_at(int f) const;
    void validate() const;
};

/// Area-weighted factor means of one cluster.
struct ClusterSummary {
    double size = 0.0;  ///< pixel count N_i
    double omega_terrain = 0.0;
    double omega_function = 0.0;
    double omega_landcover = 0.0;
    double mean_elevation = 0.0;
};

/// W_i = rho_i * (a w_T + b w_F + g w_L + d w_E), with w_E the min-max
/// scaled mean elevation (1 for every cluster when all means coincide).
std::vector<double> cluster_weights(const std::vector<ClusterSummary>& clusters, const MixtureCoeffs& coeffs);

/// Integer split of `total` proportional to `weights`; floors first, then
/// the largest fractional remainders (ties to the lower index).
std::vector<long> largest_remainder(const std::vector<double>& weights, long total);

struct CombinationQuotas {
    std::vector<long> quotas;
    long overflow = 0;  ///< samples beyond s_i forced by the s_min floor
};

/// Splits a cluster quota over its feature combinations with per-combination
/// floor s_min. Floors win when the budget cannot cover them.
CombinationQuotas allocate_combination_quotas(const std::vector<double>& combo_weights, long cluster_quota,
                                              long s_min);

/// Caps each quota at its group's capacity and hands the excess to groups
/// with room left, in proportion to their weights. The total is kept unless
/// every group is full.
std::vector<long> spill_quotas(std::vector<long> quotas, const std::vector<long>& capacity,
                               const std::vector<double>& weights);

struct CandidatePoint {
    double x = 0.0;
    double y = 0.0;
};

struct DrawResult {
    std::vector<std::vector<CandidatePoint>> points;  ///< per group
    std::vector<long> shortfall;                      ///< per group
    long total_shortfall = 0;
};

/// Uniform draws without replacement within each group, greedily rejecting
/// candidates closer than d_min to any retained point (across all groups).
DrawResult draw_points(const std::vector<std::vector<CandidatePoint>>& groups, const std::vector<long>& quotas,
                       double d_min, std::uint64_t seed, long retry_factor = 20);

struct SatGeometry {
    double elevation_deg = 0.0;
    double azimuth_deg = 0.0;
    double altitude_km = 0.0;
    friend bool operator==(const SatGeometry&, const SatGeometry&) = default;
};

struct SatelliteGridSpec {
    double elevation_min = 25.0;
    double elevation_max = 85.0;
    double elevation_step = 15.0;
    double azimuth_min = 0.0;
    double azimuth_max = 300.0;
    double azimuth_step = 60.0;
    std::vector<double> altitudes_km{500.0, 850.0, 1200.0};
};

/// Elevation-major, then azimuth, then altitude.
std::vector<SatGeometry> satellite_grid(const SatelliteGridSpec& spec = {});
std::vector<double> grid_elevations(const SatelliteGridSpec& spec);

struct SamplingConfig {
    MixtureCoeffs coeffs;
    FactorTables factors;
    int clusters = 12;
    long budget = 500;  ///< S
    long s_min = 1;
    double d_min = 0.0;
    std::uint64_t seed = 1;
    SatelliteGridSpec satellites;
};

/// Named presets: "balanced", "los", "reflection".
SamplingConfig sampling_preset(const std::string& name);

/// Per-pixel inputs for clustering. `function` may be absent (all zero).
struct SamplingLayers {
    const RasterGrid* dem = nullptr;
    const RasterGrid* slope = nullptr;
    const RasterGrid* roughness = nullptr;
    const RasterGrid* weiss = nullptr;
    const RasterGrid* landcover = nullptr;
    const RasterGrid* function = nullptr;
};

struct PixelFeatures {
    std::vector<std::size_t> pixels;  ///< raster indices of usable pixels
    std::vector<int> terrain;
    std::vector<int> landcover;
    std::vector<int> function;
    FeatureMatrix features;
};

/// Robust (median/IQR) standardized slope, roughness and elevation plus
/// one-hot terrain, land-cover and function categories.
PixelFeatures build_features(const SamplingLayers& layers);

struct GroundSample {
    long point_id = 0;
    double x = 0.0;
    double y = 0.0;
    int cluster = 0;
    int terrain = 0;
    int landcover = 0;
    int function = 0;
};

struct Combination {
    int cluster = 0;
    int terrain = 0;
    int function = 0;
    int landcover = 0;
    double weight = 0.0;
    long pixel_count = 0;
    long quota = 0;
    long drawn = 0;
};

struct SampleDesign {
    std::vector<ClusterSummary> clusters;
    std::vector<double> weights;
    std::vector<long> quotas;
    std::vector<Combination> combinations;
    std::vector<GroundSample> points;
    std::vector<SatGeometry> geometries;
    RasterGrid cluster_map;  ///< cluster id per DEM pixel, -1 where unusable
    long overflow = 0;
    long shortfall = 0;
};

SampleDesign design_samples(const SamplingLayers& layers, const SamplingConfig& config);

/// One row per ground point; geometries are assigned round-robin.
void write_manifest(const SampleDesign& design, std::ostream& out);
struct ManifestRow {
    GroundSample point;
    SatGeometry geometry;
};
std::vector<ManifestRow> read_manifest(std::istream& in);

}  // namespace agc
