// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "agc/geometry.hpp"
#include "agc/landcover.hpp"
#include "agc/ray_tracer.hpp"

namespace agc {

/// Free-space path loss in dB.
double fspl_db(double frequency_hz, double distance_m);

/// ITU single knife-edge approximation J(nu); 0 dB for nu <= -0.78.
double knife_edge_loss(double nu);

/// Fresnel-Kirchhoff parameter of an edge `height` above the direct ray
/// (negative = below) at distances d1, d2 from the terminals.
double fresnel_nu(double height, double d1, double d2, double wavelength);

struct BullingtonResult {
    double loss_db = 0.0;
    double edge_loss_db = 0.0;     ///< equivalent knife-edge term
    double spherical_delta_db = 0.0;
    double nu = 0.0;
    double edge_distance = 0.0;    ///< UT-side distance of the equivalent edge, m
    double edge_height = 0.0;      ///< height above the direct ray, m
};

/// Bullington equivalent-edge diffraction over an obstruction profile, plus
/// the smooth-earth delta term. Empty profiles give 0 dB.
BullingtonResult bullington(const PathProfile& profile, const LinkSpec& link);
inline double bullington_loss(const PathProfile& profile, const LinkSpec& link) {
    return bullington(profile, link).loss_db;
}

struct VegSegment {
    double s_in = 0.0;
    double s_out = 0.0;
    int landcover = -1;
};

/// Classifies a slant distance along the path. Negative ids mean "not in
/// vegetation" (open ground or the ray above the canopy).
using TypeOracle = std::function<int(double)>;
using VegetationPredicate = std::function<bool(int)>;

/// Coarse stepping at `step` with bisection to `tolerance` at every type
/// change; segments still open at `s_max` are closed there.
std::vector<VegSegment> segment_vegetation(const TypeOracle& type_at, double s_max, double step,
                                           double tolerance, const VegetationPredicate& is_vegetation);

/// Per-segment a*f_MHz^b*d^c, each saturated at the class cap, summed.
double vegetation_loss(const std::vector<VegSegment>& segments, double frequency_hz,
                       const ClassTable& classes);

struct WeatherRecord {
    double x = 0.0;
    double y = 0.0;
    double rain_mm_h = 0.0;
    double cloud_lwc = 0.0;   ///< columnar liquid water, kg/m^2
    double temp_c = 15.0;
    double pressure_hpa = 1013.25;
};

/// One frequency row of the atmospheric table.
struct AtmosphereRow {
    double frequency_ghz = 0.0;
    double gas_zenith_db = 0.0;   ///< at 1013.25 hPa
    double cloud_coeff = 0.0;     ///< dB per kg/m^2 of columnar liquid water
    double rain_k = 0.0;
    double rain_alpha = 1.0;
};

struct AtmosphereTable {
    std::vector<AtmosphereRow> rows;  ///< ascending frequency
    double rain_height_km = 3.0;

    static AtmosphereTable defaults();
    /// Log-frequency interpolation between rows, clamped at the ends.
    AtmosphereRow at(double frequency_hz) const;
};

/// Rain specific attenuation k * R^alpha, dB/km.
double rain_specific_attenuation(double k, double alpha, double rain_mm_h);

struct AtmosphereBreakdown {
    double gas_db = 0.0;
    double cloud_db = 0.0;
    double rain_db = 0.0;
    double total() const { return gas_db + cloud_db + rain_db; }
};

/// Zenith terms scaled by the cosecant of the elevation.
AtmosphereBreakdown atmosphere_breakdown(double elevation_deg, double frequency_hz,
                                         const WeatherRecord& weather, const AtmosphereTable& table);
inline double atmosphere_loss(double elevation_deg, double frequency_hz, const WeatherRecord& weather,
                              const AtmosphereTable& table) {
    return atmosphere_breakdown(elevation_deg, frequency_hz, weather, table).total();
}

struct TwdpResult {
    double k_db = 0.0;
    double delta = 0.0;
    double mean_power = 0.0;    ///< linear, phase-averaged envelope power
    double multipath_db = 0.0;  ///< positive = fade, negative = gain
};

inline constexpr int kTwdpQuadraturePoints = 256;

/// Two-wave-with-diffuse-power statistics from the direct path, the
/// strongest reflection (dB, optional) and the diffuse power (dB).
TwdpResult twdp_stats(double direct_power_db, std::optional<double> reflection_power_db,
                      double diffuse_power_db);

}  // namespace agc
