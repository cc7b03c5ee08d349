// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>

namespace agc {

class RasterGrid;

inline constexpr int kLandCoverClassCount = 19;

/// Per-class properties used by the ray tracer, reflection map and
/// vegetation loss. Ids follow the 19-class North American land-cover
/// legend shifted to start at zero.
struct LandCoverClass {
    int class_id = 0;
    std::string name;
    double canopy_height = 0.0;  ///< metres above terrain
    bool is_vegetation = false;
    double beta_reflect = 0.0;  ///< linear reflection attenuation coefficient, in [-1, 1]
    // Vegetation extinction fit L = a * f_MHz^b * d^c, saturating at max_db.
    double veg_a = 0.0;
    double veg_b = 0.0;
    double veg_c = 0.0;
    double veg_max_db = 0.0;
};

namespace landcover {
inline constexpr int kNeedleleafTemperate = 0;
inline constexpr int kNeedleleafTaiga = 1;
inline constexpr int kBroadleafEvergreenTropical = 2;
inline constexpr int kBroadleafDeciduousTropical = 3;
inline constexpr int kBroadleafDeciduousTemperate = 4;
inline constexpr int kMixedForest = 5;
inline constexpr int kShrublandTropical = 6;
inline constexpr int kShrublandTemperate = 7;
inline constexpr int kGrasslandTropical = 8;
inline constexpr int kGrasslandTemperate = 9;
inline constexpr int kShrubLichenMossPolar = 10;
inline constexpr int kGrassLichenMossPolar = 11;
inline constexpr int kBarrenLichenMossPolar = 12;
inline constexpr int kWetland = 13;
inline constexpr int kCropland = 14;
inline constexpr int kBarren = 15;
inline constexpr int kUrban = 16;
inline constexpr int kWater = 17;
inline constexpr int kSnowIce = 18;
}  // namespace landcover

class ClassTable {
public:
    /// Shipped defaults: forests 15 m, shrubs 2 m, grass/crop/wetland 0.5 m,
    /// everything else 0 m; water/ice beta +0.5, forests -0.1.
    static ClassTable defaults();

    const LandCoverClass& operator[](int class_id) const;
    LandCoverClass& mutable_class(int class_id);
    /// Class of a raster value; validation error for non-integers or ids outside 0..18.
    const LandCoverClass& lookup(double raster_value) const;
    void validate() const;

private:
    std::array<LandCoverClass, kLandCoverClassCount> classes_{};
};

/// DEM height plus the canopy height of the class at (x, y).
double effective_height(const RasterGrid& dem, const RasterGrid& landcover, const ClassTable& table,
                        double x, double y);

}  // namespace agc
