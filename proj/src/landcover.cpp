// SPDX-License-Identifier: Apache-2.0
#include "agc/landcover.hpp"

#include <cmath>

#include "agc/error.hpp"
#include "agc/raster.hpp"

namespace agc {

ClassTable ClassTable::defaults() {
    struct Row {
        const char* name;
        double canopy;
        bool veg;
        double beta;
    };
    // clang-format off
    static constexpr Row rows[kLandCoverClassCount] = {
        {"temperate_needleleaf_forest",    15.0, true,  -0.10},
        {"taiga_needleleaf_forest",        15.0, true,  -0.10},
        {"tropical_broadleaf_evergreen",   15.0, true,  -0.10},
        {"tropical_broadleaf_deciduous",   15.0, true,  -0.10},
        {"temperate_broadleaf_deciduous",  15.0, true,  -0.10},
        {"mixed_forest",                   15.0, true,  -0.10},
        {"tropical_shrubland",              2.0, true,   0.00},
        {"temperate_shrubland",             2.0, true,   0.00},
        {"tropical_grassland",              0.5, false,  0.00},
        {"temperate_grassland",             0.5, false,  0.00},
        {"polar_shrub_lichen_moss",         2.0, true,   0.00},
        {"polar_grass_lichen_moss",         0.5, false,  0.00},
        {"polar_barren_lichen_moss",        0.0, false,  0.00},
        {"wetland",                         0.5, false,  0.00},
        {"cropland",                        0.5, false,  0.00},
        {"barren",                          0.0, false,  0.00},
        {"urban",                           0.0, false,  0.00},
        {"water",                           0.0, false,  0.50},
        {"snow_ice",                        0.0, false,  0.50},
    };
    // clang-format on
    ClassTable t;
    for (int i = 0; i < kLandCoverClassCount; ++i) {
        auto& c = t.classes_[static_cast<std::size_t>(i)];
        c.class_id = i;
        c.name = rows[i].name;
        c.canopy_height = rows[i].canopy;
        c.is_vegetation = rows[i].veg;
        c.beta_reflect = rows[i].beta;
        if (c.is_vegetation) {
            c.veg_a = 0.25;
            c.veg_b = 0.39;
            c.veg_c = 0.25;
            c.veg_max_db = c.canopy_height >= 10.0 ? 30.0 : 10.0;
        }
    }
    return t;
}

const LandCoverClass& ClassTable::operator[](int class_id) const {
    if (class_id < 0 || class_id >= kLandCoverClassCount) {
        fail(ErrorCode::Validation, "unknown land-cover class " + std::to_string(class_id));
    }
    return classes_[static_cast<std::size_t>(class_id)];
}

LandCoverClass& ClassTable::mutable_class(int class_id) {
    if (class_id < 0 || class_id >= kLandCoverClassCount) {
        fail(ErrorCode::Validation, "unknown land-cover class " + std::to_string(class_id));
    }
    return classes_[static_cast<std::size_t>(class_id)];
}

const LandCoverClass& ClassTable::lookup(double raster_value) const {
    if (raster_value != std::floor(raster_value)) {
        fail(ErrorCode::Validation, "non-integer land-cover value " + std::to_string(raster_value));
    }
    return (*this)[static_cast<int>(raster_value)];
}

void ClassTable::validate() const {
    for (const auto& c : classes_) {
        if (c.beta_reflect < -1.0 || c.beta_reflect > 1.0) {
            fail(ErrorCode::Validation, "class " + c.name + ": beta_reflect outside [-1, 1]");
        }
        if (c.canopy_height < 0.0) {
            fail(ErrorCode::Validation, "class " + c.name + ": negative canopy height");
        }
        if (c.veg_max_db < 0.0) fail(ErrorCode::Validation, "class " + c.name + ": negative veg cap");
    }
}

double effective_height(const RasterGrid& dem, const RasterGrid& landcover, const ClassTable& table,
                        double x, double y) {
    const double ground = sample_height(dem, x, y);
    if (!landcover.contains(x, y)) fail(ErrorCode::OutOfDomain, "land-cover raster does not cover point");
    const auto p = landcover.world_to_pixel(x, y);
    if (!landcover.valid(p.row, p.col)) return ground;
    return ground + table.lookup(landcover.at(p.row, p.col)).canopy_height;
}

}  // namespace agc
