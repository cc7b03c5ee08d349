// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "agc/diffusion.hpp"
#include "agc/raster.hpp"

namespace agc {

inline constexpr std::uint32_t kTileVersion = 1;
inline constexpr std::uint32_t kTileCondChannels = 5;
inline constexpr int kTilePlaneCount = 7;
inline constexpr std::uint32_t kTileFlagPrediction = 1u;  ///< obs_z holds a dense prediction

/// Sidecar metadata (<name>.meta.json).
struct TileMeta {
    double elev_deg = 0.0;
    double az_deg = 0.0;
    double alt_km = 0.0;
    NormalizerState normalizer;
    double origin_x = 0.0;  ///< lower-left corner
    double origin_y = 0.0;
    double cell_size = 1.0;
};

/// One AGX1 tile: planes are H*W row-major from the north-west corner.
struct TileSample {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t flags = 0;
    std::vector<float> dem_norm;
    std::vector<float> slope_norm;
    std::vector<float> aspect_sin;
    std::vector<float> aspect_cos;
    std::vector<float> landcover;
    std::vector<float> obs_z;
    std::vector<float> mask;
    TileMeta meta;

    TileSample() = default;
    TileSample(std::uint32_t h, std::uint32_t w);
    std::vector<float>& plane(int i);
    const std::vector<float>& plane(int i) const;
    double observed_fraction() const;
    void validate() const;
};

void write_tile_payload(const TileSample& tile, std::ostream& out);
TileSample read_tile_payload(std::istream& in, const std::string& source_name = "<stream>");

/// Tile file plus sidecar; the sidecar sits next to it as <stem>.meta.json.
void write_tile(const TileSample& tile, const std::filesystem::path& path);
TileSample read_tile(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& tile_path);

struct Observation {
    double x = 0.0;
    double y = 0.0;
    double excess_db = 0.0;
};

struct TileExportInputs {
    const RasterGrid* dem = nullptr;
    const RasterGrid* slope = nullptr;
    const RasterGrid* aspect = nullptr;
    const std::vector<std::uint8_t>* flat = nullptr;
    const RasterGrid* landcover = nullptr;  ///< optional
    std::vector<Observation> observations;
    NormalizerState normalizer;
    double elev_deg = 0.0;
    double az_deg = 0.0;
    double alt_km = 0.0;
    std::uint32_t tile_size = 256;
};

/// Cuts the region into tiles (edge tiles keep their true size). DEM is
/// scaled between its 1st and 99th percentiles, slope by 90 degrees,
/// aspect as (sin, cos) with flat pixels at (0, 0).
std::vector<TileSample> build_tiles(const TileExportInputs& inputs);
std::vector<std::filesystem::path> export_tiles(const TileExportInputs& inputs, const std::filesystem::path& out_dir,
                                                const std::string& prefix = "tile");

/// Denormalized obs_z plane in dB; pixels with mask 0 are nodata.
RasterGrid tile_to_raster(const TileSample& tile);
std::vector<RasterGrid> import_predictions(const std::vector<std::filesystem::path>& files);

}  // namespace agc
