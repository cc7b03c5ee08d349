/* SPDX-License-Identifier: Apache-2.0 */
#ifndef AGC_AGC_H
#define AGC_AGC_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(AGC_BUILDING_LIBRARY)
#define AGC_API __declspec(dllexport)
#else
#define AGC_API __declspec(dllimport)
#endif
#else
#define AGC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum agc_status {
    AGC_OK = 0,
    AGC_ERR_INVALID_ARGUMENT = 1,
    AGC_ERR_PARSE = 2,
    AGC_ERR_VALIDATION = 3,
    AGC_ERR_OUT_OF_DOMAIN = 4,
    AGC_ERR_NODATA = 5,
    AGC_ERR_COVERAGE = 6,
    AGC_ERR_GEOMETRY = 7,
    AGC_ERR_CHECKSUM = 8,
    AGC_ERR_IO = 9,
    AGC_ERR_SIZE = 10,
    AGC_ERR_FIT = 11,
    AGC_ERR_UNDEFINED_CORRELATION = 12,
    AGC_ERR_RUNTIME = 13,
    AGC_ERR_INTERNAL = 14
} agc_status;

typedef struct agc_context agc_context;
typedef struct agc_raster agc_raster;

typedef struct agc_raster_info {
    double origin_x; /* lower-left corner */
    double origin_y;
    double cell_size;
    long width;
    long height;
    double nodata;
} agc_raster_info;

AGC_API const char* agc_version(void);
AGC_API const char* agc_status_name(agc_status status);
/* Message of the last failure on the calling thread; "" after a success. */
AGC_API const char* agc_last_error(void);
/* Releases strings returned through char** out-parameters. */
AGC_API void agc_free_string(char* s);

/* Run context: configuration plus lazily loaded inputs.
   config_path may be NULL for built-in defaults. */
AGC_API agc_status agc_context_create(const char* config_path, agc_context** out);
AGC_API void agc_context_destroy(agc_context* ctx);
/* Overrides one config key (e.g. "sampling.S", "run.seed"); drops cached inputs. */
AGC_API agc_status agc_context_set(agc_context* ctx, const char* key, const char* value);
AGC_API agc_status agc_context_get(const agc_context* ctx, const char* key, char** out);
AGC_API agc_status agc_context_validate(const agc_context* ctx);
AGC_API agc_status agc_context_write_lock(const agc_context* ctx, const char* path);

/* Pipeline stages. Outputs go under paths.out unless a path is given. */
AGC_API agc_status agc_ingest(agc_context* ctx, char** report_json);
AGC_API agc_status agc_terrain(agc_context* ctx, const char* out_dir);
AGC_API agc_status agc_cluster(agc_context* ctx, const char* out_dir, char** summary_json);
AGC_API agc_status agc_sample(agc_context* ctx, const char* manifest_path, char** summary_json);
/* point_id refers to paths.manifest; the satellite altitude is taken from its row. */
AGC_API agc_status agc_trace_point(agc_context* ctx, long point_id, double elev_deg, double az_deg, char** json);
AGC_API agc_status agc_trace_xy(agc_context* ctx, double x, double y, double elev_deg, double az_deg, double alt_km,
                                char** json);
/* One link per manifest row: estimates.csv and estimates.jsonl in out_dir. */
AGC_API agc_status agc_estimate(agc_context* ctx, const char* out_dir, long* failures);
/* Manifest points crossed with the satellite grid: per-elevation attenuation
   rasters and obstruction.csv in out_dir. */
AGC_API agc_status agc_map(agc_context* ctx, const char* out_dir, char** summary_json);
/* Observations come from estimates_csv rows matching the geometry, or, when
   estimates_csv is NULL, from tracing every manifest point at that geometry. */
AGC_API agc_status agc_export_tiles(agc_context* ctx, const char* estimates_csv, const char* out_dir,
                                    double elev_deg, double az_deg, double alt_km, long* tile_count);
AGC_API agc_status agc_import_predictions(const char* tiles_dir, const char* out_dir, long* raster_count);
/* metric: "pearson" or "sign". column may be NULL (first column); window > 1
   applies a centred moving average before differencing. */
AGC_API agc_status agc_metrics_files(const char* metric, const char* a_csv, const char* b_csv, const char* column,
                                     long window, char** json);

/* Numerical helpers. */
AGC_API agc_status agc_pearson(const double* x, const double* y, size_t n, double* r, double* p_value);
AGC_API agc_status agc_sign_agreement(const double* x, const double* y, size_t n, double* out);
AGC_API double agc_fspl_db(double frequency_hz, double distance_m);
AGC_API double agc_knife_edge_db(double nu);
AGC_API double agc_slant_range_km(double elevation_deg, double altitude_km);
AGC_API double agc_curvature_correction(double raw_height, double d1, double d2);
AGC_API double agc_fresnel_radius(double wavelength, double d1, double d2);

/* Rasters. band is "dem", "landcover" or "function". */
AGC_API agc_status agc_raster_load(const char* path, const char* band, agc_raster** out);
AGC_API agc_status agc_raster_create(double origin_x, double origin_y, double cell_size, long width, long height,
                                     double nodata, const double* values, agc_raster** out);
AGC_API void agc_raster_destroy(agc_raster* raster);
AGC_API agc_status agc_raster_info_get(const agc_raster* raster, agc_raster_info* out);
/* Row-major from the north-west cell; valid until the raster is destroyed. */
AGC_API const double* agc_raster_values(const agc_raster* raster);
AGC_API agc_status agc_raster_sample(const agc_raster* raster, double x, double y, double* out);
AGC_API agc_status agc_raster_save(const agc_raster* raster, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* AGC_AGC_H */
