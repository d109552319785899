/* Billboard replacement engine: C interface.
 *
 * Every function returns af_status; on failure af_last_error() holds a
 * message for the calling thread. Corner arrays are 8 doubles laid out as
 * x0,y0,...,x3,y3 in top-left, top-right, bottom-right, bottom-left order,
 * in pixel units with pixel (i,j) covering [i,i+1) x [j,j+1).
 * Strings returned through char** are owned by the caller and released with
 * af_string_free.
 */
#ifndef ADFORGE_H
#define ADFORGE_H

#include <stddef.h>

#if defined(ADFORGE_BUILD)
#define AF_API __attribute__((visibility("default")))
#else
#define AF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum af_status {
  AF_OK = 0,
  AF_TOO_SMALL,
  AF_DEGENERATE_CONFIGURATION,
  AF_POINT_AT_INFINITY,
  AF_DEGENERATE_HULL,
  AF_NOT_CONVEX,
  AF_NO_REGION,
  AF_REGION_TOO_SMALL,
  AF_MISSING_HEATMAP,
  AF_DIMENSION_MISMATCH,
  AF_MALFORMED_PGM,
  AF_TRUNCATED_DATA,
  AF_NO_FEATURES,
  AF_TRACKING_LOST,
  AF_EMPTY_OMEGA,
  AF_OMEGA_TOUCHES_BORDER,
  AF_NO_CONVERGENCE,
  AF_UNSUPPORTED_COLOR_SPACE,
  AF_MALFORMED_HEADER,
  AF_TRUNCATED_FRAME,
  AF_MISSING_FRAME_INDEX,
  AF_UNSUPPORTED_PNG_TYPE,
  AF_SCHEMA_VIOLATION,
  AF_NO_BILLBOARD_FOUND,
  AF_QUAD_OUT_OF_BOUNDS,
  AF_INVALID_ARGUMENT,
  AF_IO_ERROR,
  AF_CANCELLED,
  AF_INTERNAL
} af_status;

AF_API const char* af_status_name(af_status status);
AF_API const char* af_last_error(void);
AF_API const char* af_version(void);
AF_API void af_string_free(char* s);

/* A render job: one video, one advert, detector and render options. */
typedef struct af_job af_job;

AF_API af_status af_job_create(af_job** out);
AF_API void af_job_destroy(af_job* job);

AF_API af_status af_job_set_video(af_job* job, const char* y4m_path);
AF_API af_status af_job_set_advert(af_job* job, const char* png_path);

/* Overlays a JSON options object: detector, stride, cutoff, threshold,
 * min_area, blend {mode, solver_tolerance, max_iterations}, track {...}. */
AF_API af_status af_job_configure(af_job* job, const char* options_json);

AF_API af_status af_job_set_heatmaps(af_job* job, const char* dir, const char* stem);
AF_API af_status af_job_set_baseline(af_job* job, double r, double g, double b, double sigma);

/* Operator corners; they supersede detection until cleared. */
AF_API af_status af_job_set_corners(af_job* job, int frame, const double corners[8]);
AF_API af_status af_job_clear_corners(af_job* job);

AF_API af_status af_job_detect(af_job* job, int* frame, double corners[8]);

/* Called after each emitted frame. A non-zero return cancels the render. */
typedef int (*af_progress_fn)(int frames_done, int frame_count, void* user);

AF_API af_status af_job_render(af_job* job, const char* out_y4m, af_progress_fn progress, void* user);

/* Report of the last successful render. */
AF_API af_status af_job_report_json(const af_job* job, char** out);

AF_API af_status af_corners_read(const char* path, int* frame, double corners[8]);
AF_API af_status af_corners_write(const char* path, int frame, const double corners[8]);

/* Writes video.y4m, heatmaps/, truth.json, billboard.png and advert.png. */
AF_API af_status af_synth_generate(const char* spec_json, const char* out_dir);

/* HTTP job service. Config keys: video_dir, advert_dir, heatmap_root,
 * work_dir, retention_seconds, defaults (job options as above). */
typedef struct af_service af_service;

AF_API af_status af_service_create(const char* config_json, af_service** out);
AF_API void af_service_destroy(af_service* service);

/* Routes one request in-process. */
AF_API af_status af_service_handle(af_service* service, const char* method, const char* path, const char* body,
                                   size_t body_len, int* http_status, char** content_type, char** response,
                                   size_t* response_len);

/* Blocks until af_service_stop is called from another thread. */
AF_API af_status af_service_listen(af_service* service, const char* host, int port);
AF_API void af_service_stop(af_service* service);

#ifdef __cplusplus
}
#endif

#endif
