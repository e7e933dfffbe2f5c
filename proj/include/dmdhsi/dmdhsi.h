/* dmdhsi: DMD-based pushbroom hyperspectral imaging simulator and
 * reconstruction pipeline, exposed as a C shared-library API.
 *
 * All objects are opaque handles created and destroyed by this library.
 * Functions return DMDHSI_OK on success; on failure they return a status
 * code and leave a thread-local message retrievable via dmdhsi_last_error().
 * Output handle parameters are only written on success.
 */

#ifndef DMDHSI_H
#define DMDHSI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DMDHSI_API __declspec(dllexport)
#else
#define DMDHSI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dmdhsi_status {
  DMDHSI_OK = 0,
  DMDHSI_ERR_INVALID_ARGUMENT = 1, /* null handle / bad pointer */
  DMDHSI_ERR_IO = 2,               /* unreadable, unwritable or malformed files */
  DMDHSI_ERR_VALIDATION = 3,       /* precondition or invariant violated */
  DMDHSI_ERR_ALGORITHM = 4,        /* no stripe, no signal, empty reconstruction */
  DMDHSI_ERR_INTERNAL = 5          /* unexpected failure (allocation, logic) */
} dmdhsi_status;

DMDHSI_API const char* dmdhsi_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
DMDHSI_API const char* dmdhsi_last_error(void);

/* ---- opaque handles ---------------------------------------------------- */

typedef struct dmdhsi_cube dmdhsi_cube;     /* spectral datacube */
typedef struct dmdhsi_record dmdhsi_record; /* acquisition record */
typedef struct dmdhsi_plan dmdhsi_plan;     /* scan plan */
typedef struct dmdhsi_labels dmdhsi_labels; /* region label map */
typedef struct dmdhsi_recon dmdhsi_recon;   /* reconstruction result */

/* ---- parameter structs -------------------------------------------------- */

typedef struct dmdhsi_sensor_params {
  int bit_depth;             /* 8, 10, 12 or 16 */
  double full_well_e;        /* electrons at code max */
  double read_noise_sigma_e; /* electrons */
  double gain_e_per_unit_ms; /* electrons per unit radiance per ms */
  double exposure_ms;
  uint64_t seed;
  int shot_noise; /* 0/1 */
  int quantize;   /* 0 = float passthrough frames */
} dmdhsi_sensor_params;

typedef struct dmdhsi_timing_params {
  double dmd_max_pattern_hz;
  double sensor_min_fps;
  double sensor_max_fps;
  double sensor_fps;
  double exposure_ms;
  double overhead_ms;
} dmdhsi_timing_params;

typedef enum dmdhsi_jitter_kind {
  DMDHSI_JITTER_NONE = 0,
  DMDHSI_JITTER_RANDOM_WALK = 1,
  DMDHSI_JITTER_SINUSOID = 2
} dmdhsi_jitter_kind;

typedef struct dmdhsi_jitter_params {
  int kind; /* dmdhsi_jitter_kind */
  double amplitude_px;
  double step_sigma_px;
  int subpixel; /* 0 = integer offsets */
  uint64_t seed;
  double period_frames; /* sinusoid wobble period */
} dmdhsi_jitter_params;

typedef struct dmdhsi_geometry_params {
  int mirror_group;    /* mirror columns per scene pixel, 1 = identity */
  double stripe_alpha; /* slit light leaking into the RGB frame */
  int dmd_width;
  int dmd_height;
} dmdhsi_geometry_params;

typedef struct dmdhsi_recon_options {
  int reference_frame;
  int search_radius;
  double contrast_threshold;
} dmdhsi_recon_options;

typedef struct dmdhsi_canny_params {
  double low;
  double high;
  double blur_sigma;
  int min_area; /* smallest surviving region, pixels */
} dmdhsi_canny_params;

/* Prototype defaults for every struct above. */
DMDHSI_API void dmdhsi_sensor_params_default(dmdhsi_sensor_params* p);
DMDHSI_API void dmdhsi_timing_params_default(dmdhsi_timing_params* p);
DMDHSI_API void dmdhsi_jitter_params_default(dmdhsi_jitter_params* p);
DMDHSI_API void dmdhsi_geometry_params_default(dmdhsi_geometry_params* p);
DMDHSI_API void dmdhsi_recon_options_default(dmdhsi_recon_options* p);
DMDHSI_API void dmdhsi_canny_params_default(dmdhsi_canny_params* p);

/* ---- cubes -------------------------------------------------------------- */

DMDHSI_API dmdhsi_status dmdhsi_cube_read(const char* path, dmdhsi_cube** out);
DMDHSI_API dmdhsi_status dmdhsi_cube_write(const dmdhsi_cube* cube, const char* path);
DMDHSI_API void dmdhsi_cube_free(dmdhsi_cube* cube);

DMDHSI_API int dmdhsi_cube_width(const dmdhsi_cube* cube);
DMDHSI_API int dmdhsi_cube_height(const dmdhsi_cube* cube);
DMDHSI_API int dmdhsi_cube_bands(const dmdhsi_cube* cube);
/* Borrowed pointers, valid until the cube is freed. Data is band-major:
 * data[b * height * width + y * width + x]. */
DMDHSI_API const float* dmdhsi_cube_wavelengths(const dmdhsi_cube* cube);
DMDHSI_API const float* dmdhsi_cube_data(const dmdhsi_cube* cube);

/* Synthesizes a cube from a scene-spec file. seed_override, when
 * non-negative, replaces the seed given in the file. */
DMDHSI_API dmdhsi_status dmdhsi_synth_scene(const char* spec_path,
                                            int64_t seed_override,
                                            dmdhsi_cube** out);

DMDHSI_API dmdhsi_status dmdhsi_cube_rebin(const dmdhsi_cube* cube, int n_bands,
                                           dmdhsi_cube** out);

/* RGB preview under the default Bayer response, written as a binary PPM. */
DMDHSI_API dmdhsi_status dmdhsi_cube_write_preview_ppm(const dmdhsi_cube* cube,
                                                       const char* path);

/* ---- planning and timing ------------------------------------------------ */

DMDHSI_API dmdhsi_status dmdhsi_full_scan_plan(int scene_width, int slit_width,
                                               const dmdhsi_timing_params* timing,
                                               const dmdhsi_geometry_params* geometry,
                                               dmdhsi_plan** out);
DMDHSI_API void dmdhsi_plan_free(dmdhsi_plan* plan);
DMDHSI_API int dmdhsi_plan_pattern_count(const dmdhsi_plan* plan);
DMDHSI_API double dmdhsi_plan_estimate_ms(const dmdhsi_plan* plan);
DMDHSI_API dmdhsi_status dmdhsi_plan_save(const dmdhsi_plan* plan, const char* path);
DMDHSI_API dmdhsi_status dmdhsi_plan_load(const char* path, dmdhsi_plan** out);

/* ---- acquisition -------------------------------------------------------- */

DMDHSI_API dmdhsi_status dmdhsi_acquire(const dmdhsi_cube* scene,
                                        const dmdhsi_plan* plan,
                                        const dmdhsi_sensor_params* sensor,
                                        const dmdhsi_jitter_params* jitter,
                                        const dmdhsi_geometry_params* geometry,
                                        const dmdhsi_timing_params* timing,
                                        dmdhsi_record** out);
DMDHSI_API void dmdhsi_record_free(dmdhsi_record* record);
DMDHSI_API int dmdhsi_record_frame_count(const dmdhsi_record* record);
DMDHSI_API dmdhsi_status dmdhsi_record_save(const dmdhsi_record* record,
                                            const char* dir);
DMDHSI_API dmdhsi_status dmdhsi_record_load(const char* dir, dmdhsi_record** out);

/* ---- reconstruction ------------------------------------------------------ */

/* Assembles the record and fills uncovered columns. */
DMDHSI_API dmdhsi_status dmdhsi_reconstruct(const dmdhsi_record* record,
                                            const dmdhsi_recon_options* options,
                                            dmdhsi_recon** out);
DMDHSI_API void dmdhsi_recon_free(dmdhsi_recon* recon);
DMDHSI_API dmdhsi_status dmdhsi_recon_cube(const dmdhsi_recon* recon,
                                           dmdhsi_cube** out);
DMDHSI_API int dmdhsi_recon_frames_used(const dmdhsi_recon* recon);
DMDHSI_API int dmdhsi_recon_frames_skipped(const dmdhsi_recon* recon);
DMDHSI_API dmdhsi_status dmdhsi_recon_write_diagnostics_csv(const dmdhsi_recon* recon,
                                                            const char* path);

/* ---- regions of interest ------------------------------------------------- */

/* Edge detection + segmentation on the cube's RGB preview luminance. */
DMDHSI_API dmdhsi_status dmdhsi_detect_regions(const dmdhsi_cube* cube,
                                               const dmdhsi_canny_params* params,
                                               dmdhsi_labels** out);
DMDHSI_API void dmdhsi_labels_free(dmdhsi_labels* labels);
DMDHSI_API int dmdhsi_labels_count(const dmdhsi_labels* labels);
DMDHSI_API dmdhsi_status dmdhsi_labels_region_info(const dmdhsi_labels* labels,
                                                   int label, int* pixel_count,
                                                   int* x_min, int* x_max,
                                                   int* y_min, int* y_max);
DMDHSI_API dmdhsi_status dmdhsi_labels_write_pgm(const dmdhsi_labels* labels,
                                                 const char* path);

/* Restricted plan covering the selected labels' columns (all labels when
 * selected is null/empty). */
DMDHSI_API dmdhsi_status dmdhsi_regions_to_plan(const dmdhsi_labels* labels,
                                                const int* selected, int n_selected,
                                                int slit_width, int margin,
                                                const dmdhsi_timing_params* timing,
                                                const dmdhsi_geometry_params* geometry,
                                                dmdhsi_plan** out);

/* Mean spectrum of a block x block square inside the region; out_spectrum
 * must hold dmdhsi_cube_bands(cube) doubles. */
DMDHSI_API dmdhsi_status dmdhsi_region_mean_spectrum(const dmdhsi_cube* cube,
                                                     const dmdhsi_labels* labels,
                                                     int label, int block,
                                                     double* out_spectrum);
DMDHSI_API dmdhsi_status dmdhsi_region_spectrum_csv(const dmdhsi_cube* cube,
                                                    const dmdhsi_labels* labels,
                                                    int label, int block,
                                                    const char* path);

/* ---- evaluation ----------------------------------------------------------- */

DMDHSI_API dmdhsi_status dmdhsi_nrmsd(const dmdhsi_cube* cube,
                                      const dmdhsi_cube* reference, double* out);

/* nrmsd at each band count after rebinning both cubes; out_nrmsd must hold
 * n_counts doubles. */
DMDHSI_API dmdhsi_status dmdhsi_band_sweep(const dmdhsi_cube* truth,
                                           const dmdhsi_cube* recon,
                                           const int* counts, int n_counts,
                                           double* out_nrmsd);
DMDHSI_API dmdhsi_status dmdhsi_band_sweep_csv(const dmdhsi_cube* truth,
                                               const dmdhsi_cube* recon,
                                               const int* counts, int n_counts,
                                               const char* path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DMDHSI_H */
