#include "dmdhsi/dmdhsi.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "core/controller.hpp"
#include "core/cube.hpp"
#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/optics.hpp"
#include "core/reconstruct.hpp"
#include "core/roi.hpp"
#include "core/scene.hpp"

struct dmdhsi_cube {
  dmdhsi::SpectralCube cube;
};
struct dmdhsi_plan {
  dmdhsi::ScanPlan plan;
};
struct dmdhsi_record {
  dmdhsi::AcquisitionResult result;  // carries the test-only jitter log for save/load
};
struct dmdhsi_labels {
  dmdhsi::RegionLabelMap map;
};
struct dmdhsi_recon {
  dmdhsi::ReconstructedCube recon;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
dmdhsi_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DMDHSI_OK;
  } catch (const dmdhsi::IoError& e) {
    g_last_error = e.what();
    return DMDHSI_ERR_IO;
  } catch (const dmdhsi::ValidationError& e) {
    g_last_error = e.what();
    return DMDHSI_ERR_VALIDATION;
  } catch (const dmdhsi::AlgorithmError& e) {
    g_last_error = e.what();
    return DMDHSI_ERR_ALGORITHM;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DMDHSI_ERR_INTERNAL;
  }
}

dmdhsi_status bad_argument(const char* msg) {
  g_last_error = msg;
  return DMDHSI_ERR_INVALID_ARGUMENT;
}

dmdhsi::SensorParams to_core(const dmdhsi_sensor_params& p) {
  dmdhsi::SensorParams s;
  s.bit_depth = p.bit_depth;
  s.full_well_e = p.full_well_e;
  s.read_noise_sigma_e = p.read_noise_sigma_e;
  s.gain_e_per_unit_ms = p.gain_e_per_unit_ms;
  s.exposure_ms = p.exposure_ms;
  s.seed = p.seed;
  s.shot_noise = p.shot_noise != 0;
  s.quantize = p.quantize != 0;
  return s;
}

dmdhsi::TimingParams to_core(const dmdhsi_timing_params& p) {
  dmdhsi::TimingParams t;
  t.dmd_max_pattern_hz = p.dmd_max_pattern_hz;
  t.sensor_min_fps = p.sensor_min_fps;
  t.sensor_max_fps = p.sensor_max_fps;
  t.sensor_fps = p.sensor_fps;
  t.exposure_ms = p.exposure_ms;
  t.overhead_ms = p.overhead_ms;
  return t;
}

dmdhsi::JitterModel to_core(const dmdhsi_jitter_params& p) {
  dmdhsi::JitterModel j;
  switch (p.kind) {
    case DMDHSI_JITTER_RANDOM_WALK:
      j.kind = dmdhsi::JitterModel::Kind::random_walk;
      break;
    case DMDHSI_JITTER_SINUSOID:
      j.kind = dmdhsi::JitterModel::Kind::sinusoid;
      break;
    default:
      j.kind = dmdhsi::JitterModel::Kind::none;
      break;
  }
  j.amplitude_px = p.amplitude_px;
  j.step_sigma_px = p.step_sigma_px;
  j.subpixel = p.subpixel != 0;
  j.seed = p.seed;
  j.period_frames = p.period_frames;
  return j;
}

dmdhsi::CaptureGeometry to_core_geometry(const dmdhsi_geometry_params& p) {
  dmdhsi::CaptureGeometry g;
  g.mirror_group = p.mirror_group;
  g.stripe_alpha = p.stripe_alpha;
  return g;
}

dmdhsi::AssembleOptions to_core(const dmdhsi_recon_options& p) {
  dmdhsi::AssembleOptions o;
  o.reference_frame = p.reference_frame;
  o.search_radius = p.search_radius;
  o.contrast_threshold = p.contrast_threshold;
  return o;
}

}  // namespace

extern "C" {

const char* dmdhsi_version(void) { return "0.1.0"; }

const char* dmdhsi_last_error(void) { return g_last_error.c_str(); }

void dmdhsi_sensor_params_default(dmdhsi_sensor_params* p) {
  if (!p) return;
  const dmdhsi::SensorParams d;
  *p = {d.bit_depth, d.full_well_e,  d.read_noise_sigma_e, d.gain_e_per_unit_ms,
        d.exposure_ms, d.seed, d.shot_noise ? 1 : 0, d.quantize ? 1 : 0};
}

void dmdhsi_timing_params_default(dmdhsi_timing_params* p) {
  if (!p) return;
  const dmdhsi::TimingParams d;
  *p = {d.dmd_max_pattern_hz, d.sensor_min_fps, d.sensor_max_fps,
        d.sensor_fps, d.exposure_ms, d.overhead_ms};
}

void dmdhsi_jitter_params_default(dmdhsi_jitter_params* p) {
  if (!p) return;
  const dmdhsi::JitterModel d;
  *p = {DMDHSI_JITTER_NONE, d.amplitude_px, d.step_sigma_px,
        d.subpixel ? 1 : 0, d.seed, d.period_frames};
}

void dmdhsi_geometry_params_default(dmdhsi_geometry_params* p) {
  if (!p) return;
  const dmdhsi::CaptureGeometry d;
  *p = {d.mirror_group, d.stripe_alpha, 1920, 1080};
}

void dmdhsi_recon_options_default(dmdhsi_recon_options* p) {
  if (!p) return;
  const dmdhsi::AssembleOptions d;
  *p = {d.reference_frame, d.search_radius, d.contrast_threshold};
}

void dmdhsi_canny_params_default(dmdhsi_canny_params* p) {
  if (!p) return;
  *p = {0.1, 0.3, 1.4, 25};
}

/* ---- cubes -------------------------------------------------------------- */

dmdhsi_status dmdhsi_cube_read(const char* path, dmdhsi_cube** out) {
  if (!path || !out) return bad_argument("cube_read: null argument");
  return guarded([&] { *out = new dmdhsi_cube{dmdhsi::read_cube(path)}; });
}

dmdhsi_status dmdhsi_cube_write(const dmdhsi_cube* cube, const char* path) {
  if (!cube || !path) return bad_argument("cube_write: null argument");
  return guarded([&] { dmdhsi::write_cube(cube->cube, path); });
}

void dmdhsi_cube_free(dmdhsi_cube* cube) { delete cube; }

int dmdhsi_cube_width(const dmdhsi_cube* cube) { return cube ? cube->cube.width : 0; }
int dmdhsi_cube_height(const dmdhsi_cube* cube) { return cube ? cube->cube.height : 0; }
int dmdhsi_cube_bands(const dmdhsi_cube* cube) { return cube ? cube->cube.bands : 0; }

const float* dmdhsi_cube_wavelengths(const dmdhsi_cube* cube) {
  return cube ? cube->cube.wavelengths.data() : nullptr;
}

const float* dmdhsi_cube_data(const dmdhsi_cube* cube) {
  return cube ? cube->cube.data.data() : nullptr;
}

dmdhsi_status dmdhsi_synth_scene(const char* spec_path, int64_t seed_override,
                                 dmdhsi_cube** out) {
  if (!spec_path || !out) return bad_argument("synth_scene: null argument");
  return guarded([&] {
    dmdhsi::SceneSpec spec = dmdhsi::load_scene_spec(spec_path);
    if (seed_override >= 0) spec.seed = std::uint64_t(seed_override);
    *out = new dmdhsi_cube{dmdhsi::synth_scene(spec)};
  });
}

dmdhsi_status dmdhsi_cube_rebin(const dmdhsi_cube* cube, int n_bands,
                                dmdhsi_cube** out) {
  if (!cube || !out) return bad_argument("cube_rebin: null argument");
  return guarded([&] {
    *out = new dmdhsi_cube{dmdhsi::rebin_spectral(cube->cube, n_bands)};
  });
}

dmdhsi_status dmdhsi_cube_write_preview_ppm(const dmdhsi_cube* cube, const char* path) {
  if (!cube || !path) return bad_argument("cube_write_preview_ppm: null argument");
  return guarded([&] {
    const auto resp = dmdhsi::RgbResponse::gaussian_default(cube->cube.wavelengths);
    dmdhsi::RgbImage img = dmdhsi::rgb_render(cube->cube, resp);
    for (float& v : img.data) v *= 255.0f;
    dmdhsi::write_ppm(path, img, 255);
  });
}

/* ---- planning and timing ------------------------------------------------ */

dmdhsi_status dmdhsi_full_scan_plan(int scene_width, int slit_width,
                                    const dmdhsi_timing_params* timing,
                                    const dmdhsi_geometry_params* geometry,
                                    dmdhsi_plan** out) {
  if (!timing || !out) return bad_argument("full_scan_plan: null argument");
  dmdhsi_geometry_params geo;
  dmdhsi_geometry_params_default(&geo);
  if (geometry) geo = *geometry;
  return guarded([&] {
    *out = new dmdhsi_plan{dmdhsi::full_scan_plan(scene_width, slit_width,
                                                  to_core(*timing),
                                                  to_core_geometry(geo),
                                                  geo.dmd_width, geo.dmd_height)};
  });
}

void dmdhsi_plan_free(dmdhsi_plan* plan) { delete plan; }

int dmdhsi_plan_pattern_count(const dmdhsi_plan* plan) {
  return plan ? int(plan->plan.patterns.size()) : 0;
}

double dmdhsi_plan_estimate_ms(const dmdhsi_plan* plan) {
  return plan ? dmdhsi::estimate_time_ms(plan->plan) : 0.0;
}

dmdhsi_status dmdhsi_plan_save(const dmdhsi_plan* plan, const char* path) {
  if (!plan || !path) return bad_argument("plan_save: null argument");
  return guarded([&] { dmdhsi::save_plan(plan->plan, path); });
}

dmdhsi_status dmdhsi_plan_load(const char* path, dmdhsi_plan** out) {
  if (!path || !out) return bad_argument("plan_load: null argument");
  return guarded([&] { *out = new dmdhsi_plan{dmdhsi::load_plan(path)}; });
}

/* ---- acquisition -------------------------------------------------------- */

dmdhsi_status dmdhsi_acquire(const dmdhsi_cube* scene, const dmdhsi_plan* plan,
                             const dmdhsi_sensor_params* sensor,
                             const dmdhsi_jitter_params* jitter,
                             const dmdhsi_geometry_params* geometry,
                             const dmdhsi_timing_params* timing,
                             dmdhsi_record** out) {
  if (!scene || !plan || !sensor || !out) return bad_argument("acquire: null argument");
  dmdhsi_jitter_params jit;
  dmdhsi_jitter_params_default(&jit);
  if (jitter) jit = *jitter;
  dmdhsi_geometry_params geo;
  dmdhsi_geometry_params_default(&geo);
  if (geometry) geo = *geometry;
  dmdhsi_timing_params tim;
  dmdhsi_timing_params_default(&tim);
  if (timing) tim = *timing;
  return guarded([&] {
    const auto resp = dmdhsi::RgbResponse::gaussian_default(scene->cube.wavelengths);
    *out = new dmdhsi_record{dmdhsi::run_acquisition(
        scene->cube, plan->plan, to_core(*sensor), to_core(jit), resp,
        to_core_geometry(geo), to_core(tim))};
  });
}

void dmdhsi_record_free(dmdhsi_record* record) { delete record; }

int dmdhsi_record_frame_count(const dmdhsi_record* record) {
  return record ? int(record->result.record.frames.size()) : 0;
}

dmdhsi_status dmdhsi_record_save(const dmdhsi_record* record, const char* dir) {
  if (!record || !dir) return bad_argument("record_save: null argument");
  return guarded([&] { dmdhsi::save_record(record->result, dir); });
}

dmdhsi_status dmdhsi_record_load(const char* dir, dmdhsi_record** out) {
  if (!dir || !out) return bad_argument("record_load: null argument");
  return guarded([&] { *out = new dmdhsi_record{dmdhsi::load_record(dir)}; });
}

/* ---- reconstruction ------------------------------------------------------ */

dmdhsi_status dmdhsi_reconstruct(const dmdhsi_record* record,
                                 const dmdhsi_recon_options* options,
                                 dmdhsi_recon** out) {
  if (!record || !out) return bad_argument("reconstruct: null argument");
  dmdhsi_recon_options opt;
  dmdhsi_recon_options_default(&opt);
  if (options) opt = *options;
  return guarded([&] {
    auto recon = dmdhsi::assemble(record->result.record, to_core(opt));
    *out = new dmdhsi_recon{dmdhsi::fill_gaps(std::move(recon))};
  });
}

void dmdhsi_recon_free(dmdhsi_recon* recon) { delete recon; }

dmdhsi_status dmdhsi_recon_cube(const dmdhsi_recon* recon, dmdhsi_cube** out) {
  if (!recon || !out) return bad_argument("recon_cube: null argument");
  return guarded([&] { *out = new dmdhsi_cube{recon->recon.cube}; });
}

int dmdhsi_recon_frames_used(const dmdhsi_recon* recon) {
  if (!recon) return 0;
  return int(std::count_if(recon->recon.diagnostics.begin(),
                           recon->recon.diagnostics.end(),
                           [](const auto& d) { return d.status == "ok"; }));
}

int dmdhsi_recon_frames_skipped(const dmdhsi_recon* recon) {
  if (!recon) return 0;
  return int(recon->recon.diagnostics.size()) - dmdhsi_recon_frames_used(recon);
}

dmdhsi_status dmdhsi_recon_write_diagnostics_csv(const dmdhsi_recon* recon,
                                                 const char* path) {
  if (!recon || !path) return bad_argument("recon_write_diagnostics_csv: null argument");
  return guarded([&] { dmdhsi::write_diagnostics_csv(recon->recon.diagnostics, path); });
}

/* ---- regions of interest ------------------------------------------------- */

dmdhsi_status dmdhsi_detect_regions(const dmdhsi_cube* cube,
                                    const dmdhsi_canny_params* params,
                                    dmdhsi_labels** out) {
  if (!cube || !out) return bad_argument("detect_regions: null argument");
  dmdhsi_canny_params par;
  dmdhsi_canny_params_default(&par);
  if (params) par = *params;
  return guarded([&] {
    const auto resp = dmdhsi::RgbResponse::gaussian_default(cube->cube.wavelengths);
    const dmdhsi::Image lum = dmdhsi::rgb_render(cube->cube, resp).luminance();
    const dmdhsi::EdgeMap edges = dmdhsi::canny(lum, par.low, par.high, par.blur_sigma);
    *out = new dmdhsi_labels{dmdhsi::label_regions(edges, par.min_area)};
  });
}

void dmdhsi_labels_free(dmdhsi_labels* labels) { delete labels; }

int dmdhsi_labels_count(const dmdhsi_labels* labels) {
  return labels ? labels->map.count() : 0;
}

dmdhsi_status dmdhsi_labels_region_info(const dmdhsi_labels* labels, int label,
                                        int* pixel_count, int* x_min, int* x_max,
                                        int* y_min, int* y_max) {
  if (!labels) return bad_argument("labels_region_info: null argument");
  return guarded([&] {
    if (label < 1 || label > labels->map.count()) {
      throw dmdhsi::ValidationError("label " + std::to_string(label) + " does not exist");
    }
    const dmdhsi::RegionInfo& r = labels->map.regions[label - 1];
    if (pixel_count) *pixel_count = r.pixel_count;
    if (x_min) *x_min = r.x_min;
    if (x_max) *x_max = r.x_max;
    if (y_min) *y_min = r.y_min;
    if (y_max) *y_max = r.y_max;
  });
}

dmdhsi_status dmdhsi_labels_write_pgm(const dmdhsi_labels* labels, const char* path) {
  if (!labels || !path) return bad_argument("labels_write_pgm: null argument");
  return guarded([&] { dmdhsi::write_labels_pgm(labels->map, path); });
}

dmdhsi_status dmdhsi_regions_to_plan(const dmdhsi_labels* labels, const int* selected,
                                     int n_selected, int slit_width, int margin,
                                     const dmdhsi_timing_params* timing,
                                     const dmdhsi_geometry_params* geometry,
                                     dmdhsi_plan** out) {
  if (!labels || !timing || !out) return bad_argument("regions_to_plan: null argument");
  dmdhsi_geometry_params geo;
  dmdhsi_geometry_params_default(&geo);
  if (geometry) geo = *geometry;
  return guarded([&] {
    std::vector<int> sel;
    if (selected && n_selected > 0) {
      sel.assign(selected, selected + n_selected);
    } else {
      sel.resize(labels->map.count());
      std::iota(sel.begin(), sel.end(), 1);
    }
    *out = new dmdhsi_plan{dmdhsi::regions_to_plan(
        labels->map, sel, slit_width, margin, to_core(*timing),
        to_core_geometry(geo), geo.dmd_width, geo.dmd_height)};
  });
}

dmdhsi_status dmdhsi_region_mean_spectrum(const dmdhsi_cube* cube,
                                          const dmdhsi_labels* labels, int label,
                                          int block, double* out_spectrum) {
  if (!cube || !labels || !out_spectrum) {
    return bad_argument("region_mean_spectrum: null argument");
  }
  return guarded([&] {
    const auto spectrum =
        dmdhsi::region_mean_spectrum(cube->cube, labels->map, label, block);
    std::copy(spectrum.begin(), spectrum.end(), out_spectrum);
  });
}

dmdhsi_status dmdhsi_region_spectrum_csv(const dmdhsi_cube* cube,
                                         const dmdhsi_labels* labels, int label,
                                         int block, const char* path) {
  if (!cube || !labels || !path) return bad_argument("region_spectrum_csv: null argument");
  return guarded([&] {
    const auto spectrum =
        dmdhsi::region_mean_spectrum(cube->cube, labels->map, label, block);
    dmdhsi::write_spectrum_csv(cube->cube.wavelengths, spectrum, path);
  });
}

/* ---- evaluation ----------------------------------------------------------- */

dmdhsi_status dmdhsi_nrmsd(const dmdhsi_cube* cube, const dmdhsi_cube* reference,
                           double* out) {
  if (!cube || !reference || !out) return bad_argument("nrmsd: null argument");
  return guarded([&] { *out = dmdhsi::nrmsd(cube->cube, reference->cube); });
}

dmdhsi_status dmdhsi_band_sweep(const dmdhsi_cube* truth, const dmdhsi_cube* recon,
                                const int* counts, int n_counts, double* out_nrmsd) {
  if (!truth || !recon || !counts || n_counts <= 0 || !out_nrmsd) {
    return bad_argument("band_sweep: null argument");
  }
  return guarded([&] {
    const auto sweep = dmdhsi::band_sweep(truth->cube, recon->cube,
                                          std::vector<int>(counts, counts + n_counts));
    for (int i = 0; i < n_counts; ++i) out_nrmsd[i] = sweep.points[i].nrmsd;
  });
}

dmdhsi_status dmdhsi_band_sweep_csv(const dmdhsi_cube* truth, const dmdhsi_cube* recon,
                                    const int* counts, int n_counts, const char* path) {
  if (!truth || !recon || !counts || n_counts <= 0 || !path) {
    return bad_argument("band_sweep_csv: null argument");
  }
  return guarded([&] {
    const auto sweep = dmdhsi::band_sweep(truth->cube, recon->cube,
                                          std::vector<int>(counts, counts + n_counts));
    dmdhsi::write_sweep_csv(sweep, path);
  });
}

}  // extern "C"
