// Command-line front end for the dmdhsi shared library. Everything here
// goes through the public C API in dmdhsi/dmdhsi.h.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmdhsi/dmdhsi.h"

namespace {

// Exit codes: 2 I/O, 3 validation (including bad flags), 4 algorithmic.
int exit_code_for(dmdhsi_status status) {
  switch (status) {
    case DMDHSI_OK:
      return 0;
    case DMDHSI_ERR_IO:
      return 2;
    case DMDHSI_ERR_INVALID_ARGUMENT:
    case DMDHSI_ERR_VALIDATION:
      return 3;
    case DMDHSI_ERR_ALGORITHM:
      return 4;
    default:
      return 1;
  }
}

struct CliError {
  dmdhsi_status status;
  std::string message;
};

void check(dmdhsi_status status, const std::string& context) {
  if (status != DMDHSI_OK) {
    throw CliError{status, context + ": " + dmdhsi_last_error()};
  }
}

template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, decltype([](T* p) { Free(p); })>;

using CubeHandle = Handle<dmdhsi_cube, dmdhsi_cube_free>;
using PlanHandle = Handle<dmdhsi_plan, dmdhsi_plan_free>;
using RecordHandle = Handle<dmdhsi_record, dmdhsi_record_free>;
using LabelsHandle = Handle<dmdhsi_labels, dmdhsi_labels_free>;
using ReconHandle = Handle<dmdhsi_recon, dmdhsi_recon_free>;

CubeHandle read_cube(const std::string& path) {
  dmdhsi_cube* cube = nullptr;
  check(dmdhsi_cube_read(path.c_str(), &cube), "reading cube " + path);
  return CubeHandle(cube);
}

struct Options {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;

  // synth
  std::string spec_path;

  // acquire / planning
  std::string cube_path;
  std::string plan_path;
  int slit_width = 1;
  dmdhsi_sensor_params sensor{};
  dmdhsi_timing_params timing{};
  dmdhsi_jitter_params jitter{};
  dmdhsi_geometry_params geometry{};
  std::string jitter_kind = "none";
  bool float_frames = false;
  bool no_shot_noise = false;

  // reconstruct
  std::string record_dir;
  std::string truth_path;
  std::string diagnostics_path;
  dmdhsi_recon_options recon{};

  // evaluate
  std::string recon_path;
  std::vector<int> band_counts{50, 100, 150, 200, 250, 300};

  // roi
  dmdhsi_canny_params canny{};
  int margin = 0;
  std::vector<int> select;
  std::string labels_out;
  int block = 4;

  // timing
  int scene_width = 400;
};

void add_timing_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--fps", o.timing.sensor_fps, "Sensor operating frame rate")
      ->capture_default_str();
  cmd->add_option("--exposure-ms", o.timing.exposure_ms, "Sensor exposure per frame")
      ->capture_default_str();
  cmd->add_option("--dmd-rate-hz", o.timing.dmd_max_pattern_hz, "DMD peak pattern rate")
      ->capture_default_str();
  cmd->add_option("--overhead-ms", o.timing.overhead_ms, "Fixed per-frame overhead")
      ->capture_default_str();
}

void add_sensor_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--bit-depth", o.sensor.bit_depth, "Sensor bit depth (8/10/12/16)")
      ->capture_default_str();
  cmd->add_option("--full-well", o.sensor.full_well_e, "Full-well electrons")
      ->capture_default_str();
  cmd->add_option("--read-noise", o.sensor.read_noise_sigma_e, "Read noise sigma, electrons")
      ->capture_default_str();
  cmd->add_option("--gain", o.sensor.gain_e_per_unit_ms,
                  "Electrons per unit radiance per ms")
      ->capture_default_str();
  cmd->add_flag("--no-shot-noise", o.no_shot_noise, "Disable shot noise");
  cmd->add_flag("--float", o.float_frames,
                "Skip noise and quantization; frames keep float radiance");
}

void add_jitter_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--jitter", o.jitter_kind, "Platform jitter: none|random-walk|sinusoid")
      ->capture_default_str();
  cmd->add_option("--jitter-amplitude", o.jitter.amplitude_px, "Jitter amplitude, pixels")
      ->capture_default_str();
  cmd->add_option("--jitter-step-sigma", o.jitter.step_sigma_px,
                  "Random-walk step sigma, pixels")
      ->capture_default_str();
  cmd->add_flag("--jitter-subpixel", o.jitter.subpixel, "Allow fractional offsets");
  cmd->add_option("--jitter-period", o.jitter.period_frames, "Sinusoid period, frames")
      ->capture_default_str();
}

void add_geometry_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--mirror-group", o.geometry.mirror_group,
                  "Mirror columns per scene pixel")
      ->capture_default_str();
  cmd->add_option("--stripe-alpha", o.geometry.stripe_alpha,
                  "Slit light fraction leaking into the RGB frame")
      ->capture_default_str();
}

void add_canny_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--canny-low", o.canny.low, "Canny low threshold")->capture_default_str();
  cmd->add_option("--canny-high", o.canny.high, "Canny high threshold")
      ->capture_default_str();
  cmd->add_option("--canny-sigma", o.canny.blur_sigma, "Canny blur sigma, pixels")
      ->capture_default_str();
  cmd->add_option("--min-area", o.canny.min_area, "Smallest surviving region, pixels")
      ->capture_default_str();
}

dmdhsi_jitter_params resolve_jitter(const Options& o) {
  dmdhsi_jitter_params j = o.jitter;
  if (o.jitter_kind == "none") {
    j.kind = DMDHSI_JITTER_NONE;
  } else if (o.jitter_kind == "random-walk") {
    j.kind = DMDHSI_JITTER_RANDOM_WALK;
  } else if (o.jitter_kind == "sinusoid") {
    j.kind = DMDHSI_JITTER_SINUSOID;
  } else {
    throw CliError{DMDHSI_ERR_VALIDATION, "unknown jitter kind: " + o.jitter_kind};
  }
  j.seed = o.seed;
  return j;
}

int cmd_synth(const Options& o) {
  dmdhsi_cube* cube = nullptr;
  const std::int64_t seed = o.seed_given ? std::int64_t(o.seed) : -1;
  check(dmdhsi_synth_scene(o.spec_path.c_str(), seed, &cube),
        "synthesizing " + o.spec_path);
  CubeHandle guard(cube);
  check(dmdhsi_cube_write(cube, o.out.c_str()), "writing cube " + o.out);
  std::printf("wrote %dx%dx%d cube to %s\n", dmdhsi_cube_width(cube),
              dmdhsi_cube_height(cube), dmdhsi_cube_bands(cube), o.out.c_str());
  return 0;
}

int cmd_acquire(Options& o) {
  CubeHandle cube = read_cube(o.cube_path);

  PlanHandle plan;
  if (!o.plan_path.empty()) {
    dmdhsi_plan* p = nullptr;
    check(dmdhsi_plan_load(o.plan_path.c_str(), &p), "loading plan " + o.plan_path);
    plan.reset(p);
  } else {
    dmdhsi_plan* p = nullptr;
    check(dmdhsi_full_scan_plan(dmdhsi_cube_width(cube.get()), o.slit_width, &o.timing,
                                &o.geometry, &p),
          "building full scan plan");
    plan.reset(p);
  }

  dmdhsi_sensor_params sensor = o.sensor;
  sensor.exposure_ms = o.timing.exposure_ms;
  sensor.seed = o.seed;
  sensor.shot_noise = o.no_shot_noise ? 0 : 1;
  sensor.quantize = o.float_frames ? 0 : 1;
  const dmdhsi_jitter_params jitter = resolve_jitter(o);

  dmdhsi_record* record = nullptr;
  check(dmdhsi_acquire(cube.get(), plan.get(), &sensor, &jitter, &o.geometry, &o.timing,
                       &record),
        "acquisition");
  RecordHandle guard(record);
  check(dmdhsi_record_save(record, o.out.c_str()), "saving record to " + o.out);
  std::printf("estimated acquisition time: %.0f ms (%d patterns)\n",
              dmdhsi_plan_estimate_ms(plan.get()),
              dmdhsi_plan_pattern_count(plan.get()));
  std::printf("wrote %d frames to %s\n", dmdhsi_record_frame_count(record),
              o.out.c_str());
  return 0;
}

int cmd_reconstruct(const Options& o) {
  dmdhsi_record* record = nullptr;
  check(dmdhsi_record_load(o.record_dir.c_str(), &record),
        "loading record " + o.record_dir);
  RecordHandle rec_guard(record);

  dmdhsi_recon* recon = nullptr;
  check(dmdhsi_reconstruct(record, &o.recon, &recon), "reconstruction");
  ReconHandle recon_guard(recon);

  dmdhsi_cube* cube = nullptr;
  check(dmdhsi_recon_cube(recon, &cube), "extracting reconstructed cube");
  CubeHandle cube_guard(cube);
  check(dmdhsi_cube_write(cube, o.out.c_str()), "writing cube " + o.out);

  const std::string diag =
      o.diagnostics_path.empty() ? o.record_dir + "/diagnostics.csv" : o.diagnostics_path;
  check(dmdhsi_recon_write_diagnostics_csv(recon, diag.c_str()),
        "writing diagnostics " + diag);
  std::printf("frames used: %d, skipped: %d\n", dmdhsi_recon_frames_used(recon),
              dmdhsi_recon_frames_skipped(recon));

  if (!o.truth_path.empty()) {
    CubeHandle truth = read_cube(o.truth_path);
    double value = 0.0;
    check(dmdhsi_nrmsd(cube, truth.get(), &value), "nrmsd against truth");
    std::printf("nrmsd vs truth: %.6f\n", value);
  }
  std::printf("wrote reconstruction to %s\n", o.out.c_str());
  return 0;
}

int cmd_evaluate(const Options& o) {
  CubeHandle truth = read_cube(o.truth_path);
  CubeHandle recon = read_cube(o.recon_path);
  std::vector<double> values(o.band_counts.size(), 0.0);
  check(dmdhsi_band_sweep(truth.get(), recon.get(), o.band_counts.data(),
                          int(o.band_counts.size()), values.data()),
        "band sweep");
  for (std::size_t i = 0; i < o.band_counts.size(); ++i) {
    std::printf("bands %4d  nrmsd %.6f\n", o.band_counts[i], values[i]);
  }
  if (!o.out.empty()) {
    check(dmdhsi_band_sweep_csv(truth.get(), recon.get(), o.band_counts.data(),
                                int(o.band_counts.size()), o.out.c_str()),
          "writing sweep csv " + o.out);
    std::printf("wrote sweep to %s\n", o.out.c_str());
  }
  return 0;
}

LabelsHandle detect(const Options& o, const CubeHandle& cube) {
  dmdhsi_labels* labels = nullptr;
  check(dmdhsi_detect_regions(cube.get(), &o.canny, &labels), "detecting regions");
  return LabelsHandle(labels);
}

int cmd_plan_roi(const Options& o) {
  CubeHandle cube = read_cube(o.cube_path);
  LabelsHandle labels = detect(o, cube);
  const int count = dmdhsi_labels_count(labels.get());
  std::printf("regions: %d\n", count);

  dmdhsi_plan* roi = nullptr;
  check(dmdhsi_regions_to_plan(labels.get(), o.select.empty() ? nullptr : o.select.data(),
                               int(o.select.size()), o.slit_width, o.margin, &o.timing,
                               &o.geometry, &roi),
        "building roi plan");
  PlanHandle roi_guard(roi);

  dmdhsi_plan* full = nullptr;
  check(dmdhsi_full_scan_plan(dmdhsi_cube_width(cube.get()), o.slit_width, &o.timing,
                              &o.geometry, &full),
        "building full scan plan");
  PlanHandle full_guard(full);

  check(dmdhsi_plan_save(roi, o.out.c_str()), "writing plan " + o.out);
  if (!o.labels_out.empty()) {
    check(dmdhsi_labels_write_pgm(labels.get(), o.labels_out.c_str()),
          "writing label map " + o.labels_out);
  }
  const double roi_ms = dmdhsi_plan_estimate_ms(roi);
  const double full_ms = dmdhsi_plan_estimate_ms(full);
  std::printf("roi patterns: %d, estimated %.0f ms\n", dmdhsi_plan_pattern_count(roi),
              roi_ms);
  std::printf("full scan: %d patterns, %.0f ms; speedup factor %.3f\n",
              dmdhsi_plan_pattern_count(full), full_ms, roi_ms / full_ms);
  return 0;
}

int cmd_spectra(const Options& o) {
  CubeHandle cube = read_cube(o.cube_path);
  LabelsHandle labels = detect(o, cube);
  const int count = dmdhsi_labels_count(labels.get());
  if (count == 0) throw CliError{DMDHSI_ERR_ALGORITHM, "no regions detected"};

  std::vector<int> targets = o.select;
  if (targets.empty()) {
    for (int l = 1; l <= count; ++l) targets.push_back(l);
  }
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (ec) throw CliError{DMDHSI_ERR_IO, "cannot create output directory " + o.out};

  for (int label : targets) {
    const std::string path = o.out + "/region_" + std::to_string(label) + ".csv";
    check(dmdhsi_region_spectrum_csv(cube.get(), labels.get(), label, o.block,
                                     path.c_str()),
          "writing spectrum for region " + std::to_string(label));
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_timing(const Options& o) {
  dmdhsi_plan* plan = nullptr;
  check(dmdhsi_full_scan_plan(o.scene_width, o.slit_width, &o.timing, &o.geometry, &plan),
        "building plan");
  PlanHandle guard(plan);
  std::printf("patterns: %d\n", dmdhsi_plan_pattern_count(plan));
  std::printf("estimated acquisition time: %.3f ms\n", dmdhsi_plan_estimate_ms(plan));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  dmdhsi_sensor_params_default(&o.sensor);
  dmdhsi_timing_params_default(&o.timing);
  dmdhsi_jitter_params_default(&o.jitter);
  dmdhsi_geometry_params_default(&o.geometry);
  dmdhsi_recon_options_default(&o.recon);
  dmdhsi_canny_params_default(&o.canny);

  CLI::App app{"DMD-based pushbroom hyperspectral imaging simulator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file overriding flag defaults");
  auto* seed_opt =
      app.add_option("--seed", o.seed, "Seed for scene, sensor and jitter randomness")
          ->capture_default_str();
  app.add_option("--out", o.out, "Primary output path (file or directory)");

  auto* synth = app.add_subcommand("synth", "Synthesize a ground-truth cube from a scene spec");
  synth->add_option("--spec", o.spec_path, "Scene spec file")->required();

  auto* acquire = app.add_subcommand("acquire", "Simulate a scan of a cube file");
  acquire->add_option("--cube", o.cube_path, "Ground-truth cube file")->required();
  acquire->add_option("--plan", o.plan_path, "Scan plan file (default: full scan)");
  acquire->add_option("--slit-width", o.slit_width, "Slit width in scene columns")
      ->capture_default_str();
  add_sensor_flags(acquire, o);
  add_timing_flags(acquire, o);
  add_jitter_flags(acquire, o);
  add_geometry_flags(acquire, o);

  auto* reconstruct = app.add_subcommand("reconstruct", "Assemble a cube from a record directory");
  reconstruct->add_option("--record", o.record_dir, "Acquisition record directory")
      ->required();
  reconstruct->add_option("--truth", o.truth_path, "Optional truth cube to report nrmsd");
  reconstruct->add_option("--diagnostics", o.diagnostics_path,
                          "Per-frame diagnostics CSV (default <record>/diagnostics.csv)");
  reconstruct->add_option("--reference-frame", o.recon.reference_frame,
                          "Registration reference frame index")
      ->capture_default_str();
  reconstruct->add_option("--search-radius", o.recon.search_radius,
                          "Registration search radius, pixels")
      ->capture_default_str();
  reconstruct->add_option("--contrast-threshold", o.recon.contrast_threshold,
                          "Minimum stripe contrast")
      ->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Band-sweep nrmsd between two cubes");
  evaluate->add_option("--truth", o.truth_path, "Reference cube")->required();
  evaluate->add_option("--recon", o.recon_path, "Cube under test")->required();
  evaluate->add_option("--bands", o.band_counts, "Band counts for the sweep")
      ->capture_default_str();

  auto* plan_roi = app.add_subcommand("plan-roi", "Plan a scan restricted to detected regions");
  plan_roi->add_option("--cube", o.cube_path, "Cube for the RGB preview")->required();
  plan_roi->add_option("--slit-width", o.slit_width, "Slit width in scene columns")
      ->capture_default_str();
  plan_roi->add_option("--margin", o.margin, "Extra columns around each region")
      ->capture_default_str();
  plan_roi->add_option("--select", o.select, "Region labels to keep (default: all)");
  plan_roi->add_option("--labels-out", o.labels_out, "Write the label map as PGM");
  add_canny_flags(plan_roi, o);
  add_timing_flags(plan_roi, o);
  add_geometry_flags(plan_roi, o);

  auto* spectra = app.add_subcommand("spectra", "Per-region mean spectra as CSV files");
  spectra->add_option("--cube", o.cube_path, "Cube to sample")->required();
  spectra->add_option("--select", o.select, "Region labels (default: all)");
  spectra->add_option("--block", o.block, "Sample block edge length, pixels")
      ->capture_default_str();
  add_canny_flags(spectra, o);

  auto* timing = app.add_subcommand("timing", "Acquisition time estimate for a full scan");
  timing->add_option("--width", o.scene_width, "Scene width in columns")
      ->capture_default_str();
  timing->add_option("--slit-width", o.slit_width, "Slit width in scene columns")
      ->capture_default_str();
  add_timing_flags(timing, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;  // bad flags are validation errors
  }
  o.seed_given = seed_opt->count() > 0;

  try {
    if (synth->parsed() || acquire->parsed() || plan_roi->parsed() ||
        spectra->parsed() || reconstruct->parsed()) {
      if (o.out.empty()) {
        throw CliError{DMDHSI_ERR_VALIDATION, "--out is required for this command"};
      }
    }
    if (synth->parsed()) return cmd_synth(o);
    if (acquire->parsed()) return cmd_acquire(o);
    if (reconstruct->parsed()) return cmd_reconstruct(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (plan_roi->parsed()) return cmd_plan_roi(o);
    if (spectra->parsed()) return cmd_spectra(o);
    if (timing->parsed()) return cmd_timing(o);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return exit_code_for(e.status);
  }
  return 0;
}
