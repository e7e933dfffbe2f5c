#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cube.hpp"
#include "optics.hpp"

namespace dmdhsi {

struct TimingParams {
  double dmd_max_pattern_hz = 9523.0;
  double sensor_min_fps = 25.0;
  double sensor_max_fps = 60.0;
  double sensor_fps = 25.0;  // operating frame rate
  double exposure_ms = 10.0;
  double overhead_ms = 0.0;

  void validate() const;
  // Per-pattern dwell: the slowest of exposure, sensor frame period and DMD
  // pattern period, plus fixed overhead.
  double dwell_ms() const;
};

struct ScanPlan {
  std::vector<DmdPattern> patterns;
  int slit_width = 1;  // nominal; the last pattern of a tiling may be narrower
  double dwell_ms = 0.0;
};

// Non-overlap and dwell sanity. Throws ValidationError.
void validate_plan(const ScanPlan& plan);

// ceil(scene_width / slit_width) left-to-right patterns tiling
// [0, scene_width); the last pattern is clipped at the scene edge.
ScanPlan full_scan_plan(int scene_width, int slit_width, const TimingParams& timing,
                        const CaptureGeometry& geom = {}, int dmd_width = 1920,
                        int dmd_height = 1080);

double estimate_time_ms(const ScanPlan& plan);

// Plan file: header line, slit_width, dwell_ms, then one `pattern START
// WIDTH` line per slit.
void save_plan(const ScanPlan& plan, const std::string& path);
ScanPlan load_plan(const std::string& path);

struct FrameEntry {
  DmdPattern pattern;
  SliceFrame slice;
  RgbFrame rgb;
  double timestamp_ms = 0.0;
  bool slit_clipped = false;
  int border_left = 0;   // zero-filled frame columns, flagged for reconstruction
  int border_right = 0;
};

// Everything reconstruction is allowed to see. The ground-truth jitter
// offsets deliberately live outside this type (JitterLog below) so assembly
// cannot read them.
struct AcquisitionRecord {
  int scene_width = 0;
  int scene_height = 0;
  int bands = 0;
  std::vector<float> wavelengths;
  int slit_width = 1;
  SensorParams sensor;
  TimingParams timing;
  CaptureGeometry geometry;
  double dwell_ms = 0.0;
  std::vector<FrameEntry> frames;
};

// Oracle-only ground truth: the platform offset applied to each frame.
struct JitterLog {
  std::vector<std::pair<double, double>> offsets;
};

struct AcquisitionResult {
  AcquisitionRecord record;
  JitterLog truth;
};

// Runs the plan in order: one simultaneous (slice, rgb) trigger per pattern,
// jitter advancing between frames, timestamps advancing by the dwell.
AcquisitionResult run_acquisition(const SpectralCube& scene, const ScanPlan& plan,
                                  const SensorParams& sensor,
                                  const JitterModel& jitter,
                                  const RgbResponse& resp,
                                  const CaptureGeometry& geom = {},
                                  const TimingParams& timing = {});

// Record directory layout: `manifest` (text), per-frame `slice_%05d.pgm` /
// `rgb_%05d.ppm` (or `.f32` raw floats for unquantized frames), and the
// test-only `jitter.log` with one "dx dy" pair per line.
void save_record(const AcquisitionResult& result, const std::string& dir);
AcquisitionResult load_record(const std::string& dir);

}  // namespace dmdhsi
