#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "cube.hpp"
#include "image.hpp"

namespace dmdhsi {

// A slit: mirrors in [slit_start, slit_start + slit_width) tilt toward the
// grating (+12 deg), all others toward the auxiliary sensor (-12 deg).
struct DmdPattern {
  int slit_start = 0;  // mirror columns
  int slit_width = 1;
  int dmd_width = 1920;
  int dmd_height = 1080;
};

// Validates and returns the pattern; slits extending past the mirror array
// are a range error.
DmdPattern make_pattern(int slit_start, int slit_width, int dmd_width = 1920,
                        int dmd_height = 1080);

struct SensorParams {
  int bit_depth = 8;  // one of 8, 10, 12, 16
  double full_well_e = 10000.0;
  double read_noise_sigma_e = 5.0;
  double gain_e_per_unit_ms = 2000.0;
  double exposure_ms = 10.0;
  std::uint64_t seed = 0;
  bool shot_noise = true;
  // false = float passthrough: frames keep noiseless radiance and skip the
  // electron/quantization chain entirely.
  bool quantize = true;

  void validate() const;
  int code_max() const { return (1 << bit_depth) - 1; }
  double electrons_per_unit() const { return gain_e_per_unit_ms * exposure_ms; }
  // Inverse of the code mapping, used when assembling quantized records.
  double radiance_from_code(double code) const;
};

struct JitterModel {
  enum class Kind { none, random_walk, sinusoid };
  Kind kind = Kind::none;
  double amplitude_px = 0.0;
  double step_sigma_px = 0.0;
  bool subpixel = false;
  std::uint64_t seed = 0;
  double period_frames = 50.0;  // sinusoid wobble period

  void validate() const;
};

// Emits the platform offset for consecutive frame indices. Offsets are
// integers unless the model is sub-pixel.
class JitterSequence {
 public:
  explicit JitterSequence(const JitterModel& model);
  std::pair<double, double> next();

 private:
  JitterModel model_;
  std::mt19937_64 rng_;
  double x_ = 0.0;
  double y_ = 0.0;
  long frame_ = 0;
};

// One spatial-spectral detector readout: [row][detector column], with
// spectral_pixels == bands + slit_width - 1 (one detector pixel of
// dispersion per band and per extra slit column).
struct SliceFrame {
  int rows = 0;
  int spectral_pixels = 0;
  std::vector<float> data;
  bool quantized = false;
  DmdPattern pattern;
  std::uint64_t frame_index = 0;

  float& at(int u, int y) { return data[std::size_t(y) * spectral_pixels + u]; }
  float at(int u, int y) const { return data[std::size_t(y) * spectral_pixels + u]; }
};

// Auxiliary-sensor readout carrying the dark stripe.
struct RgbFrame {
  RgbImage image;
  bool quantized = false;
  std::uint64_t frame_index = 0;
  double timestamp_ms = 0.0;
};

// DMD-to-scene mapping and stripe leakage. mirror_group is the number of
// mirror columns imaged onto one scene pixel (identity by default);
// stripe_alpha is the fraction of slit light still reaching the auxiliary
// sensor (0 = fully diverted).
struct CaptureGeometry {
  int mirror_group = 1;
  double stripe_alpha = 0.0;
};

struct CapturePair {
  SliceFrame slice;
  RgbFrame rgb;
  // True when the jittered slit sampled outside the scene (zero fill).
  bool slit_clipped = false;
  // Zero-filled frame columns on each side caused by the platform offset;
  // reconstruction masks these out of stripe search and correlation.
  int border_left = 0;
  int border_right = 0;
};

// Distinguishes the two sensors' noise streams for one frame index.
enum class NoiseStream : std::uint64_t { spectral = 1, rgb = 2 };

// Shot + read noise followed by quantization, in place:
//   e = gain * exposure * value, e' = e + N(0, sqrt(e)) + N(0, read_sigma),
//   code = clamp(round(e' / full_well * code_max), 0, code_max).
// Deterministic for a fixed (seed, frame index, stream).
void apply_noise(std::vector<float>& values, const SensorParams& sensor,
                 std::uint64_t frame_index, NoiseStream stream);

// Renders the slice/RGB pair for one pattern at one platform offset. The
// scene is sampled at (x + dx, y + dy) with zero fill (bilinear when the
// offset is fractional). Both frames share the frame index; noise draws are
// independent per sensor.
CapturePair capture_pair(const SpectralCube& scene, const DmdPattern& pattern,
                         double jitter_dx, double jitter_dy,
                         const SensorParams& sensor, const RgbResponse& resp,
                         const CaptureGeometry& geom = {},
                         std::uint64_t frame_index = 0);

// Same, with the no-slit RGB render of the scene precomputed (shared across
// a scan; shifting the render equals rendering the shifted scene).
CapturePair capture_pair_prerendered(const SpectralCube& scene,
                                     const RgbImage& base_rgb,
                                     const DmdPattern& pattern,
                                     double jitter_dx, double jitter_dy,
                                     const SensorParams& sensor,
                                     const CaptureGeometry& geom = {},
                                     std::uint64_t frame_index = 0);

}  // namespace dmdhsi
