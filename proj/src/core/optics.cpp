#include "optics.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace dmdhsi {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

DmdPattern make_pattern(int slit_start, int slit_width, int dmd_width, int dmd_height) {
  if (dmd_width <= 0 || dmd_height <= 0) {
    throw ValidationError("dmd dimensions must be positive");
  }
  if (slit_width < 1) throw ValidationError("slit width must be at least 1");
  if (slit_start < 0 || slit_start + slit_width > dmd_width) {
    throw ValidationError("slit [" + std::to_string(slit_start) + ", " +
                          std::to_string(slit_start + slit_width) +
                          ") exceeds the mirror array width " + std::to_string(dmd_width));
  }
  return DmdPattern{slit_start, slit_width, dmd_width, dmd_height};
}

void SensorParams::validate() const {
  if (bit_depth != 8 && bit_depth != 10 && bit_depth != 12 && bit_depth != 16) {
    throw ValidationError("bit depth must be one of 8, 10, 12, 16");
  }
  if (!(full_well_e > 0)) throw ValidationError("full well must be positive");
  if (!(read_noise_sigma_e >= 0)) throw ValidationError("read noise must be non-negative");
  if (!(gain_e_per_unit_ms > 0)) throw ValidationError("gain must be positive");
  if (!(exposure_ms > 0)) throw ValidationError("exposure must be positive");
}

double SensorParams::radiance_from_code(double code) const {
  return code / code_max() * full_well_e / electrons_per_unit();
}

void JitterModel::validate() const {
  if (!(amplitude_px >= 0)) throw ValidationError("jitter amplitude must be non-negative");
  if (!(step_sigma_px >= 0)) throw ValidationError("jitter step sigma must be non-negative");
  if (kind == Kind::sinusoid && !(period_frames > 0)) {
    throw ValidationError("sinusoid period must be positive");
  }
}

JitterSequence::JitterSequence(const JitterModel& model)
    : model_(model), rng_(mix_seed(model.seed, 0x6a697474ULL)) {
  model_.validate();
}

std::pair<double, double> JitterSequence::next() {
  double dx = 0.0;
  double dy = 0.0;
  switch (model_.kind) {
    case JitterModel::Kind::none:
      break;
    case JitterModel::Kind::random_walk: {
      if (frame_ > 0) {
        std::normal_distribution<double> step(0.0, model_.step_sigma_px);
        x_ = std::clamp(x_ + step(rng_), -model_.amplitude_px, model_.amplitude_px);
        y_ = std::clamp(y_ + step(rng_), -model_.amplitude_px, model_.amplitude_px);
      }
      dx = x_;
      dy = y_;
      break;
    }
    case JitterModel::Kind::sinusoid: {
      const double phase = 2.0 * kPi * frame_ / model_.period_frames;
      dx = model_.amplitude_px * std::sin(phase);
      dy = 0.5 * model_.amplitude_px * std::sin(2.0 * phase);
      break;
    }
  }
  ++frame_;
  if (!model_.subpixel) {
    dx = std::nearbyint(dx);
    dy = std::nearbyint(dy);
  }
  return {dx, dy};
}

void apply_noise(std::vector<float>& values, const SensorParams& sensor,
                 std::uint64_t frame_index, NoiseStream stream) {
  sensor.validate();
  std::mt19937_64 rng(mix_seed(sensor.seed, frame_index, std::uint64_t(stream)));
  std::normal_distribution<double> n01(0.0, 1.0);
  const double scale = sensor.electrons_per_unit();
  const double code_max = sensor.code_max();
  for (float& v : values) {
    double e = scale * double(v);
    if (sensor.shot_noise) e += std::sqrt(std::max(e, 0.0)) * n01(rng);
    if (sensor.read_noise_sigma_e > 0) e += sensor.read_noise_sigma_e * n01(rng);
    const double code = std::round(e / sensor.full_well_e * code_max);
    v = float(std::clamp(code, 0.0, code_max));
  }
}

namespace {

struct SlitColumns {
  int start = 0;  // scene columns
  int width = 0;
};

SlitColumns slit_in_scene(const DmdPattern& pattern, const CaptureGeometry& geom,
                          int scene_width) {
  if (geom.mirror_group < 1) throw ValidationError("mirror group must be at least 1");
  const int g = geom.mirror_group;
  if (pattern.slit_start % g != 0 || pattern.slit_width % g != 0) {
    throw ValidationError("slit is not aligned to the mirror group size");
  }
  SlitColumns s{pattern.slit_start / g, pattern.slit_width / g};
  if (s.start + s.width > scene_width) {
    throw ValidationError("slit maps outside the scene (columns " +
                          std::to_string(s.start) + ".." +
                          std::to_string(s.start + s.width) + " of " +
                          std::to_string(scene_width) + ")");
  }
  return s;
}

bool is_integral(double v) { return v == std::floor(v); }

// Zero-fill sample of one cube band at a real-valued position.
double sample_band(const SpectralCube& scene, int b, double x, double y) {
  const int x0 = int(std::floor(x));
  const int y0 = int(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto tap = [&](int xi, int yi) -> double {
    if (xi < 0 || xi >= scene.width || yi < 0 || yi >= scene.height) return 0.0;
    return scene.at(b, xi, yi);
  };
  if (fx == 0.0 && fy == 0.0) return tap(x0, y0);
  return (1 - fx) * (1 - fy) * tap(x0, y0) + fx * (1 - fy) * tap(x0 + 1, y0) +
         (1 - fx) * fy * tap(x0, y0 + 1) + fx * fy * tap(x0 + 1, y0 + 1);
}

// Shifted copy of an image plane: out(x, y) = img(x + dx, y + dy), zero fill.
void shift_plane(const float* src, float* dst, int width, int height, double dx,
                 double dy) {
  if (is_integral(dx) && is_integral(dy)) {
    const int ix = int(dx);
    const int iy = int(dy);
    for (int y = 0; y < height; ++y) {
      const int sy = y + iy;
      for (int x = 0; x < width; ++x) {
        const int sx = x + ix;
        dst[std::size_t(y) * width + x] =
            (sx >= 0 && sx < width && sy >= 0 && sy < height)
                ? src[std::size_t(sy) * width + sx]
                : 0.0f;
      }
    }
    return;
  }
  const int x0 = int(std::floor(dx));
  const int y0 = int(std::floor(dy));
  const double fx = dx - x0;
  const double fy = dy - y0;
  auto tap = [&](int xi, int yi) -> double {
    if (xi < 0 || xi >= width || yi < 0 || yi >= height) return 0.0;
    return src[std::size_t(yi) * width + xi];
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int sx = x + x0;
      const int sy = y + y0;
      dst[std::size_t(y) * width + x] =
          float((1 - fx) * (1 - fy) * tap(sx, sy) + fx * (1 - fy) * tap(sx + 1, sy) +
                (1 - fx) * fy * tap(sx, sy + 1) + fx * fy * tap(sx + 1, sy + 1));
    }
  }
}

}  // namespace

CapturePair capture_pair_prerendered(const SpectralCube& scene,
                                     const RgbImage& base_rgb,
                                     const DmdPattern& pattern,
                                     double jitter_dx, double jitter_dy,
                                     const SensorParams& sensor,
                                     const CaptureGeometry& geom,
                                     std::uint64_t frame_index) {
  sensor.validate();
  const SlitColumns slit = slit_in_scene(pattern, geom, scene.width);
  const int bands = scene.bands;
  const int w = slit.width;

  CapturePair out;
  out.slit_clipped = slit.start + jitter_dx < 0.0 ||
                     slit.start + w - 1 + jitter_dx > scene.width - 1.0;
  out.border_left = int(std::clamp(std::ceil(-jitter_dx), 0.0, double(scene.width)));
  out.border_right = int(std::clamp(std::ceil(jitter_dx), 0.0, double(scene.width)));

  // Shift-and-add dispersion: slit column j contributes the spectrum of
  // scene column slit.start + j, offset by j detector pixels.
  SliceFrame& slice = out.slice;
  slice.rows = scene.height;
  slice.spectral_pixels = bands + w - 1;
  slice.data.assign(std::size_t(slice.rows) * slice.spectral_pixels, 0.0f);
  slice.pattern = pattern;
  slice.frame_index = frame_index;
  for (int y = 0; y < slice.rows; ++y) {
    const double sy = y + jitter_dy;
    for (int u = 0; u < slice.spectral_pixels; ++u) {
      const int j_lo = std::max(0, u - (bands - 1));
      const int j_hi = std::min(w - 1, u);
      double acc = 0.0;
      for (int j = j_lo; j <= j_hi; ++j) {
        acc += sample_band(scene, u - j, slit.start + j + jitter_dx, sy);
      }
      slice.at(u, y) = float(acc);
    }
  }

  RgbFrame& rgb = out.rgb;
  rgb.image = RgbImage::zeros(scene.width, scene.height);
  rgb.frame_index = frame_index;
  const std::size_t plane = rgb.image.plane();
  for (int c = 0; c < 3; ++c) {
    shift_plane(base_rgb.data.data() + c * plane, rgb.image.data.data() + c * plane,
                scene.width, scene.height, jitter_dx, jitter_dy);
  }
  // The slit's light goes to the grating; its columns darken to alpha.
  const float alpha = float(geom.stripe_alpha);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < scene.height; ++y) {
      for (int x = slit.start; x < slit.start + w; ++x) {
        rgb.image.at(c, x, y) *= alpha;
      }
    }
  }

  if (sensor.quantize) {
    apply_noise(slice.data, sensor, frame_index, NoiseStream::spectral);
    apply_noise(rgb.image.data, sensor, frame_index, NoiseStream::rgb);
    slice.quantized = true;
    rgb.quantized = true;
  }
  return out;
}

CapturePair capture_pair(const SpectralCube& scene, const DmdPattern& pattern,
                         double jitter_dx, double jitter_dy,
                         const SensorParams& sensor, const RgbResponse& resp,
                         const CaptureGeometry& geom, std::uint64_t frame_index) {
  if (resp.bands != scene.bands) {
    throw ValidationError("rgb response band count does not match the scene");
  }
  const RgbImage base = rgb_render(scene, resp);
  return capture_pair_prerendered(scene, base, pattern, jitter_dx, jitter_dy,
                                  sensor, geom, frame_index);
}

}  // namespace dmdhsi
