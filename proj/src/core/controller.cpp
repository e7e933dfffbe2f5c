#include "controller.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "image.hpp"
#include "io_util.hpp"

namespace dmdhsi {

void TimingParams::validate() const {
  if (!(dmd_max_pattern_hz > 0)) throw ValidationError("dmd pattern rate must be positive");
  if (!(sensor_min_fps > 0) || !(sensor_max_fps > 0) || !(sensor_fps > 0)) {
    throw ValidationError("sensor frame rates must be positive");
  }
  if (sensor_min_fps > sensor_max_fps) {
    throw ValidationError("sensor min fps exceeds max fps");
  }
  if (sensor_fps < sensor_min_fps || sensor_fps > sensor_max_fps) {
    throw ValidationError("operating fps outside the sensor's supported range");
  }
  if (!(exposure_ms > 0)) throw ValidationError("exposure must be positive");
  if (!(overhead_ms >= 0)) throw ValidationError("overhead must be non-negative");
}

double TimingParams::dwell_ms() const {
  validate();
  return std::max({exposure_ms, 1000.0 / sensor_fps, 1000.0 / dmd_max_pattern_hz}) +
         overhead_ms;
}

void validate_plan(const ScanPlan& plan) {
  if (plan.patterns.empty()) throw ValidationError("plan has no patterns");
  if (plan.slit_width < 1) throw ValidationError("plan slit width must be at least 1");
  if (!(plan.dwell_ms > 0)) throw ValidationError("plan dwell must be positive");
  std::vector<std::pair<int, int>> spans;
  spans.reserve(plan.patterns.size());
  for (const DmdPattern& p : plan.patterns) {
    make_pattern(p.slit_start, p.slit_width, p.dmd_width, p.dmd_height);
    spans.emplace_back(p.slit_start, p.slit_start + p.slit_width);
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].first < spans[i - 1].second) {
      throw ValidationError("plan patterns overlap");
    }
  }
}

ScanPlan full_scan_plan(int scene_width, int slit_width, const TimingParams& timing,
                        const CaptureGeometry& geom, int dmd_width, int dmd_height) {
  if (scene_width <= 0) throw ValidationError("scene width must be positive");
  if (slit_width < 1 || slit_width > scene_width) {
    throw ValidationError("slit width must be in [1, scene width]");
  }
  const int g = std::max(1, geom.mirror_group);
  ScanPlan plan;
  plan.slit_width = slit_width;
  plan.dwell_ms = timing.dwell_ms();
  for (int start = 0; start < scene_width; start += slit_width) {
    const int w = std::min(slit_width, scene_width - start);
    plan.patterns.push_back(make_pattern(start * g, w * g, dmd_width, dmd_height));
  }
  validate_plan(plan);
  return plan;
}

double estimate_time_ms(const ScanPlan& plan) {
  return double(plan.patterns.size()) * plan.dwell_ms;
}

void save_plan(const ScanPlan& plan, const std::string& path) {
  validate_plan(plan);
  atomic_write_file(path, [&](std::ostream& out) {
    out << "dmdhsi-plan 1\n";
    out << "slit_width " << plan.slit_width << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", plan.dwell_ms);
    out << "dwell_ms " << buf << "\n";
    for (const DmdPattern& p : plan.patterns) {
      out << "pattern " << p.slit_start << " " << p.slit_width << " " << p.dmd_width
          << " " << p.dmd_height << "\n";
    }
  });
}

ScanPlan load_plan(const std::string& path) {
  std::istringstream in(read_entire_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "dmdhsi-plan 1") {
    throw IoError("not a plan file: " + path);
  }
  ScanPlan plan;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "slit_width") {
      ls >> plan.slit_width;
    } else if (key == "dwell_ms") {
      ls >> plan.dwell_ms;
    } else if (key == "pattern") {
      DmdPattern p;
      if (!(ls >> p.slit_start >> p.slit_width >> p.dmd_width >> p.dmd_height)) {
        throw IoError("malformed pattern line in plan: " + path);
      }
      plan.patterns.push_back(p);
    } else {
      throw IoError("unknown key '" + key + "' in plan: " + path);
    }
  }
  validate_plan(plan);
  return plan;
}

AcquisitionResult run_acquisition(const SpectralCube& scene, const ScanPlan& plan,
                                  const SensorParams& sensor,
                                  const JitterModel& jitter,
                                  const RgbResponse& resp,
                                  const CaptureGeometry& geom,
                                  const TimingParams& timing) {
  validate_cube(scene);
  validate_plan(plan);
  sensor.validate();
  if (resp.bands != scene.bands) {
    throw ValidationError("rgb response band count does not match the scene");
  }

  const RgbImage base_rgb = rgb_render(scene, resp);
  JitterSequence seq(jitter);

  AcquisitionResult result;
  AcquisitionRecord& rec = result.record;
  rec.scene_width = scene.width;
  rec.scene_height = scene.height;
  rec.bands = scene.bands;
  rec.wavelengths = scene.wavelengths;
  rec.slit_width = plan.slit_width;
  rec.sensor = sensor;
  rec.timing = timing;
  rec.geometry = geom;
  rec.dwell_ms = plan.dwell_ms;
  rec.frames.reserve(plan.patterns.size());

  for (std::size_t k = 0; k < plan.patterns.size(); ++k) {
    const auto [dx, dy] = seq.next();
    CapturePair pair = capture_pair_prerendered(scene, base_rgb, plan.patterns[k], dx,
                                                dy, sensor, geom, k);
    FrameEntry entry;
    entry.pattern = plan.patterns[k];
    entry.slice = std::move(pair.slice);
    entry.rgb = std::move(pair.rgb);
    entry.timestamp_ms = double(k) * plan.dwell_ms;
    entry.rgb.timestamp_ms = entry.timestamp_ms;
    entry.slit_clipped = pair.slit_clipped;
    entry.border_left = pair.border_left;
    entry.border_right = pair.border_right;
    rec.frames.push_back(std::move(entry));
    result.truth.offsets.emplace_back(dx, dy);
  }
  return result;
}

namespace {

std::string frame_path(const std::string& dir, const char* stem, std::size_t index,
                       const char* ext) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_%05zu.%s", stem, index, ext);
  return dir + "/" + name;
}

void put_kv(std::ostream& out, const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << key << " " << buf << "\n";
}

}  // namespace

void save_record(const AcquisitionResult& result, const std::string& dir) {
  const AcquisitionRecord& rec = result.record;
  if (rec.frames.empty()) throw ValidationError("record has no frames");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create record directory: " + dir);

  const bool quantized = rec.frames.front().slice.quantized;
  const char* encoding = !quantized ? "f32" : (rec.sensor.bit_depth > 8 ? "u16" : "u8");

  atomic_write_file(dir + "/manifest", [&](std::ostream& out) {
    out << "dmdhsi-record 1\n";
    out << "scene_width " << rec.scene_width << "\n";
    out << "scene_height " << rec.scene_height << "\n";
    out << "bands " << rec.bands << "\n";
    out << "slit_width " << rec.slit_width << "\n";
    out << "encoding " << encoding << "\n";
    out << "frames " << rec.frames.size() << "\n";
    out << "wavelengths_nm";
    char buf[64];
    for (float w : rec.wavelengths) {
      std::snprintf(buf, sizeof buf, " %.9g", double(w));
      out << buf;
    }
    out << "\n";
    out << "sensor.bit_depth " << rec.sensor.bit_depth << "\n";
    put_kv(out, "sensor.full_well_e", rec.sensor.full_well_e);
    put_kv(out, "sensor.read_noise_sigma_e", rec.sensor.read_noise_sigma_e);
    put_kv(out, "sensor.gain_e_per_unit_ms", rec.sensor.gain_e_per_unit_ms);
    put_kv(out, "sensor.exposure_ms", rec.sensor.exposure_ms);
    out << "sensor.seed " << rec.sensor.seed << "\n";
    out << "sensor.shot_noise " << (rec.sensor.shot_noise ? 1 : 0) << "\n";
    out << "sensor.quantize " << (rec.sensor.quantize ? 1 : 0) << "\n";
    put_kv(out, "timing.dmd_max_pattern_hz", rec.timing.dmd_max_pattern_hz);
    put_kv(out, "timing.sensor_min_fps", rec.timing.sensor_min_fps);
    put_kv(out, "timing.sensor_max_fps", rec.timing.sensor_max_fps);
    put_kv(out, "timing.sensor_fps", rec.timing.sensor_fps);
    put_kv(out, "timing.exposure_ms", rec.timing.exposure_ms);
    put_kv(out, "timing.overhead_ms", rec.timing.overhead_ms);
    out << "geometry.mirror_group " << rec.geometry.mirror_group << "\n";
    put_kv(out, "geometry.stripe_alpha", rec.geometry.stripe_alpha);
    put_kv(out, "dwell_ms", rec.dwell_ms);
    for (std::size_t i = 0; i < rec.frames.size(); ++i) {
      const FrameEntry& f = rec.frames[i];
      std::snprintf(buf, sizeof buf, "%.17g", f.timestamp_ms);
      out << "frame " << i << " " << f.pattern.slit_start << " "
          << f.pattern.slit_width << " " << f.pattern.dmd_width << " "
          << f.pattern.dmd_height << " " << buf << " " << (f.slit_clipped ? 1 : 0)
          << " " << f.border_left << " " << f.border_right << "\n";
    }
  });

  const int maxval = rec.sensor.code_max();
  for (std::size_t i = 0; i < rec.frames.size(); ++i) {
    const FrameEntry& f = rec.frames[i];
    if (quantized) {
      Image slice_img;
      slice_img.width = f.slice.spectral_pixels;
      slice_img.height = f.slice.rows;
      slice_img.data = f.slice.data;
      write_pgm(frame_path(dir, "slice", i, "pgm"), slice_img, maxval);
      write_ppm(frame_path(dir, "rgb", i, "ppm"), f.rgb.image, maxval);
    } else {
      write_f32(frame_path(dir, "slice", i, "f32"), f.slice.data);
      write_f32(frame_path(dir, "rgb", i, "f32"), f.rgb.image.data);
    }
  }

  atomic_write_file(dir + "/jitter.log", [&](std::ostream& out) {
    char buf[128];
    for (const auto& [dx, dy] : result.truth.offsets) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", dx, dy);
      out << buf;
    }
  });
}

AcquisitionResult load_record(const std::string& dir) {
  std::istringstream in(read_entire_file(dir + "/manifest"));
  std::string line;
  if (!std::getline(in, line) || line != "dmdhsi-record 1") {
    throw IoError("not a record manifest: " + dir);
  }

  AcquisitionResult result;
  AcquisitionRecord& rec = result.record;
  std::string encoding = "u8";
  std::size_t frame_count = 0;
  struct FrameMeta {
    DmdPattern pattern;
    double timestamp = 0.0;
    bool clipped = false;
    int border_left = 0;
    int border_right = 0;
  };
  std::vector<FrameMeta> metas;

  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "scene_width") ls >> rec.scene_width;
    else if (key == "scene_height") ls >> rec.scene_height;
    else if (key == "bands") ls >> rec.bands;
    else if (key == "slit_width") ls >> rec.slit_width;
    else if (key == "encoding") ls >> encoding;
    else if (key == "frames") ls >> frame_count;
    else if (key == "wavelengths_nm") {
      float w;
      while (ls >> w) rec.wavelengths.push_back(w);
    } else if (key == "sensor.bit_depth") ls >> rec.sensor.bit_depth;
    else if (key == "sensor.full_well_e") ls >> rec.sensor.full_well_e;
    else if (key == "sensor.read_noise_sigma_e") ls >> rec.sensor.read_noise_sigma_e;
    else if (key == "sensor.gain_e_per_unit_ms") ls >> rec.sensor.gain_e_per_unit_ms;
    else if (key == "sensor.exposure_ms") ls >> rec.sensor.exposure_ms;
    else if (key == "sensor.seed") ls >> rec.sensor.seed;
    else if (key == "sensor.shot_noise") { int v; ls >> v; rec.sensor.shot_noise = v != 0; }
    else if (key == "sensor.quantize") { int v; ls >> v; rec.sensor.quantize = v != 0; }
    else if (key == "timing.dmd_max_pattern_hz") ls >> rec.timing.dmd_max_pattern_hz;
    else if (key == "timing.sensor_min_fps") ls >> rec.timing.sensor_min_fps;
    else if (key == "timing.sensor_max_fps") ls >> rec.timing.sensor_max_fps;
    else if (key == "timing.sensor_fps") ls >> rec.timing.sensor_fps;
    else if (key == "timing.exposure_ms") ls >> rec.timing.exposure_ms;
    else if (key == "timing.overhead_ms") ls >> rec.timing.overhead_ms;
    else if (key == "geometry.mirror_group") ls >> rec.geometry.mirror_group;
    else if (key == "geometry.stripe_alpha") ls >> rec.geometry.stripe_alpha;
    else if (key == "dwell_ms") ls >> rec.dwell_ms;
    else if (key == "frame") {
      FrameMeta m;
      std::size_t idx;
      int clipped;
      if (!(ls >> idx >> m.pattern.slit_start >> m.pattern.slit_width >>
            m.pattern.dmd_width >> m.pattern.dmd_height >> m.timestamp >> clipped >>
            m.border_left >> m.border_right)) {
        throw IoError("malformed frame line in manifest: " + dir);
      }
      if (idx != metas.size()) throw IoError("frame indices out of order in manifest: " + dir);
      m.clipped = clipped != 0;
      metas.push_back(m);
    } else {
      throw IoError("unknown key '" + key + "' in manifest: " + dir);
    }
  }
  if (rec.scene_width <= 0 || rec.scene_height <= 0 || rec.bands <= 0) {
    throw IoError("manifest missing scene dimensions: " + dir);
  }
  if (rec.wavelengths.size() != std::size_t(rec.bands)) {
    throw IoError("manifest wavelength grid does not match band count: " + dir);
  }
  if (metas.size() != frame_count) {
    throw IoError("manifest frame lines do not match declared count: " + dir);
  }

  const bool quantized = encoding != "f32";
  rec.frames.reserve(metas.size());
  for (std::size_t i = 0; i < metas.size(); ++i) {
    FrameEntry f;
    f.pattern = metas[i].pattern;
    f.timestamp_ms = metas[i].timestamp;
    f.slit_clipped = metas[i].clipped;
    f.border_left = metas[i].border_left;
    f.border_right = metas[i].border_right;

    const int g = std::max(1, rec.geometry.mirror_group);
    const int scene_w = f.pattern.slit_width / g;
    f.slice.rows = rec.scene_height;
    f.slice.spectral_pixels = rec.bands + scene_w - 1;
    f.slice.pattern = f.pattern;
    f.slice.frame_index = i;
    f.slice.quantized = quantized;
    f.rgb.frame_index = i;
    f.rgb.timestamp_ms = f.timestamp_ms;
    f.rgb.quantized = quantized;

    if (quantized) {
      Image slice_img = read_pgm(frame_path(dir, "slice", i, "pgm"));
      if (slice_img.width != f.slice.spectral_pixels || slice_img.height != f.slice.rows) {
        throw IoError("slice frame dimensions do not match manifest: " + dir);
      }
      f.slice.data = std::move(slice_img.data);
      f.rgb.image = read_ppm(frame_path(dir, "rgb", i, "ppm"));
      if (f.rgb.image.width != rec.scene_width || f.rgb.image.height != rec.scene_height) {
        throw IoError("rgb frame dimensions do not match manifest: " + dir);
      }
    } else {
      f.slice.data = read_f32(frame_path(dir, "slice", i, "f32"),
                              std::size_t(f.slice.rows) * f.slice.spectral_pixels);
      f.rgb.image = RgbImage::zeros(rec.scene_width, rec.scene_height);
      f.rgb.image.data = read_f32(frame_path(dir, "rgb", i, "f32"),
                                  3 * std::size_t(rec.scene_width) * rec.scene_height);
    }
    rec.frames.push_back(std::move(f));
  }

  std::ifstream jl(dir + "/jitter.log");
  if (jl) {
    double dx, dy;
    while (jl >> dx >> dy) result.truth.offsets.emplace_back(dx, dy);
  }
  return result;
}

}  // namespace dmdhsi
