#include "roi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

#include "errors.hpp"
#include "io_util.hpp"

namespace dmdhsi {

namespace {

Image gaussian_blur(const Image& src, double sigma) {
  if (sigma <= 0.0) return src;
  const int radius = int(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int W = src.width;
  const int H = src.height;
  Image tmp = Image::zeros(W, H);
  Image out = Image::zeros(W, H);
  // Separable passes with edge replication.
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * src.at(std::clamp(x + i, 0, W - 1), y);
      }
      tmp.at(x, y) = float(acc);
    }
  }
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * tmp.at(x, std::clamp(y + i, 0, H - 1));
      }
      out.at(x, y) = float(acc);
    }
  }
  return out;
}

}  // namespace

EdgeMap canny(const Image& gray, double low, double high, double blur_sigma) {
  if (gray.width < 3 || gray.height < 3) {
    throw ValidationError("canny needs an image of at least 3x3");
  }
  if (low < 0.0 || low > high) {
    throw ValidationError("canny thresholds must satisfy 0 <= low <= high");
  }
  const Image img = gaussian_blur(gray, blur_sigma);
  const int W = img.width;
  const int H = img.height;

  std::vector<float> mag(std::size_t(W) * H, 0.0f);
  std::vector<std::uint8_t> sector(std::size_t(W) * H, 0);
  auto px = [&](int x, int y) { return img.at(std::clamp(x, 0, W - 1), std::clamp(y, 0, H - 1)); };
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double gx = px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1) -
                        px(x - 1, y - 1) - 2.0 * px(x - 1, y) - px(x - 1, y + 1);
      const double gy = px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1) -
                        px(x - 1, y - 1) - 2.0 * px(x, y - 1) - px(x + 1, y - 1);
      mag[std::size_t(y) * W + x] = float(std::sqrt(gx * gx + gy * gy));
      double angle = std::atan2(gy, gx) * 180.0 / 3.14159265358979323846;
      if (angle < 0) angle += 180.0;
      sector[std::size_t(y) * W + x] = std::uint8_t(int(std::floor((angle + 22.5) / 45.0)) % 4);
    }
  }

  // Non-maximum suppression along the quantized gradient direction.
  static constexpr int kOff[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  std::vector<std::uint8_t> state(std::size_t(W) * H, 0);  // 1 weak, 2 strong
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t i = std::size_t(y) * W + x;
      const float m = mag[i];
      if (m < low) continue;
      const int ox = kOff[sector[i]][0];
      const int oy = kOff[sector[i]][1];
      auto mag_at = [&](int xi, int yi) -> float {
        if (xi < 0 || xi >= W || yi < 0 || yi >= H) return 0.0f;
        return mag[std::size_t(yi) * W + xi];
      };
      // Plateau pairs keep only their leading pixel (strict test on the
      // negative side) so a symmetric step yields a single-pixel ridge.
      if (m < mag_at(x + ox, y + oy) || m <= mag_at(x - ox, y - oy)) continue;
      state[i] = m >= high ? 2 : 1;
    }
  }

  // Hysteresis: weak pixels survive only when 8-connected to a strong one.
  EdgeMap edges;
  edges.width = W;
  edges.height = H;
  edges.data.assign(std::size_t(W) * H, 0);
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (state[std::size_t(y) * W + x] == 2) {
        edges.data[std::size_t(y) * W + x] = 1;
        queue.emplace_back(x, y);
      }
    }
  }
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        const int nx = x + ox;
        const int ny = y + oy;
        if (nx < 0 || nx >= W || ny < 0 || ny >= H) continue;
        const std::size_t i = std::size_t(ny) * W + nx;
        if (state[i] == 1 && !edges.data[i]) {
          edges.data[i] = 1;
          queue.emplace_back(nx, ny);
        }
      }
    }
  }
  return edges;
}

namespace {

std::vector<std::uint8_t> morphological_close(const std::vector<std::uint8_t>& in,
                                              int W, int H) {
  std::vector<std::uint8_t> dilated(in.size(), 0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      std::uint8_t v = 0;
      for (int oy = -1; oy <= 1 && !v; ++oy) {
        for (int ox = -1; ox <= 1 && !v; ++ox) {
          const int nx = x + ox;
          const int ny = y + oy;
          if (nx >= 0 && nx < W && ny >= 0 && ny < H) v = in[std::size_t(ny) * W + nx];
        }
      }
      dilated[std::size_t(y) * W + x] = v;
    }
  }
  // Erosion pads with foreground outside the image so closing stays
  // extensive for regions touching the frame edge.
  std::vector<std::uint8_t> eroded(in.size(), 0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      std::uint8_t v = 1;
      for (int oy = -1; oy <= 1 && v; ++oy) {
        for (int ox = -1; ox <= 1 && v; ++ox) {
          const int nx = x + ox;
          const int ny = y + oy;
          if (nx < 0 || nx >= W || ny < 0 || ny >= H) continue;
          if (!dilated[std::size_t(ny) * W + nx]) v = 0;
        }
      }
      eroded[std::size_t(y) * W + x] = v;
    }
  }
  return eroded;
}

}  // namespace

RegionLabelMap label_regions(const EdgeMap& mask, int min_area) {
  const int W = mask.width;
  const int H = mask.height;
  std::vector<std::uint8_t> fg = morphological_close(mask.data, W, H);

  // Background reachable from the border (4-connected); the rest of the
  // background is enclosed holes and becomes foreground.
  std::vector<std::uint8_t> outside(fg.size(), 0);
  std::deque<std::pair<int, int>> queue;
  auto push_bg = [&](int x, int y) {
    const std::size_t i = std::size_t(y) * W + x;
    if (!fg[i] && !outside[i]) {
      outside[i] = 1;
      queue.emplace_back(x, y);
    }
  };
  for (int x = 0; x < W; ++x) {
    push_bg(x, 0);
    push_bg(x, H - 1);
  }
  for (int y = 0; y < H; ++y) {
    push_bg(0, y);
    push_bg(W - 1, y);
  }
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    if (x > 0) push_bg(x - 1, y);
    if (x < W - 1) push_bg(x + 1, y);
    if (y > 0) push_bg(x, y - 1);
    if (y < H - 1) push_bg(x, y + 1);
  }
  for (std::size_t i = 0; i < fg.size(); ++i) {
    if (!fg[i] && !outside[i]) fg[i] = 1;
  }

  RegionLabelMap out;
  out.width = W;
  out.height = H;
  out.labels.assign(fg.size(), 0);

  std::vector<std::int32_t> component(fg.size(), 0);
  std::int32_t next = 0;
  std::vector<RegionInfo> infos;
  std::vector<double> cx_sum, cy_sum;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t start = std::size_t(y) * W + x;
      if (!fg[start] || component[start]) continue;
      const std::int32_t id = ++next;
      RegionInfo info;
      info.x_min = info.x_max = x;
      info.y_min = info.y_max = y;
      double sx = 0, sy = 0;
      component[start] = id;
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        const auto [px, py] = queue.front();
        queue.pop_front();
        ++info.pixel_count;
        sx += px;
        sy += py;
        info.x_min = std::min(info.x_min, px);
        info.x_max = std::max(info.x_max, px);
        info.y_min = std::min(info.y_min, py);
        info.y_max = std::max(info.y_max, py);
        auto visit = [&](int nx, int ny) {
          const std::size_t i = std::size_t(ny) * W + nx;
          if (fg[i] && !component[i]) {
            component[i] = id;
            queue.emplace_back(nx, ny);
          }
        };
        if (px > 0) visit(px - 1, py);
        if (px < W - 1) visit(px + 1, py);
        if (py > 0) visit(px, py - 1);
        if (py < H - 1) visit(px, py + 1);
      }
      infos.push_back(info);
      cx_sum.push_back(sx);
      cy_sum.push_back(sy);
    }
  }

  // Keep components of at least min_area, renumbered in raster order.
  std::vector<std::int32_t> remap(infos.size() + 1, 0);
  for (std::size_t i = 0; i < infos.size(); ++i) {
    if (infos[i].pixel_count >= min_area) {
      RegionInfo info = infos[i];
      info.centroid_x = cx_sum[i] / info.pixel_count;
      info.centroid_y = cy_sum[i] / info.pixel_count;
      out.regions.push_back(info);
      remap[i + 1] = std::int32_t(out.regions.size());
    }
  }
  for (std::size_t i = 0; i < fg.size(); ++i) out.labels[i] = remap[component[i]];
  return out;
}

ScanPlan regions_to_plan(const RegionLabelMap& labels, const std::vector<int>& selected,
                         int slit_width, int margin, const TimingParams& timing,
                         const CaptureGeometry& geom, int dmd_width, int dmd_height) {
  if (selected.empty()) throw ValidationError("empty region selection for plan");
  if (slit_width < 1) throw ValidationError("slit width must be at least 1");
  if (margin < 0) throw ValidationError("margin must be non-negative");
  std::vector<std::pair<int, int>> intervals;  // [first, last] columns
  for (int label : selected) {
    if (label < 1 || label > labels.count()) {
      throw ValidationError("selected label " + std::to_string(label) + " does not exist");
    }
    const RegionInfo& r = labels.regions[label - 1];
    intervals.emplace_back(std::max(0, r.x_min - margin),
                           std::min(labels.width - 1, r.x_max + margin));
  }
  std::sort(intervals.begin(), intervals.end());
  std::vector<std::pair<int, int>> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.first <= merged.back().second + 1) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }

  const int g = std::max(1, geom.mirror_group);
  ScanPlan plan;
  plan.slit_width = slit_width;
  plan.dwell_ms = timing.dwell_ms();
  for (const auto& [first, last] : merged) {
    for (int start = first; start <= last; start += slit_width) {
      const int w = std::min(slit_width, last - start + 1);
      plan.patterns.push_back(make_pattern(start * g, w * g, dmd_width, dmd_height));
    }
  }
  validate_plan(plan);
  return plan;
}

std::vector<double> region_mean_spectrum(const SpectralCube& cube,
                                         const RegionLabelMap& labels, int label,
                                         int block) {
  if (cube.width != labels.width || cube.height != labels.height) {
    throw ValidationError("cube and label map dimensions differ");
  }
  if (label < 1 || label > labels.count()) {
    throw ValidationError("label " + std::to_string(label) + " does not exist");
  }
  if (block < 1) throw ValidationError("block size must be at least 1");

  const RegionInfo& r = labels.regions[label - 1];
  auto block_inside = [&](int tx, int ty) {
    if (tx < 0 || ty < 0 || tx + block > labels.width || ty + block > labels.height) {
      return false;
    }
    for (int y = ty; y < ty + block; ++y) {
      for (int x = tx; x < tx + block; ++x) {
        if (labels.at(x, y) != label) return false;
      }
    }
    return true;
  };

  // Preferred placement centers the block on the centroid; otherwise take
  // the valid placement whose center is nearest to it.
  int best_tx = -1, best_ty = -1;
  double best_d2 = std::numeric_limits<double>::max();
  const int want_tx = int(std::lround(r.centroid_x - (block - 1) / 2.0));
  const int want_ty = int(std::lround(r.centroid_y - (block - 1) / 2.0));
  if (block_inside(want_tx, want_ty)) {
    best_tx = want_tx;
    best_ty = want_ty;
  } else {
    for (int ty = r.y_min; ty <= r.y_max - block + 1; ++ty) {
      for (int tx = r.x_min; tx <= r.x_max - block + 1; ++tx) {
        if (!block_inside(tx, ty)) continue;
        const double cx = tx + (block - 1) / 2.0;
        const double cy = ty + (block - 1) / 2.0;
        const double d2 = (cx - r.centroid_x) * (cx - r.centroid_x) +
                          (cy - r.centroid_y) * (cy - r.centroid_y);
        if (d2 < best_d2) {
          best_d2 = d2;
          best_tx = tx;
          best_ty = ty;
        }
      }
    }
    if (best_tx < 0) {
      throw ValidationError("region " + std::to_string(label) +
                            " is too small for a " + std::to_string(block) + "x" +
                            std::to_string(block) + " block");
    }
  }

  std::vector<double> spectrum(cube.bands, 0.0);
  for (int b = 0; b < cube.bands; ++b) {
    double acc = 0.0;
    for (int y = best_ty; y < best_ty + block; ++y) {
      for (int x = best_tx; x < best_tx + block; ++x) acc += cube.at(b, x, y);
    }
    spectrum[b] = acc / (double(block) * block);
  }
  return spectrum;
}

void write_labels_pgm(const RegionLabelMap& labels, const std::string& path) {
  Image img = Image::zeros(labels.width, labels.height);
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    img.data[i] = float(labels.labels[i]);
  }
  write_pgm(path, img, 255);
}

void write_spectrum_csv(const std::vector<float>& wavelengths_nm,
                        const std::vector<double>& spectrum, const std::string& path) {
  if (wavelengths_nm.size() != spectrum.size()) {
    throw ValidationError("spectrum and wavelength grid lengths differ");
  }
  atomic_write_file(path, [&](std::ostream& out) {
    out << "wavelength_nm,value\n";
    char buf[64];
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.4f,%.8f\n", double(wavelengths_nm[i]), spectrum[i]);
      out << buf;
    }
  });
}

}  // namespace dmdhsi
