#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "cube.hpp"

namespace dmdhsi::test {

// Random cube with values in [lo, hi]; spatially independent voxels.
inline SpectralCube random_cube(int w, int h, int b, std::uint64_t seed,
                                float lo = 0.1f, float hi = 0.9f) {
  SpectralCube cube = SpectralCube::zeros(w, h, b, uniform_band_centers(b));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  for (float& v : cube.data) v = dist(rng);
  return cube;
}

// Spatially smooth random cube: per-pixel random luminance blurred by a box
// filter, identical spectrum shape scaled per pixel. Good registration
// texture without spectral surprises.
inline SpectralCube textured_cube(int w, int h, int b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(0.15f, 0.85f);
  std::vector<float> base(std::size_t(w) * h);
  for (float& v : base) v = dist(rng);
  // 3x3 box blur, replicated edges.
  std::vector<float> smooth(base.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (int oy = -1; oy <= 1; ++oy) {
        for (int ox = -1; ox <= 1; ++ox) {
          const int sx = std::clamp(x + ox, 0, w - 1);
          const int sy = std::clamp(y + oy, 0, h - 1);
          acc += base[std::size_t(sy) * w + sx];
        }
      }
      smooth[std::size_t(y) * w + x] = acc / 9.0f;
    }
  }
  SpectralCube cube = SpectralCube::zeros(w, h, b, uniform_band_centers(b));
  for (int band = 0; band < b; ++band) {
    const float shape = 0.5f + 0.5f * float(band) / float(b);
    float* dst = cube.band_ptr(band);
    for (std::size_t i = 0; i < smooth.size(); ++i) dst[i] = smooth[i] * shape;
  }
  return cube;
}

inline bool cubes_identical(const SpectralCube& a, const SpectralCube& b) {
  return a.width == b.width && a.height == b.height && a.bands == b.bands &&
         a.wavelengths == b.wavelengths && a.data == b.data;
}

inline double max_abs_diff(const SpectralCube& a, const SpectralCube& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::abs(double(a.data[i]) - double(b.data[i])));
  }
  return m;
}

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = (std::filesystem::temp_directory_path() /
             ("dmdhsi_test_" + tag + "_" + std::to_string(std::random_device{}())))
                .string();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

}  // namespace dmdhsi::test
