#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dmdhsi {

// Grayscale image, row-major [y][x].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  static Image zeros(int w, int h);
  float& at(int x, int y) { return data[std::size_t(y) * width + x]; }
  float at(int x, int y) const { return data[std::size_t(y) * width + x]; }
  std::size_t pixel_count() const { return data.size(); }
};

// Three-channel image stored as planes, [channel][y][x]. Channel order R, G, B.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  static RgbImage zeros(int w, int h);
  std::size_t plane() const { return std::size_t(width) * height; }
  float& at(int c, int x, int y) { return data[c * plane() + std::size_t(y) * width + x]; }
  float at(int c, int x, int y) const { return data[c * plane() + std::size_t(y) * width + x]; }

  // Per-pixel channel mean.
  Image luminance() const;
};

// Binary netpbm I/O. Samples are one byte up to maxval 255 and two bytes
// big-endian above, per the format. Values are clamped to [0, maxval].
void write_pgm(const std::string& path, const Image& img, int maxval);
Image read_pgm(const std::string& path, int* maxval_out = nullptr);
void write_ppm(const std::string& path, const RgbImage& img, int maxval);
RgbImage read_ppm(const std::string& path, int* maxval_out = nullptr);

// Raw little-endian float32 payload, used for unquantized frame data.
void write_f32(const std::string& path, const std::vector<float>& values);
std::vector<float> read_f32(const std::string& path, std::size_t expected_count);

}  // namespace dmdhsi
