#include "cube.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "errors.hpp"
#include "io_util.hpp"

namespace dmdhsi {

SpectralCube SpectralCube::zeros(int w, int h, int b, std::vector<float> wavelengths_nm) {
  SpectralCube cube;
  cube.width = w;
  cube.height = h;
  cube.bands = b;
  cube.wavelengths = std::move(wavelengths_nm);
  cube.data.assign(std::size_t(b) * w * h, 0.0f);
  validate_cube(cube);
  return cube;
}

int SpectralCube::nearest_band(double wavelength_nm) const {
  int best = 0;
  double best_dist = std::numeric_limits<double>::max();
  for (int b = 0; b < bands; ++b) {
    const double d = std::abs(wavelengths[b] - wavelength_nm);
    if (d < best_dist) {
      best_dist = d;
      best = b;
    }
  }
  return best;
}

void validate_cube(const SpectralCube& cube) {
  if (cube.width <= 0 || cube.height <= 0 || cube.bands <= 0) {
    throw ValidationError("cube dimensions must be positive");
  }
  if (cube.wavelengths.size() != std::size_t(cube.bands)) {
    throw ValidationError("wavelength grid length does not match band count");
  }
  for (int b = 1; b < cube.bands; ++b) {
    if (!(cube.wavelengths[b] > cube.wavelengths[b - 1])) {
      throw ValidationError("wavelengths must be strictly increasing");
    }
  }
  if (cube.data.size() != cube.voxel_count()) {
    throw ValidationError("cube payload size does not match dimensions");
  }
  for (float v : cube.data) {
    if (!(v >= 0.0f)) throw ValidationError("cube radiance must be non-negative");
  }
}

std::vector<float> uniform_band_centers(int bands, double lo_nm, double hi_nm) {
  if (bands <= 0 || !(hi_nm > lo_nm)) {
    throw ValidationError("band grid needs bands > 0 and hi > lo");
  }
  const double step = (hi_nm - lo_nm) / bands;
  std::vector<float> w(bands);
  for (int b = 0; b < bands; ++b) w[b] = float(lo_nm + (b + 0.5) * step);
  return w;
}

SpectralCube rebin_spectral(const SpectralCube& cube, int n_bands) {
  if (n_bands < 1 || n_bands > cube.bands) {
    throw ValidationError("rebin target band count out of range");
  }
  if (n_bands == cube.bands) return cube;

  const int base = cube.bands / n_bands;
  const int extra = cube.bands % n_bands;  // first `extra` groups get one more

  SpectralCube out;
  out.width = cube.width;
  out.height = cube.height;
  out.bands = n_bands;
  out.wavelengths.resize(n_bands);
  out.data.assign(std::size_t(n_bands) * cube.plane(), 0.0f);

  const std::size_t plane = cube.plane();
  std::vector<double> acc(plane);
  int src = 0;
  for (int k = 0; k < n_bands; ++k) {
    const int group = base + (k < extra ? 1 : 0);
    double wsum = 0.0;
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int g = 0; g < group; ++g, ++src) {
      wsum += cube.wavelengths[src];
      const float* band = cube.band_ptr(src);
      for (std::size_t i = 0; i < plane; ++i) acc[i] += band[i];
    }
    out.wavelengths[k] = float(wsum / group);
    float* dst = out.band_ptr(k);
    for (std::size_t i = 0; i < plane; ++i) dst[i] = float(acc[i] / group);
  }
  return out;
}

RgbResponse RgbResponse::gaussian_default(const std::vector<float>& wavelengths_nm) {
  constexpr double kCenters[3] = {620.0, 550.0, 460.0};
  constexpr double kFwhm = 60.0;
  const double denom = kFwhm * kFwhm / (4.0 * std::log(2.0));
  RgbResponse resp;
  resp.bands = int(wavelengths_nm.size());
  resp.weights.assign(3 * wavelengths_nm.size(), 0.0);
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (int b = 0; b < resp.bands; ++b) {
      const double d = wavelengths_nm[b] - kCenters[c];
      const double w = std::exp(-d * d / denom);
      resp.weights[c * resp.bands + b] = w;
      sum += w;
    }
    for (int b = 0; b < resp.bands; ++b) resp.weights[c * resp.bands + b] /= sum;
  }
  return resp;
}

void validate_response(const RgbResponse& resp) {
  if (resp.bands <= 0 || resp.weights.size() != 3 * std::size_t(resp.bands)) {
    throw ValidationError("rgb response shape mismatch");
  }
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (int b = 0; b < resp.bands; ++b) {
      const double w = resp.at(c, b);
      if (!(w >= 0.0)) throw ValidationError("rgb response weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("rgb response channel is not normalized");
    }
  }
}

RgbImage rgb_render(const SpectralCube& cube, const RgbResponse& resp) {
  if (resp.bands != cube.bands) {
    throw ValidationError("rgb response band count does not match cube");
  }
  RgbImage img = RgbImage::zeros(cube.width, cube.height);
  const std::size_t plane = cube.plane();
  std::vector<double> acc(plane);
  for (int c = 0; c < 3; ++c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int b = 0; b < cube.bands; ++b) {
      const double w = resp.at(c, b);
      if (w == 0.0) continue;
      const float* band = cube.band_ptr(b);
      for (std::size_t i = 0; i < plane; ++i) acc[i] += w * band[i];
    }
    float* dst = img.data.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) dst[i] = float(acc[i]);
  }
  return img;
}

namespace {

constexpr char kCubeMagic[4] = {'H', 'S', 'C', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

}  // namespace

void write_cube(const SpectralCube& cube, const std::string& path) {
  validate_cube(cube);
  atomic_write_file(path, [&](std::ostream& out) {
    out.write(kCubeMagic, 4);
    put_u32(out, std::uint32_t(cube.width));
    put_u32(out, std::uint32_t(cube.height));
    put_u32(out, std::uint32_t(cube.bands));
    out.write(reinterpret_cast<const char*>(cube.wavelengths.data()),
              std::streamsize(cube.wavelengths.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(cube.data.data()),
              std::streamsize(cube.data.size() * sizeof(float)));
  });
}

SpectralCube read_cube(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);

  unsigned char header[16];
  in.read(reinterpret_cast<char*>(header), 16);
  if (in.gcount() < 16) throw IoError("cube file too short for header: " + path);
  if (std::memcmp(header, kCubeMagic, 4) != 0) {
    throw IoError("bad cube magic (expected HSC1): " + path);
  }
  SpectralCube cube;
  cube.width = int(get_u32(header + 4));
  cube.height = int(get_u32(header + 8));
  cube.bands = int(get_u32(header + 12));
  if (cube.width <= 0 || cube.height <= 0 || cube.bands <= 0) {
    throw IoError("cube header has non-positive dimensions: " + path);
  }
  const std::uintmax_t voxels =
      std::uintmax_t(cube.bands) * cube.width * cube.height;
  if (std::uintmax_t(cube.width) > (1u << 20) || std::uintmax_t(cube.height) > (1u << 20) ||
      voxels > (std::uintmax_t(1) << 31)) {
    throw IoError("cube header dimensions are implausibly large: " + path);
  }
  const std::uintmax_t expect =
      16 + sizeof(float) * (std::uintmax_t(cube.bands) + voxels);
  std::error_code ec;
  const std::uintmax_t actual = std::filesystem::file_size(path, ec);
  if (!ec && actual < expect) throw IoError("truncated cube payload: " + path);

  cube.wavelengths.resize(cube.bands);
  in.read(reinterpret_cast<char*>(cube.wavelengths.data()),
          std::streamsize(cube.wavelengths.size() * sizeof(float)));
  cube.data.resize(cube.voxel_count());
  in.read(reinterpret_cast<char*>(cube.data.data()),
          std::streamsize(cube.data.size() * sizeof(float)));
  if (!in) throw IoError("truncated cube payload: " + path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("trailing bytes after cube payload: " + path);
  }

  for (int b = 1; b < cube.bands; ++b) {
    if (!(cube.wavelengths[b] > cube.wavelengths[b - 1])) {
      throw IoError("cube wavelengths not strictly increasing: " + path);
    }
  }
  return cube;
}

}  // namespace dmdhsi
