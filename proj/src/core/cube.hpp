#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "image.hpp"

namespace dmdhsi {

// Dense radiance cube, band-major: data[b][y][x] with x the scan axis and
// y the slit axis. Radiance is normalized, nominally in [0, 1].
struct SpectralCube {
  int width = 0;
  int height = 0;
  int bands = 0;
  std::vector<float> wavelengths;  // nm, strictly increasing, size == bands
  std::vector<float> data;         // size == bands * height * width

  static SpectralCube zeros(int w, int h, int b, std::vector<float> wavelengths_nm);

  std::size_t plane() const { return std::size_t(width) * height; }
  std::size_t voxel_count() const { return plane() * bands; }
  float& at(int b, int x, int y) { return data[b * plane() + std::size_t(y) * width + x]; }
  float at(int b, int x, int y) const { return data[b * plane() + std::size_t(y) * width + x]; }
  const float* band_ptr(int b) const { return data.data() + b * plane(); }
  float* band_ptr(int b) { return data.data() + b * plane(); }

  int nearest_band(double wavelength_nm) const;
};

// Throws ValidationError when dimensions, grid, or data violate the cube
// invariants (strictly increasing wavelengths, non-negative data, sizes).
void validate_cube(const SpectralCube& cube);

// Band centers of `bands` equal-width bins spanning [lo, hi] nm.
// The prototype grid is 500 one-nanometer bins over 400-900 nm.
std::vector<float> uniform_band_centers(int bands, double lo_nm = 400.0,
                                        double hi_nm = 900.0);

// Merges bands into n contiguous groups (sizes as even as possible, larger
// groups first); each output band is the unweighted mean of its group, and
// its wavelength the mean of the grouped wavelengths.
SpectralCube rebin_spectral(const SpectralCube& cube, int n_bands);

// Spectral response of the Bayer-filtered auxiliary sensor. Channel order
// R, G, B; each channel's weights are non-negative and sum to one.
struct RgbResponse {
  int bands = 0;
  std::vector<double> weights;  // [channel][band]

  double at(int c, int b) const { return weights[std::size_t(c) * bands + b]; }

  // Gaussian channel responses centered at 620/550/460 nm, FWHM 60 nm,
  // normalized per channel on the given grid.
  static RgbResponse gaussian_default(const std::vector<float>& wavelengths_nm);
};

void validate_response(const RgbResponse& resp);

// channel c at (x, y) = sum_b resp[c][b] * cube[b][y][x].
RgbImage rgb_render(const SpectralCube& cube, const RgbResponse& resp);

// Cube file format (binary, little-endian): magic "HSC1", u32 width, u32
// height, u32 bands, f32 wavelengths[bands], f32 data band-sequential
// (band, then row, then column). No padding.
void write_cube(const SpectralCube& cube, const std::string& path);
SpectralCube read_cube(const std::string& path);

}  // namespace dmdhsi
