#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "controller.hpp"
#include "cube.hpp"
#include "image.hpp"

namespace dmdhsi {

struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 0 or 1

  std::uint8_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
};

// Canny on a grayscale image in [0, 1]: Gaussian blur (kernel radius
// ceil(3*sigma)), Sobel gradients, non-maximum suppression over four
// quantized directions, hysteresis with 8-connected linking. Thresholds
// apply to the raw Sobel magnitude.
EdgeMap canny(const Image& gray, double low = 0.1, double high = 0.3,
              double blur_sigma = 1.4);

struct RegionInfo {
  int pixel_count = 0;
  int x_min = 0, x_max = 0;
  int y_min = 0, y_max = 0;
  double centroid_x = 0.0, centroid_y = 0.0;
};

struct RegionLabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;  // 0 = background, regions 1..count
  std::vector<RegionInfo> regions;   // regions[i] describes label i+1

  int count() const { return int(regions.size()); }
  std::int32_t at(int x, int y) const { return labels[std::size_t(y) * width + x]; }
};

// Segmentation from a boundary-ish binary mask: morphological 3x3 closing,
// border flood fill to solidify enclosed holes, then 4-connected components
// labeled in raster order of their first pixel; components below min_area
// are discarded.
RegionLabelMap label_regions(const EdgeMap& mask, int min_area = 25);

// Tiles the union of the selected regions' column ranges (bounding columns
// dilated by margin, clipped to the scene) with non-overlapping slits.
ScanPlan regions_to_plan(const RegionLabelMap& labels, const std::vector<int>& selected,
                         int slit_width, int margin, const TimingParams& timing,
                         const CaptureGeometry& geom = {}, int dmd_width = 1920,
                         int dmd_height = 1080);

// Per-band mean over a block x block square centered at the region's
// centroid, moved to the nearest placement fully inside the region.
std::vector<double> region_mean_spectrum(const SpectralCube& cube,
                                         const RegionLabelMap& labels, int label,
                                         int block = 4);

// Label values written as gray levels.
void write_labels_pgm(const RegionLabelMap& labels, const std::string& path);

// CSV: wavelength_nm,value
void write_spectrum_csv(const std::vector<float>& wavelengths_nm,
                        const std::vector<double>& spectrum, const std::string& path);

}  // namespace dmdhsi
