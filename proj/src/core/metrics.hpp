#pragma once

#include <string>
#include <vector>

#include "cube.hpp"

namespace dmdhsi {

// Root-mean-square difference over all voxels, normalized by the reference
// cube's dynamic range (max - min). Cubes must share dimensions and
// wavelength grids; a constant reference is a degenerate-reference error.
double nrmsd(const SpectralCube& a, const SpectralCube& reference);

// snr_db saturates here instead of returning infinity for zero noise.
inline constexpr double kSnrSaturationDb = 300.0;

// 10 * log10(sum clean^2 / sum (noisy - clean)^2).
double snr_db(const std::vector<float>& clean, const std::vector<float>& noisy);

struct BandSweepPoint {
  int n_bands = 0;
  double nrmsd = 0.0;
};

struct BandSweepResult {
  std::vector<BandSweepPoint> points;
};

// {50, 100, 150, 200, 250, 300}
std::vector<int> default_sweep_counts();

// nrmsd between truth and reconstruction rebinned to each band count.
// Counts must be strictly increasing and valid for rebin_spectral.
BandSweepResult band_sweep(const SpectralCube& truth, const SpectralCube& recon,
                           const std::vector<int>& band_counts);

// CSV: n_bands,nrmsd
void write_sweep_csv(const BandSweepResult& sweep, const std::string& path);

}  // namespace dmdhsi
