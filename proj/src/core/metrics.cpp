#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "io_util.hpp"

namespace dmdhsi {

double nrmsd(const SpectralCube& a, const SpectralCube& reference) {
  if (a.width != reference.width || a.height != reference.height ||
      a.bands != reference.bands) {
    throw ValidationError("nrmsd cubes must share dimensions");
  }
  if (a.wavelengths != reference.wavelengths) {
    throw ValidationError("nrmsd cubes must share the wavelength grid");
  }
  const auto [lo, hi] =
      std::minmax_element(reference.data.begin(), reference.data.end());
  const double range = double(*hi) - double(*lo);
  if (range <= 0.0) {
    throw ValidationError("nrmsd reference is constant (degenerate dynamic range)");
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = double(a.data[i]) - double(reference.data[i]);
    ss += d * d;
  }
  return std::sqrt(ss / double(a.data.size())) / range;
}

double snr_db(const std::vector<float>& clean, const std::vector<float>& noisy) {
  if (clean.size() != noisy.size() || clean.empty()) {
    throw ValidationError("snr frames must share a non-empty shape");
  }
  double signal = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    signal += double(clean[i]) * double(clean[i]);
    const double d = double(noisy[i]) - double(clean[i]);
    noise += d * d;
  }
  if (signal <= 0.0) throw ValidationError("snr clean signal is all zero");
  if (noise <= 0.0) return kSnrSaturationDb;
  return std::min(10.0 * std::log10(signal / noise), kSnrSaturationDb);
}

std::vector<int> default_sweep_counts() { return {50, 100, 150, 200, 250, 300}; }

BandSweepResult band_sweep(const SpectralCube& truth, const SpectralCube& recon,
                           const std::vector<int>& band_counts) {
  if (band_counts.empty()) throw ValidationError("band sweep needs at least one count");
  for (std::size_t i = 1; i < band_counts.size(); ++i) {
    if (band_counts[i] <= band_counts[i - 1]) {
      throw ValidationError("band sweep counts must be strictly increasing");
    }
  }
  BandSweepResult sweep;
  sweep.points.reserve(band_counts.size());
  for (int n : band_counts) {
    const SpectralCube t = rebin_spectral(truth, n);
    const SpectralCube r = rebin_spectral(recon, n);
    sweep.points.push_back({n, nrmsd(r, t)});
  }
  return sweep;
}

void write_sweep_csv(const BandSweepResult& sweep, const std::string& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "n_bands,nrmsd\n";
    char buf[64];
    for (const BandSweepPoint& p : sweep.points) {
      std::snprintf(buf, sizeof buf, "%d,%.8f\n", p.n_bands, p.nrmsd);
      out << buf;
    }
  });
}

}  // namespace dmdhsi
