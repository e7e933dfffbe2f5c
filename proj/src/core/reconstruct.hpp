#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "controller.hpp"
#include "cube.hpp"
#include "optics.hpp"

namespace dmdhsi {

struct StripeEstimate {
  double center = 0.0;  // scene-column coordinate, sub-pixel
  int width = 1;
  double contrast = 0.0;  // (median column luminance - min) / median
};

// Translation of a frame relative to the reference frame, from masked
// normalized cross-correlation over an integer search window.
struct FrameAlignment {
  int dx = 0;
  int dy = 0;
  double confidence = 0.0;  // correlation peak value
};

// Zero-filled columns flagged in the acquisition record, masked out of
// stripe search and registration so they cannot pose as stripes.
struct BorderColumns {
  int left = 0;
  int right = 0;
};

// Finds the dark stripe: per-column mean luminance, box filter of the
// expected width, argmin refined by parabolic interpolation (integer
// fallback at the borders). Throws AlgorithmError when the contrast is
// below the threshold.
StripeEstimate locate_stripe(const RgbFrame& rgb, int expected_width,
                             double contrast_threshold = 0.2,
                             BorderColumns border = {});

// Registers `rgb` against `reference` with both stripes (integer span
// dilated by one column) and any flagged border columns masked out. Ties
// are broken by smallest |dx| + |dy|, then smallest dx, then smallest dy.
// Throws AlgorithmError when every candidate overlap is degenerate.
FrameAlignment register_frame(const RgbFrame& rgb, const RgbFrame& reference,
                              const StripeEstimate& stripe,
                              const StripeEstimate& ref_stripe, int radius,
                              BorderColumns border = {},
                              BorderColumns ref_border = {});

struct FrameDiagnostics {
  std::size_t frame_index = 0;
  std::string status;  // ok | no-stripe | no-signal | off-scene
  double stripe_center = 0.0;
  double contrast = 0.0;
  int dx = 0;
  int dy = 0;
  double confidence = 0.0;
};

struct ReconstructedCube {
  SpectralCube cube;
  std::vector<double> coverage;            // accumulated weight per scene column
  std::vector<std::vector<int>> provenance;  // contributing frame indices per column
  std::vector<std::uint8_t> interpolated;  // set by fill_gaps
  std::vector<FrameDiagnostics> diagnostics;
};

struct AssembleOptions {
  int reference_frame = 0;
  int search_radius = 8;
  double contrast_threshold = 0.2;
};

// Places each registered slice at its scene column (uniform averaging on
// collision). Slit widths above one are collapsed to ceil(bands/width)
// binned bands and broadcast across the covered columns. Frames whose
// stripe or registration fails are skipped and reported; assembly throws
// AlgorithmError only when every frame fails.
ReconstructedCube assemble(const AcquisitionRecord& record,
                           const AssembleOptions& opts = {});

// Linear per-(row, band) interpolation of zero-coverage columns between the
// nearest covered neighbors; edge gaps copy the nearest covered column.
ReconstructedCube fill_gaps(ReconstructedCube recon);

// CSV: frame_index,stripe_center,contrast,dx,dy,confidence,status
void write_diagnostics_csv(const std::vector<FrameDiagnostics>& diagnostics,
                           const std::string& path);

}  // namespace dmdhsi
