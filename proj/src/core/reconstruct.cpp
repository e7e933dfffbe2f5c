#include "reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "io_util.hpp"

namespace dmdhsi {

namespace {

std::vector<double> column_mean_luminance(const RgbImage& img) {
  const std::size_t plane = img.plane();
  std::vector<double> col(img.width, 0.0);
  for (int c = 0; c < 3; ++c) {
    const float* p = img.data.data() + c * plane;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) col[x] += p[std::size_t(y) * img.width + x];
    }
  }
  const double norm = 3.0 * img.height;
  for (double& v : col) v /= norm;
  return col;
}

}  // namespace

StripeEstimate locate_stripe(const RgbFrame& rgb, int expected_width,
                             double contrast_threshold, BorderColumns border) {
  const RgbImage& img = rgb.image;
  if (img.width < 3 || img.height < 3) {
    throw ValidationError("frame too small for stripe detection (need 3x3)");
  }
  if (expected_width < 1 || expected_width > img.width) {
    throw ValidationError("expected stripe width out of range");
  }

  const std::vector<double> col = column_mean_luminance(img);
  const int w = expected_width;
  const int n = img.width - w + 1;
  std::vector<double> box(n);
  double run = 0.0;
  for (int x = 0; x < w; ++x) run += col[x];
  box[0] = run / w;
  for (int x = 1; x < n; ++x) {
    run += col[x + w - 1] - col[x - 1];
    box[x] = run / w;
  }

  // Flagged zero-filled columns cannot host the stripe; restrict the
  // search so the box never touches them.
  const int x_lo = std::clamp(border.left, 0, n - 1);
  const int x_hi = std::clamp(n - border.right, x_lo + 1, n);
  int x0 = x_lo;
  for (int x = x_lo + 1; x < x_hi; ++x) {
    if (box[x] < box[x0]) x0 = x;
  }

  std::vector<double> sorted = col;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double contrast = median > 0.0 ? (median - box[x0]) / median : 0.0;
  if (contrast < contrast_threshold) {
    throw AlgorithmError("no stripe found (contrast " + std::to_string(contrast) +
                         " below threshold)");
  }

  double delta = 0.0;
  if (x0 > x_lo && x0 < x_hi - 1) {
    const double l = box[x0 - 1];
    const double m = box[x0];
    const double r = box[x0 + 1];
    const double denom = l - 2 * m + r;
    if (denom > 0.0) delta = std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
  }

  StripeEstimate est;
  est.center = x0 + delta + (w - 1) / 2.0;
  est.width = w;
  est.contrast = contrast;
  return est;
}

namespace {

// Columns of the stripe's integer span, dilated by one.
void mask_stripe_columns(std::vector<std::uint8_t>& mask, const StripeEstimate& s) {
  const int width = int(mask.size());
  const int lo = int(std::llround(s.center - (s.width - 1) / 2.0)) - 1;
  const int hi = lo + s.width + 1;  // inclusive of one dilation column each side
  for (int x = std::max(0, lo); x <= std::min(width - 1, hi); ++x) mask[x] = 1;
}

}  // namespace

FrameAlignment register_frame(const RgbFrame& rgb, const RgbFrame& reference,
                              const StripeEstimate& stripe,
                              const StripeEstimate& ref_stripe, int radius,
                              BorderColumns border, BorderColumns ref_border) {
  const RgbImage& f = rgb.image;
  const RgbImage& g = reference.image;
  if (f.width != g.width || f.height != g.height) {
    throw ValidationError("frames must share dimensions for registration");
  }
  if (radius < 0) throw ValidationError("search radius must be non-negative");

  const int W = f.width;
  const int H = f.height;
  const Image flum = f.luminance();
  const Image glum = g.luminance();
  std::vector<std::uint8_t> fmask(W, 0), gmask(W, 0);
  mask_stripe_columns(fmask, stripe);
  mask_stripe_columns(gmask, ref_stripe);
  for (int x = 0; x < std::min(W, border.left); ++x) fmask[x] = 1;
  for (int x = std::max(0, W - border.right); x < W; ++x) fmask[x] = 1;
  for (int x = 0; x < std::min(W, ref_border.left); ++x) gmask[x] = 1;
  for (int x = std::max(0, W - ref_border.right); x < W; ++x) gmask[x] = 1;

  FrameAlignment best;
  double best_score = -std::numeric_limits<double>::infinity();
  bool found = false;
  std::vector<std::uint8_t> valid_col(W);

  for (int dy = -radius; dy <= radius; ++dy) {
    const int y_lo = std::max(0, dy);
    const int y_hi = std::min(H, H + dy);  // frame rows with ref row y - dy in range
    if (y_lo >= y_hi) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int x_lo = std::max(0, dx);
      const int x_hi = std::min(W, W + dx);
      if (x_lo >= x_hi) continue;
      for (int x = x_lo; x < x_hi; ++x) {
        valid_col[x] = !fmask[x] && !gmask[x - dx];
      }

      double sf = 0, sg = 0, sff = 0, sgg = 0, sfg = 0;
      long count = 0;
      for (int y = y_lo; y < y_hi; ++y) {
        const float* frow = flum.data.data() + std::size_t(y) * W;
        const float* grow = glum.data.data() + std::size_t(y - dy) * W - dx;
        for (int x = x_lo; x < x_hi; ++x) {
          if (!valid_col[x]) continue;
          const double a = frow[x];
          const double b = grow[x];
          sf += a;
          sg += b;
          sff += a * a;
          sgg += b * b;
          sfg += a * b;
          ++count;
        }
      }
      if (count < 2) continue;
      const double var_f = sff - sf * sf / count;
      const double var_g = sgg - sg * sg / count;
      if (var_f <= 0.0 || var_g <= 0.0) continue;  // constant overlap
      const double num = sfg - sf * sg / count;
      // Signed squared correlation: monotone in the NCC and, unlike
      // num / sqrt(var_f * var_g), exactly 1.0 for a perfect match, so
      // equally perfect candidates tie exactly and the tie-break applies.
      const double score = num * std::abs(num) / (var_f * var_g);

      const bool better =
          !found || score > best_score ||
          (score == best_score &&
           (std::abs(dx) + std::abs(dy) < std::abs(best.dx) + std::abs(best.dy) ||
            (std::abs(dx) + std::abs(dy) == std::abs(best.dx) + std::abs(best.dy) &&
             (dx < best.dx || (dx == best.dx && dy < best.dy)))));
      if (better) {
        best_score = score;
        best.dx = dx;
        best.dy = dy;
        best.confidence = std::clamp(num / std::sqrt(var_f * var_g), -1.0, 1.0);
        found = true;
      }
    }
  }
  if (!found) {
    throw AlgorithmError("no registration signal (all masked overlaps degenerate)");
  }
  return best;
}

namespace {

double dequantize(const SensorParams& sensor, bool quantized, float value) {
  return quantized ? sensor.radiance_from_code(value) : double(value);
}

}  // namespace

ReconstructedCube assemble(const AcquisitionRecord& record, const AssembleOptions& opts) {
  if (record.frames.empty()) throw ValidationError("record has no frames");
  if (record.scene_width <= 0 || record.scene_height <= 0 || record.bands <= 0) {
    throw ValidationError("record has invalid scene dimensions");
  }
  if (opts.reference_frame < 0 ||
      std::size_t(opts.reference_frame) >= record.frames.size()) {
    throw ValidationError("reference frame index out of range");
  }
  const int W = record.scene_width;
  const int H = record.scene_height;
  const int B = record.bands;
  const int g = std::max(1, record.geometry.mirror_group);
  const int nominal_w = std::max(1, record.slit_width);
  for (const FrameEntry& f : record.frames) {
    if (f.rgb.image.width != W || f.rgb.image.height != H || f.slice.rows != H) {
      throw ValidationError("record frames do not share the scene dimensions");
    }
  }

  const int out_bands = nominal_w == 1 ? B : (B + nominal_w - 1) / nominal_w;

  ReconstructedCube out;
  out.coverage.assign(W, 0.0);
  out.provenance.assign(W, {});
  out.interpolated.assign(W, 0);

  std::vector<double> acc(std::size_t(out_bands) * H * W, 0.0);

  // Reference stripe; when it cannot be located the reference side of the
  // correlation mask is simply left empty.
  const FrameEntry& ref = record.frames[opts.reference_frame];
  const BorderColumns ref_border{ref.border_left, ref.border_right};
  StripeEstimate ref_stripe;
  try {
    ref_stripe = locate_stripe(ref.rgb, ref.pattern.slit_width / g,
                               opts.contrast_threshold, ref_border);
  } catch (const AlgorithmError&) {
    ref_stripe = StripeEstimate{-1000.0, 1, 0.0};  // masks nothing
  }

  std::size_t failed = 0;
  for (std::size_t k = 0; k < record.frames.size(); ++k) {
    const FrameEntry& f = record.frames[k];
    const int w_k = std::max(1, f.pattern.slit_width / g);
    FrameDiagnostics diag;
    diag.frame_index = k;

    const BorderColumns f_border{f.border_left, f.border_right};
    StripeEstimate stripe;
    try {
      stripe = locate_stripe(f.rgb, w_k, opts.contrast_threshold, f_border);
    } catch (const AlgorithmError&) {
      diag.status = "no-stripe";
      out.diagnostics.push_back(diag);
      ++failed;
      continue;
    }
    diag.stripe_center = stripe.center;
    diag.contrast = stripe.contrast;

    FrameAlignment align;
    try {
      align = register_frame(f.rgb, ref.rgb, stripe, ref_stripe, opts.search_radius,
                             f_border, ref_border);
    } catch (const AlgorithmError&) {
      diag.status = "no-signal";
      out.diagnostics.push_back(diag);
      ++failed;
      continue;
    }
    diag.dx = align.dx;
    diag.dy = align.dy;
    diag.confidence = align.confidence;

    // Stripe position measured in frame coordinates, corrected back to the
    // reference frame; c_left is the first scene column the slit covered.
    const int c_left =
        int(std::llround(stripe.center - align.dx - (w_k - 1) / 2.0));

    bool wrote = false;
    if (w_k == 1 && nominal_w == 1) {
      const int c = c_left;
      if (c >= 0 && c < W) {
        for (int yo = 0; yo < H; ++yo) {
          const int ys = std::clamp(yo + align.dy, 0, H - 1);
          for (int b = 0; b < B; ++b) {
            acc[(std::size_t(b) * H + yo) * W + c] +=
                dequantize(record.sensor, f.slice.quantized, f.slice.at(b, ys));
          }
        }
        out.coverage[c] += 1.0;
        out.provenance[c].push_back(int(k));
        wrote = true;
      }
    } else {
      // Uniform-split inversion: detector pixel m*w + w_k - 1 sums the
      // slice's spectrum over bands [m*w, m*w + w_k), so dividing by the
      // in-range term count estimates the w-binned spectrum shared by all
      // covered columns.
      for (int yo = 0; yo < H; ++yo) {
        const int ys = std::clamp(yo + align.dy, 0, H - 1);
        for (int m = 0; m < out_bands; ++m) {
          const int u = m * nominal_w + w_k - 1;
          const int terms = std::min(w_k, B - m * nominal_w);
          if (terms <= 0 || u >= f.slice.spectral_pixels) continue;
          const double v =
              dequantize(record.sensor, f.slice.quantized, f.slice.at(u, ys)) / terms;
          for (int c = std::max(0, c_left); c < std::min(W, c_left + w_k); ++c) {
            acc[(std::size_t(m) * H + yo) * W + c] += v;
          }
        }
      }
      for (int c = std::max(0, c_left); c < std::min(W, c_left + w_k); ++c) {
        out.coverage[c] += 1.0;
        out.provenance[c].push_back(int(k));
        wrote = true;
      }
    }
    diag.status = wrote ? "ok" : "off-scene";
    out.diagnostics.push_back(diag);
  }

  if (failed == record.frames.size()) {
    throw AlgorithmError("assembly failed: no frame produced a usable stripe and registration");
  }

  // Output grid: the record's grid at width 1, group means of the fixed
  // nominal-width binning otherwise.
  std::vector<float> wavelengths;
  if (nominal_w == 1) {
    wavelengths = record.wavelengths;
  } else {
    wavelengths.resize(out_bands);
    for (int m = 0; m < out_bands; ++m) {
      const int lo = m * nominal_w;
      const int hi = std::min(B, lo + nominal_w);
      double s = 0.0;
      for (int b = lo; b < hi; ++b) s += record.wavelengths[b];
      wavelengths[m] = float(s / (hi - lo));
    }
  }

  out.cube.width = W;
  out.cube.height = H;
  out.cube.bands = out_bands;
  out.cube.wavelengths = std::move(wavelengths);
  out.cube.data.resize(acc.size());
  for (int b = 0; b < out_bands; ++b) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const std::size_t i = (std::size_t(b) * H + y) * W + x;
        const double cov = out.coverage[x];
        out.cube.data[i] = cov > 0.0 ? float(acc[i] / cov) : 0.0f;
      }
    }
  }
  return out;
}

ReconstructedCube fill_gaps(ReconstructedCube recon) {
  const int W = recon.cube.width;
  const int H = recon.cube.height;
  const int B = recon.cube.bands;
  std::vector<int> covered;
  for (int x = 0; x < W; ++x) {
    if (recon.coverage[x] > 0.0) covered.push_back(x);
  }
  if (covered.empty()) {
    throw AlgorithmError("empty reconstruction: no covered columns to interpolate from");
  }
  if (int(covered.size()) == W) return recon;

  for (int x = 0; x < W; ++x) {
    if (recon.coverage[x] > 0.0) continue;
    recon.interpolated[x] = 1;
    const auto right = std::lower_bound(covered.begin(), covered.end(), x);
    if (right == covered.begin()) {
      const int src = covered.front();
      for (int b = 0; b < B; ++b) {
        for (int y = 0; y < H; ++y) {
          recon.cube.at(b, x, y) = recon.cube.at(b, src, y);
        }
      }
    } else if (right == covered.end()) {
      const int src = covered.back();
      for (int b = 0; b < B; ++b) {
        for (int y = 0; y < H; ++y) {
          recon.cube.at(b, x, y) = recon.cube.at(b, src, y);
        }
      }
    } else {
      const int xr = *right;
      const int xl = *(right - 1);
      const double t = double(x - xl) / (xr - xl);
      for (int b = 0; b < B; ++b) {
        for (int y = 0; y < H; ++y) {
          const double vl = recon.cube.at(b, xl, y);
          const double vr = recon.cube.at(b, xr, y);
          recon.cube.at(b, x, y) = float(vl + (vr - vl) * t);
        }
      }
    }
  }
  return recon;
}

void write_diagnostics_csv(const std::vector<FrameDiagnostics>& diagnostics,
                           const std::string& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "frame_index,stripe_center,contrast,dx,dy,confidence,status\n";
    char buf[256];
    for (const FrameDiagnostics& d : diagnostics) {
      std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%d,%d,%.6f,%s\n", d.frame_index,
                    d.stripe_center, d.contrast, d.dx, d.dy, d.confidence,
                    d.status.c_str());
      out << buf;
    }
  });
}

}  // namespace dmdhsi
