#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cube.hpp"

namespace dmdhsi {

// Parametric per-primitive spectrum.
struct SpectrumModel {
  enum class Kind { flat, gaussian, red_edge };
  Kind kind = Kind::flat;
  double value = 0.0;       // flat level
  double center_nm = 0.0;   // gaussian peak center
  double fwhm_nm = 0.0;     // gaussian full width at half maximum
  double amplitude = 1.0;   // gaussian peak height
  double edge_nm = 0.0;     // red-edge midpoint
  double low = 0.0;         // red-edge level below the transition
  double high = 0.0;        // red-edge level above the transition

  double eval(double wavelength_nm) const;

  static SpectrumModel flat(double v);
  static SpectrumModel gaussian(double center_nm, double fwhm_nm, double amplitude = 1.0);
  static SpectrumModel red_edge(double edge_nm, double low, double high);
};

struct Primitive {
  enum class Kind { disk, rectangle, leaf_blob };
  Kind kind = Kind::disk;
  double cx = 0.0;  // center, pixels
  double cy = 0.0;
  double a = 0.0;   // radius for disk/leaf, full width for rectangle
  double b = 0.0;   // full height for rectangle (unused otherwise)
  SpectrumModel spectrum;
};

struct SceneSpec {
  int width = 400;
  int height = 400;
  int bands = 500;
  double lambda_lo_nm = 400.0;
  double lambda_hi_nm = 900.0;
  SpectrumModel background = SpectrumModel::flat(0.0);
  std::vector<Primitive> primitives;
  std::uint64_t seed = 0;

  std::vector<float> wavelength_grid() const;
};

// Throws ValidationError (naming the offending primitive index) when a
// primitive extends outside the image or its spectrum parameters fall
// outside the wavelength span.
void validate_scene_spec(const SceneSpec& spec);

// Owner index per pixel: 0 = background, i+1 = primitive i, later
// primitives win on overlap. Leaf-blob boundaries are derived
// deterministically from (spec.seed, primitive index).
std::vector<std::int32_t> rasterize_owners(const SceneSpec& spec);

SpectralCube synth_scene(const SceneSpec& spec);

// Line-oriented scene description: `#` comments, directives
//   size W H BANDS | range LO_NM HI_NM | seed N | background <spectrum>
// and primitives
//   disk CX CY R <spectrum> | rect CX CY W H <spectrum> | leaf CX CY R <spectrum>
// where <spectrum> is `flat V` | `gauss CENTER FWHM AMP` | `redge EDGE LOW HIGH`.
SceneSpec parse_scene_spec(const std::string& text);
SceneSpec load_scene_spec(const std::string& path);

}  // namespace dmdhsi
