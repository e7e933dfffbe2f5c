#include "scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "errors.hpp"
#include "io_util.hpp"
#include "rng.hpp"

namespace dmdhsi {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Red-edge transition width (nm): linear ramp centered on the edge.
constexpr double kRedEdgeRampNm = 40.0;
// Leaf-blob radial wobble: three harmonics, each up to 5% of the radius.
constexpr int kLeafHarmonics[3] = {2, 3, 5};
constexpr double kLeafWobbleMax = 0.05;

}  // namespace

double SpectrumModel::eval(double wavelength_nm) const {
  switch (kind) {
    case Kind::flat:
      return value;
    case Kind::gaussian: {
      const double d = wavelength_nm - center_nm;
      return amplitude * std::exp(-4.0 * std::log(2.0) * d * d / (fwhm_nm * fwhm_nm));
    }
    case Kind::red_edge: {
      const double t =
          std::clamp((wavelength_nm - edge_nm + kRedEdgeRampNm / 2) / kRedEdgeRampNm, 0.0, 1.0);
      return low + (high - low) * t;
    }
  }
  return 0.0;
}

SpectrumModel SpectrumModel::flat(double v) {
  SpectrumModel s;
  s.kind = Kind::flat;
  s.value = v;
  return s;
}

SpectrumModel SpectrumModel::gaussian(double center_nm, double fwhm_nm, double amplitude) {
  SpectrumModel s;
  s.kind = Kind::gaussian;
  s.center_nm = center_nm;
  s.fwhm_nm = fwhm_nm;
  s.amplitude = amplitude;
  return s;
}

SpectrumModel SpectrumModel::red_edge(double edge_nm, double low, double high) {
  SpectrumModel s;
  s.kind = Kind::red_edge;
  s.edge_nm = edge_nm;
  s.low = low;
  s.high = high;
  return s;
}

std::vector<float> SceneSpec::wavelength_grid() const {
  return uniform_band_centers(bands, lambda_lo_nm, lambda_hi_nm);
}

namespace {

void validate_spectrum(const SpectrumModel& s, const SceneSpec& spec, const std::string& where) {
  auto level_ok = [](double v) { return v >= 0.0 && v <= 1.0; };
  switch (s.kind) {
    case SpectrumModel::Kind::flat:
      if (!level_ok(s.value)) throw ValidationError(where + ": flat level outside [0, 1]");
      break;
    case SpectrumModel::Kind::gaussian:
      if (s.center_nm < spec.lambda_lo_nm || s.center_nm > spec.lambda_hi_nm) {
        throw ValidationError(where + ": gaussian center outside the wavelength span");
      }
      if (!(s.fwhm_nm > 0.0)) throw ValidationError(where + ": gaussian fwhm must be positive");
      if (!level_ok(s.amplitude)) throw ValidationError(where + ": gaussian amplitude outside [0, 1]");
      break;
    case SpectrumModel::Kind::red_edge:
      if (s.edge_nm < spec.lambda_lo_nm || s.edge_nm > spec.lambda_hi_nm) {
        throw ValidationError(where + ": red edge outside the wavelength span");
      }
      if (!level_ok(s.low) || !level_ok(s.high)) {
        throw ValidationError(where + ": red-edge levels outside [0, 1]");
      }
      break;
  }
}

double primitive_extent(const Primitive& p) {
  // Nominal half-extent used for the bounds check; leaf blobs reserve room
  // for the maximum radial wobble.
  switch (p.kind) {
    case Primitive::Kind::disk:
      return p.a;
    case Primitive::Kind::leaf_blob:
      return p.a * (1.0 + 3 * kLeafWobbleMax);
    case Primitive::Kind::rectangle:
      return 0.0;  // handled separately
  }
  return 0.0;
}

}  // namespace

void validate_scene_spec(const SceneSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0 || spec.bands <= 0) {
    throw ValidationError("scene dimensions must be positive");
  }
  if (!(spec.lambda_hi_nm > spec.lambda_lo_nm)) {
    throw ValidationError("wavelength span must be non-empty");
  }
  validate_spectrum(spec.background, spec, "background");
  for (std::size_t i = 0; i < spec.primitives.size(); ++i) {
    const Primitive& p = spec.primitives[i];
    const std::string where = "primitive " + std::to_string(i);
    validate_spectrum(p.spectrum, spec, where);
    if (p.kind == Primitive::Kind::rectangle) {
      if (!(p.a > 0.0) || !(p.b > 0.0)) throw ValidationError(where + ": rectangle size must be positive");
      if (p.cx - p.a / 2 < 0 || p.cx + p.a / 2 > spec.width ||
          p.cy - p.b / 2 < 0 || p.cy + p.b / 2 > spec.height) {
        throw ValidationError(where + ": rectangle extends outside image bounds");
      }
    } else {
      if (!(p.a > 0.0)) throw ValidationError(where + ": radius must be positive");
      const double e = primitive_extent(p);
      if (p.cx - e < 0 || p.cx + e > spec.width || p.cy - e < 0 || p.cy + e > spec.height) {
        throw ValidationError(where + ": extends outside image bounds");
      }
    }
  }
}

namespace {

struct LeafShape {
  double amp[3];
  double phase[3];

  static LeafShape make(std::uint64_t seed, std::size_t prim_index) {
    std::mt19937_64 rng(mix_seed(seed, 0x6c656166ULL, prim_index));
    std::uniform_real_distribution<double> amp_dist(-kLeafWobbleMax, kLeafWobbleMax);
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * kPi);
    LeafShape s;
    for (int k = 0; k < 3; ++k) {
      s.amp[k] = amp_dist(rng);
      s.phase[k] = phase_dist(rng);
    }
    return s;
  }

  double radius(double base, double theta) const {
    double r = 1.0;
    for (int k = 0; k < 3; ++k) r += amp[k] * std::cos(kLeafHarmonics[k] * theta + phase[k]);
    return base * r;
  }
};

}  // namespace

std::vector<std::int32_t> rasterize_owners(const SceneSpec& spec) {
  std::vector<std::int32_t> owners(std::size_t(spec.width) * spec.height, 0);
  for (std::size_t i = 0; i < spec.primitives.size(); ++i) {
    const Primitive& p = spec.primitives[i];
    const std::int32_t id = std::int32_t(i) + 1;
    const double e = p.kind == Primitive::Kind::rectangle
                         ? std::max(p.a, p.b) / 2
                         : primitive_extent(p);
    const int x0 = std::max(0, int(std::floor(p.cx - e)));
    const int x1 = std::min(spec.width - 1, int(std::ceil(p.cx + e)));
    const int y0 = std::max(0, int(std::floor(p.cy - e)));
    const int y1 = std::min(spec.height - 1, int(std::ceil(p.cy + e)));
    LeafShape leaf{};
    if (p.kind == Primitive::Kind::leaf_blob) leaf = LeafShape::make(spec.seed, i);

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - p.cx;
        const double dy = y - p.cy;
        bool inside = false;
        switch (p.kind) {
          case Primitive::Kind::disk:
            inside = dx * dx + dy * dy <= p.a * p.a;
            break;
          case Primitive::Kind::rectangle:
            inside = std::abs(dx) <= p.a / 2 && std::abs(dy) <= p.b / 2;
            break;
          case Primitive::Kind::leaf_blob: {
            const double r = leaf.radius(p.a, std::atan2(dy, dx));
            inside = dx * dx + dy * dy <= r * r;
            break;
          }
        }
        if (inside) owners[std::size_t(y) * spec.width + x] = id;
      }
    }
  }
  return owners;
}

SpectralCube synth_scene(const SceneSpec& spec) {
  validate_scene_spec(spec);
  const std::vector<std::int32_t> owners = rasterize_owners(spec);
  std::vector<float> grid = spec.wavelength_grid();

  // Spectrum table: row 0 is the background, row i+1 is primitive i.
  const std::size_t rows = spec.primitives.size() + 1;
  std::vector<float> table(rows * spec.bands);
  for (int b = 0; b < spec.bands; ++b) {
    table[b] = float(spec.background.eval(grid[b]));
  }
  for (std::size_t i = 0; i < spec.primitives.size(); ++i) {
    for (int b = 0; b < spec.bands; ++b) {
      table[(i + 1) * spec.bands + b] = float(spec.primitives[i].spectrum.eval(grid[b]));
    }
  }

  SpectralCube cube = SpectralCube::zeros(spec.width, spec.height, spec.bands, std::move(grid));
  const std::size_t plane = cube.plane();
  for (int b = 0; b < spec.bands; ++b) {
    float* dst = cube.band_ptr(b);
    for (std::size_t i = 0; i < plane; ++i) {
      dst[i] = table[std::size_t(owners[i]) * spec.bands + b];
    }
  }
  return cube;
}

namespace {

struct LineParser {
  std::vector<std::string> tokens;
  int line_no;
  std::size_t pos = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw IoError("scene spec line " + std::to_string(line_no) + ": " + msg);
  }
  double number(const char* what) {
    if (pos >= tokens.size()) fail(std::string("missing ") + what);
    try {
      std::size_t used = 0;
      const double v = std::stod(tokens[pos], &used);
      if (used != tokens[pos].size()) throw std::invalid_argument("");
      ++pos;
      return v;
    } catch (const std::exception&) {
      fail("bad number '" + tokens[pos] + "' for " + what);
    }
  }
  std::string word(const char* what) {
    if (pos >= tokens.size()) fail(std::string("missing ") + what);
    return tokens[pos++];
  }
  void done() const {
    if (pos != tokens.size()) fail("unexpected trailing token '" + tokens[pos] + "'");
  }

  SpectrumModel spectrum() {
    const std::string kind = word("spectrum kind");
    if (kind == "flat") return SpectrumModel::flat(number("flat level"));
    if (kind == "gauss") {
      const double c = number("gaussian center");
      const double f = number("gaussian fwhm");
      const double a = number("gaussian amplitude");
      return SpectrumModel::gaussian(c, f, a);
    }
    if (kind == "redge") {
      const double e = number("red-edge wavelength");
      const double lo = number("red-edge low level");
      const double hi = number("red-edge high level");
      return SpectrumModel::red_edge(e, lo, hi);
    }
    fail("unknown spectrum kind '" + kind + "'");
  }
};

}  // namespace

SceneSpec parse_scene_spec(const std::string& text) {
  SceneSpec spec;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    LineParser p{{}, line_no};
    std::string tok;
    while (ls >> tok) p.tokens.push_back(tok);
    if (p.tokens.empty()) continue;

    const std::string& head = p.tokens[0];
    if (head == "size") {
      spec.width = int(p.number("width"));
      spec.height = int(p.number("height"));
      spec.bands = int(p.number("bands"));
    } else if (head == "range") {
      spec.lambda_lo_nm = p.number("low wavelength");
      spec.lambda_hi_nm = p.number("high wavelength");
    } else if (head == "seed") {
      spec.seed = std::uint64_t(p.number("seed"));
    } else if (head == "background") {
      spec.background = p.spectrum();
    } else if (head == "disk" || head == "leaf") {
      Primitive prim;
      prim.kind = head == "disk" ? Primitive::Kind::disk : Primitive::Kind::leaf_blob;
      prim.cx = p.number("center x");
      prim.cy = p.number("center y");
      prim.a = p.number("radius");
      prim.spectrum = p.spectrum();
      spec.primitives.push_back(prim);
    } else if (head == "rect") {
      Primitive prim;
      prim.kind = Primitive::Kind::rectangle;
      prim.cx = p.number("center x");
      prim.cy = p.number("center y");
      prim.a = p.number("width");
      prim.b = p.number("height");
      prim.spectrum = p.spectrum();
      spec.primitives.push_back(prim);
    } else {
      p.fail("unknown directive '" + head + "'");
    }
    p.done();
  }
  return spec;
}

SceneSpec load_scene_spec(const std::string& path) {
  return parse_scene_spec(read_entire_file(path));
}

}  // namespace dmdhsi
