#include <doctest.h>

#include <cmath>
#include <set>

#include "controller.hpp"
#include "errors.hpp"
#include "io_util.hpp"
#include "metrics.hpp"
#include "roi.hpp"
#include "scene.hpp"
#include "test_util.hpp"

using namespace dmdhsi;

namespace {

Image constant_image(int w, int h, float v) {
  Image img = Image::zeros(w, h);
  std::fill(img.data.begin(), img.data.end(), v);
  return img;
}

EdgeMap filled_rect_mask(int W, int H, int x0, int y0, int w, int h) {
  EdgeMap mask;
  mask.width = W;
  mask.height = H;
  mask.data.assign(std::size_t(W) * H, 0);
  for (int y = y0; y < y0 + h; ++y) {
    for (int x = x0; x < x0 + w; ++x) mask.data[std::size_t(y) * W + x] = 1;
  }
  return mask;
}

int edge_count(const EdgeMap& e) {
  int n = 0;
  for (auto v : e.data) n += v;
  return n;
}

// Mirrors the shipped three-leaf demo: dark-ish background, leaves with a
// raised visible floor so their outlines clear the default canny thresholds.
SceneSpec three_leaf_spec(int size) {
  SceneSpec spec;
  spec.width = size;
  spec.height = size;
  spec.bands = 24;
  spec.seed = 2026;
  spec.background = SpectrumModel::flat(0.12);
  auto leaf = [&](double cx, double cy, double r, double edge, double high) {
    Primitive p;
    p.kind = Primitive::Kind::leaf_blob;
    p.cx = cx * size;
    p.cy = cy * size;
    p.a = r * size;
    p.spectrum = SpectrumModel::red_edge(edge, 0.35, high);
    spec.primitives.push_back(p);
  };
  leaf(0.30, 0.32, 0.155, 705, 0.55);
  leaf(0.71, 0.30, 0.145, 715, 0.52);
  leaf(0.50, 0.72, 0.160, 710, 0.58);
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("roi");

TEST_CASE("canny of a constant image is empty") {
  const EdgeMap edges = canny(constant_image(32, 32, 0.6f));
  CHECK(edge_count(edges) == 0);
}

TEST_CASE("canny threshold validation") {
  CHECK_THROWS_AS(canny(constant_image(8, 8, 0.1f), 0.5, 0.2, 1.0), ValidationError);
  CHECK_THROWS_AS(canny(constant_image(2, 2, 0.1f)), ValidationError);
}

TEST_CASE("vertical step edge concentrates on a single column") {
  const int W = 64, H = 32;
  const int c = 32;  // step between columns 31 and 32
  Image img = Image::zeros(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) img.at(x, y) = x < c ? 0.2f : 0.7f;
  }
  const EdgeMap edges = canny(img);
  std::set<int> cols;
  int count = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (edges.at(x, y)) {
        cols.insert(x);
        ++count;
      }
    }
  }
  REQUIRE(count > 0);
  CHECK(cols.size() == 1);
  CHECK(std::abs(*cols.begin() - (c - 0.5)) <= 1.0);
  CHECK(count == H);  // the ridge runs the full height
}

TEST_CASE("disk edges localize to the circle") {
  const int W = 160, H = 160;
  const double cx = 80.0, cy = 80.0, r = 50.0;
  Image img = Image::zeros(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      img.at(x, y) = d2 <= r * r ? 0.75f : 0.2f;
    }
  }
  const EdgeMap edges = canny(img);
  // Oracle: every edge pixel close to the true circle, and the circle
  // covered around its whole circumference.
  constexpr int kBins = 72;
  std::set<int> bins;
  int total = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (!edges.at(x, y)) continue;
      ++total;
      const double d = std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy));
      CHECK(std::abs(d - r) <= 1.5);
      const double angle = std::atan2(y - cy, x - cx);
      bins.insert(int(std::floor((angle + 3.14159265358979323846) / (2 * 3.14159265358979323846) * kBins)) % kBins);
    }
  }
  REQUIRE(total > 0);
  CHECK(double(bins.size()) >= 0.9 * kBins);
}

TEST_CASE("canny is invariant to brightness offset and negation") {
  const int W = 48, H = 48;
  Image img = Image::zeros(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      img.at(x, y) = ((x - 24) * (x - 24) + (y - 24) * (y - 24) <= 144) ? 0.7f : 0.25f;
    }
  }
  const EdgeMap base = canny(img);

  Image offset = img;
  for (float& v : offset.data) v += 0.2f;
  CHECK(canny(offset).data == base.data);

  Image negated = img;
  for (float& v : negated.data) v = 1.0f - v;
  CHECK(canny(negated).data == base.data);
}

TEST_CASE("label_regions on synthetic masks") {
  SUBCASE("empty mask yields no regions") {
    EdgeMap mask;
    mask.width = 20;
    mask.height = 20;
    mask.data.assign(400, 0);
    CHECK(label_regions(mask).count() == 0);
  }
  SUBCASE("two disjoint squares keep exact pixel counts") {
    EdgeMap mask = filled_rect_mask(64, 64, 5, 5, 10, 10);
    const EdgeMap second = filled_rect_mask(64, 64, 40, 30, 12, 8);
    for (std::size_t i = 0; i < mask.data.size(); ++i) mask.data[i] |= second.data[i];
    const RegionLabelMap labels = label_regions(mask);
    REQUIRE(labels.count() == 2);
    CHECK(labels.regions[0].pixel_count == 100);
    CHECK(labels.regions[1].pixel_count == 96);
    // Raster order of first pixels: the (5, 5) square comes first.
    CHECK(labels.regions[0].x_min == 5);
    CHECK(labels.regions[0].y_min == 5);
    CHECK(labels.regions[1].x_min == 40);
    CHECK(labels.at(7, 7) == 1);
    CHECK(labels.at(45, 33) == 2);
  }
  SUBCASE("components below min_area are discarded") {
    EdgeMap mask = filled_rect_mask(64, 64, 5, 5, 10, 10);
    const EdgeMap tiny = filled_rect_mask(64, 64, 40, 40, 4, 4);  // 16 < 25
    for (std::size_t i = 0; i < mask.data.size(); ++i) mask.data[i] |= tiny.data[i];
    const RegionLabelMap labels = label_regions(mask);
    CHECK(labels.count() == 1);
    CHECK(labels.at(41, 41) == 0);
    // Region pixel counts account for every labeled pixel; the discarded
    // component's 16 pixels are the only foreground left out.
    int labeled = 0;
    for (auto l : labels.labels) labeled += l != 0;
    int sum = 0;
    for (const RegionInfo& r : labels.regions) sum += r.pixel_count;
    CHECK(sum == labeled);
    CHECK(sum == 100);
  }
  SUBCASE("enclosed holes are filled") {
    // A 1-pixel ring around a hollow interior becomes a solid region.
    EdgeMap ring = filled_rect_mask(40, 40, 10, 10, 12, 12);
    for (int y = 12; y < 20; ++y) {
      for (int x = 12; x < 20; ++x) ring.data[std::size_t(y) * 40 + x] = 0;
    }
    const RegionLabelMap labels = label_regions(ring);
    REQUIRE(labels.count() == 1);
    CHECK(labels.regions[0].pixel_count == 144);
    CHECK(labels.at(15, 15) == 1);
  }
}

TEST_CASE("three-leaf scene: edges plus labels recover the leaves") {
  const SceneSpec spec = three_leaf_spec(200);
  const SpectralCube cube = synth_scene(spec);
  const RgbResponse resp = RgbResponse::gaussian_default(cube.wavelengths);
  const Image lum = rgb_render(cube, resp).luminance();
  const EdgeMap edges = canny(lum);
  const RegionLabelMap labels = label_regions(edges);
  REQUIRE(labels.count() == 3);

  // Ground-truth pixel counts from the rasterizer.
  const std::vector<std::int32_t> owners = rasterize_owners(spec);
  std::vector<int> truth_counts(spec.primitives.size() + 1, 0);
  for (auto o : owners) ++truth_counts[o];

  for (int label = 1; label <= 3; ++label) {
    const RegionInfo& r = labels.regions[label - 1];
    // Match the region to a primitive by centroid.
    int best = -1;
    double best_d = 1e9;
    for (std::size_t i = 0; i < spec.primitives.size(); ++i) {
      const double d = std::hypot(r.centroid_x - spec.primitives[i].cx,
                                  r.centroid_y - spec.primitives[i].cy);
      if (d < best_d) {
        best_d = d;
        best = int(i);
      }
    }
    REQUIRE(best >= 0);
    CHECK(best_d < 5.0);
    const double truth = truth_counts[best + 1];
    CHECK(std::abs(r.pixel_count - truth) / truth < 0.05);
  }
}

TEST_CASE("regions_to_plan tiles the selected column ranges") {
  // Region spanning columns 120..179 in a 400-wide map.
  EdgeMap mask = filled_rect_mask(400, 100, 120, 30, 60, 40);
  const RegionLabelMap labels = label_regions(mask);
  REQUIRE(labels.count() == 1);
  CHECK(labels.regions[0].x_min == 120);
  CHECK(labels.regions[0].x_max == 179);
  const TimingParams timing;

  SUBCASE("interval width over slit width, unit slit") {
    const ScanPlan plan = regions_to_plan(labels, {1}, 1, 0, timing);
    CHECK(plan.patterns.size() == 60);
    CHECK(plan.patterns.front().slit_start == 120);
    CHECK(plan.patterns.back().slit_start == 179);
  }
  SUBCASE("ceil division for wider slits") {
    const ScanPlan plan = regions_to_plan(labels, {1}, 4, 0, timing);
    CHECK(plan.patterns.size() == 15);
  }
  SUBCASE("margins dilate and clip to the scene") {
    const ScanPlan plan = regions_to_plan(labels, {1}, 1, 10, timing);
    CHECK(plan.patterns.size() == 80);
    CHECK(plan.patterns.front().slit_start == 110);
  }
  SUBCASE("time ratio equals the column fraction") {
    const ScanPlan roi = regions_to_plan(labels, {1}, 1, 0, timing);
    const ScanPlan full = full_scan_plan(400, 1, timing);
    const double ratio = estimate_time_ms(roi) / estimate_time_ms(full);
    CHECK(ratio == doctest::Approx(60.0 / 400.0));
  }
  SUBCASE("empty selection is an error") {
    CHECK_THROWS_AS(regions_to_plan(labels, {}, 1, 0, timing), ValidationError);
  }
  SUBCASE("unknown label is an error") {
    CHECK_THROWS_AS(regions_to_plan(labels, {7}, 1, 0, timing), ValidationError);
  }
  SUBCASE("roi plans never exceed the full scan, equal only at full span") {
    const ScanPlan full = full_scan_plan(400, 1, timing);
    const ScanPlan partial = regions_to_plan(labels, {1}, 1, 0, timing);
    CHECK(partial.patterns.size() < full.patterns.size());

    EdgeMap everything = filled_rect_mask(400, 100, 0, 20, 400, 60);
    const RegionLabelMap all_cols = label_regions(everything);
    REQUIRE(all_cols.count() == 1);
    const ScanPlan whole = regions_to_plan(all_cols, {1}, 1, 0, timing);
    CHECK(whole.patterns.size() == full.patterns.size());
  }
}

TEST_CASE("regions_to_plan merges overlapping intervals and sums disjoint ones") {
  EdgeMap mask = filled_rect_mask(200, 80, 20, 10, 30, 20);   // cols 20..49
  const EdgeMap b = filled_rect_mask(200, 80, 45, 50, 30, 20);  // cols 45..74 overlaps
  const EdgeMap c = filled_rect_mask(200, 80, 150, 30, 20, 20);  // cols 150..169
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    mask.data[i] |= b.data[i] | c.data[i];
  }
  const RegionLabelMap labels = label_regions(mask);
  REQUIRE(labels.count() == 3);
  const TimingParams timing;
  const ScanPlan plan = regions_to_plan(labels, {1, 2, 3}, 1, 0, timing);
  // Merged union: [20, 74] (55 columns) plus [150, 169] (20 columns).
  CHECK(plan.patterns.size() == 75);
  std::set<int> starts;
  for (const DmdPattern& p : plan.patterns) starts.insert(p.slit_start);
  CHECK(starts.count(74) == 1);
  CHECK(starts.count(75) == 0);
  CHECK(starts.count(150) == 1);

  // The plan's columns cover every selected region's support.
  for (int label = 1; label <= 3; ++label) {
    for (int x = labels.regions[label - 1].x_min; x <= labels.regions[label - 1].x_max;
         ++x) {
      CHECK(starts.count(x) == 1);
    }
  }
}

TEST_CASE("region mean spectra") {
  const int W = 40, H = 30, B = 6;
  EdgeMap mask = filled_rect_mask(W, H, 8, 10, 8, 8);
  const RegionLabelMap labels = label_regions(mask);
  REQUIRE(labels.count() == 1);

  SUBCASE("uniform region returns its spectrum") {
    SpectralCube cube = SpectralCube::zeros(W, H, B, uniform_band_centers(B));
    for (int bnd = 0; bnd < B; ++bnd) {
      for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) cube.at(bnd, x, y) = 0.1f * float(bnd + 1);
      }
    }
    const std::vector<double> s = region_mean_spectrum(cube, labels, 1, 4);
    REQUIRE(s.size() == std::size_t(B));
    for (int bnd = 0; bnd < B; ++bnd) {
      CHECK(s[bnd] == doctest::Approx(0.1 * (bnd + 1)).epsilon(1e-6));
    }
  }
  SUBCASE("half-and-half block averages to the midpoint") {
    SpectralCube cube = SpectralCube::zeros(W, H, 1, uniform_band_centers(1));
    // Region spans columns 8..15; centroid 11.5 puts the 4x4 block on
    // columns 10..13. Values 1 below column 12, 3 from column 12 on.
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) cube.at(0, x, y) = x < 12 ? 1.0f : 3.0f;
    }
    const std::vector<double> s = region_mean_spectrum(cube, labels, 1, 4);
    CHECK(s[0] == doctest::Approx(2.0));
  }
  SUBCASE("mean is linear in the cube") {
    const SpectralCube c1 = test::random_cube(W, H, B, 3);
    SpectralCube c2 = test::random_cube(W, H, B, 4);
    c2.wavelengths = c1.wavelengths;
    SpectralCube mix = c1;
    for (std::size_t i = 0; i < mix.data.size(); ++i) {
      mix.data[i] = 0.6f * c1.data[i] + 0.4f * c2.data[i];
    }
    const auto s1 = region_mean_spectrum(c1, labels, 1, 4);
    const auto s2 = region_mean_spectrum(c2, labels, 1, 4);
    const auto sm = region_mean_spectrum(mix, labels, 1, 4);
    for (int bnd = 0; bnd < B; ++bnd) {
      CHECK(sm[bnd] == doctest::Approx(0.6 * s1[bnd] + 0.4 * s2[bnd]).epsilon(1e-5));
    }
  }
  SUBCASE("region smaller than the block is an error") {
    EdgeMap small = filled_rect_mask(W, H, 2, 2, 6, 5);  // 30 px, 3 rows < block
    // Thin it to 3 rows so a 4x4 block cannot fit.
    for (int y = 5; y < 7; ++y) {
      for (int x = 2; x < 8; ++x) small.data[std::size_t(y) * W + x] = 0;
    }
    const RegionLabelMap thin = label_regions(small, 10);
    REQUIRE(thin.count() == 1);
    const SpectralCube cube = test::random_cube(W, H, B, 5);
    CHECK_THROWS_AS(region_mean_spectrum(cube, thin, 1, 4), ValidationError);
  }
  SUBCASE("off-centroid placement still lands inside the region") {
    // U-shape whose centroid falls in the notch.
    EdgeMap u = filled_rect_mask(W, H, 10, 5, 18, 18);
    for (int y = 5; y < 17; ++y) {
      for (int x = 16; x < 22; ++x) u.data[std::size_t(y) * W + x] = 0;
    }
    const RegionLabelMap labels_u = label_regions(u);
    REQUIRE(labels_u.count() == 1);
    const SpectralCube cube = test::random_cube(W, H, 1, 6);
    CHECK_NOTHROW(region_mean_spectrum(cube, labels_u, 1, 4));
  }
}

TEST_CASE("label map exports as gray levels") {
  EdgeMap mask = filled_rect_mask(50, 40, 5, 5, 10, 10);
  const EdgeMap second = filled_rect_mask(50, 40, 30, 20, 8, 8);
  for (std::size_t i = 0; i < mask.data.size(); ++i) mask.data[i] |= second.data[i];
  const RegionLabelMap labels = label_regions(mask);
  test::TempDir tmp("labels");
  write_labels_pgm(labels, tmp.file("labels.pgm"));
  const Image img = read_pgm(tmp.file("labels.pgm"));
  CHECK(img.width == 50);
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    CHECK(int(img.data[i]) == labels.labels[i]);
  }
}

TEST_CASE("spectrum csv export") {
  test::TempDir tmp("spectra");
  const std::vector<float> grid = uniform_band_centers(4);
  const std::vector<double> spectrum = {0.1, 0.2, 0.3, 0.4};
  write_spectrum_csv(grid, spectrum, tmp.file("s.csv"));
  const std::string text = read_entire_file(tmp.file("s.csv"));
  CHECK(text.find("wavelength_nm,value") == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_SUITE_END();
