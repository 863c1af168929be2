#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "herdtrack/error.hpp"
#include "herdtrack/features.hpp"
#include "herdtrack/segmentation.hpp"

using namespace herdtrack;

namespace {

// Straight re-implementation of the sampler from the raw engine: top-53-bit
// uniforms, Box-Muller pairs, half-away rounding, clamp, 5x5 frame patch mean.
std::vector<double> reference_patch_means(const GrayImage& img, double cx, double cy, std::uint64_t seed, int count) {
  std::mt19937_64 eng(seed);
  const auto u = [&] { return static_cast<double>(eng() >> 11) / 9007199254740992.0; };
  const auto round_half_away = [](double v) { return v < 0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5); };
  std::vector<double> out;
  while (static_cast<int>(out.size()) < count) {
    double u1 = u();
    while (u1 == 0.0) u1 = u();
    const double u2 = u();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double zx = r * std::cos(2.0 * M_PI * u2);
    const double zy = r * std::sin(2.0 * M_PI * u2);
    const int px = static_cast<int>(std::clamp(round_half_away(cx + std::sqrt(5.0) * zx), 2.0, img.width() - 3.0));
    const int py = static_cast<int>(std::clamp(round_half_away(cy + std::sqrt(5.0) * zy), 2.0, img.height() - 3.0));
    int sum = 0;
    for (int y = py - 2; y <= py + 2; ++y)
      for (int x = px - 2; x <= px + 2; ++x) sum += img(x, y);
    out.push_back(sum / 25.0);
  }
  return out;
}

GrayImage gradient_image(int w, int h) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(x, y) = static_cast<std::uint8_t>(20 + (x * x / 7 + 2 * y + (x * y) % 13) % 180);
  return img;
}

Instance ellipse_instance(double cx, double cy, double a, double b) {
  std::vector<Point> px;
  for (int y = static_cast<int>(cy - b); y <= static_cast<int>(cy + b); ++y)
    for (int x = static_cast<int>(cx - a); x <= static_cast<int>(cx + a); ++x)
      if (std::pow((x - cx) / a, 2) + std::pow((y - cy) / b, 2) <= 1.0) px.push_back({x, y});
  return make_instance(std::move(px));
}

}  // namespace

TEST_CASE("intensity_stats examples") {
  const std::vector<double> same(100, 37.0);
  CHECK(intensity_stats(same) == IntensityStats{37, 37, 37, 37, 37});

  std::vector<double> ramp(100);
  std::iota(ramp.begin(), ramp.end(), 1.0);
  CHECK(intensity_stats(ramp) == IntensityStats{50.5, 100, 25.75, 50.5, 75.25});

  std::vector<double> blocks(50, 0.0);
  blocks.insert(blocks.end(), 50, 255.0);
  CHECK(intensity_stats(blocks) == IntensityStats{127.5, 255, 0, 127.5, 255});

  CHECK_THROWS_AS(intensity_stats(std::vector<double>{}), Error);
}

TEST_CASE("constant image gives constant patch means") {
  const GrayImage img(80, 60, 37);
  const auto inst = ellipse_instance(40, 30, 20, 12);
  const auto means = sample_patch_means(img, inst, 5);
  REQUIRE(means.size() == 100);
  for (double m : means) CHECK(m == 37.0);
}

TEST_CASE("patch sampler equals the reference re-implementation") {
  const auto img = gradient_image(120, 90);
  const auto inst = ellipse_instance(60.3, 44.8, 30, 18);
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xDEADBEEFULL}) {
    CHECK(sample_patch_means(img, inst, seed) == reference_patch_means(img, inst.centroid.x, inst.centroid.y, seed, 100));
  }
  // Near the border the clamp keeps every patch inside the image.
  const auto corner = ellipse_instance(3, 3, 3, 3);
  CHECK(sample_patch_means(img, corner, 9) == reference_patch_means(img, corner.centroid.x, corner.centroid.y, 9, 100));
}

TEST_CASE("golden patch means") {
  // Frozen from the reference sampler above; guards against silent changes
  // to the generator, the normal transform or the rounding rule.
  const auto img = gradient_image(120, 90);
  const auto inst = ellipse_instance(60.3, 44.8, 30, 18);
  const auto means = sample_patch_means(img, inst, 42);
  const std::vector<double> golden{69.36, 110.44, 107.76, 75.56, 61, 141.12, 69.36, 123.52, 73.84, 118, 110.44, 144.24};
  REQUIRE(means.size() == 100);
  for (std::size_t i = 0; i < golden.size(); ++i) CHECK(means[i] == golden[i]);
}

TEST_CASE("feature vector displacement") {
  const auto img = gradient_image(120, 90);
  std::vector<Point> px;
  for (int y = 15; y <= 21; ++y)
    for (int x = 10; x <= 16; ++x) px.push_back({x, y});
  const auto inst = make_instance(px);
  REQUIRE(inst.centroid == PointD{13, 18});

  const auto first = feature_vector(img, inst, std::nullopt, 1);
  CHECK(first.dx == 0.0);
  CHECK(first.dy == 0.0);
  const auto later = feature_vector(img, inst, PointD{10, 20}, 1);
  CHECK(later.dx == 3.0);
  CHECK(later.dy == -2.0);
  CHECK(later.bbox_w == 7.0);
  CHECK(later.bbox_h == 7.0);
}

TEST_CASE("full feature vector matches a recomputation from raw pixels") {
  const auto img = gradient_image(150, 100);
  const auto inst = ellipse_instance(75, 50, 25, 15);
  const auto fv = feature_vector(img, inst, PointD{70, 52}, 77);

  auto means = reference_patch_means(img, inst.centroid.x, inst.centroid.y, 77, 100);
  std::sort(means.begin(), means.end());
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / 100.0;
  const auto at = [&](double pos) {
    const auto lo = static_cast<std::size_t>(pos);
    return means[lo] + (pos - static_cast<double>(lo)) * (means[lo + 1] - means[lo]);
  };
  CHECK(fv.i_mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(fv.i_max == means.back());
  CHECK(fv.i_q1 == doctest::Approx(at(24.75)).epsilon(1e-12));
  CHECK(fv.i_q2 == doctest::Approx(at(49.5)).epsilon(1e-12));
  CHECK(fv.i_q3 == doctest::Approx(at(74.25)).epsilon(1e-12));
  CHECK(fv.bbox_w == 51);
  CHECK(fv.bbox_h == 31);
  CHECK(fv.dx == doctest::Approx(inst.centroid.x - 70));
  CHECK(fv.dy == doctest::Approx(inst.centroid.y - 52));
}

TEST_CASE("determinism, shift and translation properties") {
  const auto img = gradient_image(200, 140);
  const auto inst = ellipse_instance(90, 70, 40, 22);
  const auto a = feature_vector(img, inst, PointD{80, 60}, feature_seed(3, 10, 2));
  const auto b = feature_vector(img, inst, PointD{80, 60}, feature_seed(3, 10, 2));
  CHECK(a == b);
  CHECK(feature_seed(3, 10, 2) != feature_seed(3, 10, 3));
  CHECK(feature_seed(3, 10, 2) != feature_seed(3, 11, 2));

  GrayImage brighter = img;
  for (auto& v : brighter.pixels()) v = static_cast<std::uint8_t>(v + 10);  // max 209, no clamping
  const auto s = feature_vector(brighter, inst, PointD{80, 60}, feature_seed(3, 10, 2));
  CHECK(s.i_mean - a.i_mean == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(s.i_max - a.i_max == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(s.i_q1 - a.i_q1 == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(s.i_q2 - a.i_q2 == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(s.i_q3 - a.i_q3 == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(s.bbox_w == a.bbox_w);
  CHECK(s.bbox_h == a.bbox_h);
  CHECK(s.dx == a.dx);
  CHECK(s.dy == a.dy);

  // Translate image content and instance together by (tx, ty) = (30, 12).
  GrayImage shifted(260, 180, 0);
  for (int y = 0; y < 140; ++y)
    for (int x = 0; x < 200; ++x) shifted(x + 30, y + 12) = img(x, y);
  std::vector<Point> moved;
  for (const auto& p : inst.pixels) moved.push_back({p.x + 30, p.y + 12});
  const auto inst2 = make_instance(moved);
  CHECK(inst2.centroid.x == doctest::Approx(inst.centroid.x + 30));
  CHECK(inst2.centroid.y == doctest::Approx(inst.centroid.y + 12));
  const auto t = feature_vector(shifted, inst2, PointD{110, 72}, feature_seed(3, 10, 2));
  CHECK(t.i_mean == a.i_mean);
  CHECK(t.i_q2 == a.i_q2);
  CHECK(t.bbox_w == a.bbox_w);
  CHECK(t.bbox_h == a.bbox_h);
  CHECK(t.dx == doctest::Approx(a.dx));
  CHECK(t.dy == doctest::Approx(a.dy));
}

TEST_CASE("instance-only patches ignore neighbouring pixels") {
  GrayImage img(60, 60, 200);
  std::vector<Point> px;
  for (int y = 20; y < 40; ++y)
    for (int x = 20; x < 40; ++x) {
      img(x, y) = 50;
      px.push_back({x, y});
    }
  const auto inst = make_instance(px);
  SamplerConfig wide;
  wide.variance = 400.0;  // wide enough that many patches straddle the boundary
  wide.source = PatchSource::InstanceOnly;
  for (double m : sample_patch_means(img, inst, 4, wide)) CHECK((m == 50.0 || m == 200.0));
  wide.source = PatchSource::Frame;
  const auto frame_means = sample_patch_means(img, inst, 4, wide);
  CHECK(std::any_of(frame_means.begin(), frame_means.end(), [](double m) { return m > 50.0 && m < 200.0; }));
}

TEST_CASE("sampler errors") {
  const auto inst = ellipse_instance(2, 2, 1.5, 1.5);
  CHECK_THROWS_AS(sample_patch_means(GrayImage(4, 4, 1), inst, 0), Error);
  const auto outside = ellipse_instance(50, 50, 5, 5);
  CHECK_THROWS_AS(sample_patch_means(GrayImage(20, 20, 1), outside, 0), Error);
}
