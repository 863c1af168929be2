#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "herdtrack/bootstrap.hpp"
#include "herdtrack/error.hpp"
#include "herdtrack/ground_truth.hpp"
#include "herdtrack/pipeline.hpp"
#include "herdtrack/rng.hpp"
#include "herdtrack/synth.hpp"

using namespace herdtrack;

namespace {

Instance blob_at(double cx, double cy) {
  std::vector<Point> px;
  for (int y = static_cast<int>(cy) - 2; y <= static_cast<int>(cy) + 2; ++y)
    for (int x = static_cast<int>(cx) - 2; x <= static_cast<int>(cx) + 2; ++x) px.push_back({x, y});
  return make_instance(std::move(px));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

synth::ScenarioConfig two_object_scene(int frames) {
  synth::ScenarioConfig cfg;
  cfg.width = 400;
  cfg.height = 240;
  cfg.n_frames = frames;
  synth::ObjectSpec a;
  a.waypoints = {{100, 70}, {300, 70}};
  a.intensity = 130;
  synth::ObjectSpec b;
  b.waypoints = {{300, 170}, {100, 170}};
  b.intensity = 110;
  cfg.objects = {a, b};
  return cfg;
}

/// Seed the first frame by ground truth: the instance owned by the target.
LabelledFrame seed_from_truth(const synth::SyntheticSequence& s, const SegmentationConfig& seg) {
  auto inst = segment_frame(s.frames.frame_ids[0], s.frames.frames[0], synth::oracle_providers(s), seg);
  std::size_t target = inst.size();
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (owning_object(s.truth[0], inst[i].centroid) == s.truth[0].target_id) target = i;
  }
  REQUIRE(target < inst.size());
  return init_labels(s.frames.frame_ids[0], std::move(inst), target);
}

TrainingDataset ten_rows() {
  TrainingDataset ds;
  for (int f = 0; f < 5; ++f)
    for (int i = 0; i < 2; ++i) {
      DatasetRow r;
      r.frame_id = f;
      r.instance_id = i;
      r.label = i == 0 ? 1 : 0;
      r.features.i_mean = 100 + f + 0.125 * i;
      r.features.bbox_w = 120;
      r.features.dx = -3.5 * f;
      ds.rows.push_back(r);
    }
  return ds;
}

}  // namespace

TEST_CASE("init_labels examples") {
  std::vector<Instance> four{blob_at(10, 10), blob_at(30, 10), blob_at(50, 10), blob_at(70, 10)};
  CHECK(init_labels(0, four, 2).labels == std::vector<int>{0, 0, 1, 0});
  CHECK(init_labels(0, {blob_at(5, 5)}, 0).labels == std::vector<int>{1});
  std::vector<Instance> three{blob_at(10, 10), blob_at(30, 10), blob_at(50, 10)};
  CHECK(code_of([&] { init_labels(0, three, 5); }) == ErrorCode::Selection);
}

TEST_CASE("propagate_labels examples") {
  const std::vector<PointD> p1{{10, 10}};
  const std::vector<int> l1{1};
  CHECK(propagate_labels(p1, l1, std::vector<PointD>{{12, 10}}) == std::vector<int>{1});

  const std::vector<PointD> p2{{0, 0}, {100, 0}};
  const std::vector<int> l2{1, 0};
  CHECK(propagate_labels(p2, l2, std::vector<PointD>{{90, 0}, {5, 5}}) == std::vector<int>{0, 1});

  const std::vector<PointD> p3{{0, 0}};
  CHECK(propagate_labels(p3, l1, std::vector<PointD>{{1, 0}, {2, 0}}) == std::vector<int>{1, 0});

  // Equidistant claimants: the lower current index keeps the 1.
  CHECK(propagate_labels(p3, l1, std::vector<PointD>{{0, 3}, {3, 0}}) == std::vector<int>{1, 0});
  // Equidistant previous points: the lower previous index lends its label.
  const std::vector<PointD> p4{{-2, 0}, {2, 0}};
  CHECK(propagate_labels(p4, std::vector<int>{1, 0}, std::vector<PointD>{{0, 0}}) == std::vector<int>{1});
  CHECK(propagate_labels(p4, std::vector<int>{0, 1}, std::vector<PointD>{{0, 0}}) == std::vector<int>{0});

  CHECK(code_of([] { propagate_labels({}, {}, std::vector<PointD>{{1, 1}}); }) == ErrorCode::Propagation);
}

TEST_CASE("propagate is permutation invariant") {
  Engine eng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PointD> prev, cur;
    std::vector<int> labels;
    const auto np = 1 + uniform_below(eng, 6);
    const auto nc = 1 + uniform_below(eng, 6);
    for (std::uint64_t i = 0; i < np; ++i) {
      prev.push_back({uniform01(eng) * 500, uniform01(eng) * 300});
      labels.push_back(0);
    }
    labels[uniform_below(eng, np)] = 1;
    for (std::uint64_t i = 0; i < nc; ++i) cur.push_back({uniform01(eng) * 500, uniform01(eng) * 300});

    const auto base = propagate_labels(prev, labels, cur);
    CHECK(std::count(base.begin(), base.end(), 1) <= 1);
    std::vector<std::size_t> perm(nc);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::vector<PointD> shuffled;
    for (auto i : perm) shuffled.push_back(cur[i]);
    const auto out = propagate_labels(prev, labels, shuffled);
    for (std::size_t k = 0; k < nc; ++k) CHECK(out[k] == base[perm[k]]);
  }
}

TEST_CASE("bootstrap on a three-frame two-object scene") {
  const auto s = synth::generate(two_object_scene(3));
  const SegmentationConfig seg;
  const auto seed = seed_from_truth(s, seg);
  const auto ds = build_dataset(s.frames, seed, synth::oracle_providers(s), {seg, {}, 5});
  REQUIRE(ds.size() == 6);
  int positives = 0;
  for (const auto& r : ds.rows) {
    positives += r.label;
    CHECK(r.features.bbox_w > 100);
  }
  CHECK(positives == 3);
  // Rows are in (frame, instance) order and the first frame has no displacement.
  CHECK(std::is_sorted(ds.rows.begin(), ds.rows.end(), [](auto& a, auto& b) { return a.key() < b.key(); }));
  CHECK(ds.rows[0].features.dx == 0.0);
  CHECK(ds.rows[2].features.dx != 0.0);
}

TEST_CASE("a one-frame sequence yields the seed rows") {
  const auto s = synth::generate(two_object_scene(1));
  const auto seed = seed_from_truth(s, {});
  const auto ds = build_dataset(s.frames, seed, synth::oracle_providers(s), {{}, {}, 5});
  CHECK(ds.size() == seed.instances.size());
}

TEST_CASE("seed frame must be the first frame") {
  const auto s = synth::generate(two_object_scene(2));
  auto seed = seed_from_truth(s, {});
  seed.frame_id = 7;
  CHECK_THROWS_AS(build_dataset(s.frames, seed, synth::oracle_providers(s), {}), Error);
}

TEST_CASE("a target that disappears contributes no positives afterwards") {
  auto cfg = two_object_scene(12);
  cfg.objects[0].waypoints = {{80, 70}, {330, 70}};
  cfg.objects[0].speed = 30;
  cfg.objects[1].waypoints = {{90, 170}};
  cfg.bars = {{200, 200, 175}};  // covers x in [200, 399]
  const auto s = synth::generate(cfg);
  const auto seed = seed_from_truth(s, {});
  const auto result = bootstrap_sequence(s.frames, seed, synth::oracle_providers(s), {{}, {}, 5});

  int first_without = -1;
  for (const auto& f : result.frames) {
    const bool has = f.target_index() >= 0;
    if (!has && first_without < 0) first_without = f.frame_id;
    if (first_without >= 0) CHECK_FALSE(has);
  }
  CHECK(first_without > 0);
  // From frame 7 on the target is completely behind the bar.
  CHECK(s.truth[7].object(0)->visible_pixels == 0);
  CHECK(first_without <= 7);
  CHECK(result.frames.back().instances.size() == 1);
}

TEST_CASE("propagated labels follow ground truth on a well separated scene") {
  const auto s = synth::generate(synth::easy_scenario(20, 3));
  const auto seed = seed_from_truth(s, {});
  const auto result = bootstrap_sequence(s.frames, seed, synth::oracle_providers(s), {{}, {}, 3});
  std::size_t agree = 0;
  for (const auto& f : result.frames) {
    const auto& truth = s.truth[static_cast<std::size_t>(f.frame_id)];
    for (std::size_t i = 0; i < f.instances.size(); ++i) {
      const int gt = owning_object(truth, f.instances[i].centroid) == truth.target_id ? 1 : 0;
      agree += gt == f.labels[i];
    }
  }
  CHECK(result.dataset.size() == 60);
  CHECK(agree == result.dataset.size());
}

TEST_CASE("cleanse") {
  const auto ds = ten_rows();
  const auto cleaned = cleanse(ds, {{1, 0}, {3, 1}});
  CHECK(cleaned.size() == 10);
  CHECK(cleaned.exported().size() == 8);
  CHECK(cleanse(ds, {}).exported().size() == 10);
  CHECK(dataset_to_csv(cleanse(cleaned, {{1, 0}})) == dataset_to_csv(cleaned));
  CHECK(dataset_to_csv(cleanse(ds, {{1, 0}, {1, 0}, {3, 1}})) == dataset_to_csv(cleaned));
  try {
    cleanse(ds, {{9, 9}, {2, 0}, {0, 7}});
    FAIL("expected flag error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Flag);
    const std::string what = e.what();
    CHECK(what.find("(9,9)") != std::string::npos);
    CHECK(what.find("(0,7)") != std::string::npos);
    CHECK(what.find("(2,0)") == std::string::npos);
  }
}

TEST_CASE("dataset CSV") {
  const auto ds = ten_rows();
  const auto csv = dataset_to_csv(ds);
  CHECK(csv.rfind(std::string(kDatasetHeader) + "\n", 0) == 0);
  const auto back = dataset_from_csv(csv);
  REQUIRE(back.size() == 10);
  CHECK(back.rows[3].features == ds.rows[3].features);
  CHECK(back.rows[3].label == ds.rows[3].label);
  CHECK(dataset_to_csv(back) == csv);

  std::string broken = csv;
  const auto line4 = broken.find('\n', broken.find('\n', broken.find('\n', broken.find('\n') + 1) + 1) + 1);
  broken.insert(line4 + 1, "3,0,abc,1,1,1,1,1,1,1,1,1\n");
  try {
    dataset_from_csv(broken);
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
  CHECK_THROWS_AS(dataset_from_csv("frame,instance\n0,0\n"), Error);
  CHECK_THROWS_AS(dataset_from_csv(std::string(kDatasetHeader) + "\n0,0,1,1,1,1,1,1,1,1,1,2\n"), Error);
}

TEST_CASE("select_by_bbox") {
  std::vector<Instance> inst{blob_at(10, 10), blob_at(40, 10), blob_at(70, 10)};
  CHECK(select_by_bbox(inst, {35, 5, 60, 20}) == 1);
  CHECK(select_by_bbox(inst, {0, 0, 100, 100}) == 0);
  CHECK(code_of([&] { select_by_bbox(inst, {200, 200, 210, 210}); }) == ErrorCode::Selection);
}
