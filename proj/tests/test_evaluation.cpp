#include <doctest.h>

#include <algorithm>

#include "herdtrack/error.hpp"
#include "herdtrack/evaluation.hpp"
#include "herdtrack/ground_truth.hpp"
#include "herdtrack/rng.hpp"
#include "herdtrack/tracker.hpp"

using namespace herdtrack;

namespace {

/// Frames with one instance each, so counts map one-to-one onto frames.
std::pair<std::vector<FramePrediction>, std::vector<FrameTruth>> from_counts(const ConfusionCounts& c) {
  std::vector<FramePrediction> pred;
  std::vector<FrameTruth> truth;
  int frame = 0;
  const auto add = [&](long long n, int p, int t) {
    for (long long i = 0; i < n; ++i, ++frame) {
      pred.push_back({frame, {{0, p}}});
      truth.push_back({frame, t == 1, {{0, t}}});
    }
  };
  add(c.tp, 1, 1);
  add(c.fp, 1, 0);
  add(c.tn, 0, 0);
  add(c.fn, 0, 1);
  return {pred, truth};
}

TrackedInstance tracked(double cx, double cy, int label) {
  TrackedInstance t;
  t.centroid = {cx, cy};
  t.bbox = {static_cast<int>(cx) - 5, static_cast<int>(cy) - 5, static_cast<int>(cx) + 5, static_cast<int>(cy) + 5};
  t.area = 100;
  t.prediction = {label, label ? 0.8 : 0.1};
  return t;
}

}  // namespace

TEST_CASE("reference precision and recall recompute from the counts") {
  const auto row1 = precision_recall({328, 6, 0, 272});
  CHECK(std::abs(*row1.precision * 100 - 98.2) <= 0.05);
  CHECK(std::abs(*row1.recall * 100 - 54.6) <= 0.15);
  CHECK(format_percent(row1.precision) == "98.2%");
  CHECK(format_percent(row1.recall) == "54.7%");

  const auto row4 = precision_recall({30, 6, 0, 330});
  CHECK(std::lround(*row4.precision * 100) == 83);
  CHECK(std::lround(*row4.recall * 100) == 8);

  const auto [pred, truth] = from_counts({328, 6, 0, 272});
  CHECK(confusion(pred, truth) == ConfusionCounts{328, 6, 0, 272});
}

TEST_CASE("degenerate ratios are undefined") {
  const auto pr = precision_recall({0, 0, 5, 0});
  CHECK_FALSE(pr.precision.has_value());
  CHECK_FALSE(pr.recall.has_value());
  CHECK(format_percent(pr.precision) == "n/a");
  CHECK(report_csv({0, 0, 5, 0}) == "tp,fp,tn,fn,precision,recall\n0,0,5,0,,\n");
  CHECK(report_csv({3, 1, 2, 0}) == "tp,fp,tn,fn,precision,recall\n3,1,2,0,0.750000,1.000000\n");
}

TEST_CASE("perfect and all-negative predictions") {
  std::vector<FrameTruth> truth{{0, true, {{0, 1}, {1, 0}}}, {1, true, {{0, 0}, {1, 1}, {2, 0}}}};
  std::vector<FramePrediction> perfect{{0, {{0, 1}, {1, 0}}}, {1, {{0, 0}, {1, 1}, {2, 0}}}};
  const auto c = confusion(perfect, truth);
  CHECK(c == ConfusionCounts{2, 0, 3, 0});
  CHECK(*precision_recall(c).precision == 1.0);
  CHECK(*precision_recall(c).recall == 1.0);

  std::vector<FramePrediction> negative{{0, {{0, 0}, {1, 0}}}, {1, {{0, 0}, {1, 0}, {2, 0}}}};
  CHECK(confusion(negative, truth) == ConfusionCounts{0, 0, 3, 2});
}

TEST_CASE("a visible but unsegmented target is a false negative") {
  std::vector<FrameTruth> truth{{4, true, {{0, 0}}}, {5, false, {{0, 0}}}};
  std::vector<FramePrediction> pred{{4, {{0, 0}}}, {5, {{0, 0}}}};
  const auto c = confusion(pred, truth);
  CHECK(c == ConfusionCounts{0, 0, 2, 1});
  CHECK(c.total() == 3);
}

TEST_CASE("misaligned inputs list the offenders") {
  std::vector<FrameTruth> truth{{0, true, {{0, 1}}}, {1, false, {{0, 0}}}};
  std::vector<FramePrediction> pred{{0, {{0, 1}, {3, 0}}}, {2, {{0, 0}}}};
  try {
    confusion(pred, truth);
    FAIL("expected an alignment error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Alignment);
    const std::string what = e.what();
    CHECK(what.find("(0,3)") != std::string::npos);
    CHECK(what.find("frame 2") != std::string::npos);
    CHECK(what.find("frame 1") != std::string::npos);
  }
}

TEST_CASE("counts ignore instance order") {
  Engine eng(3);
  std::vector<FramePrediction> pred;
  std::vector<FrameTruth> truth;
  for (int f = 0; f < 30; ++f) {
    FramePrediction p{f, {}};
    FrameTruth t{f, true, {}};
    for (int i = 0; i < 4; ++i) {
      p.labels[i] = static_cast<int>(uniform_below(eng, 2));
      t.labels[i] = i == 0 ? 1 : 0;
    }
    pred.push_back(p);
    truth.push_back(t);
  }
  const auto base = confusion(pred, truth);
  CHECK(base.total() == 120);
  // Rename instance ids by the same permutation on both sides; reverse frames.
  for (auto& p : pred) {
    std::map<int, int> m;
    for (auto [id, v] : p.labels) m[3 - id] = v;
    p.labels = m;
  }
  for (auto& t : truth) {
    std::map<int, int> m;
    for (auto [id, v] : t.labels) m[3 - id] = v;
    t.labels = m;
  }
  std::reverse(pred.begin(), pred.end());
  CHECK(confusion(pred, truth) == base);
}

TEST_CASE("log against synthetic ground truth matches a direct recount") {
  FrameGroundTruth g0{0, 0, {{0, 3000, 1.0, BBox{0, 0, 99, 99}, PointD{50, 50}},
                             {1, 2800, 1.0, BBox{200, 0, 299, 99}, PointD{250, 50}}}};
  FrameGroundTruth g1{1, 0, {{0, 0, 0.0, std::nullopt, std::nullopt},
                             {1, 2800, 1.0, BBox{200, 0, 299, 99}, PointD{250, 50}}}};
  FrameGroundTruth g2{2, 0, {{0, 900, 0.3, BBox{0, 0, 40, 99}, PointD{20, 50}},
                             {1, 2800, 1.0, BBox{200, 0, 299, 99}, PointD{250, 50}}}};
  TrackLog log;
  log.frames.push_back({0, {tracked(52, 49, 1), tracked(249, 51, 0)}, 0, {}, false, {}});
  log.frames.push_back({1, {tracked(251, 50, 1)}, 0, {}, false, {}});
  log.frames.push_back({2, {tracked(250, 50, 0)}, std::nullopt, {}, false, {}});
  const std::vector<FrameGroundTruth> gt{g0, g1, g2};

  const auto truth = truth_from_ground_truth(log, gt, 800);
  // By hand: frame 0 -> TP + TN; frame 1 -> FP (target hidden); frame 2 -> TN and
  // a missed target that is visible with 900 >= 800 pixels.
  CHECK(confusion(predictions_from_log(log), truth) == ConfusionCounts{1, 1, 2, 1});
  CHECK_FALSE(truth[1].target_present);
  CHECK(truth[2].target_present);
  CHECK(truth_from_ground_truth(log, gt, 1000)[2].target_present == false);

  const std::vector<FrameGroundTruth> partial{g0};
  CHECK_THROWS_AS(truth_from_ground_truth(log, partial, 800), Error);
}

TEST_CASE("owning object prefers the nearest visible centroid") {
  FrameGroundTruth g{0, 0, {{0, 100, 1.0, BBox{0, 0, 100, 100}, PointD{30, 50}},
                            {1, 100, 1.0, BBox{50, 0, 150, 100}, PointD{120, 50}}}};
  CHECK(owning_object(g, {60, 50}) == 0);
  CHECK(owning_object(g, {90, 50}) == 1);
  CHECK(owning_object(g, {140, 50}) == 1);
  CHECK(owning_object(g, {500, 50}) == -1);
}

TEST_CASE("JSONL round trips") {
  std::vector<FrameTruth> truth{{0, true, {{0, 1}, {1, 0}}}, {7, false, {}}};
  const auto text = frame_truth_to_jsonl(truth);
  const auto back = frame_truth_from_jsonl(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].labels == truth[0].labels);
  CHECK(back[1].frame_id == 7);
  CHECK(frame_truth_to_jsonl(back) == text);
  CHECK_THROWS_AS(frame_truth_from_jsonl("{\"frame\": 1}\n"), Error);

  std::vector<FrameGroundTruth> gt{{3, 1, {{0, 10, 0.5, BBox{1, 2, 3, 4}, PointD{2, 3}}, {1, 0, 0.0, {}, {}}}}};
  const auto gt_text = ground_truth_to_jsonl(gt);
  CHECK(ground_truth_to_jsonl(ground_truth_from_jsonl(gt_text)) == gt_text);
}

TEST_CASE("report table") {
  const std::vector<ReportRow> rows{{"clip-a", {328, 6, 0, 272}, "occlusion"}, {"b", {0, 0, 4, 0}, ""}};
  const auto table = report_table(rows);
  CHECK(table.find("Video") != std::string::npos);
  CHECK(table.find("98.2%") != std::string::npos);
  CHECK(table.find("54.7%") != std::string::npos);
  CHECK(table.find("n/a") != std::string::npos);
  CHECK(table.find("occlusion") != std::string::npos);
}
