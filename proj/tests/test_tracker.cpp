#include <doctest.h>

#include "herdtrack/bootstrap.hpp"
#include "herdtrack/error.hpp"
#include "herdtrack/forest.hpp"
#include "herdtrack/ground_truth.hpp"
#include "herdtrack/pipeline.hpp"
#include "herdtrack/synth.hpp"
#include "herdtrack/tracker.hpp"

using namespace herdtrack;

namespace {

constexpr int kBboxW = 5;  // index of bbox_w in the feature order

/// Ten stumps on bbox_w with thresholds 0, 10, ..., 90: an instance of width w
/// collects one positive vote per threshold below w.
std::shared_ptr<const Forest> width_forest() {
  std::vector<DecisionTree> trees;
  for (int k = 0; k < 10; ++k) {
    TreeNode root;
    root.feature = kBboxW;
    root.threshold = 10.0 * k;
    root.left = 1;
    root.right = 2;
    root.counts = {1, 1};
    TreeNode neg, pos;
    neg.counts = {1, 0};
    pos.counts = {0, 1};
    trees.emplace_back(std::vector<TreeNode>{root, neg, pos});
  }
  return std::make_shared<const Forest>(ForestConfig{}, std::move(trees), std::nullopt);
}

Instance rect(int x0, int y0, int w, int h) {
  std::vector<Point> px;
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) px.push_back({x, y});
  return make_instance(std::move(px));
}

TrackState state_with(std::shared_ptr<const Forest> model, std::optional<PointD> last = std::nullopt) {
  TrackState s;
  s.model = std::move(model);
  s.last_target_centroid = last;
  if (last) s.last_seen_frame = 0;
  return s;
}

}  // namespace

TEST_CASE("a single positive is selected and moves the state") {
  const GrayImage frame(300, 200, 90);
  const auto [result, next] = classify_frame(state_with(width_forest()), 3, frame, {rect(20, 20, 95, 30)}, {});
  REQUIRE(result.selected.has_value());
  CHECK(*result.selected == 0);
  CHECK(result.instances[0].prediction == Prediction{1, 1.0});
  CHECK(next.last_target_centroid->x == doctest::Approx(20 + 47));
  CHECK(next.last_seen_frame == 3);
}

TEST_CASE("the highest vote wins and other positives are logged") {
  const GrayImage frame(300, 200, 90);
  const std::vector<Instance> inst{rect(10, 10, 55, 20), rect(100, 100, 85, 20)};
  const auto [result, next] = classify_frame(state_with(width_forest()), 1, frame, inst, {});
  CHECK(result.instances[0].prediction.vote_fraction == doctest::Approx(0.6));
  CHECK(result.instances[1].prediction.vote_fraction == doctest::Approx(0.9));
  CHECK(result.selected == 1);
  CHECK(result.extra_positives == std::vector<int>{0});
}

TEST_CASE("equal votes prefer the instance nearest the last target") {
  const GrayImage frame(400, 200, 90);
  const std::vector<Instance> inst{rect(10, 10, 75, 20), rect(250, 100, 75, 20)};
  const auto near_second = state_with(width_forest(), PointD{280, 110});
  CHECK(classify_frame(near_second, 1, frame, inst, {}).first.selected == 1);
  const auto near_first = state_with(width_forest(), PointD{40, 20});
  CHECK(classify_frame(near_first, 1, frame, inst, {}).first.selected == 0);
}

TEST_CASE("no positive means coasting") {
  const GrayImage frame(300, 200, 90);
  const auto before = state_with(width_forest(), PointD{5, 5});
  const auto [result, next] = classify_frame(before, 9, frame, {rect(10, 10, 40, 20)}, {});
  CHECK_FALSE(result.selected.has_value());
  CHECK(result.extra_positives.empty());
  CHECK(next.last_target_centroid == before.last_target_centroid);
  CHECK(next.last_seen_frame == before.last_seen_frame);
}

TEST_CASE("single-class models are rejected before tracking") {
  TreeNode leaf;
  leaf.counts = {4, 0};
  const auto model = std::make_shared<const Forest>(ForestConfig{}, std::vector<DecisionTree>(3, DecisionTree({leaf})),
                                                    std::nullopt);
  CHECK_THROWS_AS(check_model(*model), Error);
  CHECK_NOTHROW(check_model(*width_forest()));
  const Providers none;
  CHECK_THROWS_AS(run(FrameSequence{}, state_with(model), none, {}), Error);
  CHECK(run(FrameSequence{}, state_with(width_forest()), none, {}).frames.empty());
}

TEST_CASE("segmentation failures skip the frame") {
  const auto s = synth::generate(synth::easy_scenario(3, 1));
  Providers p = synth::oracle_providers(s);
  p.masks = std::make_shared<OracleMaskProvider>(std::map<int, SemanticMask>{{0, s.masks[0]}, {2, s.masks[2]}});
  const auto log = run(s.frames, state_with(width_forest()), p, {});
  REQUIRE(log.frames.size() == 3);
  CHECK_FALSE(log.frames[0].skipped);
  CHECK(log.frames[1].skipped);
  CHECK(log.frames[1].error.find("missing-artifact") != std::string::npos);
  CHECK_FALSE(log.frames[2].skipped);
}

TEST_CASE("bootstrap, train and track a short easy clip") {
  const auto s = synth::generate(synth::easy_scenario(40, 2));
  const auto providers = synth::oracle_providers(s);
  FrameSequence head, tail;
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    auto& part = i < 20 ? head : tail;
    part.frames.push_back(s.frames.frames[i]);
    part.frame_ids.push_back(s.frames.frame_ids[i]);
  }
  auto first = segment_frame(0, head.frames[0], providers);
  std::size_t target = 0;
  for (std::size_t i = 0; i < first.size(); ++i)
    if (owning_object(s.truth[0], first[i].centroid) == s.truth[0].target_id) target = i;
  const auto boot = bootstrap_sequence(head, init_labels(0, first, target), providers, {{}, {}, 2});

  ForestConfig fc;
  fc.n_trees = 60;
  fc.seed = 2;
  const auto model = std::make_shared<const Forest>(train(boot.dataset.exported(), fc));
  const auto& last = boot.frames.back();
  TrackState st = state_with(model, last.instances[static_cast<std::size_t>(last.target_index())].centroid);
  st.last_seen_frame = last.frame_id;

  const TrackerConfig tc{{}, {}, 2};
  const auto log = run(tail, st, providers, tc);
  REQUIRE(log.frames.size() == 20);
  int correct = 0;
  int last_seen = -1;
  for (const auto& r : log.frames) {
    CHECK_FALSE(r.skipped);
    if (r.selected) {
      const auto& truth = s.truth[static_cast<std::size_t>(r.frame_id)];
      correct += owning_object(truth, r.instances[static_cast<std::size_t>(*r.selected)].centroid) == truth.target_id;
      CHECK(r.frame_id > last_seen);
      last_seen = r.frame_id;
    }
  }
  CHECK(correct >= 18);

  // Replaying the same inputs reproduces the log exactly.
  CHECK(track_log_to_jsonl(run(tail, st, providers, tc)) == track_log_to_jsonl(log));
  // And the JSONL form round-trips.
  CHECK(track_log_to_jsonl(track_log_from_jsonl(track_log_to_jsonl(log))) == track_log_to_jsonl(log));
}
