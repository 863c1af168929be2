#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "herdtrack/features.hpp"
#include "herdtrack/forest.hpp"
#include "herdtrack/pipeline.hpp"

namespace herdtrack {

struct TrackState {
  std::optional<PointD> last_target_centroid;
  std::optional<int> last_seen_frame;
  std::shared_ptr<const Forest> model;
};

/// What the log keeps of a segmented instance.
struct TrackedInstance {
  BBox bbox;
  PointD centroid;
  int area = 0;
  std::vector<Point> hull;
  Prediction prediction;
};

struct TrackResult {
  int frame_id = 0;
  std::vector<TrackedInstance> instances;
  std::optional<int> selected;
  std::vector<int> extra_positives;  ///< positives that were not selected
  bool skipped = false;
  std::string error;
};

struct TrackLog {
  std::vector<TrackResult> frames;
};

struct TrackerConfig {
  SegmentationConfig segmentation;
  SamplerConfig sampler;
  std::uint64_t seed = 0;
};

/// Classify already segmented instances and pick the target. Pure; returns the
/// next state alongside the result.
std::pair<TrackResult, TrackState> classify_frame(const TrackState& state, int frame_id, const GrayImage& frame,
                                                  const std::vector<Instance>& instances, const TrackerConfig& config);

/// Segment, classify, select. A segmentation failure yields a skipped result
/// and the unchanged state.
std::pair<TrackResult, TrackState> track_frame(const TrackState& state, int frame_id, const GrayImage& frame,
                                               const Providers& providers, const TrackerConfig& config);

/// Throws Contract when the model could never predict both classes
/// (every tree was grown on a single class).
void check_model(const Forest& model);

using FrameSink = std::function<void(const TrackResult&, const GrayImage&)>;

TrackLog run(const FrameSequence& seq, TrackState initial, const Providers& providers, const TrackerConfig& config,
             const FrameSink& sink = {});

/// One JSON object per frame, newline terminated.
std::string track_log_to_jsonl(const TrackLog& log);
TrackLog track_log_from_jsonl(std::string_view text);

}  // namespace herdtrack
