#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "herdtrack/ground_truth.hpp"
#include "herdtrack/tracker.hpp"

namespace herdtrack {

struct ConfusionCounts {
  long long tp = 0, fp = 0, tn = 0, fn = 0;

  long long total() const noexcept { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp; fp += o.fp; tn += o.tn; fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Ground truth for the segmented instances of one frame.
struct FrameTruth {
  int frame_id = 0;
  bool target_present = false;  ///< a target visible but not segmented counts as FN
  std::map<int, int> labels;    ///< instance id -> {0,1}
};

struct FramePrediction {
  int frame_id = 0;
  std::map<int, int> labels;  ///< instance id -> predicted {0,1}
};

/// Instance-level counts. Frames and instance ids must match exactly between
/// the two sides; otherwise an Alignment error lists the offenders.
ConfusionCounts confusion(std::span<const FramePrediction> predictions, std::span<const FrameTruth> truth);

struct PrecisionRecall {
  std::optional<double> precision;
  std::optional<double> recall;
};

PrecisionRecall precision_recall(const ConfusionCounts& c);

/// Classifier labels of every logged instance (all positives, not only the selected one).
std::vector<FramePrediction> predictions_from_log(const TrackLog& log);

/// Label logged instances against synthetic ground truth: an instance is the
/// target when its centroid's owning object is the target. The target counts
/// as present when at least `min_visible_pixels` of it are visible.
std::vector<FrameTruth> truth_from_ground_truth(const TrackLog& log, std::span<const FrameGroundTruth> truth,
                                                int min_visible_pixels);

std::string frame_truth_to_jsonl(std::span<const FrameTruth> truth);
std::vector<FrameTruth> frame_truth_from_jsonl(std::string_view text);

/// `tp,fp,tn,fn,precision,recall` with a header line; undefined ratios left empty.
std::string report_csv(const ConfusionCounts& c);

struct ReportRow {
  std::string video;
  ConfusionCounts counts;
  std::string challenges;
};

/// Fixed-width table: Video | TP | FP | TN | FN | P | R | Challenges, percentages to one decimal.
std::string report_table(std::span<const ReportRow> rows);

std::string format_percent(const std::optional<double>& ratio);

}  // namespace herdtrack
