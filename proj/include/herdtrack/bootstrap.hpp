#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "herdtrack/features.hpp"
#include "herdtrack/imaging.hpp"
#include "herdtrack/pipeline.hpp"
#include "herdtrack/providers.hpp"

namespace herdtrack {

/// Instances of one frame with binary labels (1 = target, 0 = distractor).
struct LabelledFrame {
  int frame_id = 0;
  std::vector<Instance> instances;
  std::vector<int> labels;

  /// Index of the label-1 instance, or -1.
  int target_index() const noexcept;
};

LabelledFrame init_labels(int frame_id, std::vector<Instance> instances, std::size_t target);

/// 1-NN label transfer on centroids. Each current point takes the label of its
/// nearest previous point (ties: lower previous index). If several inherit 1,
/// the one closest to its source keeps it (ties: lower current index).
std::vector<int> propagate_labels(std::span<const PointD> previous, std::span<const int> previous_labels,
                                  std::span<const PointD> current);

LabelledFrame propagate(const LabelledFrame& prev, int frame_id, std::vector<Instance> current);

struct RowKey {
  int frame_id = 0;
  int instance_id = 0;
  friend auto operator<=>(const RowKey&, const RowKey&) = default;
};

struct DatasetRow {
  int frame_id = 0;
  int instance_id = 0;
  FeatureVector features;
  int label = 0;
  bool flagged = false;
  std::string identity;  ///< optional bookkeeping tag, not used for learning

  RowKey key() const noexcept { return {frame_id, instance_id}; }
};

/// Rows ordered by (frame_id, instance_id). Flagged rows stay in the dataset
/// but are left out of `exported()` and the CSV.
struct TrainingDataset {
  std::vector<DatasetRow> rows;

  std::vector<DatasetRow> exported() const;
  std::size_t size() const noexcept { return rows.size(); }
};

struct BootstrapConfig {
  SegmentationConfig segmentation;
  SamplerConfig sampler;
  std::uint64_t seed = 0;
};

struct BootstrapResult {
  TrainingDataset dataset;
  std::vector<LabelledFrame> frames;  ///< frames that contributed rows, in order
  std::vector<std::string> warnings;
};

/// Segment every frame, propagate labels frame to frame, extract features.
/// `seed_frame` must describe the first frame of `seq`.
BootstrapResult bootstrap_sequence(const FrameSequence& seq, const LabelledFrame& seed_frame,
                                   const Providers& providers, const BootstrapConfig& config);

TrainingDataset build_dataset(const FrameSequence& seq, const LabelledFrame& seed_frame, const Providers& providers,
                              const BootstrapConfig& config);

/// Mark rows as mislabelled. Idempotent; unknown keys raise a Flag error listing them.
TrainingDataset cleanse(const TrainingDataset& ds, const std::set<RowKey>& flags);

inline constexpr std::string_view kDatasetHeader =
    "frame_id,instance_id,i_mean,i_max,i_q1,i_q2,i_q3,bbox_w,bbox_h,dx,dy,label";

/// CSV with the fixed header; flagged rows omitted; values to 6 significant digits.
std::string dataset_to_csv(const TrainingDataset& ds);
TrainingDataset dataset_from_csv(std::string_view text);

void write_dataset(const std::filesystem::path& path, const TrainingDataset& ds);
TrainingDataset read_dataset(const std::filesystem::path& path);

}  // namespace herdtrack

namespace herdtrack {

/// Index of the instance whose bbox overlaps `box` the most (ties: lower
/// index). Throws Selection when nothing overlaps.
std::size_t select_by_bbox(std::span<const Instance> instances, const BBox& box);

}  // namespace herdtrack
