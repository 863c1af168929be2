#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "herdtrack/geometry.hpp"

namespace herdtrack {

/// Visible extent of one scene object in one frame.
struct ObjectTruth {
  int id = 0;
  int visible_pixels = 0;
  double visible_fraction = 0.0;
  std::optional<BBox> bbox;  ///< unset when nothing is visible
  std::optional<PointD> centroid;
};

struct FrameGroundTruth {
  int frame_id = 0;
  int target_id = 0;
  std::vector<ObjectTruth> objects;

  const ObjectTruth* object(int id) const;
};

/// Ground-truth object for a point: among objects whose visible bbox contains
/// it, the one with the nearest visible centroid (ties: lower id). -1 if none.
int owning_object(const FrameGroundTruth& truth, const PointD& point);

std::string ground_truth_to_jsonl(const std::vector<FrameGroundTruth>& frames);
std::vector<FrameGroundTruth> ground_truth_from_jsonl(std::string_view text);

}  // namespace herdtrack
