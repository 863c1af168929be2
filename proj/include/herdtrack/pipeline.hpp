#pragma once

#include <vector>

#include "herdtrack/providers.hpp"
#include "herdtrack/segmentation.hpp"

namespace herdtrack {

struct SegmentationConfig {
  int min_blob_area = kDefaultMinArea;
  int min_instance_area = kDefaultMinArea;
  int padding = kCropPadding;
};

/// Mask -> blobs -> per-blob edges -> instances, for one frame. Instances from
/// all blobs are ordered by (y_min, x_min); an instance's id is its index.
std::vector<Instance> segment_frame(int frame_id, const GrayImage& frame, const Providers& providers,
                                    const SegmentationConfig& config = {});

/// Same, starting from an already available mask.
std::vector<Instance> segment_frame(int frame_id, const GrayImage& frame, const SemanticMask& mask,
                                    const EdgeProvider& edges, const SegmentationConfig& config = {});

}  // namespace herdtrack
