#include "herdtrack/pipeline.hpp"

#include "herdtrack/error.hpp"

namespace herdtrack {

std::vector<Instance> segment_frame(int frame_id, const GrayImage& frame, const Providers& providers,
                                    const SegmentationConfig& config) {
  if (!providers.masks || !providers.edges) throw Error(ErrorCode::Config, "segmentation providers not set");
  return segment_frame(frame_id, frame, providers.masks->mask(frame_id, frame), *providers.edges, config);
}

std::vector<Instance> segment_frame(int frame_id, const GrayImage& frame, const SemanticMask& mask,
                                    const EdgeProvider& edges, const SegmentationConfig& config) {
  if (mask.width != frame.width() || mask.height != frame.height()) {
    throw Error(ErrorCode::Argument, "mask and frame sizes differ");
  }
  const auto blobs = extract_blobs(mask, config.min_blob_area);
  std::vector<Instance> instances;
  for (std::size_t b = 0; b < blobs.size(); ++b) {
    const BBox rect = padded_crop_rect(blobs[b].bbox, frame.width(), frame.height(), config.padding);
    const GrayImage crop = frame.crop(rect.x_min, rect.y_min, rect.x_max, rect.y_max);
    const EdgeMap edge_map = edges.edges(frame_id, static_cast<int>(b), rect, crop);
    std::vector<std::uint8_t> region(static_cast<std::size_t>(rect.width()) * rect.height(), 0);
    for (const auto& p : blobs[b].pixels) {
      region[static_cast<std::size_t>(p.y - rect.y_min) * rect.width() + (p.x - rect.x_min)] = 1;
    }
    auto found = segment_instances(crop, edge_map, {config.min_instance_area, {rect.x_min, rect.y_min}}, region);
    for (auto& inst : found) instances.push_back(std::move(inst));
  }
  std::stable_sort(instances.begin(), instances.end(), [](const Instance& a, const Instance& b) {
    return a.bbox.y_min != b.bbox.y_min ? a.bbox.y_min < b.bbox.y_min : a.bbox.x_min < b.bbox.x_min;
  });
  return instances;
}

}  // namespace herdtrack
