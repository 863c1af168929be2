#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "herdtrack/geometry.hpp"
#include "herdtrack/imaging.hpp"

namespace herdtrack {

inline constexpr int kDefaultMinArea = 800;
inline constexpr int kCropPadding = 5;

/// Per-pixel class ids: 0 background, 1 target class.
struct SemanticMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  SemanticMask() = default;
  SemanticMask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t operator()(int x, int y) const noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& operator()(int x, int y) noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Any nonzero gray value becomes class 1.
SemanticMask mask_from_gray(const GrayImage& gray);

/// Edge strength in [0,1]; higher is a stronger edge.
struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  EdgeMap() = default;
  EdgeMap(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0f) {}

  float operator()(int x, int y) const noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
  float& operator()(int x, int y) noexcept { return data[static_cast<std::size_t>(y) * width + x]; }

  EdgeMap crop(const BBox& r) const;
  friend bool operator==(const EdgeMap&, const EdgeMap&) = default;
};

/// 8-bit file representation: 255 = strongest edge.
EdgeMap edge_map_from_gray(const GrayImage& gray);
GrayImage edge_map_to_gray(const EdgeMap& edges);

struct Blob {
  int pixel_count = 0;
  BBox bbox;
  std::vector<Point> pixels;  ///< frame coordinates, raster order
};

struct Instance {
  std::vector<Point> pixels;  ///< frame coordinates, raster order
  int area = 0;
  PointD centroid;
  std::vector<Point> hull;    ///< counter-clockwise
  BBox bbox;
  bool low_confidence = false;
};

/// Build an Instance (area, centroid, hull, bbox) from a non-empty pixel list.
Instance make_instance(std::vector<Point> pixels);

struct ComponentLabels {
  std::vector<std::int32_t> labels;  ///< 0 = not foreground, 1..count in raster order of first pixel
  int count = 0;
};

/// Connected components of nonzero pixels (connectivity 4 or 8), two-pass union-find.
ComponentLabels label_components(std::span<const std::uint8_t> foreground, int width, int height,
                                 int connectivity = 8);

/// 8-connected class-1 components with at least `min_blob_area` pixels,
/// ordered by (y_min, x_min).
std::vector<Blob> extract_blobs(const SemanticMask& mask, int min_blob_area = kDefaultMinArea);

/// Blob bbox grown by `padding` on every side, clamped to the frame.
BBox padded_crop_rect(const BBox& bbox, int frame_width, int frame_height, int padding = kCropPadding);

/// Central-difference gradient magnitude (border replicated) scaled by its maximum.
EdgeMap gradient_edge_map(const GrayImage& crop);

using Histogram = std::array<std::uint64_t, 256>;

Histogram histogram_of(const GrayImage& image);
/// Edge strengths quantized to round(255 * s).
Histogram histogram_of(const EdgeMap& edges);
inline std::uint8_t quantize_edge(float strength) noexcept {
  const float s = strength < 0.0f ? 0.0f : (strength > 1.0f ? 1.0f : strength);
  return static_cast<std::uint8_t>(s * 255.0f + 0.5f);
}

/// Ridler-Calvard iterative threshold on a 256-bin histogram. Values <= T form
/// the low class. Throws DegenerateInput if fewer than two bins are occupied.
double isodata_threshold(const Histogram& histogram);
double isodata_threshold(const GrayImage& image);

struct SegmentOptions {
  int min_instance_area = kDefaultMinArea;
  Point origin;  ///< frame coordinates of the crop's top-left pixel
};

/// Binarize `edges` at the ISODATA threshold and return the 8-connected
/// non-edge regions that do not touch the crop border, in frame coordinates,
/// ordered by (y_min, x_min). When `region` is given (one byte per crop pixel)
/// pixels outside it are treated as walls. A constant edge map yields the
/// whole region as a single low-confidence instance.
std::vector<Instance> segment_instances(const GrayImage& crop, const EdgeMap& edges,
                                        const SegmentOptions& options = {},
                                        std::span<const std::uint8_t> region = {});

}  // namespace herdtrack
