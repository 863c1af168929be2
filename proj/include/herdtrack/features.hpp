#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "herdtrack/imaging.hpp"
#include "herdtrack/segmentation.hpp"

namespace herdtrack {

inline constexpr std::size_t kFeatureCount = 9;

/// Column order shared by the dataset CSV and serialized forests.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureOrder = {
    "i_mean", "i_max", "i_q1", "i_q2", "i_q3", "bbox_w", "bbox_h", "dx", "dy"};

using FeatureArray = std::array<double, kFeatureCount>;

struct FeatureVector {
  double i_mean = 0, i_max = 0, i_q1 = 0, i_q2 = 0, i_q3 = 0;
  double bbox_w = 0, bbox_h = 0;
  double dx = 0, dy = 0;

  FeatureArray to_array() const { return {i_mean, i_max, i_q1, i_q2, i_q3, bbox_w, bbox_h, dx, dy}; }
  static FeatureVector from_array(const FeatureArray& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]};
  }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class PatchSource {
  Frame,         ///< all 25 pixels of the (clamped) patch
  InstanceOnly,  ///< only patch pixels that belong to the instance
};

struct SamplerConfig {
  int patch_count = 100;
  int patch_size = 5;       ///< odd
  double variance = 5.0;    ///< per-axis, px^2
  PatchSource source = PatchSource::Frame;
};

/// Per-(frame, instance) sampling seed.
std::uint64_t feature_seed(std::uint64_t global_seed, int frame_id, int instance_id);

/// Means of `patch_count` square patches whose centers are drawn from an
/// isotropic Gaussian around the instance centroid. Centers are rounded to
/// the nearest pixel (halves away from zero) and clamped so every patch lies
/// inside the image.
std::vector<double> sample_patch_means(const GrayImage& gray, const Instance& inst, std::uint64_t seed,
                                       const SamplerConfig& config = {});

struct IntensityStats {
  double mean = 0, max = 0, q1 = 0, q2 = 0, q3 = 0;
  friend bool operator==(const IntensityStats&, const IntensityStats&) = default;
};

/// Mean, maximum and quartiles (linear interpolation at q*(n-1)).
IntensityStats intensity_stats(std::span<const double> values);

FeatureVector feature_vector(const GrayImage& gray, const Instance& inst,
                             const std::optional<PointD>& prev_target_centroid, std::uint64_t seed,
                             const SamplerConfig& config = {});

}  // namespace herdtrack
