#include "herdtrack/features.hpp"

#include <algorithm>
#include <cmath>

#include "herdtrack/error.hpp"
#include "herdtrack/rng.hpp"

namespace herdtrack {

std::uint64_t feature_seed(std::uint64_t global_seed, int frame_id, int instance_id) {
  return hash64(global_seed, static_cast<std::uint64_t>(frame_id), static_cast<std::uint64_t>(instance_id));
}

std::vector<double> sample_patch_means(const GrayImage& gray, const Instance& inst, std::uint64_t seed,
                                       const SamplerConfig& config) {
  const int size = config.patch_size;
  if (size < 1 || size % 2 == 0) throw Error(ErrorCode::Argument, "patch size must be odd and positive");
  if (gray.width() < size || gray.height() < size) {
    throw Error(ErrorCode::DegenerateGeometry, "image smaller than one patch");
  }
  if (inst.bbox.x_min < 0 || inst.bbox.y_min < 0 || inst.bbox.x_max >= gray.width() ||
      inst.bbox.y_max >= gray.height()) {
    throw Error(ErrorCode::Argument, "instance lies outside the image");
  }
  const int half = size / 2;

  // Membership bitmap over the bbox, only needed for instance-restricted sampling.
  std::vector<std::uint8_t> member;
  if (config.source == PatchSource::InstanceOnly) {
    member.assign(static_cast<std::size_t>(inst.bbox.area()), 0);
    for (const auto& p : inst.pixels) {
      member[static_cast<std::size_t>(p.y - inst.bbox.y_min) * inst.bbox.width() + (p.x - inst.bbox.x_min)] = 1;
    }
  }
  const auto is_member = [&](int x, int y) {
    return inst.bbox.contains(x, y) &&
           member[static_cast<std::size_t>(y - inst.bbox.y_min) * inst.bbox.width() + (x - inst.bbox.x_min)];
  };

  Engine eng(seed);
  const double sd = std::sqrt(config.variance);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(config.patch_count));
  while (static_cast<int>(means.size()) < config.patch_count) {
    const auto z = standard_normal_pair(eng);
    const long cx = std::clamp(std::lround(inst.centroid.x + sd * z.first), static_cast<long>(half),
                               static_cast<long>(gray.width() - 1 - half));
    const long cy = std::clamp(std::lround(inst.centroid.y + sd * z.second), static_cast<long>(half),
                               static_cast<long>(gray.height() - 1 - half));
    long sum = 0, all_sum = 0;
    int count = 0;
    for (long y = cy - half; y <= cy + half; ++y) {
      for (long x = cx - half; x <= cx + half; ++x) {
        const int v = gray(static_cast<int>(x), static_cast<int>(y));
        all_sum += v;
        if (config.source == PatchSource::InstanceOnly && is_member(static_cast<int>(x), static_cast<int>(y))) {
          sum += v;
          ++count;
        }
      }
    }
    if (config.source == PatchSource::Frame || count == 0) {
      means.push_back(static_cast<double>(all_sum) / (size * size));
    } else {
      means.push_back(static_cast<double>(sum) / count);
    }
  }
  return means;
}

IntensityStats intensity_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::Argument, "intensity statistics need at least one value");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : values) sum += v;

  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size() || frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  };
  return {sum / static_cast<double>(values.size()), sorted.back(), quantile(0.25), quantile(0.5), quantile(0.75)};
}

FeatureVector feature_vector(const GrayImage& gray, const Instance& inst,
                             const std::optional<PointD>& prev_target_centroid, std::uint64_t seed,
                             const SamplerConfig& config) {
  const auto means = sample_patch_means(gray, inst, seed, config);
  const auto stats = intensity_stats(means);
  FeatureVector fv;
  fv.i_mean = stats.mean;
  fv.i_max = stats.max;
  fv.i_q1 = stats.q1;
  fv.i_q2 = stats.q2;
  fv.i_q3 = stats.q3;
  fv.bbox_w = inst.bbox.width();
  fv.bbox_h = inst.bbox.height();
  if (prev_target_centroid) {
    fv.dx = inst.centroid.x - prev_target_centroid->x;
    fv.dy = inst.centroid.y - prev_target_centroid->y;
  }
  return fv;
}

}  // namespace herdtrack
