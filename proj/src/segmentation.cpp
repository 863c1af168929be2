#include "herdtrack/segmentation.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "herdtrack/error.hpp"

namespace herdtrack {
namespace {

struct DisjointSet {
  std::vector<std::int32_t> parent;

  std::int32_t make() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }
  std::int32_t find(std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent[b] = a; else parent[a] = b;
  }
};

bool order_by_top_left(const BBox& a, const BBox& b) {
  return a.y_min != b.y_min ? a.y_min < b.y_min : a.x_min < b.x_min;
}

}  // namespace

SemanticMask mask_from_gray(const GrayImage& gray) {
  SemanticMask mask(gray.width(), gray.height());
  const auto px = gray.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) mask.data[i] = px[i] != 0 ? 1 : 0;
  return mask;
}

EdgeMap EdgeMap::crop(const BBox& r) const {
  if (r.x_min < 0 || r.y_min < 0 || r.x_max >= width || r.y_max >= height || r.x_max < r.x_min ||
      r.y_max < r.y_min) {
    throw Error(ErrorCode::Argument, "edge crop outside map");
  }
  EdgeMap out(r.width(), r.height());
  for (int y = r.y_min; y <= r.y_max; ++y) {
    for (int x = r.x_min; x <= r.x_max; ++x) out(x - r.x_min, y - r.y_min) = (*this)(x, y);
  }
  return out;
}

EdgeMap edge_map_from_gray(const GrayImage& gray) {
  EdgeMap edges(gray.width(), gray.height());
  const auto px = gray.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) edges.data[i] = static_cast<float>(px[i]) / 255.0f;
  return edges;
}

GrayImage edge_map_to_gray(const EdgeMap& edges) {
  std::vector<std::uint8_t> px(edges.data.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize_edge(edges.data[i]);
  return GrayImage(edges.width, edges.height, std::move(px));
}

Instance make_instance(std::vector<Point> pixels) {
  if (pixels.empty()) throw Error(ErrorCode::Argument, "instance needs at least one pixel");
  Instance inst;
  double sx = 0.0, sy = 0.0;
  // Only the leftmost and rightmost pixel of each row can be a hull vertex.
  std::map<int, std::pair<int, int>> row_extent;
  for (const auto& p : pixels) {
    sx += p.x;
    sy += p.y;
    inst.bbox.expand(p.x, p.y);
    auto [it, inserted] = row_extent.try_emplace(p.y, p.x, p.x);
    if (!inserted) {
      it->second.first = std::min(it->second.first, p.x);
      it->second.second = std::max(it->second.second, p.x);
    }
  }
  inst.area = static_cast<int>(pixels.size());
  inst.centroid = {sx / inst.area, sy / inst.area};

  std::vector<Point> candidates;
  candidates.reserve(2 * row_extent.size());
  for (const auto& [y, ext] : row_extent) {
    candidates.push_back({ext.first, y});
    if (ext.second != ext.first) candidates.push_back({ext.second, y});
  }
  try {
    inst.hull = convex_hull(candidates);
  } catch (const Error&) {
    // Collinear pixel set: the two extreme points stand in for the hull.
    auto [lo, hi] = std::minmax_element(candidates.begin(), candidates.end());
    inst.hull = {*lo};
    if (*hi != *lo) inst.hull.push_back(*hi);
  }
  inst.pixels = std::move(pixels);
  return inst;
}

ComponentLabels label_components(std::span<const std::uint8_t> foreground, int width, int height,
                                 int connectivity) {
  if (connectivity != 4 && connectivity != 8) throw Error(ErrorCode::Argument, "connectivity must be 4 or 8");
  if (foreground.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::Argument, "foreground buffer does not match dimensions");
  }
  ComponentLabels out;
  out.labels.assign(foreground.size(), -1);
  DisjointSet sets;

  auto at = [&](int x, int y) -> std::int32_t {
    if (x < 0 || y < 0 || x >= width) return -1;
    return out.labels[static_cast<std::size_t>(y) * width + x];
  };

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      if (!foreground[i]) continue;
      std::int32_t neighbours[4] = {at(x - 1, y), at(x, y - 1), -1, -1};
      if (connectivity == 8) {
        neighbours[2] = at(x - 1, y - 1);
        neighbours[3] = at(x + 1, y - 1);
      }
      std::int32_t label = -1;
      for (auto n : neighbours) {
        if (n < 0) continue;
        if (label < 0) label = n; else sets.unite(label, n);
      }
      out.labels[i] = label < 0 ? sets.make() : label;
    }
  }

  std::vector<std::int32_t> final_label(sets.parent.size(), 0);
  for (auto& l : out.labels) {
    if (l < 0) {
      l = 0;
      continue;
    }
    const auto root = sets.find(l);
    if (final_label[root] == 0) final_label[root] = ++out.count;
    l = final_label[root];
  }
  return out;
}

std::vector<Blob> extract_blobs(const SemanticMask& mask, int min_blob_area) {
  const auto comps = label_components(mask.data, mask.width, mask.height, 8);
  std::vector<Blob> blobs(static_cast<std::size_t>(comps.count));
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const auto l = comps.labels[static_cast<std::size_t>(y) * mask.width + x];
      if (l == 0) continue;
      auto& b = blobs[static_cast<std::size_t>(l - 1)];
      b.pixels.push_back({x, y});
      b.bbox.expand(x, y);
    }
  }
  std::vector<Blob> kept;
  for (auto& b : blobs) {
    b.pixel_count = static_cast<int>(b.pixels.size());
    if (b.pixel_count >= min_blob_area) kept.push_back(std::move(b));
  }
  // Labels are numbered by first raster pixel, so a stable sort breaks ties deterministically.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Blob& a, const Blob& b) { return order_by_top_left(a.bbox, b.bbox); });
  return kept;
}

BBox padded_crop_rect(const BBox& bbox, int frame_width, int frame_height, int padding) {
  return {std::max(0, bbox.x_min - padding), std::max(0, bbox.y_min - padding),
          std::min(frame_width - 1, bbox.x_max + padding), std::min(frame_height - 1, bbox.y_max + padding)};
}

EdgeMap gradient_edge_map(const GrayImage& crop) {
  const int w = crop.width();
  const int h = crop.height();
  EdgeMap edges(w, h);
  float peak = 0.0f;
  for (int y = 0; y < h; ++y) {
    const int yu = std::max(0, y - 1);
    const int yd = std::min(h - 1, y + 1);
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(0, x - 1);
      const int xr = std::min(w - 1, x + 1);
      const float gx = 0.5f * (static_cast<float>(crop(xr, y)) - static_cast<float>(crop(xl, y)));
      const float gy = 0.5f * (static_cast<float>(crop(x, yd)) - static_cast<float>(crop(x, yu)));
      const float mag = std::sqrt(gx * gx + gy * gy);
      edges(x, y) = mag;
      peak = std::max(peak, mag);
    }
  }
  if (peak > 0.0f) {
    for (auto& v : edges.data) v /= peak;
  }
  return edges;
}

Histogram histogram_of(const GrayImage& image) {
  Histogram hist{};
  for (auto v : image.pixels()) ++hist[v];
  return hist;
}

Histogram histogram_of(const EdgeMap& edges) {
  Histogram hist{};
  for (auto v : edges.data) ++hist[quantize_edge(v)];
  return hist;
}

double isodata_threshold(const Histogram& histogram) {
  std::uint64_t count = 0;
  double sum = 0.0;
  int occupied = 0;
  for (int v = 0; v < 256; ++v) {
    count += histogram[v];
    sum += static_cast<double>(histogram[v]) * v;
    occupied += histogram[v] != 0;
  }
  if (occupied < 2) throw Error(ErrorCode::DegenerateInput, "ISODATA needs at least two distinct values");

  // Cumulative count and first moment so each iteration is O(1).
  std::array<double, 257> cum_count{}, cum_moment{};
  for (int v = 0; v < 256; ++v) {
    cum_count[v + 1] = cum_count[v] + static_cast<double>(histogram[v]);
    cum_moment[v + 1] = cum_moment[v] + static_cast<double>(histogram[v]) * v;
  }
  const double n = cum_count[256];
  const double m = cum_moment[256];

  double threshold = sum / static_cast<double>(count);
  for (int iter = 0; iter < 100; ++iter) {
    // Values <= T are exactly the bins 0..floor(T). T stays strictly between
    // the extreme occupied bins, so both classes are non-empty.
    const int split = static_cast<int>(std::floor(threshold));
    const double low_n = cum_count[split + 1];
    const double low_mean = cum_moment[split + 1] / low_n;
    const double high_mean = (m - cum_moment[split + 1]) / (n - low_n);
    const double next = 0.5 * (low_mean + high_mean);
    if (static_cast<int>(std::floor(next)) == split) return next;
    threshold = next;
  }
  return threshold;
}

double isodata_threshold(const GrayImage& image) { return isodata_threshold(histogram_of(image)); }

std::vector<Instance> segment_instances(const GrayImage& crop, const EdgeMap& edges, const SegmentOptions& options,
                                        std::span<const std::uint8_t> region) {
  const int w = edges.width;
  const int h = edges.height;
  if (crop.width() != w || crop.height() != h) throw Error(ErrorCode::Argument, "crop and edge map sizes differ");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (!region.empty() && region.size() != n) throw Error(ErrorCode::Argument, "region mask size differs from crop");
  const auto inside_region = [&](std::size_t i) { return region.empty() || region[i] != 0; };

  std::vector<Instance> instances;
  const Histogram hist = histogram_of(edges);
  const bool constant = std::count_if(hist.begin(), hist.end(), [](auto c) { return c != 0; }) < 2;
  if (constant) {
    std::vector<Point> pixels;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (inside_region(static_cast<std::size_t>(y) * w + x)) pixels.push_back({x + options.origin.x, y + options.origin.y});
      }
    }
    if (static_cast<int>(pixels.size()) >= options.min_instance_area && !pixels.empty()) {
      instances.push_back(make_instance(std::move(pixels)));
      instances.back().low_confidence = true;
    }
    return instances;
  }

  const double threshold = isodata_threshold(hist);
  std::vector<std::uint8_t> open(n);
  for (std::size_t i = 0; i < n; ++i) {
    open[i] = (static_cast<double>(quantize_edge(edges.data[i])) <= threshold && inside_region(i)) ? 1 : 0;
  }
  const auto comps = label_components(open, w, h, 8);

  std::vector<char> touches_border(static_cast<std::size_t>(comps.count) + 1, 0);
  for (int x = 0; x < w; ++x) {
    touches_border[comps.labels[x]] = 1;
    touches_border[comps.labels[static_cast<std::size_t>(h - 1) * w + x]] = 1;
  }
  for (int y = 0; y < h; ++y) {
    touches_border[comps.labels[static_cast<std::size_t>(y) * w]] = 1;
    touches_border[comps.labels[static_cast<std::size_t>(y) * w + w - 1]] = 1;
  }

  std::vector<std::vector<Point>> members(static_cast<std::size_t>(comps.count) + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto l = comps.labels[static_cast<std::size_t>(y) * w + x];
      if (l != 0 && !touches_border[l]) members[l].push_back({x + options.origin.x, y + options.origin.y});
    }
  }
  for (auto& pixels : members) {
    if (!pixels.empty() && static_cast<int>(pixels.size()) >= options.min_instance_area) {
      instances.push_back(make_instance(std::move(pixels)));
    }
  }
  std::stable_sort(instances.begin(), instances.end(),
                   [](const Instance& a, const Instance& b) { return order_by_top_left(a.bbox, b.bbox); });
  return instances;
}

}  // namespace herdtrack
