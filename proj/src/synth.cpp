#include "herdtrack/synth.hpp"

#include <algorithm>
#include <cmath>

#include "herdtrack/error.hpp"
#include "herdtrack/image_io.hpp"
#include "herdtrack/rng.hpp"

namespace herdtrack::synth {
namespace {

int hashed_offset(std::uint64_t key, int amplitude) {
  if (amplitude <= 0) return 0;
  return static_cast<int>(mix64(key) % static_cast<std::uint64_t>(2 * amplitude + 1)) - amplitude;
}

std::uint64_t pack(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

template <typename F>
void for_each_ellipse_pixel(const ObjectPose& pose, F&& f) {
  const int y0 = static_cast<int>(std::ceil(pose.center.y - pose.semi_y));
  const int y1 = static_cast<int>(std::floor(pose.center.y + pose.semi_y));
  for (int y = y0; y <= y1; ++y) {
    const double v = (y - pose.center.y) / pose.semi_y;
    const double reach = 1.0 - v * v;
    if (reach < 0.0) continue;
    const double half = pose.semi_x * std::sqrt(reach);
    const int x0 = static_cast<int>(std::ceil(pose.center.x - half));
    const int x1 = static_cast<int>(std::floor(pose.center.x + half));
    for (int x = x0; x <= x1; ++x) f(x, y);
  }
}

PointD along_path(const std::vector<PointD>& pts, double distance) {
  if (pts.size() == 1) return pts.front();
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
  if (total <= 0.0) return pts.front();
  // Back and forth along the polyline.
  double s = std::fmod(distance, 2.0 * total);
  if (s > total) s = 2.0 * total - s;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double seg = std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    if (s <= seg || i + 1 == pts.size()) {
      const double f = seg > 0.0 ? std::min(1.0, s / seg) : 0.0;
      return {pts[i - 1].x + f * (pts[i].x - pts[i - 1].x), pts[i - 1].y + f * (pts[i].y - pts[i - 1].y)};
    }
    s -= seg;
  }
  return pts.back();
}

}  // namespace

ObjectPose pose_at(const ObjectSpec& spec, int t) {
  ObjectPose pose;
  pose.center = along_path(spec.waypoints, spec.speed * t);
  const double phase = spec.wobble_period > 0.0 ? std::sin(6.283185307179586 * t / spec.wobble_period) : 0.0;
  pose.semi_x = spec.semi_x * (1.0 + spec.wobble * phase);
  pose.semi_y = spec.semi_y * (1.0 - spec.wobble * phase);
  return pose;
}

long long ellipse_pixel_count(const ObjectPose& pose) {
  long long n = 0;
  for_each_ellipse_pixel(pose, [&](int, int) { ++n; });
  return n;
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.width < 1 || cfg.height < 1) throw Error(ErrorCode::Config, "frame size must be positive");
  if (cfg.n_frames < 1) throw Error(ErrorCode::Config, "n_frames must be >= 1");
  if (cfg.objects.empty()) throw Error(ErrorCode::Config, "scenario needs at least one object");
  if (cfg.target < 0 || cfg.target >= static_cast<int>(cfg.objects.size())) {
    throw Error(ErrorCode::Config, "target index out of range");
  }
  for (std::size_t i = 0; i < cfg.objects.size(); ++i) {
    const auto& o = cfg.objects[i];
    const std::string who = "object " + std::to_string(i);
    if (o.waypoints.empty()) throw Error(ErrorCode::Config, who + " has no waypoints");
    if (o.speed < 0.0) throw Error(ErrorCode::Config, who + " has negative speed");
    if (o.semi_x <= 0.0 || o.semi_y <= 0.0) throw Error(ErrorCode::Config, who + " has non-positive axes");
    if (o.wobble < 0.0 || o.wobble >= 1.0) throw Error(ErrorCode::Config, who + " wobble must be in [0,1)");
    const double max_x = o.semi_x * (1.0 + o.wobble);
    const double max_y = o.semi_y * (1.0 + o.wobble);
    if (2.0 * max_x + 1.0 > cfg.width || 2.0 * max_y + 1.0 > cfg.height) {
      throw Error(ErrorCode::Config, who + " is larger than the frame");
    }
    for (const auto& w : o.waypoints) {
      if (w.x - max_x < 0.0 || w.x + max_x > cfg.width - 1 || w.y - max_y < 0.0 || w.y + max_y > cfg.height - 1) {
        throw Error(ErrorCode::Config, who + " leaves the frame along its path");
      }
    }
  }
  for (const auto& b : cfg.bars) {
    if (b.width < 1) throw Error(ErrorCode::Config, "bar width must be >= 1");
  }
}

ScenarioConfig easy_scenario(int n_frames, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.name = "easy";
  cfg.n_frames = n_frames;
  cfg.seed = seed;
  // The herd walks in step, one animal per lane, so relative positions stay fixed.
  cfg.objects = {
      {60, 35, 125, 12, {{150, 140}, {850, 140}}, 4.0},
      {55, 38, 105, 12, {{100, 300}, {800, 300}}, 4.0},
      {62, 33, 140, 12, {{220, 465}, {920, 465}}, 4.0},
  };
  return cfg;
}

ScenarioConfig hard_scenario(int n_frames, std::uint64_t seed) {
  ScenarioConfig cfg = easy_scenario(n_frames, seed);
  cfg.name = "hard";
  cfg.low_contrast = true;
  cfg.background_texture = 20;
  // The target dips towards the middle lane and crosses the second animal's path.
  cfg.objects[0].waypoints = {{150, 140}, {420, 250}, {620, 200}, {850, 140}};
  cfg.objects[0].wobble = 0.12;
  cfg.objects[0].light_patch = true;
  // Timed so the second animal walks in front of the target around frame 94.
  cfg.objects[1].waypoints = {{850, 330}, {150, 150}};
  cfg.objects[1].wobble = 0.1;
  cfg.objects[2].waypoints = {{300, 465}, {700, 465}};
  cfg.objects[2].speed = 2.0;
  cfg.objects[2].light_patch = true;
  cfg.bars = {{330, 20, 175}, {640, 24, 175}};
  return cfg;
}

SyntheticSequence generate(const ScenarioConfig& cfg) {
  validate(cfg);
  SyntheticSequence out;
  out.config = cfg;
  out.frames.stride = 1;
  const int w = cfg.width;
  const int h = cfg.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  int mean_object = 0;
  for (const auto& o : cfg.objects) mean_object += o.intensity;
  mean_object /= static_cast<int>(cfg.objects.size());
  const int floor_level = cfg.low_contrast ? mean_object : cfg.background;

  for (int t = 0; t < cfg.n_frames; ++t) {
    std::vector<ObjectPose> poses;
    for (const auto& o : cfg.objects) poses.push_back(pose_at(o, t));

    std::vector<std::int16_t> owner(n, -1);
    for (std::size_t i = 0; i < poses.size(); ++i) {
      for_each_ellipse_pixel(poses[i], [&](int x, int y) {
        if (x >= 0 && y >= 0 && x < w && y < h) owner[static_cast<std::size_t>(y) * w + x] = static_cast<std::int16_t>(i);
      });
    }
    std::vector<char> is_bar(static_cast<std::size_t>(w), 0);
    std::vector<int> bar_level(static_cast<std::size_t>(w), 0);
    for (const auto& b : cfg.bars) {
      for (int x = std::max(0, b.x); x < std::min(w, b.x + b.width); ++x) {
        is_bar[static_cast<std::size_t>(x)] = 1;
        bar_level[static_cast<std::size_t>(x)] = b.intensity;
      }
    }

    GrayImage frame(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        int v;
        if (is_bar[static_cast<std::size_t>(x)]) {
          owner[idx] = -1;
          v = bar_level[static_cast<std::size_t>(x)] + hashed_offset(hash64(cfg.seed, 2, pack(x, y)), 4);
        } else if (owner[idx] >= 0) {
          const auto i = static_cast<std::size_t>(owner[idx]);
          const auto& spec = cfg.objects[i];
          const int lx = static_cast<int>(std::lround(x - poses[i].center.x));
          const int ly = static_cast<int>(std::lround(y - poses[i].center.y));
          v = spec.intensity + hashed_offset(hash64(cfg.seed, 100 + i, pack(lx, ly)), spec.texture);
          if (spec.light_patch && std::abs(lx + 0.15 * poses[i].semi_x) <= 0.12 * poses[i].semi_x) v += 70;
        } else {
          v = floor_level + hashed_offset(hash64(cfg.seed, 1, pack(x, y)), cfg.background_texture);
        }
        v += hashed_offset(hash64(cfg.seed, 3 + (static_cast<std::uint64_t>(t) << 8), idx), cfg.sensor_noise);
        frame(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }

    SemanticMask mask(w, h);
    EdgeMap edges(w, h);
    FrameGroundTruth truth;
    truth.frame_id = t;
    truth.target_id = cfg.target;
    std::vector<ObjectTruth> objs(cfg.objects.size());
    std::vector<double> sx(objs.size(), 0.0), sy(objs.size(), 0.0);
    for (std::size_t i = 0; i < objs.size(); ++i) objs[i].id = static_cast<int>(i);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        const int id = owner[idx];
        if (id < 0) continue;
        mask.data[idx] = 1;
        auto& o = objs[static_cast<std::size_t>(id)];
        ++o.visible_pixels;
        sx[static_cast<std::size_t>(id)] += x;
        sy[static_cast<std::size_t>(id)] += y;
        if (!o.bbox) o.bbox = BBox{x, y, x, y}; else o.bbox->expand(x, y);
        bool boundary = false;
        for (int dy = -1; dy <= 1 && !boundary; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h || owner[static_cast<std::size_t>(ny) * w + nx] != id) {
              boundary = true;
              break;
            }
          }
        }
        if (boundary) edges.data[idx] = 1.0f;
      }
    }
    for (std::size_t i = 0; i < objs.size(); ++i) {
      auto& o = objs[i];
      o.visible_fraction = static_cast<double>(o.visible_pixels) / static_cast<double>(ellipse_pixel_count(poses[i]));
      if (o.visible_pixels > 0) o.centroid = PointD{sx[i] / o.visible_pixels, sy[i] / o.visible_pixels};
    }
    truth.objects = std::move(objs);

    out.frames.frames.push_back(std::move(frame));
    out.frames.frame_ids.push_back(t);
    out.masks.push_back(std::move(mask));
    out.edges.push_back(std::move(edges));
    out.truth.push_back(std::move(truth));
    out.owners.push_back(std::move(owner));
  }
  return out;
}

Providers oracle_providers(const SyntheticSequence& seq) {
  std::map<int, SemanticMask> masks;
  std::map<int, EdgeMap> edges;
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    masks.emplace(seq.frames.frame_ids[k], seq.masks[k]);
    edges.emplace(seq.frames.frame_ids[k], seq.edges[k]);
  }
  return {std::make_shared<OracleMaskProvider>(std::move(masks)), std::make_shared<OracleEdgeProvider>(std::move(edges))};
}

void write_fixture(const SyntheticSequence& seq, const std::filesystem::path& dir, const SegmentationConfig& seg) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "frames");
  fs::create_directories(dir / "masks");
  fs::create_directories(dir / "edges");
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    const int id = seq.frames.frame_ids[k];
    char name[32];
    std::snprintf(name, sizeof name, "%06d.png", id);
    io::write_png(dir / "frames" / name, seq.frames.frames[k]);

    const auto& mask = seq.masks[k];
    std::vector<std::uint8_t> mask_px(mask.data.size());
    for (std::size_t i = 0; i < mask_px.size(); ++i) mask_px[i] = mask.data[i] ? 255 : 0;
    io::write_png(dir / "masks" / mask_filename(id), GrayImage(mask.width, mask.height, std::move(mask_px)));

    const auto blobs = extract_blobs(mask, seg.min_blob_area);
    for (std::size_t b = 0; b < blobs.size(); ++b) {
      const BBox rect = padded_crop_rect(blobs[b].bbox, mask.width, mask.height, seg.padding);
      io::write_png(dir / "edges" / edge_filename(id, static_cast<int>(b)), edge_map_to_gray(seq.edges[k].crop(rect)));
    }
  }
  const auto text = ground_truth_to_jsonl(seq.truth);
  io::write_file(dir / "truth.jsonl", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace herdtrack::synth
