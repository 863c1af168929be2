#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "herdtrack/ground_truth.hpp"
#include "herdtrack/imaging.hpp"
#include "herdtrack/pipeline.hpp"
#include "herdtrack/providers.hpp"
#include "herdtrack/segmentation.hpp"

namespace herdtrack::synth {

/// One animal: a textured, axis-aligned filled ellipse moving along a
/// polyline (back and forth) at constant speed.
struct ObjectSpec {
  double semi_x = 60.0;  ///< horizontal semi-axis, px
  double semi_y = 35.0;  ///< vertical semi-axis, px
  int intensity = 120;
  int texture = 12;      ///< +- amplitude of the fixed skin texture
  std::vector<PointD> waypoints;
  double speed = 3.0;    ///< px per frame
  double wobble = 0.0;   ///< relative axis-ratio oscillation amplitude
  double wobble_period = 40.0;  ///< frames
  bool light_patch = false;     ///< bright vertical band across the body
};

/// Vertical occluder over the full frame height (metal bar, trough).
struct OccluderBar {
  int x = 0;
  int width = 20;
  int intensity = 175;
};

struct ScenarioConfig {
  std::string name = "custom";
  int width = 1000;
  int height = 600;
  int n_frames = 60;
  int target = 0;            ///< index into `objects`
  int background = 70;
  int background_texture = 8;
  bool low_contrast = false; ///< background textured around the objects' intensities
  int sensor_noise = 3;
  std::vector<ObjectSpec> objects;
  std::vector<OccluderBar> bars;
  std::uint64_t seed = 1;
};

/// Three well separated, unoccluded animals.
ScenarioConfig easy_scenario(int n_frames = 120, std::uint64_t seed = 1);
/// Same animals with crossings, occluder bars, light patches, shape wobble and a low-contrast floor.
ScenarioConfig hard_scenario(int n_frames = 120, std::uint64_t seed = 1);

struct SyntheticSequence {
  ScenarioConfig config;
  FrameSequence frames;
  std::vector<SemanticMask> masks;
  std::vector<EdgeMap> edges;  ///< 1 on visible object boundaries
  std::vector<FrameGroundTruth> truth;
  std::vector<std::vector<std::int16_t>> owners;  ///< per-pixel visible object id, -1 = none
};

/// Object center and semi-axes at frame t.
struct ObjectPose {
  PointD center;
  double semi_x = 0.0;
  double semi_y = 0.0;
};
ObjectPose pose_at(const ObjectSpec& spec, int t);

/// Lattice pixels covered by the ellipse, ignoring the frame boundary.
long long ellipse_pixel_count(const ObjectPose& pose);

/// Throws Config on infeasible settings.
void validate(const ScenarioConfig& cfg);

SyntheticSequence generate(const ScenarioConfig& cfg);

/// Oracle providers serving the generated masks and edge maps from memory.
Providers oracle_providers(const SyntheticSequence& seq);

/// Writes `frames/NNNNNN.png`, `masks/<id>.mask.png`, `edges/<id>.<blob>.edge.png`
/// (blobs as extract_blobs numbers them under `seg`) and `truth.jsonl`.
void write_fixture(const SyntheticSequence& seq, const std::filesystem::path& dir, const SegmentationConfig& seg = {});

}  // namespace herdtrack::synth
