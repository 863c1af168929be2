#include "herdtrack/tracker.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "herdtrack/error.hpp"

namespace herdtrack {

void check_model(const Forest& model) {
  if (model.trees().empty()) throw Error(ErrorCode::Contract, "model has no trees");
  bool has_negative = false, has_positive = false;
  for (const auto& tree : model.trees()) {
    const auto& root = tree.nodes().front();
    has_negative |= root.counts[0] > 0;
    has_positive |= root.counts[1] > 0;
  }
  if (!has_negative || !has_positive) throw Error(ErrorCode::Contract, "model was trained on a single class");
}

std::pair<TrackResult, TrackState> classify_frame(const TrackState& state, int frame_id, const GrayImage& frame,
                                                  const std::vector<Instance>& instances, const TrackerConfig& config) {
  if (!state.model) throw Error(ErrorCode::Contract, "tracker has no model");
  TrackResult result;
  result.frame_id = frame_id;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const auto fv = feature_vector(frame, inst, state.last_target_centroid,
                                   feature_seed(config.seed, frame_id, static_cast<int>(i)), config.sampler);
    result.instances.push_back({inst.bbox, inst.centroid, inst.area, inst.hull, state.model->predict(fv)});
  }

  const auto distance = [&](std::size_t i) {
    if (!state.last_target_centroid) return 0.0;
    const auto& c = result.instances[i].centroid;
    return std::hypot(c.x - state.last_target_centroid->x, c.y - state.last_target_centroid->y);
  };
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < result.instances.size(); ++i) {
    const auto& p = result.instances[i].prediction;
    if (p.label != 1) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = result.instances[*best].prediction;
    if (p.vote_fraction > b.vote_fraction || (p.vote_fraction == b.vote_fraction && distance(i) < distance(*best))) {
      best = i;
    }
  }

  TrackState next = state;
  if (best) {
    result.selected = static_cast<int>(*best);
    next.last_target_centroid = result.instances[*best].centroid;
    next.last_seen_frame = frame_id;
  }
  for (std::size_t i = 0; i < result.instances.size(); ++i) {
    if (result.instances[i].prediction.label == 1 && (!best || i != *best)) {
      result.extra_positives.push_back(static_cast<int>(i));
    }
  }
  return {std::move(result), std::move(next)};
}

std::pair<TrackResult, TrackState> track_frame(const TrackState& state, int frame_id, const GrayImage& frame,
                                               const Providers& providers, const TrackerConfig& config) {
  std::vector<Instance> instances;
  try {
    instances = segment_frame(frame_id, frame, providers, config.segmentation);
  } catch (const Error& e) {
    TrackResult skipped;
    skipped.frame_id = frame_id;
    skipped.skipped = true;
    skipped.error = e.what();
    return {std::move(skipped), state};
  }
  return classify_frame(state, frame_id, frame, instances, config);
}

TrackLog run(const FrameSequence& seq, TrackState initial, const Providers& providers, const TrackerConfig& config,
             const FrameSink& sink) {
  if (!initial.model) throw Error(ErrorCode::Contract, "tracker has no model");
  check_model(*initial.model);
  TrackLog log;
  TrackState state = std::move(initial);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    auto [result, next] = track_frame(state, seq.frame_ids[k], seq.frames[k], providers, config);
    if (sink) sink(result, seq.frames[k]);
    log.frames.push_back(std::move(result));
    state = std::move(next);
  }
  return log;
}

std::string track_log_to_jsonl(const TrackLog& log) {
  using nlohmann::ordered_json;
  std::string out;
  for (const auto& r : log.frames) {
    ordered_json j;
    j["frame"] = r.frame_id;
    ordered_json instances = ordered_json::array();
    for (std::size_t i = 0; i < r.instances.size(); ++i) {
      const auto& t = r.instances[i];
      ordered_json ji;
      ji["id"] = i;
      ji["bbox"] = {t.bbox.x_min, t.bbox.y_min, t.bbox.x_max, t.bbox.y_max};
      ji["centroid"] = {t.centroid.x, t.centroid.y};
      ji["area"] = t.area;
      ji["label"] = t.prediction.label;
      ji["vote"] = t.prediction.vote_fraction;
      instances.push_back(std::move(ji));
    }
    j["instances"] = std::move(instances);
    j["selected"] = r.selected ? ordered_json(*r.selected) : ordered_json(nullptr);
    j["extra_positives"] = r.extra_positives;
    if (r.skipped) {
      j["skipped"] = true;
      j["error"] = r.error;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

TrackLog track_log_from_jsonl(std::string_view text) {
  using nlohmann::json;
  TrackLog log;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = json::parse(line);
      TrackResult r;
      r.frame_id = j.at("frame").get<int>();
      for (const auto& ji : j.at("instances")) {
        TrackedInstance t;
        const auto& b = ji.at("bbox");
        t.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
        t.centroid = {ji.at("centroid").at(0).get<double>(), ji.at("centroid").at(1).get<double>()};
        t.area = ji.value("area", 0);
        t.prediction = {ji.at("label").get<int>(), ji.at("vote").get<double>()};
        r.instances.push_back(std::move(t));
      }
      if (!j.at("selected").is_null()) r.selected = j.at("selected").get<int>();
      if (j.contains("extra_positives")) r.extra_positives = j.at("extra_positives").get<std::vector<int>>();
      r.skipped = j.value("skipped", false);
      r.error = j.value("error", std::string());
      log.frames.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, "track log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

}  // namespace herdtrack
