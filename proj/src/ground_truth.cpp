#include "herdtrack/ground_truth.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "herdtrack/error.hpp"

namespace herdtrack {

const ObjectTruth* FrameGroundTruth::object(int id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

int owning_object(const FrameGroundTruth& truth, const PointD& point) {
  int owner = -1;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : truth.objects) {
    if (!o.bbox || !o.centroid || !o.bbox->contains(point.x, point.y)) continue;
    const double d = std::hypot(point.x - o.centroid->x, point.y - o.centroid->y);
    if (d < best) {
      best = d;
      owner = o.id;
    }
  }
  return owner;
}

std::string ground_truth_to_jsonl(const std::vector<FrameGroundTruth>& frames) {
  using nlohmann::ordered_json;
  std::string out;
  for (const auto& f : frames) {
    ordered_json j;
    j["frame"] = f.frame_id;
    j["target"] = f.target_id;
    ordered_json objects = ordered_json::array();
    for (const auto& o : f.objects) {
      ordered_json jo;
      jo["id"] = o.id;
      jo["visible_pixels"] = o.visible_pixels;
      jo["visible_fraction"] = o.visible_fraction;
      jo["bbox"] = o.bbox ? ordered_json({o.bbox->x_min, o.bbox->y_min, o.bbox->x_max, o.bbox->y_max})
                          : ordered_json(nullptr);
      jo["centroid"] = o.centroid ? ordered_json({o.centroid->x, o.centroid->y}) : ordered_json(nullptr);
      objects.push_back(std::move(jo));
    }
    j["objects"] = std::move(objects);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<FrameGroundTruth> ground_truth_from_jsonl(std::string_view text) {
  using nlohmann::json;
  std::vector<FrameGroundTruth> frames;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = json::parse(line);
      FrameGroundTruth f;
      f.frame_id = j.at("frame").get<int>();
      f.target_id = j.at("target").get<int>();
      for (const auto& jo : j.at("objects")) {
        ObjectTruth o;
        o.id = jo.at("id").get<int>();
        o.visible_pixels = jo.at("visible_pixels").get<int>();
        o.visible_fraction = jo.at("visible_fraction").get<double>();
        if (!jo.at("bbox").is_null()) {
          const auto& b = jo.at("bbox");
          o.bbox = BBox{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
        }
        if (!jo.at("centroid").is_null()) {
          o.centroid = PointD{jo.at("centroid").at(0).get<double>(), jo.at("centroid").at(1).get<double>()};
        }
        f.objects.push_back(std::move(o));
      }
      frames.push_back(std::move(f));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, "ground truth line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return frames;
}

}  // namespace herdtrack
