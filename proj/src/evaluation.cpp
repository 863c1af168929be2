#include "herdtrack/evaluation.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "herdtrack/error.hpp"

namespace herdtrack {

ConfusionCounts confusion(std::span<const FramePrediction> predictions, std::span<const FrameTruth> truth) {
  std::map<int, const FramePrediction*> by_frame;
  std::vector<std::string> offenders;
  for (const auto& p : predictions) {
    if (!by_frame.emplace(p.frame_id, &p).second) offenders.push_back("duplicate prediction frame " + std::to_string(p.frame_id));
  }
  std::map<int, const FrameTruth*> truth_by_frame;
  for (const auto& t : truth) {
    if (!truth_by_frame.emplace(t.frame_id, &t).second) offenders.push_back("duplicate truth frame " + std::to_string(t.frame_id));
  }
  for (const auto& [frame, p] : by_frame) {
    if (!truth_by_frame.count(frame)) offenders.push_back("frame " + std::to_string(frame) + " has no truth");
  }
  for (const auto& [frame, t] : truth_by_frame) {
    const auto it = by_frame.find(frame);
    if (it == by_frame.end()) {
      offenders.push_back("frame " + std::to_string(frame) + " has no predictions");
      continue;
    }
    for (const auto& [id, label] : it->second->labels) {
      if (!t->labels.count(id)) offenders.push_back("(" + std::to_string(frame) + "," + std::to_string(id) + ") has no truth");
    }
    for (const auto& [id, label] : t->labels) {
      if (!it->second->labels.count(id)) {
        offenders.push_back("(" + std::to_string(frame) + "," + std::to_string(id) + ") has no prediction");
      }
    }
  }
  if (!offenders.empty()) {
    std::string msg;
    for (const auto& o : offenders) msg += (msg.empty() ? "" : "; ") + o;
    throw Error(ErrorCode::Alignment, msg);
  }

  ConfusionCounts c;
  for (const auto& [frame, t] : truth_by_frame) {
    const auto& pred = by_frame.at(frame)->labels;
    bool target_segmented = false;
    for (const auto& [id, label] : t->labels) {
      const int p = pred.at(id);
      if (label == 1) {
        target_segmented = true;
        (p == 1 ? c.tp : c.fn) += 1;
      } else {
        (p == 1 ? c.fp : c.tn) += 1;
      }
    }
    if (t->target_present && !target_segmented) c.fn += 1;
  }
  return c;
}

PrecisionRecall precision_recall(const ConfusionCounts& c) {
  PrecisionRecall pr;
  if (c.tp + c.fp > 0) pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return pr;
}

std::vector<FramePrediction> predictions_from_log(const TrackLog& log) {
  std::vector<FramePrediction> out;
  for (const auto& r : log.frames) {
    FramePrediction p{r.frame_id, {}};
    for (std::size_t i = 0; i < r.instances.size(); ++i) p.labels[static_cast<int>(i)] = r.instances[i].prediction.label;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<FrameTruth> truth_from_ground_truth(const TrackLog& log, std::span<const FrameGroundTruth> truth,
                                                int min_visible_pixels) {
  std::map<int, const FrameGroundTruth*> gt;
  for (const auto& f : truth) gt[f.frame_id] = &f;
  std::vector<FrameTruth> out;
  std::string missing;
  for (const auto& r : log.frames) {
    const auto it = gt.find(r.frame_id);
    if (it == gt.end()) {
      missing += (missing.empty() ? "" : ", ") + std::to_string(r.frame_id);
      continue;
    }
    const auto& g = *it->second;
    FrameTruth ft{r.frame_id, false, {}};
    if (const auto* target = g.object(g.target_id)) ft.target_present = target->visible_pixels >= min_visible_pixels;
    for (std::size_t i = 0; i < r.instances.size(); ++i) {
      ft.labels[static_cast<int>(i)] = owning_object(g, r.instances[i].centroid) == g.target_id ? 1 : 0;
    }
    out.push_back(std::move(ft));
  }
  if (!missing.empty()) throw Error(ErrorCode::Alignment, "no ground truth for frames " + missing);
  return out;
}

std::string frame_truth_to_jsonl(std::span<const FrameTruth> truth) {
  using nlohmann::ordered_json;
  std::string out;
  for (const auto& t : truth) {
    ordered_json j;
    j["frame"] = t.frame_id;
    j["target_present"] = t.target_present;
    ordered_json instances = ordered_json::array();
    for (const auto& [id, label] : t.labels) instances.push_back(ordered_json{{"instance", id}, {"label", label}});
    j["instances"] = std::move(instances);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<FrameTruth> frame_truth_from_jsonl(std::string_view text) {
  using nlohmann::json;
  std::vector<FrameTruth> out;
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
      FrameTruth t;
      t.frame_id = j.at("frame").get<int>();
      t.target_present = j.at("target_present").get<bool>();
      for (const auto& ji : j.at("instances")) t.labels[ji.at("instance").get<int>()] = ji.at("label").get<int>();
      out.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, "truth line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string format_percent(const std::optional<double>& ratio) {
  if (!ratio) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", *ratio * 100.0);
  return buf;
}

std::string report_csv(const ConfusionCounts& c) {
  const auto pr = precision_recall(c);
  const auto ratio = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "tp,fp,tn,fn,precision,recall\n"
      << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn << ',' << ratio(pr.precision) << ',' << ratio(pr.recall)
      << '\n';
  return out.str();
}

std::string report_table(std::span<const ReportRow> rows) {
  std::size_t video_w = 5;
  for (const auto& r : rows) video_w = std::max(video_w, r.video.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(video_w)) << "Video" << std::right << " | " << std::setw(6) << "TP"
      << " | " << std::setw(6) << "FP" << " | " << std::setw(6) << "TN" << " | " << std::setw(6) << "FN" << " | "
      << std::setw(6) << "P" << " | " << std::setw(6) << "R" << " | Challenges\n";
  for (const auto& r : rows) {
    const auto pr = precision_recall(r.counts);
    out << std::left << std::setw(static_cast<int>(video_w)) << r.video << std::right << " | " << std::setw(6)
        << r.counts.tp << " | " << std::setw(6) << r.counts.fp << " | " << std::setw(6) << r.counts.tn << " | "
        << std::setw(6) << r.counts.fn << " | " << std::setw(6) << format_percent(pr.precision) << " | "
        << std::setw(6) << format_percent(pr.recall) << " | " << r.challenges << '\n';
  }
  return out.str();
}

}  // namespace herdtrack
