#include "herdtrack/bootstrap.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "herdtrack/error.hpp"
#include "herdtrack/image_io.hpp"

namespace herdtrack {

int LabelledFrame::target_index() const noexcept {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) return static_cast<int>(i);
  }
  return -1;
}

LabelledFrame init_labels(int frame_id, std::vector<Instance> instances, std::size_t target) {
  if (target >= instances.size()) {
    throw Error(ErrorCode::Selection, "target index " + std::to_string(target) + " out of range for " +
                                          std::to_string(instances.size()) + " instances");
  }
  LabelledFrame frame{frame_id, std::move(instances), {}};
  frame.labels.assign(frame.instances.size(), 0);
  frame.labels[target] = 1;
  return frame;
}

std::vector<int> propagate_labels(std::span<const PointD> previous, std::span<const int> previous_labels,
                                  std::span<const PointD> current) {
  if (previous.empty()) throw Error(ErrorCode::Propagation, "no labelled instances to propagate from");
  if (previous.size() != previous_labels.size()) throw Error(ErrorCode::Argument, "labels misaligned with instances");

  std::vector<int> labels(current.size(), 0);
  std::vector<double> nearest(current.size(), 0.0);
  for (std::size_t i = 0; i < current.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < previous.size(); ++j) {
      const double d = std::hypot(current[i].x - previous[j].x, current[i].y - previous[j].y);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    labels[i] = previous_labels[best_j];
    nearest[i] = best;
  }

  int keeper = -1;
  for (std::size_t i = 0; i < current.size(); ++i) {
    if (labels[i] != 1) continue;
    if (keeper < 0 || nearest[i] < nearest[static_cast<std::size_t>(keeper)]) keeper = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < current.size(); ++i) {
    if (labels[i] == 1 && static_cast<int>(i) != keeper) labels[i] = 0;
  }
  return labels;
}

LabelledFrame propagate(const LabelledFrame& prev, int frame_id, std::vector<Instance> current) {
  if (prev.instances.empty()) {
    throw Error(ErrorCode::Propagation, "frame " + std::to_string(prev.frame_id) + " has no labelled instances");
  }
  std::vector<PointD> prev_centroids, cur_centroids;
  for (const auto& inst : prev.instances) prev_centroids.push_back(inst.centroid);
  for (const auto& inst : current) cur_centroids.push_back(inst.centroid);
  LabelledFrame out{frame_id, std::move(current), {}};
  out.labels = propagate_labels(prev_centroids, prev.labels, cur_centroids);
  return out;
}

namespace {

void append_rows(TrainingDataset& ds, const GrayImage& gray, const LabelledFrame& frame,
                 const std::optional<PointD>& prev_target, const BootstrapConfig& config) {
  for (std::size_t i = 0; i < frame.instances.size(); ++i) {
    DatasetRow row;
    row.frame_id = frame.frame_id;
    row.instance_id = static_cast<int>(i);
    row.features = feature_vector(gray, frame.instances[i], prev_target,
                                  feature_seed(config.seed, frame.frame_id, static_cast<int>(i)), config.sampler);
    row.label = frame.labels[i];
    ds.rows.push_back(std::move(row));
  }
}

}  // namespace

BootstrapResult bootstrap_sequence(const FrameSequence& seq, const LabelledFrame& seed_frame,
                                   const Providers& providers, const BootstrapConfig& config) {
  if (seq.empty()) throw Error(ErrorCode::Argument, "empty frame sequence");
  if (seed_frame.frame_id != seq.frame_ids.front()) {
    throw Error(ErrorCode::Argument, "seed frame " + std::to_string(seed_frame.frame_id) +
                                         " is not the first frame of the sequence");
  }
  if (seed_frame.labels.size() != seed_frame.instances.size()) {
    throw Error(ErrorCode::Argument, "seed frame labels misaligned with instances");
  }

  BootstrapResult result;
  append_rows(result.dataset, seq.frames.front(), seed_frame, std::nullopt, config);
  result.frames.push_back(seed_frame);

  const LabelledFrame* last = &result.frames.back();
  std::optional<PointD> target_centroid;
  if (const int t = seed_frame.target_index(); t >= 0) target_centroid = seed_frame.instances[t].centroid;

  for (std::size_t k = 1; k < seq.size(); ++k) {
    const int frame_id = seq.frame_ids[k];
    std::vector<Instance> instances;
    try {
      instances = segment_frame(frame_id, seq.frames[k], providers, config.segmentation);
    } catch (const Error& e) {
      result.warnings.push_back("frame " + std::to_string(frame_id) + " skipped: " + e.what());
      continue;
    }
    if (instances.empty()) {
      result.warnings.push_back("frame " + std::to_string(frame_id) + " skipped: no instances");
      continue;
    }
    LabelledFrame labelled;
    try {
      labelled = propagate(*last, frame_id, std::move(instances));
    } catch (const Error& e) {
      throw Error(ErrorCode::Propagation, "frame " + std::to_string(frame_id) + ": " + e.what());
    }
    append_rows(result.dataset, seq.frames[k], labelled, target_centroid, config);
    if (const int t = labelled.target_index(); t >= 0) target_centroid = labelled.instances[t].centroid;
    result.frames.push_back(std::move(labelled));
    last = &result.frames.back();
  }
  return result;
}

TrainingDataset build_dataset(const FrameSequence& seq, const LabelledFrame& seed_frame, const Providers& providers,
                              const BootstrapConfig& config) {
  return bootstrap_sequence(seq, seed_frame, providers, config).dataset;
}

std::vector<DatasetRow> TrainingDataset::exported() const {
  std::vector<DatasetRow> out;
  for (const auto& r : rows) {
    if (!r.flagged) out.push_back(r);
  }
  return out;
}

TrainingDataset cleanse(const TrainingDataset& ds, const std::set<RowKey>& flags) {
  std::set<RowKey> unknown = flags;
  TrainingDataset out = ds;
  for (auto& row : out.rows) {
    if (flags.count(row.key())) {
      row.flagged = true;
      unknown.erase(row.key());
    }
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) {
      if (!list.empty()) list += ", ";
      list += "(" + std::to_string(k.frame_id) + "," + std::to_string(k.instance_id) + ")";
    }
    throw Error(ErrorCode::Flag, "unknown rows: " + list);
  }
  return out;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  if (v == 0.0) v = 0.0;  // no "-0"
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  out.append(buf, ptr);
}

}  // namespace

std::string dataset_to_csv(const TrainingDataset& ds) {
  std::string out(kDatasetHeader);
  out += '\n';
  for (const auto& row : ds.rows) {
    if (row.flagged) continue;
    out += std::to_string(row.frame_id);
    out += ',';
    out += std::to_string(row.instance_id);
    for (double v : row.features.to_array()) {
      out += ',';
      append_number(out, v);
    }
    out += ',';
    out += std::to_string(row.label);
    out += '\n';
  }
  return out;
}

TrainingDataset dataset_from_csv(std::string_view text) {
  TrainingDataset ds;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kDatasetHeader) throw Error(ErrorCode::Format, "line 1: unexpected dataset header");
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const auto fail = [&](const std::string& why) {
      return Error(ErrorCode::Format, "line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 12) throw fail("expected 12 fields, got " + std::to_string(fields.size()));
    const auto parse_int = [&](std::string_view f) {
      int v = 0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size()) throw fail("bad integer '" + std::string(f) + "'");
      return v;
    };
    DatasetRow row;
    row.frame_id = parse_int(fields[0]);
    row.instance_id = parse_int(fields[1]);
    FeatureArray values{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto f = fields[2 + i];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), values[i]);
      if (ec != std::errc{} || p != f.data() + f.size() || !std::isfinite(values[i])) {
        throw fail("bad number '" + std::string(f) + "' in column " + std::string(kFeatureOrder[i]));
      }
    }
    row.features = FeatureVector::from_array(values);
    row.label = parse_int(fields[11]);
    if (row.label != 0 && row.label != 1) throw fail("label must be 0 or 1");
    if (!ds.rows.empty() && !(ds.rows.back().key() < row.key())) throw fail("rows out of (frame_id, instance_id) order");
    ds.rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error(ErrorCode::Format, "empty dataset file");
  return ds;
}

void write_dataset(const std::filesystem::path& path, const TrainingDataset& ds) {
  const auto text = dataset_to_csv(ds);
  io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

TrainingDataset read_dataset(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return dataset_from_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace herdtrack

namespace herdtrack {

std::size_t select_by_bbox(std::span<const Instance> instances, const BBox& box) {
  long long best = 0;
  std::size_t index = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto overlap = overlap_area(instances[i].bbox, box);
    if (overlap > best) {
      best = overlap;
      index = i;
    }
  }
  if (best == 0) throw Error(ErrorCode::Selection, "target box overlaps no instance");
  return index;
}

}  // namespace herdtrack
