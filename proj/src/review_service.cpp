#include "herdtrack/review_service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>

#include "herdtrack/error.hpp"
#include "herdtrack/image_io.hpp"
#include "herdtrack/overlay.hpp"

namespace herdtrack::review {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

HttpResponse problem(int status, std::string_view title, const std::string& detail) {
  ordered_json j;
  j["status"] = status;
  j["title"] = title;
  j["detail"] = detail;
  return {status, "application/problem+json", j.dump()};
}

HttpResponse json_response(const ordered_json& j, int status = 200) { return {status, "application/json", j.dump()}; }

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::MissingArtifact:
    case ErrorCode::Selection:
    case ErrorCode::Flag: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::Format:
    case ErrorCode::Argument: return 400;
    case ErrorCode::Io: return 500;
    default: return 422;
  }
}

std::string_view title_for(int status) {
  switch (status) {
    case 400: return "Bad Request";
    case 404: return "Not Found";
    case 405: return "Method Not Allowed";
    case 409: return "Conflict";
    case 422: return "Unprocessable Entity";
    default: return "Internal Server Error";
  }
}

bool valid_id(std::string_view s) {
  if (s.empty() || s.size() > 64) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '-' || c == '_'; });
}

std::vector<std::string> split_path(std::string path) {
  if (const auto q = path.find('?'); q != std::string::npos) path.resize(q);
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

int parse_index(const std::string& s, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v < 0) {
    throw Error(ErrorCode::Argument, std::string("invalid ") + what + " '" + s + "'");
  }
  return v;
}

json parse_body(const std::string& body) {
  try {
    auto j = json::parse(body.empty() ? "{}" : body);
    if (!j.is_object()) throw Error(ErrorCode::Argument, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Argument, std::string("malformed JSON body: ") + e.what());
  }
}

ordered_json instance_json(std::size_t id, const Instance& inst) {
  ordered_json j;
  j["id"] = id;
  j["bbox"] = {inst.bbox.x_min, inst.bbox.y_min, inst.bbox.x_max, inst.bbox.y_max};
  j["centroid"] = {inst.centroid.x, inst.centroid.y};
  j["area"] = inst.area;
  ordered_json hull = ordered_json::array();
  for (const auto& p : inst.hull) hull.push_back({p.x, p.y});
  j["hull"] = std::move(hull);
  j["low_confidence"] = inst.low_confidence;
  return j;
}

}  // namespace

std::optional<Verdict> parse_verdict(std::string_view text) {
  if (text == "tp") return Verdict::TruePositive;
  if (text == "fp") return Verdict::FalsePositive;
  if (text == "tn") return Verdict::TrueNegative;
  if (text == "fn") return Verdict::FalseNegative;
  return std::nullopt;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::TruePositive: return "tp";
    case Verdict::FalsePositive: return "fp";
    case Verdict::TrueNegative: return "tn";
    case Verdict::FalseNegative: return "fn";
  }
  return "?";
}

std::vector<FrameTruth> truth_records(const ReviewSession& session) {
  std::map<int, FrameTruth> frames;
  for (const auto& [key, verdict] : session.truth) {
    auto& ft = frames[key.frame_id];
    ft.frame_id = key.frame_id;
    const bool target = verdict == Verdict::TruePositive || verdict == Verdict::FalseNegative;
    if (target) ft.target_present = true;
    if (key.instance_id >= 0) ft.labels[key.instance_id] = target ? 1 : 0;
  }
  std::vector<FrameTruth> out;
  for (auto& [frame, ft] : frames) out.push_back(std::move(ft));
  return out;
}

struct ReviewService::Sequence {
  std::string name;
  fs::path dir;
  std::vector<fs::path> frame_files;
  Providers providers;
  std::mutex mutex;
  std::map<int, std::vector<Instance>> instance_cache;
  std::optional<TrainingDataset> stored_dataset;
  std::optional<TrackLog> track_log;
};

struct ReviewService::SessionSlot {
  std::mutex mutex;
  ReviewSession state;
  int journal_fd = -1;
  std::optional<RowKey> dataset_target;
  std::optional<TrainingDataset> dataset;

  ~SessionSlot() {
    if (journal_fd >= 0) ::close(journal_fd);
  }
};

ReviewService::ReviewService(ReviewConfig config) : config_(std::move(config)) {
  if (!fs::is_directory(config_.state_dir)) {
    throw Error(ErrorCode::NotFound, "state directory not found: " + config_.state_dir.string());
  }
  fs::create_directories(config_.state_dir / "sessions");
  replay_journals();
}

ReviewService::~ReviewService() { stop(); }

std::optional<ReviewSession> ReviewService::session(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  std::lock_guard guard(it->second->mutex);
  return it->second->state;
}

ReviewService::Sequence& ReviewService::sequence(const std::string& name) {
  if (!valid_id(name)) throw Error(ErrorCode::NotFound, "no sequence '" + name + "'");
  std::lock_guard lock(sequences_mutex_);
  if (auto it = sequences_.find(name); it != sequences_.end()) return *it->second;
  const fs::path dir = config_.state_dir / "sequences" / name;
  if (!fs::is_directory(dir / "frames")) throw Error(ErrorCode::NotFound, "no sequence '" + name + "'");
  auto seq = std::make_unique<Sequence>();
  seq->name = name;
  seq->dir = dir;
  seq->frame_files = list_frame_files(dir / "frames");
  seq->providers.masks = std::make_shared<FileMaskProvider>(dir / "masks");
  if (fs::is_directory(dir / "edges")) {
    seq->providers.edges = std::make_shared<FileEdgeProvider>(dir / "edges");
  } else {
    seq->providers.edges = std::make_shared<GradientEdgeProvider>();
  }
  if (fs::exists(dir / "dataset.csv")) seq->stored_dataset = read_dataset(dir / "dataset.csv");
  if (fs::exists(dir / "track.jsonl")) {
    const auto bytes = io::read_file(dir / "track.jsonl");
    seq->track_log = track_log_from_jsonl(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  auto& ref = *seq;
  sequences_.emplace(name, std::move(seq));
  return ref;
}

const std::vector<Instance>& ReviewService::instances(Sequence& seq, int frame) {
  if (frame < 0 || frame >= static_cast<int>(seq.frame_files.size())) {
    throw Error(ErrorCode::NotFound, "sequence '" + seq.name + "' has no frame " + std::to_string(frame));
  }
  std::lock_guard lock(seq.mutex);
  if (auto it = seq.instance_cache.find(frame); it != seq.instance_cache.end()) return it->second;
  const auto gray = io::read_gray(seq.frame_files[static_cast<std::size_t>(frame)]);
  auto found = segment_frame(frame, gray, seq.providers, config_.segmentation);
  return seq.instance_cache.emplace(frame, std::move(found)).first->second;
}

const TrainingDataset& ReviewService::dataset_for(SessionSlot& slot) {
  auto& seq = sequence(slot.state.sequence);
  if (!slot.state.target) {
    if (!seq.stored_dataset) {
      throw Error(ErrorCode::Conflict, "sequence '" + seq.name + "' has no dataset and no target was picked");
    }
    return *seq.stored_dataset;
  }
  if (slot.dataset && slot.dataset_target == slot.state.target) return *slot.dataset;
  const auto frames = load_sequence(seq.dir / "frames", 1);
  auto seed = init_labels(frames.frame_ids.front(), instances(seq, frames.frame_ids.front()),
                          static_cast<std::size_t>(slot.state.target->instance_id));
  BootstrapConfig cfg{config_.segmentation, config_.sampler, config_.seed};
  slot.dataset = bootstrap_sequence(frames, seed, seq.providers, cfg).dataset;
  slot.dataset_target = slot.state.target;
  return *slot.dataset;
}

ReviewService::SessionSlot& ReviewService::slot(const std::string& id) {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
  return *it->second;
}

void ReviewService::journal(SessionSlot& slot, const ordered_json& entry) {
  if (slot.journal_fd < 0) {
    const auto path = config_.state_dir / "sessions" / (slot.state.id + ".journal.jsonl");
    slot.journal_fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (slot.journal_fd < 0) throw Error(ErrorCode::Io, "cannot open journal " + path.string());
  }
  const std::string line = entry.dump() + "\n";
  const auto written = ::write(slot.journal_fd, line.data(), line.size());
  if (written != static_cast<ssize_t>(line.size()) || ::fsync(slot.journal_fd) != 0) {
    throw Error(ErrorCode::Io, "journal write failed for session " + slot.state.id);
  }
}

namespace {

void apply_entry(ReviewSession& s, const json& entry) {
  const auto op = entry.at("op").get<std::string>();
  if (op == "target") {
    s.target = RowKey{entry.at("frame").get<int>(), entry.at("instance").get<int>()};
  } else if (op == "flags") {
    for (const auto& r : entry.at("rows")) s.flags.insert({r.at(0).get<int>(), r.at(1).get<int>()});
  } else if (op == "truth") {
    s.truth[{entry.at("frame").get<int>(), entry.at("instance").get<int>()}] =
        *parse_verdict(entry.at("verdict").get<std::string>());
  } else {
    throw Error(ErrorCode::Format, "unknown journal op '" + op + "'");
  }
  ++s.revision;
}

}  // namespace

void ReviewService::replay_journals() {
  for (const auto& entry : fs::directory_iterator(config_.state_dir / "sessions")) {
    const auto name = entry.path().filename().string();
    const std::string suffix = ".journal.jsonl";
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    std::ifstream in(entry.path());
    std::string line;
    auto slot = std::make_unique<SessionSlot>();
    bool created = false;
    while (std::getline(in, line)) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        break;  // torn trailing write: never acknowledged
      }
      if (!created) {
        if (j.value("op", "") != "create") break;
        slot->state.id = j.at("id").get<std::string>();
        slot->state.sequence = j.at("sequence").get<std::string>();
        created = true;
        continue;
      }
      apply_entry(slot->state, j);
    }
    if (created) sessions_.emplace(slot->state.id, std::move(slot));
  }
}

HttpResponse ReviewService::create_session(const std::string& body) {
  const auto req = parse_body(body);
  const auto seq_name = req.value("sequence", std::string());
  sequence(seq_name);  // must exist
  std::unique_lock lock(sessions_mutex_);
  std::string id = req.value("id", std::string());
  if (id.empty()) {
    for (std::size_t n = sessions_.size() + 1;; ++n) {
      id = "s" + std::to_string(n);
      if (!sessions_.count(id)) break;
    }
  }
  if (!valid_id(id)) throw Error(ErrorCode::Argument, "invalid session id '" + id + "'");
  if (sessions_.count(id)) throw Error(ErrorCode::Conflict, "session '" + id + "' already exists");
  auto slot = std::make_unique<SessionSlot>();
  slot->state.id = id;
  slot->state.sequence = seq_name;
  ordered_json entry;
  entry["op"] = "create";
  entry["id"] = id;
  entry["sequence"] = seq_name;
  journal(*slot, entry);
  sessions_.emplace(id, std::move(slot));
  ordered_json out;
  out["id"] = id;
  out["sequence"] = seq_name;
  out["revision"] = 0;
  return json_response(out, 201);
}

HttpResponse ReviewService::mutate(const std::string& id, const std::string& op, const std::string& body) {
  const auto req = parse_body(body);
  auto& s = slot(id);
  std::lock_guard guard(s.mutex);
  if (req.contains("revision") && req.at("revision").get<std::uint64_t>() != s.state.revision) {
    throw Error(ErrorCode::Conflict, "stale revision " + req.at("revision").dump() + ", session is at " +
                                         std::to_string(s.state.revision));
  }
  auto& seq = sequence(s.state.sequence);
  ordered_json entry;
  entry["op"] = op;

  if (op == "target") {
    const int frame = req.at("frame").get<int>();
    const int instance = req.at("instance").get<int>();
    if (frame != 0) throw Error(ErrorCode::Argument, "the target is picked in frame 0");
    const auto& inst = instances(seq, frame);
    if (instance < 0 || instance >= static_cast<int>(inst.size())) {
      throw Error(ErrorCode::Selection, "frame 0 has no instance " + std::to_string(instance));
    }
    entry["frame"] = frame;
    entry["instance"] = instance;
  } else if (op == "flags") {
    const auto& ds = dataset_for(s);
    std::set<RowKey> known;
    for (const auto& r : ds.rows) known.insert(r.key());
    ordered_json rows = ordered_json::array();
    std::string offenders;
    for (const auto& r : req.at("rows")) {
      RowKey key = r.is_array() ? RowKey{r.at(0).get<int>(), r.at(1).get<int>()}
                                : RowKey{r.at("frame").get<int>(), r.at("instance").get<int>()};
      if (!known.count(key)) {
        offenders += (offenders.empty() ? "" : ", ") + std::string("(") + std::to_string(key.frame_id) + "," +
                     std::to_string(key.instance_id) + ")";
      }
      rows.push_back({key.frame_id, key.instance_id});
    }
    if (!offenders.empty()) throw Error(ErrorCode::Flag, "unknown rows: " + offenders);
    entry["rows"] = std::move(rows);
  } else if (op == "truth") {
    const int frame = req.at("frame").get<int>();
    const int instance = req.at("instance").is_null() ? -1 : req.at("instance").get<int>();
    const auto verdict_text = req.at("verdict").get<std::string>();
    const auto verdict = parse_verdict(verdict_text);
    if (!verdict) throw Error(ErrorCode::Argument, "verdict must be one of tp, fp, tn, fn");
    if (instance < 0 && *verdict != Verdict::FalseNegative) {
      throw Error(ErrorCode::Argument, "only a missed target (fn) may omit the instance");
    }
    int count = 0;
    if (seq.track_log) {
      const auto it = std::find_if(seq.track_log->frames.begin(), seq.track_log->frames.end(),
                                   [&](const TrackResult& r) { return r.frame_id == frame; });
      if (it == seq.track_log->frames.end()) throw Error(ErrorCode::NotFound, "no tracked frame " + std::to_string(frame));
      count = static_cast<int>(it->instances.size());
    } else {
      count = static_cast<int>(instances(seq, frame).size());
    }
    if (instance >= count) {
      throw Error(ErrorCode::NotFound, "frame " + std::to_string(frame) + " has no instance " + std::to_string(instance));
    }
    entry["frame"] = frame;
    entry["instance"] = instance;
    entry["verdict"] = verdict_text;
  } else {
    return problem(404, "Not Found", "unknown session operation '" + op + "'");
  }

  journal(s, entry);
  apply_entry(s.state, json::parse(entry.dump()));
  ordered_json out;
  out["id"] = s.state.id;
  out["revision"] = s.state.revision;
  return json_response(out);
}

HttpResponse ReviewService::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    return dispatch(method, split_path(path), body);
  } catch (const Error& e) {
    const int status = status_for(e.code());
    return problem(status, title_for(status), e.what());
  } catch (const json::exception& e) {
    return problem(400, "Bad Request", std::string("invalid request field: ") + e.what());
  } catch (const std::exception& e) {
    return problem(500, "Internal Server Error", e.what());
  }
}

HttpResponse ReviewService::dispatch(const std::string& method, const std::vector<std::string>& p,
                                     const std::string& body) {
  const bool get = method == "GET";
  const bool post = method == "POST";
  if (p.size() == 1 && p[0] == "sequences" && get) {
    ordered_json names = ordered_json::array();
    const auto dir = config_.state_dir / "sequences";
    std::vector<std::string> found;
    if (fs::is_directory(dir)) {
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory() && valid_id(e.path().filename().string())) found.push_back(e.path().filename().string());
      }
    }
    std::sort(found.begin(), found.end());
    for (auto& n : found) names.push_back(n);
    return json_response(names);
  }
  if (p.size() == 2 && p[0] == "sequences" && get) {
    auto& seq = sequence(p[1]);
    ordered_json j;
    j["name"] = seq.name;
    j["frames"] = seq.frame_files.size();
    j["has_dataset"] = seq.stored_dataset.has_value();
    j["has_track_log"] = seq.track_log.has_value();
    return json_response(j);
  }
  if (p.size() == 5 && p[0] == "sequences" && p[2] == "frames" && get) {
    auto& seq = sequence(p[1]);
    const int frame = parse_index(p[3], "frame");
    const auto& inst = instances(seq, frame);
    if (p[4] == "instances") {
      ordered_json arr = ordered_json::array();
      for (std::size_t i = 0; i < inst.size(); ++i) arr.push_back(instance_json(i, inst[i]));
      return json_response(arr);
    }
    if (p[4] == "image" || p[4] == "image.png") {
      const auto gray = io::read_gray(seq.frame_files[static_cast<std::size_t>(frame)]);
      Raster img;
      const TrackResult* tracked = nullptr;
      if (seq.track_log) {
        for (const auto& r : seq.track_log->frames) {
          if (r.frame_id == frame) tracked = &r;
        }
      }
      img = tracked ? overlay::render_track(gray, *tracked) : overlay::render_instances(gray, inst);
      const auto png = io::encode_png(img);
      return {200, "image/png", std::string(png.begin(), png.end())};
    }
  }
  if (p.size() == 1 && p[0] == "sessions" && post) return create_session(body);
  if (p.size() == 2 && p[0] == "sessions" && get) {
    const auto s = session(p[1]);
    if (!s) throw Error(ErrorCode::NotFound, "no session '" + p[1] + "'");
    ordered_json j;
    j["id"] = s->id;
    j["sequence"] = s->sequence;
    j["revision"] = s->revision;
    j["target"] = s->target ? ordered_json{{"frame", s->target->frame_id}, {"instance", s->target->instance_id}}
                            : ordered_json(nullptr);
    ordered_json flags = ordered_json::array();
    for (const auto& f : s->flags) flags.push_back({f.frame_id, f.instance_id});
    j["flags"] = std::move(flags);
    ordered_json truth = ordered_json::array();
    for (const auto& [k, v] : s->truth) {
      truth.push_back({{"frame", k.frame_id},
                       {"instance", k.instance_id < 0 ? ordered_json(nullptr) : ordered_json(k.instance_id)},
                       {"verdict", to_string(v)}});
    }
    j["truth"] = std::move(truth);
    return json_response(j);
  }
  if (p.size() == 3 && p[0] == "sessions" && post) return mutate(p[1], p[2], body);
  if (p.size() == 4 && p[0] == "sessions" && p[2] == "export" && get) {
    auto& s = slot(p[1]);
    std::lock_guard guard(s.mutex);
    if (p[3] == "dataset.csv") {
      return {200, "text/csv", dataset_to_csv(cleanse(dataset_for(s), s.state.flags))};
    }
    if (p[3] == "truth.jsonl") return {200, "application/x-ndjson", frame_truth_to_jsonl(truth_records(s.state))};
  }
  if (!get && !post) return problem(405, "Method Not Allowed", method + " is not supported");
  std::string joined;
  for (const auto& part : p) joined += "/" + part;
  return problem(404, "Not Found", "no route for " + method + " " + (joined.empty() ? "/" : joined));
}

int ReviewService::start(const std::string& host, int port) {
  stop();
  server_ = std::make_unique<httplib::Server>();
  // httplib's default also sets SO_REUSEPORT, which would let a second
  // service share the port instead of failing to start.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const auto out = handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server_->Get(".*", forward);
  server_->Post(".*", forward);
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    server_.reset();
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port) + " (port busy?)");
  }
  server_thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void ReviewService::listen(const std::string& host, int port) {
  start(host, port);
  server_thread_->join();
  server_thread_.reset();
}

void ReviewService::stop() {
  if (server_) server_->stop();
  if (server_thread_ && server_thread_->joinable()) server_thread_->join();
  server_thread_.reset();
  server_.reset();
}

}  // namespace herdtrack::review
