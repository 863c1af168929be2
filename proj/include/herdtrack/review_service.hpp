#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "herdtrack/bootstrap.hpp"
#include "herdtrack/evaluation.hpp"
#include "herdtrack/pipeline.hpp"

#include <json.hpp>

namespace httplib {
class Server;
}

namespace herdtrack::review {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

enum class Verdict { TruePositive, FalsePositive, TrueNegative, FalseNegative };

std::optional<Verdict> parse_verdict(std::string_view text);
std::string_view to_string(Verdict v);

/// Reviewer state for one sequence. Mutations are journaled before they are
/// applied; `revision` counts applied mutations.
struct ReviewSession {
  std::string id;
  std::string sequence;
  std::uint64_t revision = 0;
  std::optional<RowKey> target;  ///< (frame, instance) picked in the first frame
  std::set<RowKey> flags;
  /// (frame, instance) -> verdict; instance -1 marks a target that was not segmented.
  std::map<RowKey, Verdict> truth;
};

/// Truth marks in the evaluation module's per-frame format, one record per marked frame.
std::vector<FrameTruth> truth_records(const ReviewSession& session);

struct ReviewConfig {
  std::filesystem::path state_dir;
  SegmentationConfig segmentation;
  SamplerConfig sampler;
  std::uint64_t seed = 0;
};

/// HTTP backend for target picking, dataset cleansing and TP/FP marking.
///
/// State directory layout:
///   sequences/<name>/frames/      frame images (lexicographic order = frame id)
///   sequences/<name>/masks/       <id>.mask.png
///   sequences/<name>/edges/       <id>.<blob>.edge.png (optional; gradient fallback)
///   sequences/<name>/dataset.csv  bootstrap output (optional)
///   sequences/<name>/track.jsonl  tracker log (optional)
///   sessions/<id>.journal.jsonl   append-only mutation journal
class ReviewService {
 public:
  explicit ReviewService(ReviewConfig config);
  ~ReviewService();

  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  /// Socket-free request dispatch; every HTTP route goes through here.
  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body = {});

  /// Bind and serve on a background thread. Port 0 picks a free port; the
  /// bound port is returned. Throws Io when the port is busy.
  int start(const std::string& host, int port);
  /// Serve on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

  std::optional<ReviewSession> session(const std::string& id) const;

 private:
  struct Sequence;
  struct SessionSlot;

  HttpResponse dispatch(const std::string& method, const std::vector<std::string>& parts, const std::string& body);
  Sequence& sequence(const std::string& name);
  const std::vector<Instance>& instances(Sequence& seq, int frame);
  const TrainingDataset& dataset_for(SessionSlot& slot);
  SessionSlot& slot(const std::string& id);
  void journal(SessionSlot& slot, const nlohmann::ordered_json& entry);
  void replay_journals();

  HttpResponse create_session(const std::string& body);
  HttpResponse mutate(const std::string& id, const std::string& op, const std::string& body);

  ReviewConfig config_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<SessionSlot>> sessions_;
  std::mutex sequences_mutex_;
  std::map<std::string, std::unique_ptr<Sequence>> sequences_;
  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<std::thread> server_thread_;
};

}  // namespace herdtrack::review
