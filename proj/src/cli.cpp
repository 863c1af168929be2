#include "herdtrack/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <csignal>
#include <cstdio>
#include <fstream>

#include "herdtrack/bootstrap.hpp"
#include "herdtrack/error.hpp"
#include "herdtrack/evaluation.hpp"
#include "herdtrack/forest.hpp"
#include "herdtrack/image_io.hpp"
#include "herdtrack/manifest.hpp"
#include "herdtrack/overlay.hpp"
#include "herdtrack/review_service.hpp"
#include "herdtrack/synth.hpp"
#include "herdtrack/tracker.hpp"

namespace herdtrack::cli {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 7;
  int threads = 1;
  int min_area = kDefaultMinArea;
  int stride = 10;
  std::string out;
};

struct SynthOptions {
  std::string scenario = "easy";
  int count = 120;
  int width = 1000;
  int height = 600;
};

struct SequenceOptions {
  std::string frames;
  std::string masks;
  std::string edges;
  std::string range;
  std::string target_bbox;
};

struct TrainOptions {
  std::string dataset;
  int trees = 300;
  int max_depth = -1;
  int min_leaf = 1;
  double negative_keep = 0.5;
  long long train_count = -1;
};

struct TrackOptions {
  std::string model;
  bool overlays = false;
};

struct EvalOptions {
  std::string log;
  std::string truth;
  std::string name = "run";
  std::string challenges;
};

struct ServeOptions {
  std::string state;
  std::string host = "127.0.0.1";
  int port = 8080;
};

void write_text(const fs::path& path, const std::string& text) {
  io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const fs::path& path) {
  const auto bytes = io::read_file(path);
  return {bytes.begin(), bytes.end()};
}

BBox parse_bbox(const std::string& text) {
  std::vector<int> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    int x = 0;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
    if (ec != std::errc{} || p != part.data() + part.size()) break;
    v.push_back(x);
  }
  if (v.size() != 4 || v[2] < 1 || v[3] < 1) throw Error(ErrorCode::Argument, "--target-bbox expects x,y,w,h");
  return {v[0], v[1], v[0] + v[2] - 1, v[1] + v[3] - 1};
}

std::pair<int, int> parse_range(const std::string& text) {
  if (text.empty()) return {0, -1};
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::Argument, "--range expects BEGIN:END");
  const auto num = [&](std::string_view s, int fallback) {
    if (s.empty()) return fallback;
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v < 0) throw Error(ErrorCode::Argument, "bad --range bound");
    return v;
  };
  return {num(std::string_view(text).substr(0, colon), 0), num(std::string_view(text).substr(colon + 1), -1)};
}

Providers make_providers(const SequenceOptions& o) {
  Providers p;
  p.masks = std::make_shared<FileMaskProvider>(o.masks);
  if (o.edges.empty()) {
    p.edges = std::make_shared<GradientEdgeProvider>();
  } else {
    p.edges = std::make_shared<FileEdgeProvider>(o.edges);
  }
  return p;
}

SegmentationConfig segmentation_config(const GlobalOptions& g) {
  return {g.min_area, g.min_area, kCropPadding};
}

fs::path out_dir(const GlobalOptions& g) {
  if (g.out.empty()) throw Error(ErrorCode::Argument, "--out is required");
  fs::create_directories(g.out);
  return g.out;
}

RunManifest start_manifest(const std::string& command, const std::vector<std::string>& args, const GlobalOptions& g) {
  RunManifest m;
  m.command = command;
  m.argv = args;
  m.started_at = utc_timestamp();
  m.seeds["global"] = g.seed;
  m.config["seed"] = g.seed;
  m.config["threads"] = g.threads;
  m.config["min_area"] = g.min_area;
  m.config["stride"] = g.stride;
  m.config["out"] = g.out;
  return m;
}

void finish_manifest(const fs::path& dir, RunManifest m) {
  m.finished_at = utc_timestamp();
  write_manifest(dir, m);
}

int cmd_synth(const GlobalOptions& g, const SynthOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto dir = out_dir(g);
  auto m = start_manifest("synth", args, g);
  synth::ScenarioConfig cfg;
  if (o.scenario == "easy") {
    cfg = synth::easy_scenario(o.count, g.seed);
  } else if (o.scenario == "hard") {
    cfg = synth::hard_scenario(o.count, g.seed);
  } else {
    throw Error(ErrorCode::Argument, "unknown scenario '" + o.scenario + "' (easy|hard)");
  }
  cfg.width = o.width;
  cfg.height = o.height;
  const auto seq = synth::generate(cfg);
  synth::write_fixture(seq, dir, segmentation_config(g));
  m.config["scenario"] = o.scenario;
  m.config["count"] = o.count;
  m.config["width"] = o.width;
  m.config["height"] = o.height;
  finish_manifest(dir, m);
  out << "wrote " << seq.frames.size() << " frames (" << cfg.width << "x" << cfg.height << ") to " << dir.string()
      << "\n";
  return kOk;
}

void record_sequence(RunManifest& m, const SequenceOptions& o) {
  m.inputs["frames"] = o.frames;
  m.inputs["masks"] = o.masks;
  if (!o.edges.empty()) m.inputs["edges"] = o.edges;
  m.config["range"] = o.range;
  m.config["target_bbox"] = o.target_bbox;
  m.config["edge_source"] = o.edges.empty() ? "gradient" : "file";
}

int cmd_bootstrap(const GlobalOptions& g, const SequenceOptions& o, const std::vector<std::string>& args,
                  std::ostream& out) {
  const auto providers = make_providers(o);
  const auto [first, last] = parse_range(o.range);
  const auto seq = load_sequence(o.frames, g.stride, first, last);
  const auto seg = segmentation_config(g);
  const auto dir = out_dir(g);
  auto m = start_manifest("bootstrap", args, g);
  record_sequence(m, o);

  auto first_instances = segment_frame(seq.frame_ids.front(), seq.frames.front(), providers, seg);
  if (o.target_bbox.empty()) {
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < first_instances.size(); ++i) {
      const auto& b = first_instances[i].bbox;
      arr.push_back({{"id", i}, {"bbox", {b.x_min, b.y_min, b.x_max, b.y_max}}});
    }
    write_text(dir / "frame0_instances.json", arr.dump(2) + "\n");
    io::write_png(dir / (std::to_string(seq.frame_ids.front()) + ".overlay.png"),
                  overlay::render_instances(seq.frames.front(), first_instances));
    finish_manifest(dir, m);
    out << "no --target-bbox: wrote " << first_instances.size()
        << " first-frame instances; pick the target with --target-bbox or in the review UI\n";
    return kOk;
  }
  const auto target = select_by_bbox(first_instances, parse_bbox(o.target_bbox));
  auto seed_frame = init_labels(seq.frame_ids.front(), std::move(first_instances), target);
  const auto result = bootstrap_sequence(seq, seed_frame, providers, {seg, {}, g.seed});
  write_dataset(dir / "dataset.csv", result.dataset);
  for (const auto& w : result.warnings) out << "warning: " << w << "\n";
  std::size_t positives = 0;
  for (const auto& r : result.dataset.rows) positives += static_cast<std::size_t>(r.label);
  m.config["target_instance"] = target;
  finish_manifest(dir, m);
  out << "dataset: " << result.dataset.size() << " rows, " << positives << " positive, " << result.frames.size()
      << " frames -> " << (dir / "dataset.csv").string() << "\n";
  return kOk;
}

int cmd_train(const GlobalOptions& g, const TrainOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto ds = read_dataset(o.dataset);
  const auto dir = out_dir(g);
  auto m = start_manifest("train", args, g);
  m.inputs["dataset"] = o.dataset;

  const auto balanced = rebalance(ds, o.negative_keep, g.seed);
  const auto rows = balanced.exported();
  const std::size_t k = o.train_count > 0 ? static_cast<std::size_t>(o.train_count) : default_train_count(rows.size());
  const auto [train_rows, validation_rows] = time_split(rows, k);

  ForestConfig cfg;
  cfg.n_trees = o.trees;
  if (o.max_depth >= 0) cfg.max_depth = o.max_depth;
  cfg.min_samples_leaf = o.min_leaf;
  cfg.seed = g.seed;
  cfg.threads = g.threads;
  const auto forest = train(train_rows, cfg);
  write_text(dir / "model.json", save_forest(forest));

  FramePrediction pred{0, {}};
  FrameTruth truth{0, false, {}};
  for (std::size_t i = 0; i < validation_rows.size(); ++i) {
    pred.labels[static_cast<int>(i)] = forest.predict(validation_rows[i].features).label;
    truth.labels[static_cast<int>(i)] = validation_rows[i].label;
  }
  const auto counts = confusion(std::span(&pred, 1), std::span(&truth, 1));
  const auto pr = precision_recall(counts);

  ordered_json report;
  report["rows"] = ds.size();
  report["rows_after_rebalance"] = rows.size();
  report["train_count"] = train_rows.size();
  report["validation_count"] = validation_rows.size();
  report["oob_score"] = forest.oob_score() ? ordered_json(*forest.oob_score()) : ordered_json(nullptr);
  report["tp"] = counts.tp;
  report["fp"] = counts.fp;
  report["tn"] = counts.tn;
  report["fn"] = counts.fn;
  report["precision"] = pr.precision ? ordered_json(*pr.precision) : ordered_json(nullptr);
  report["recall"] = pr.recall ? ordered_json(*pr.recall) : ordered_json(nullptr);
  write_text(dir / "validation.json", report.dump(2) + "\n");

  m.config["trees"] = o.trees;
  m.config["max_depth"] = o.max_depth >= 0 ? ordered_json(o.max_depth) : ordered_json(nullptr);
  m.config["min_leaf"] = o.min_leaf;
  m.config["negative_keep"] = o.negative_keep;
  m.config["train_count"] = k;
  finish_manifest(dir, m);

  out << "trained " << o.trees << " trees on " << train_rows.size() << " rows; OOB "
      << (forest.oob_score() ? std::to_string(*forest.oob_score()) : std::string("n/a")) << "; validation P "
      << format_percent(pr.precision) << " R " << format_percent(pr.recall) << " (" << validation_rows.size()
      << " rows)\n";
  return kOk;
}

int cmd_track(const GlobalOptions& g, const SequenceOptions& so, const TrackOptions& o,
              const std::vector<std::string>& args, std::ostream& out) {
  const auto providers = make_providers(so);
  const auto [first, last] = parse_range(so.range);
  const auto seq = load_sequence(so.frames, g.stride, first, last);
  auto model = std::make_shared<const Forest>(load_forest(read_text(o.model)));
  check_model(*model);
  const auto dir = out_dir(g);
  auto m = start_manifest("track", args, g);
  record_sequence(m, so);
  m.inputs["model"] = o.model;
  m.config["overlays"] = o.overlays;

  TrackerConfig cfg{segmentation_config(g), {}, g.seed};
  TrackState state;
  state.model = model;
  if (!so.target_bbox.empty()) {
    const auto first_instances = segment_frame(seq.frame_ids.front(), seq.frames.front(), providers, cfg.segmentation);
    const auto idx = select_by_bbox(first_instances, parse_bbox(so.target_bbox));
    state.last_target_centroid = first_instances[idx].centroid;
    state.last_seen_frame = seq.frame_ids.front();
  }
  if (o.overlays) fs::create_directories(dir / "overlays");
  FrameSink sink;
  if (o.overlays) {
    sink = [&](const TrackResult& r, const GrayImage& frame) {
      io::write_png(dir / "overlays" / (std::to_string(r.frame_id) + ".overlay.png"), overlay::render_track(frame, r));
    };
  }
  const auto log = run(seq, state, providers, cfg, sink);
  write_text(dir / "track.jsonl", track_log_to_jsonl(log));
  std::size_t selected = 0, skipped = 0;
  for (const auto& r : log.frames) {
    selected += r.selected.has_value();
    skipped += r.skipped;
    if (r.skipped) out << "warning: frame " << r.frame_id << " skipped: " << r.error << "\n";
  }
  finish_manifest(dir, m);
  out << "tracked " << log.frames.size() << " frames; target selected in " << selected << ", skipped " << skipped
      << " -> " << (dir / "track.jsonl").string() << "\n";
  return kOk;
}

int cmd_eval(const GlobalOptions& g, const EvalOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto log = track_log_from_jsonl(read_text(o.log));
  const auto truth_text = read_text(o.truth);
  std::vector<FrameTruth> truth;
  const auto first_line = truth_text.substr(0, truth_text.find('\n'));
  if (first_line.find("\"objects\"") != std::string::npos) {
    const auto gt = ground_truth_from_jsonl(truth_text);
    truth = truth_from_ground_truth(log, gt, g.min_area);
  } else {
    truth = frame_truth_from_jsonl(truth_text);
  }
  const auto counts = confusion(predictions_from_log(log), truth);
  const auto dir = out_dir(g);
  auto m = start_manifest("eval", args, g);
  m.inputs["log"] = o.log;
  m.inputs["truth"] = o.truth;
  m.config["name"] = o.name;
  m.config["challenges"] = o.challenges;
  write_text(dir / "report.csv", report_csv(counts));
  const ReportRow row{o.name, counts, o.challenges};
  const auto table = report_table(std::span(&row, 1));
  write_text(dir / "report.txt", table);
  finish_manifest(dir, m);
  out << table;
  return kOk;
}

volatile std::sig_atomic_t g_stop_requested = 0;

int cmd_serve(const GlobalOptions& g, const ServeOptions& o, std::ostream& out) {
  review::ReviewConfig cfg{o.state, segmentation_config(g), {}, g.seed};
  review::ReviewService service(cfg);
  const int port = service.start(o.host, o.port);
  out << "review service listening on http://" << o.host << ":" << port << "\n" << std::flush;
  std::signal(SIGINT, [](int) { g_stop_requested = 1; });
  std::signal(SIGTERM, [](int) { g_stop_requested = 1; });
  while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  service.stop();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bootstrapped single-target tracking among similar objects", "herdtrack"};
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Global random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--min-area", g.min_area, "Minimum blob and instance area in pixels")->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--stride", g.stride, "Take every N-th source frame")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory");

  SynthOptions so;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic fixture");
  synth_cmd->add_option("--scenario", so.scenario, "easy | hard")->capture_default_str();
  synth_cmd->add_option("--count", so.count, "Number of frames")->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--width", so.width, "Frame width")->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--height", so.height, "Frame height")->capture_default_str()->check(CLI::PositiveNumber);

  SequenceOptions seq_opts;
  const auto add_sequence = [&](CLI::App* cmd) {
    cmd->add_option("--frames", seq_opts.frames, "Directory of frame images")->required();
    cmd->add_option("--masks", seq_opts.masks, "Directory of <id>.mask.png files")->required();
    cmd->add_option("--edges", seq_opts.edges, "Directory of <id>.<blob>.edge.png files (default: gradient fallback)");
    cmd->add_option("--range", seq_opts.range, "Source index range BEGIN:END before striding");
    cmd->add_option("--target-bbox", seq_opts.target_bbox, "Target box x,y,w,h in the first frame");
  };
  auto* boot_cmd = app.add_subcommand("bootstrap", "Build a labelled dataset by 1-NN label propagation");
  add_sequence(boot_cmd);

  TrainOptions to;
  auto* train_cmd = app.add_subcommand("train", "Rebalance, split and train the random forest");
  train_cmd->add_option("--dataset", to.dataset, "Dataset CSV")->required();
  train_cmd->add_option("--trees", to.trees, "Number of trees")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-depth", to.max_depth, "Depth cap (-1 = none)")->capture_default_str();
  train_cmd->add_option("--min-leaf", to.min_leaf, "Minimum samples per leaf")->capture_default_str()
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--negative-keep", to.negative_keep, "Fraction of negatives kept")->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--train-count", to.train_count, "Rows used for training (default ceil(0.8 n))");

  TrackOptions tko;
  auto* track_cmd = app.add_subcommand("track", "Track the target with a trained model");
  add_sequence(track_cmd);
  track_cmd->add_option("--model", tko.model, "Model JSON")->required();
  track_cmd->add_flag("--overlays", tko.overlays, "Write <id>.overlay.png per frame");

  EvalOptions eo;
  auto* eval_cmd = app.add_subcommand("eval", "Confusion counts, precision and recall of a track log");
  eval_cmd->add_option("--log", eo.log, "Track log (JSONL)")->required();
  eval_cmd->add_option("--truth", eo.truth, "Synthetic truth.jsonl or review truth export")->required();
  eval_cmd->add_option("--name", eo.name, "Row label in the report")->capture_default_str();
  eval_cmd->add_option("--challenges", eo.challenges, "Free-text challenge notes");

  ServeOptions sv;
  auto* serve_cmd = app.add_subcommand("serve", "Run the review service");
  serve_cmd->add_option("--state", sv.state, "State directory")->required();
  serve_cmd->add_option("--host", sv.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", sv.port, "Port (0 = any free port)")->capture_default_str();

  std::string manifest_path;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay_cmd->add_option("manifest", manifest_path, "manifest.json")->required();

  std::vector<const char*> argv{"herdtrack"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(g, so, args, out);
    if (*boot_cmd) return cmd_bootstrap(g, seq_opts, args, out);
    if (*train_cmd) return cmd_train(g, to, args, out);
    if (*track_cmd) return cmd_track(g, seq_opts, tko, args, out);
    if (*eval_cmd) return cmd_eval(g, eo, args, out);
    if (*serve_cmd) return cmd_serve(g, sv, out);
    if (*replay_cmd) {
      const auto m = read_manifest(manifest_path);
      return run(m.argv, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace herdtrack::cli
