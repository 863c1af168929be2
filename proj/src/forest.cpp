#include "herdtrack/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "herdtrack/error.hpp"
#include "herdtrack/rng.hpp"

namespace herdtrack {
namespace {

// Gains below this are rounding noise, not an entropy reduction.
constexpr double kMinGain = 1e-12;

struct Grower {
  const LabelledRows& rows;
  const TreeParams& params;
  std::vector<TreeNode> nodes;

  int grow(std::vector<std::size_t>& sample, int depth) {
    TreeNode node;
    for (auto i : sample) ++node.counts[static_cast<std::size_t>(rows.y[i])];
    const int index = static_cast<int>(nodes.size());
    nodes.push_back(node);

    const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
    const bool capped = params.max_depth && depth >= *params.max_depth;
    const bool too_small = static_cast<int>(sample.size()) < 2 * params.min_samples_leaf;
    if (pure || capped || too_small) return index;

    const Split split = best_split(rows, sample, params.min_samples_leaf);
    if (split.feature < 0) return index;

    std::vector<std::size_t> left, right;
    for (auto i : sample) {
      (rows.x[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(i);
    }
    sample.clear();
    sample.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes[static_cast<std::size_t>(index)].feature = split.feature;
    nodes[static_cast<std::size_t>(index)].threshold = split.threshold;
    nodes[static_cast<std::size_t>(index)].left = l;
    nodes[static_cast<std::size_t>(index)].right = r;
    return index;
  }
};

void check_trainable(const LabelledRows& rows) {
  if (rows.x.size() != rows.y.size()) throw Error(ErrorCode::Argument, "features and labels misaligned");
  std::array<std::size_t, 2> counts{};
  for (int y : rows.y) {
    if (y != 0 && y != 1) throw Error(ErrorCode::Argument, "labels must be 0 or 1");
    ++counts[static_cast<std::size_t>(y)];
  }
  if (rows.size() < 2 || counts[0] == 0 || counts[1] == 0) {
    throw Error(ErrorCode::DegenerateTraining, "training needs at least two rows covering both classes");
  }
}

}  // namespace

LabelledRows LabelledRows::from(std::span<const DatasetRow> rows) {
  LabelledRows out;
  out.x.reserve(rows.size());
  out.y.reserve(rows.size());
  for (const auto& r : rows) {
    out.x.push_back(r.features.to_array());
    out.y.push_back(r.label);
  }
  return out;
}

int DecisionTree::predict(const FeatureArray& x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].majority();
}

int DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> level(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

double entropy_bits(double negatives, double positives) {
  const double n = negatives + positives;
  double h = 0.0;
  for (double c : {negatives, positives}) {
    if (c > 0.0) {
      const double p = c / n;
      h -= p * std::log2(p);
    }
  }
  return h;
}

Split best_split(const LabelledRows& rows, std::span<const std::size_t> sample, int min_samples_leaf) {
  Split best;
  best.gain = kMinGain;
  const double n = static_cast<double>(sample.size());
  double total_pos = 0.0;
  for (auto i : sample) total_pos += rows.y[i];
  const double parent = entropy_bits(n - total_pos, total_pos);

  std::vector<std::size_t> order(sample.begin(), sample.end());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows.x[a][f] < rows.x[b][f]; });
    double left_pos = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      left_pos += rows.y[order[k]];
      const double lo = rows.x[order[k]][f];
      const double hi = rows.x[order[k + 1]][f];
      if (!(lo < hi)) continue;
      const double nl = static_cast<double>(k + 1);
      const double nr = n - nl;
      if (nl < min_samples_leaf || nr < min_samples_leaf) continue;
      const double right_pos = total_pos - left_pos;
      const double gain = parent - (nl / n) * entropy_bits(nl - left_pos, left_pos) -
                          (nr / n) * entropy_bits(nr - right_pos, right_pos);
      if (gain > best.gain) best = {static_cast<int>(f), 0.5 * (lo + hi), gain};
    }
  }
  if (best.feature < 0) best.gain = 0.0;
  return best;
}

DecisionTree grow_tree(const LabelledRows& rows, std::span<const std::size_t> sample, const TreeParams& params) {
  if (sample.empty()) throw Error(ErrorCode::Argument, "cannot grow a tree on an empty sample");
  Grower grower{rows, params, {}};
  std::vector<std::size_t> root(sample.begin(), sample.end());
  grower.grow(root, 0);
  return DecisionTree(std::move(grower.nodes));
}

Forest::Forest(ForestConfig config, std::vector<DecisionTree> trees, std::optional<double> oob_score)
    : config_(std::move(config)), trees_(std::move(trees)), oob_score_(oob_score) {}

Prediction Forest::predict(std::span<const double> x) const {
  if (x.size() != kFeatureCount) {
    throw Error(ErrorCode::Contract, "expected " + std::to_string(kFeatureCount) + " features, got " +
                                         std::to_string(x.size()));
  }
  if (trees_.empty()) throw Error(ErrorCode::Contract, "forest has no trees");
  FeatureArray a{};
  std::copy(x.begin(), x.end(), a.begin());
  std::size_t positive = 0;
  for (const auto& t : trees_) positive += static_cast<std::size_t>(t.predict(a));
  return {2 * positive > trees_.size() ? 1 : 0, static_cast<double>(positive) / static_cast<double>(trees_.size())};
}

Forest train(const LabelledRows& rows, const ForestConfig& config) {
  check_trainable(rows);
  if (config.n_trees < 1) throw Error(ErrorCode::Config, "n_trees must be >= 1");
  if (config.min_samples_leaf < 1) throw Error(ErrorCode::Config, "min_samples_leaf must be >= 1");
  if (config.max_depth && *config.max_depth < 0) throw Error(ErrorCode::Config, "max_depth must be >= 0");

  const std::size_t n = rows.size();
  const auto n_trees = static_cast<std::size_t>(config.n_trees);
  std::vector<DecisionTree> trees(n_trees);
  std::vector<std::vector<std::uint8_t>> in_bag(n_trees);
  const TreeParams params{config.max_depth, config.min_samples_leaf};

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_trees; t = next++) {
      std::vector<std::size_t> sample(n);
      in_bag[t].assign(n, 0);
      if (config.bootstrap) {
        Engine eng(hash64(config.seed, t));
        for (auto& s : sample) {
          s = static_cast<std::size_t>(uniform_below(eng, n));
          in_bag[t][s] = 1;
        }
      } else {
        std::iota(sample.begin(), sample.end(), std::size_t{0});
        std::fill(in_bag[t].begin(), in_bag[t].end(), 1);
      }
      trees[t] = grow_tree(rows, sample, params);
    }
  };
  const int workers = std::clamp(config.threads, 1, static_cast<int>(n_trees));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::size_t evaluated = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t votes = 0, positive = 0;
    for (std::size_t t = 0; t < n_trees; ++t) {
      if (in_bag[t][i]) continue;
      ++votes;
      positive += static_cast<std::size_t>(trees[t].predict(rows.x[i]));
    }
    if (votes == 0) continue;
    ++evaluated;
    correct += static_cast<std::size_t>((2 * positive > votes ? 1 : 0) == rows.y[i]);
  }
  std::optional<double> oob;
  if (evaluated > 0) oob = static_cast<double>(correct) / static_cast<double>(evaluated);
  return Forest(config, std::move(trees), oob);
}

Forest train(std::span<const DatasetRow> rows, const ForestConfig& config) {
  return train(LabelledRows::from(rows), config);
}

TrainingDataset rebalance(const TrainingDataset& ds, double negative_keep, std::uint64_t seed) {
  if (!(negative_keep >= 0.0 && negative_keep <= 1.0)) throw Error(ErrorCode::Argument, "negative_keep must be in [0,1]");
  Engine eng(mix64(seed));
  TrainingDataset out;
  for (const auto& row : ds.rows) {
    if (row.label == 1) {
      out.rows.push_back(row);
      continue;
    }
    if (uniform01(eng) < negative_keep) out.rows.push_back(row);
  }
  return out;
}

std::size_t default_train_count(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::Argument, "need at least two rows to split");
  const auto k = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

std::pair<std::vector<DatasetRow>, std::vector<DatasetRow>> time_split(std::span<const DatasetRow> rows, std::size_t k) {
  if (k < 1 || k >= rows.size()) {
    throw Error(ErrorCode::Argument, "split point " + std::to_string(k) + " outside [1, " +
                                         std::to_string(rows.size()) + ")");
  }
  return {{rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k)},
          {rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end()}};
}

std::string save_forest(const Forest& forest) {
  using nlohmann::ordered_json;
  const auto& cfg = forest.config();
  ordered_json doc;
  doc["version"] = kForestFormatVersion;
  ordered_json c;
  c["n_trees"] = cfg.n_trees;
  c["criterion"] = "cross-entropy";
  c["features_per_split"] = kFeatureCount;
  c["bootstrap"] = cfg.bootstrap;
  c["max_depth"] = cfg.max_depth ? ordered_json(*cfg.max_depth) : ordered_json(nullptr);
  c["min_samples_leaf"] = cfg.min_samples_leaf;
  c["seed"] = cfg.seed;
  doc["config"] = std::move(c);
  ordered_json order = ordered_json::array();
  for (auto name : kFeatureOrder) order.push_back(std::string(name));
  doc["feature_order"] = std::move(order);
  doc["oob_score"] = forest.oob_score() ? ordered_json(*forest.oob_score()) : ordered_json(nullptr);
  ordered_json trees = ordered_json::array();
  for (const auto& tree : forest.trees()) {
    ordered_json nodes = ordered_json::array();
    for (const auto& n : tree.nodes()) {
      ordered_json j;
      if (!n.is_leaf()) {
        j["feature"] = n.feature;
        j["threshold"] = n.threshold;
        j["left"] = n.left;
        j["right"] = n.right;
      }
      j["counts"] = {n.counts[0], n.counts[1]};
      nodes.push_back(std::move(j));
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc.dump() + "\n";
}

Forest load_forest(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Deserialization, std::string("malformed model: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("version")) throw Error(ErrorCode::Deserialization, "missing version");
    if (doc.at("version").get<int>() != kForestFormatVersion) {
      throw Error(ErrorCode::Deserialization, "unsupported model version " + doc.at("version").dump());
    }
    const auto& order = doc.at("feature_order");
    bool same = order.is_array() && order.size() == kFeatureCount;
    for (std::size_t i = 0; same && i < kFeatureCount; ++i) same = order[i].get<std::string>() == kFeatureOrder[i];
    if (!same) throw Error(ErrorCode::Incompatible, "model feature order " + order.dump() + " does not match this build");

    const auto& c = doc.at("config");
    if (c.at("criterion").get<std::string>() != "cross-entropy" ||
        c.at("features_per_split").get<std::size_t>() != kFeatureCount) {
      throw Error(ErrorCode::Incompatible, "unsupported split policy in model config");
    }
    ForestConfig cfg;
    cfg.n_trees = c.at("n_trees").get<int>();
    cfg.bootstrap = c.at("bootstrap").get<bool>();
    if (!c.at("max_depth").is_null()) cfg.max_depth = c.at("max_depth").get<int>();
    cfg.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    cfg.seed = c.at("seed").get<std::uint64_t>();

    std::optional<double> oob;
    if (!doc.at("oob_score").is_null()) oob = doc.at("oob_score").get<double>();

    std::vector<DecisionTree> trees;
    for (const auto& jt : doc.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& jn : jt) {
        TreeNode n;
        n.counts = {jn.at("counts").at(0).get<int>(), jn.at("counts").at(1).get<int>()};
        if (jn.contains("feature")) {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
        }
        nodes.push_back(n);
      }
      if (nodes.empty()) throw Error(ErrorCode::Deserialization, "empty tree");
      const int count = static_cast<int>(nodes.size());
      for (int i = 0; i < count; ++i) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        if (n.is_leaf()) continue;
        if (n.feature >= static_cast<int>(kFeatureCount) || n.left <= i || n.right <= i || n.left >= count ||
            n.right >= count) {
          throw Error(ErrorCode::Deserialization, "invalid node " + std::to_string(i));
        }
      }
      trees.emplace_back(std::move(nodes));
    }
    if (static_cast<int>(trees.size()) != cfg.n_trees) throw Error(ErrorCode::Deserialization, "tree count mismatch");
    return Forest(cfg, std::move(trees), oob);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Deserialization, std::string("malformed model: ") + e.what());
  }
}

}  // namespace herdtrack
