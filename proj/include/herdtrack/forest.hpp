#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "herdtrack/bootstrap.hpp"
#include "herdtrack/features.hpp"

namespace herdtrack {

/// Feature rows with binary labels, the forest's training input.
struct LabelledRows {
  std::vector<FeatureArray> x;
  std::vector<int> y;

  std::size_t size() const noexcept { return x.size(); }
  static LabelledRows from(std::span<const DatasetRow> rows);
};

struct ForestConfig {
  int n_trees = 300;
  std::optional<int> max_depth;  ///< number of split levels; unset = grow to purity
  int min_samples_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  int threads = 1;  ///< training workers; does not affect the result
};

struct TreeNode {
  int feature = -1;  ///< -1 for a leaf
  double threshold = 0.0;  ///< x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  std::array<int, 2> counts{};  ///< class counts of the training samples reaching the node

  bool is_leaf() const noexcept { return feature < 0; }
  int majority() const noexcept { return counts[1] > counts[0] ? 1 : 0; }
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  int predict(const FeatureArray& x) const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  int depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Shannon entropy in bits of a two-class count pair.
double entropy_bits(double negatives, double positives);

/// Max information-gain split over all features and all midpoints between
/// consecutive distinct values; the first maximum in (feature, threshold)
/// scan order wins. feature == -1 when no split reduces entropy.
Split best_split(const LabelledRows& rows, std::span<const std::size_t> sample, int min_samples_leaf);

struct TreeParams {
  std::optional<int> max_depth;
  int min_samples_leaf = 1;
};

/// Grow one tree on `sample` (row indices, duplicates allowed).
DecisionTree grow_tree(const LabelledRows& rows, std::span<const std::size_t> sample, const TreeParams& params);

struct Prediction {
  int label = 0;
  double vote_fraction = 0.0;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

class Forest {
 public:
  Forest() = default;
  Forest(ForestConfig config, std::vector<DecisionTree> trees, std::optional<double> oob_score);

  /// Majority vote; an even split predicts 0. Throws Contract on wrong arity.
  Prediction predict(std::span<const double> x) const;
  Prediction predict(const FeatureVector& fv) const { return predict(fv.to_array()); }

  const ForestConfig& config() const noexcept { return config_; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  /// Accuracy over rows left out of at least one bootstrap sample.
  std::optional<double> oob_score() const noexcept { return oob_score_; }

 private:
  ForestConfig config_;
  std::vector<DecisionTree> trees_;
  std::optional<double> oob_score_;
};

/// Throws DegenerateTraining unless both classes are present (and >= 2 rows).
Forest train(const LabelledRows& rows, const ForestConfig& config);
Forest train(std::span<const DatasetRow> rows, const ForestConfig& config);

/// Keep every positive; keep each negative with probability `negative_keep`.
TrainingDataset rebalance(const TrainingDataset& ds, double negative_keep = 0.5, std::uint64_t seed = 0);

/// ceil(0.8 n), clamped to [1, n-1].
std::size_t default_train_count(std::size_t n);

/// Prefix of K rows for training, the rest for validation, order preserved.
std::pair<std::vector<DatasetRow>, std::vector<DatasetRow>> time_split(std::span<const DatasetRow> rows, std::size_t k);

inline constexpr int kForestFormatVersion = 1;

/// Versioned JSON document with deterministic key order.
std::string save_forest(const Forest& forest);
Forest load_forest(std::string_view json_text);

}  // namespace herdtrack
