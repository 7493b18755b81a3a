#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnnflow/features.hpp"

namespace gnnflow {

struct TrainParams {
  std::size_t tree_count = 300;
  double learning_rate = 0.1;
  std::size_t max_depth = 6;
  std::size_t min_leaf_samples = 5;
  bool log_target = true;
  // Exact greedy fitting draws no randomness; the seed is carried for provenance.
  std::uint64_t seed = 0;

  void validate() const;
};

struct FeatureSchema {
  FeatureVariant variant = FeatureVariant::base;
  std::vector<std::string> columns;

  static FeatureSchema for_variant(FeatureVariant v);
  bool operator==(const FeatureSchema&) const = default;
};

/// Pre-order node array. Internal nodes send x[feature] < threshold to the
/// left child (the next node) and the rest to `right`.
struct TreeNode {
  std::int32_t feature = -1;  // < 0 marks a leaf
  double value = 0.0;         // threshold, or leaf output
  std::uint32_t right = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double evaluate(std::span<const double> x) const;
  std::size_t depth() const;
  std::span<const TreeNode> nodes() const { return nodes_; }

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

/// Boosted ensemble under squared loss. When log_target is set the ensemble
/// is fit to ln(1 + cycles).
class GbmModel {
 public:
  double base_prediction = 0.0;
  double learning_rate = 0.1;
  bool log_target = true;
  FeatureSchema schema;
  std::vector<RegressionTree> trees;

  /// Ensemble output in the transformed space. Throws DataError on a width mismatch.
  double predict_transformed(std::span<const double> x) const;

  /// Predicted cycles, clamped to >= 1.
  double predict(std::span<const double> x) const;
  double predict(const FeatureVector& x) const { return predict(x.values()); }

  bool operator==(const GbmModel&) const = default;
};

/// Fits `targets` (cycles) from row-major `x` (targets.size() rows). The fit
/// is independent of row order. `loss_history`, when given, receives the
/// training RMSE in transformed space after each round.
GbmModel train_gbm(const FeatureSchema& schema, std::span<const double> x,
                   std::span<const double> targets, const TrainParams& params,
                   std::vector<double>* loss_history = nullptr);

GbmModel train_gbm(const FeatureTable& rows, std::span<const double> targets,
                   const TrainParams& params, std::vector<double>* loss_history = nullptr);

}  // namespace gnnflow
