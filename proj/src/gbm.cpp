#include "gnnflow/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gnnflow/error.hpp"
#include "gnnflow/kernels.hpp"

namespace gnnflow {

void TrainParams::validate() const {
  if (tree_count < 1) throw UsageError("tree_count must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw UsageError("learning_rate must lie in (0, 1]");
  }
  if (max_depth < 1) throw UsageError("max_depth must be >= 1");
  if (min_leaf_samples < 1) throw UsageError("min_leaf_samples must be >= 1");
}

FeatureSchema FeatureSchema::for_variant(FeatureVariant v) {
  FeatureSchema s;
  s.variant = v;
  for (auto c : feature_columns(v)) s.columns.emplace_back(c);
  return s;
}

double RegressionTree::evaluate(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] < n.value ? i + 1 : n.right;
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  // pre-order walk carrying depth
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(i + 1, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return deepest;
}

double GbmModel::predict_transformed(std::span<const double> x) const {
  if (x.size() != schema.columns.size()) {
    throw DataError("feature schema mismatch: model expects " +
                    std::to_string(schema.columns.size()) + " columns, got " +
                    std::to_string(x.size()));
  }
  double score = base_prediction;
  for (const auto& tree : trees) {
    const double step = learning_rate * tree.evaluate(x);
    score = score + step;
  }
  return score;
}

double GbmModel::predict(std::span<const double> x) const {
  const double score = predict_transformed(x);
  const double cycles = log_target ? std::expm1(score) : score;
  return std::max(1.0, cycles);
}

namespace {

struct Split {
  std::size_t feature = 0;
  std::size_t position = 0;  // last sorted position on the left
  double threshold = 0.0;
  double score = -1.0;
};

// Greedy exact tree builder over presorted per-feature index arrays.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& columns,
              const std::vector<std::vector<std::uint32_t>>& presorted, const TrainParams& params)
      : columns_(columns), presorted_(presorted), params_(params) {
    const std::size_t n = columns_.front().size();
    goes_left_.resize(n);
    scratch_.resize(n);
    gathered_.resize(n);
    prefix_.resize(n);
    gains_.resize(n);
  }

  // Fits residuals; writes each row's leaf output into leaf_out.
  RegressionTree build(std::span<const double> residuals, std::span<double> leaf_out) {
    order_ = presorted_;
    residuals_ = residuals;
    leaf_out_ = leaf_out;
    nodes_.clear();
    grow(0, residuals.size(), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  void grow(std::size_t lo, std::size_t hi, std::size_t depth) {
    const std::size_t n = hi - lo;
    const auto& rows = order_.front();
    double total = 0.0;
    double total_sq = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const double r = residuals_[rows[k]];
      total += r;
      total_sq += r * r;
    }

    const std::size_t self = nodes_.size();
    nodes_.push_back({});

    Split best;
    if (depth < params_.max_depth && n >= 2 * params_.min_leaf_samples) best = find_split(lo, hi, total);
    const double parent_score = total * total / static_cast<double>(n);
    const double improvement = best.score - parent_score;
    if (best.score < 0.0 || !(improvement > 0.0) || improvement <= 1e-12 * total_sq) {
      const double value = total / static_cast<double>(n);
      nodes_[self] = {-1, value, 0};
      for (std::size_t k = lo; k < hi; ++k) leaf_out_[rows[k]] = value;
      return;
    }

    const std::size_t n_left = partition(lo, hi, best);
    nodes_[self].feature = static_cast<std::int32_t>(best.feature);
    nodes_[self].value = best.threshold;
    grow(lo, lo + n_left, depth + 1);
    nodes_[self].right = static_cast<std::uint32_t>(nodes_.size());
    grow(lo + n_left, hi, depth + 1);
  }

  Split find_split(std::size_t lo, std::size_t hi, double total) {
    const std::size_t n = hi - lo;
    const std::size_t min_leaf = params_.min_leaf_samples;
    const auto& kern = kernels::active();
    auto gathered = std::span<double>(gathered_).first(n);
    auto prefix = std::span<double>(prefix_).first(n);
    auto gains = std::span<double>(gains_).first(n);

    Split best;
    for (std::size_t f = 0; f < columns_.size(); ++f) {
      const auto& order = order_[f];
      const auto& col = columns_[f];
      if (col[order[lo]] == col[order[hi - 1]]) continue;  // constant in this node
      double running = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        gathered[k] = residuals_[order[lo + k]];
        running += gathered[k];
        prefix[k] = running;
      }
      kern.split_gains(prefix, total, gains);
      for (std::size_t i = min_leaf - 1; i + min_leaf < n; ++i) {
        const double a = col[order[lo + i]];
        const double b = col[order[lo + i + 1]];
        if (!(a < b)) continue;
        if (gains[i] > best.score) {
          double threshold = a + (b - a) / 2.0;
          if (!(threshold > a)) threshold = b;
          best = {f, i, threshold, gains[i]};
        }
      }
    }
    return best;
  }

  // Stable-partitions every feature's index range; returns the left size.
  std::size_t partition(std::size_t lo, std::size_t hi, const Split& split) {
    const auto& col = columns_[split.feature];
    for (std::size_t k = lo; k < hi; ++k) {
      const std::uint32_t row = order_.front()[k];
      goes_left_[row] = col[row] < split.threshold ? 1 : 0;
    }
    std::size_t n_left = 0;
    for (auto& order : order_) {
      std::size_t left = lo;
      std::size_t right = 0;
      for (std::size_t k = lo; k < hi; ++k) {
        const std::uint32_t row = order[k];
        if (goes_left_[row]) {
          order[left++] = row;
        } else {
          scratch_[right++] = row;
        }
      }
      std::copy_n(scratch_.begin(), right, order.begin() + static_cast<std::ptrdiff_t>(left));
      n_left = left - lo;
    }
    return n_left;
  }

  const std::vector<std::vector<double>>& columns_;
  const std::vector<std::vector<std::uint32_t>>& presorted_;
  const TrainParams& params_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<double> gathered_, prefix_, gains_;
  std::span<const double> residuals_;
  std::span<double> leaf_out_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

GbmModel train_gbm(const FeatureSchema& schema, std::span<const double> x,
                   std::span<const double> targets, const TrainParams& params,
                   std::vector<double>* loss_history) {
  params.validate();
  const std::size_t cols = schema.columns.size();
  const std::size_t n = targets.size();
  if (cols == 0) throw DataError("feature schema has no columns");
  if (x.size() != n * cols) throw DataError("feature matrix does not match target count");
  if (n < 2 * params.min_leaf_samples || n < 1) {
    throw DataError("need at least " + std::to_string(2 * params.min_leaf_samples) +
                    " training rows, got " + std::to_string(n));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value in training data");
  }
  for (double y : targets) {
    if (!std::isfinite(y) || y < 0.0) throw DataError("training targets must be finite and >= 0");
  }

  // Canonical row order (lexicographic on features, then target) makes the
  // fit independent of input order.
  std::vector<std::uint32_t> canon(n);
  std::iota(canon.begin(), canon.end(), 0u);
  std::sort(canon.begin(), canon.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto ra = x.subspan(a * cols, cols);
    const auto rb = x.subspan(b * cols, cols);
    for (std::size_t c = 0; c < cols; ++c) {
      if (ra[c] != rb[c]) return ra[c] < rb[c];
    }
    return targets[a] < targets[b];
  });

  std::vector<std::vector<double>> columns(cols, std::vector<double>(n));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = canon[i];
    for (std::size_t c = 0; c < cols; ++c) columns[c][i] = x[src * cols + c];
    y[i] = params.log_target ? std::log1p(targets[src]) : targets[src];
  }

  std::vector<std::vector<std::uint32_t>> presorted(cols, std::vector<std::uint32_t>(n));
  for (std::size_t c = 0; c < cols; ++c) {
    auto& order = presorted[c];
    std::iota(order.begin(), order.end(), 0u);
    const auto& col = columns[c];
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }

  GbmModel model;
  model.schema = schema;
  model.learning_rate = params.learning_rate;
  model.log_target = params.log_target;
  double sum = 0.0;
  for (double v : y) sum += v;
  model.base_prediction = sum / static_cast<double>(n);

  const auto& kern = kernels::active();
  std::vector<double> pred(n, model.base_prediction);
  std::vector<double> residuals(n);
  std::vector<double> leaf_out(n);
  TreeBuilder builder(columns, presorted, params);
  model.trees.reserve(params.tree_count);

  for (std::size_t round = 0; round < params.tree_count; ++round) {
    kern.subtract(y, pred, residuals);
    model.trees.push_back(builder.build(residuals, leaf_out));
    kern.axpy(params.learning_rate, leaf_out, pred);
    if (loss_history != nullptr) {
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - pred[i];
        sq += r * r;
      }
      loss_history->push_back(std::sqrt(sq / static_cast<double>(n)));
    }
  }
  return model;
}

GbmModel train_gbm(const FeatureTable& rows, std::span<const double> targets,
                   const TrainParams& params, std::vector<double>* loss_history) {
  return train_gbm(FeatureSchema::for_variant(rows.variant), rows.data, targets, params,
                   loss_history);
}

}  // namespace gnnflow
