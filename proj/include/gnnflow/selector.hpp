#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnnflow/bank.hpp"

namespace gnnflow {

using ConfigValues = std::array<double, kConfigCount>;

struct RankedConfigs {
  std::string graph_id;
  /// (config_index, predicted cycles), ascending by prediction, ties by index.
  std::vector<std::pair<std::uint32_t, double>> entries;
};

RankedConfigs rank_predictions(std::string graph_id, const ConfigValues& predictions);

RankedConfigs rank_configs(const PredictorBank& bank, const NamedGraph& g, const WorkloadDims& dims,
                           const AcceleratorParams& accel);

/// Predictions for all 24 configs of one graph.
ConfigValues predict_all(const PredictorBank& bank, const Graph& g, const WorkloadDims& dims,
                         const AcceleratorParams& accel);

/// 100 * mean(|pred - truth| / truth).
double mape(std::span<const double> preds, std::span<const double> truths);

/// Per-graph true latencies and predictions for the evaluation set.
struct EvalSet {
  std::vector<std::string> graph_ids;
  std::vector<ConfigValues> truth;
  std::vector<ConfigValues> predicted;

  std::size_t size() const { return graph_ids.size(); }
};

/// Builds the evaluation set for `graph_ids` (all labeled graphs when empty).
EvalSet make_eval_set(const PredictorBank& bank, const std::vector<NamedGraph>& graphs,
                      const LabelIndex& labels, const std::vector<std::string>& graph_ids,
                      const WorkloadDims& dims, const AcceleratorParams& accel);

/// Percentage of graphs whose predicted-best config is among the k truly
/// fastest (true ties broken by config index).
double topk_accuracy(const EvalSet& set, std::size_t k);

struct EvalReport {
  double mape_percent = 0.0;
  double top1_percent = 0.0;
  double top3_percent = 0.0;
  double improvement_over_random_percent = 0.0;
  double improvement_over_best_fixed_percent = 0.0;
  double degradation_over_optimal_percent = 0.0;

  double model_mean = 0.0;       // M
  double random_mean = 0.0;      // R, expectation of a uniform pick
  double best_fixed_mean = 0.0;  // B
  double optimal_mean = 0.0;     // O
  std::uint32_t best_fixed_config = 0;

  std::array<double, kConfigCount> per_config_mape{};
  std::array<std::size_t, kConfigCount> per_config_selected{};
  std::size_t graph_count = 0;
};

EvalReport strategy_comparison(const EvalSet& set);

/// dataset,mape,top1,top3,improvement_over_random,improvement_over_best_fixed,degradation_over_optimal
std::string eval_csv_header();
std::string eval_csv_row(const std::string& dataset, const EvalReport& r);

/// dataset,model,mape,degradation_over_optimal
std::string ablation_csv_header();
std::string ablation_csv_row(const std::string& dataset, const std::string& model,
                             const EvalReport& r);

/// Human-readable multi-line summary.
std::string format_eval_report(const std::string& dataset, const EvalReport& r);

}  // namespace gnnflow
