#include "gnnflow/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "gnnflow/csv.hpp"
#include "gnnflow/error.hpp"

namespace gnnflow {

namespace {

std::uint32_t argmin(const ConfigValues& v) {
  std::uint32_t best = 0;
  for (std::uint32_t c = 1; c < kConfigCount; ++c) {
    if (v[c] < v[best]) best = c;
  }
  return best;
}

std::string pct(double x) {
  std::ostringstream ss;
  ss.precision(4);
  ss << std::fixed << x;
  return ss.str();
}

}  // namespace

RankedConfigs rank_predictions(std::string graph_id, const ConfigValues& predictions) {
  RankedConfigs r;
  r.graph_id = std::move(graph_id);
  r.entries.reserve(kConfigCount);
  for (std::uint32_t c = 0; c < kConfigCount; ++c) r.entries.emplace_back(c, predictions[c]);
  std::stable_sort(r.entries.begin(), r.entries.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });
  return r;
}

ConfigValues predict_all(const PredictorBank& bank, const Graph& g, const WorkloadDims& dims,
                         const AcceleratorParams& accel) {
  bank.check();
  const GraphMetrics m = compute_metrics(g);
  ConfigValues out{};
  for (TilingScheme scheme : kAllSchemes) {
    const auto t = resolve_tiling(scheme, g, dims, accel);
    const auto x = extract_features(g, m, dims, t, bank.schema.variant).values();
    for (InterPhase phase : kAllInterPhases) {
      const std::uint32_t c = DataflowConfig{scheme, phase}.index();
      out[c] = bank.predict(c, x);
    }
  }
  return out;
}

RankedConfigs rank_configs(const PredictorBank& bank, const NamedGraph& g, const WorkloadDims& dims,
                           const AcceleratorParams& accel) {
  return rank_predictions(g.id, predict_all(bank, g.graph, dims, accel));
}

double mape(std::span<const double> preds, std::span<const double> truths) {
  if (preds.size() != truths.size()) throw DataError("mape: length mismatch");
  if (preds.empty()) throw DataError("mape: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!(truths[i] >= 1.0)) throw DataError("mape: truths must be >= 1");
    sum += std::abs(preds[i] - truths[i]) / truths[i];
  }
  return 100.0 * sum / static_cast<double>(preds.size());
}

EvalSet make_eval_set(const PredictorBank& bank, const std::vector<NamedGraph>& graphs,
                      const LabelIndex& labels, const std::vector<std::string>& graph_ids,
                      const WorkloadDims& dims, const AcceleratorParams& accel) {
  std::unordered_map<std::string, const Graph*> by_id;
  for (const auto& g : graphs) by_id.emplace(g.id, &g.graph);
  const std::vector<std::string>& ids = graph_ids.empty() ? labels.graph_ids : graph_ids;

  EvalSet set;
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("no graph file for '" + id + "'");
    const auto& cycles = labels.cycles[labels.find(id)];
    ConfigValues truth{};
    for (std::uint32_t c = 0; c < kConfigCount; ++c) truth[c] = static_cast<double>(cycles[c]);
    set.graph_ids.push_back(id);
    set.truth.push_back(truth);
    set.predicted.push_back(predict_all(bank, *it->second, dims, accel));
  }
  if (set.size() == 0) throw DataError("evaluation set is empty");
  return set;
}

double topk_accuracy(const EvalSet& set, std::size_t k) {
  if (set.size() == 0) throw DataError("top-k accuracy of an empty set");
  if (set.truth.size() != set.size() || set.predicted.size() != set.size()) {
    throw DataError("incomplete evaluation set");
  }
  k = std::min<std::size_t>(k, kConfigCount);
  std::size_t hits = 0;
  for (std::size_t g = 0; g < set.size(); ++g) {
    const std::uint32_t chosen = argmin(set.predicted[g]);
    const auto ranked = rank_predictions({}, set.truth[g]);
    for (std::size_t i = 0; i < k; ++i) {
      if (ranked.entries[i].first == chosen) {
        ++hits;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(set.size());
}

EvalReport strategy_comparison(const EvalSet& set) {
  if (set.size() == 0) throw DataError("strategy comparison of an empty set");
  if (set.truth.size() != set.size() || set.predicted.size() != set.size()) {
    throw DataError("incomplete evaluation set");
  }
  const double n = static_cast<double>(set.size());
  EvalReport r;
  r.graph_count = set.size();

  std::vector<double> all_preds, all_truths;
  std::array<double, kConfigCount> fixed_sum{};
  std::array<double, kConfigCount> config_err{};
  double model_sum = 0.0, random_sum = 0.0, optimal_sum = 0.0;
  for (std::size_t g = 0; g < set.size(); ++g) {
    const auto& truth = set.truth[g];
    const auto& pred = set.predicted[g];
    const std::uint32_t chosen = argmin(pred);
    ++r.per_config_selected[chosen];
    model_sum += truth[chosen];
    double mean_truth = 0.0;
    for (std::uint32_t c = 0; c < kConfigCount; ++c) {
      mean_truth += truth[c];
      fixed_sum[c] += truth[c];
      config_err[c] += std::abs(pred[c] - truth[c]) / truth[c];
      all_preds.push_back(pred[c]);
      all_truths.push_back(truth[c]);
    }
    random_sum += mean_truth / static_cast<double>(kConfigCount);
    optimal_sum += truth[argmin(truth)];
  }

  r.mape_percent = mape(all_preds, all_truths);
  r.top1_percent = topk_accuracy(set, 1);
  r.top3_percent = topk_accuracy(set, 3);
  r.model_mean = model_sum / n;
  r.random_mean = random_sum / n;
  r.optimal_mean = optimal_sum / n;
  r.best_fixed_config = 0;
  for (std::uint32_t c = 1; c < kConfigCount; ++c) {
    if (fixed_sum[c] < fixed_sum[r.best_fixed_config]) r.best_fixed_config = c;
  }
  r.best_fixed_mean = fixed_sum[r.best_fixed_config] / n;
  for (std::uint32_t c = 0; c < kConfigCount; ++c) r.per_config_mape[c] = 100.0 * config_err[c] / n;

  r.improvement_over_random_percent = 100.0 * (r.random_mean - r.model_mean) / r.random_mean;
  r.improvement_over_best_fixed_percent = 100.0 * (r.best_fixed_mean - r.model_mean) / r.best_fixed_mean;
  r.degradation_over_optimal_percent = 100.0 * (r.model_mean - r.optimal_mean) / r.optimal_mean;
  return r;
}

std::string eval_csv_header() {
  return "dataset,mape,top1,top3,improvement_over_random,improvement_over_best_fixed,"
         "degradation_over_optimal\n";
}

std::string eval_csv_row(const std::string& dataset, const EvalReport& r) {
  return dataset + "," + pct(r.mape_percent) + "," + pct(r.top1_percent) + "," +
         pct(r.top3_percent) + "," + pct(r.improvement_over_random_percent) + "," +
         pct(r.improvement_over_best_fixed_percent) + "," +
         pct(r.degradation_over_optimal_percent) + "\n";
}

std::string ablation_csv_header() { return "dataset,model,mape,degradation_over_optimal\n"; }

std::string ablation_csv_row(const std::string& dataset, const std::string& model,
                             const EvalReport& r) {
  return dataset + "," + model + "," + pct(r.mape_percent) + "," +
         pct(r.degradation_over_optimal_percent) + "\n";
}

std::string format_eval_report(const std::string& dataset, const EvalReport& r) {
  std::ostringstream ss;
  const auto best = DataflowConfig::from_index(r.best_fixed_config);
  ss << "dataset: " << dataset << "\n"
     << "graphs: " << r.graph_count << "\n"
     << "mape_percent: " << pct(r.mape_percent) << "\n"
     << "top1_percent: " << pct(r.top1_percent) << "\n"
     << "top3_percent: " << pct(r.top3_percent) << "\n"
     << "improvement_over_random_percent: " << pct(r.improvement_over_random_percent) << "\n"
     << "improvement_over_best_fixed_percent: " << pct(r.improvement_over_best_fixed_percent) << "\n"
     << "degradation_over_optimal_percent: " << pct(r.degradation_over_optimal_percent) << "\n"
     << "best_fixed_config: " << r.best_fixed_config << " (" << scheme_name(best.scheme) << ","
     << inter_phase_name(best.inter_phase) << ")\n"
     << "per_config:\n";
  for (std::uint32_t c = 0; c < kConfigCount; ++c) {
    const auto cfg = DataflowConfig::from_index(c);
    ss << "  " << c << " " << scheme_name(cfg.scheme) << "," << inter_phase_name(cfg.inter_phase)
       << " mape=" << pct(r.per_config_mape[c]) << " selected=" << r.per_config_selected[c] << "\n";
  }
  return ss.str();
}

}  // namespace gnnflow
