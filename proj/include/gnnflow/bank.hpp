#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gnnflow/dataflow.hpp"
#include "gnnflow/features.hpp"
#include "gnnflow/gbm.hpp"

namespace gnnflow {

struct SplitSpec {
  double train_frac = 0.70;
  double val_frac = 0.15;
  double test_frac = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Partition {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1. Validation and test sizes are floor(frac * n);
/// the remainder goes to train. Each part is returned sorted.
Partition split_dataset(std::size_t n, const SplitSpec& spec);

/// Partition expressed as graph ids.
struct GraphPartition {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

/// One ensemble per configuration, all on the same feature schema.
class PredictorBank {
 public:
  FeatureSchema schema;
  std::vector<GbmModel> models;  // indexed by config_index, size 24
  GraphPartition partition;      // graphs used for train/val/test
  TrainParams params;
  SplitSpec split;

  const GbmModel& model(std::uint32_t config_index) const;
  double predict(std::uint32_t config_index, std::span<const double> x) const {
    return model(config_index).predict(x);
  }

  /// Throws InvariantError unless all 24 models are present on one schema.
  void check() const;
};

struct ValidationReport {
  std::array<double, kConfigCount> mape_percent{};
  double pooled_mape_percent = 0.0;
  std::size_t graph_count = 0;
};

struct BankTrainResult {
  PredictorBank bank;
  ValidationReport validation;
};

/// Labels and features must cover all 24 configurations of every labeled
/// graph. Graphs are split by id in first-appearance order of `labels`.
BankTrainResult train_bank(const std::vector<LatencyRecord>& labels, const FeatureTable& features,
                           const TrainParams& params, const SplitSpec& split);

inline constexpr std::string_view kBankVersion = "gnnflow-bank/1";

std::string save_bank(const PredictorBank& bank);
PredictorBank load_bank(std::string_view text);

/// config_index,scheme,inter_phase,val_mape
std::string write_validation_csv(const ValidationReport& report);

/// Cycles per (graph, config), in first-appearance order of the labels.
struct LabelIndex {
  std::vector<std::string> graph_ids;
  std::vector<std::array<std::uint64_t, kConfigCount>> cycles;

  std::size_t find(std::string_view graph_id) const;  // throws DataError if absent
};

/// Throws DataError naming the first (graph, config) gap or duplicate.
LabelIndex index_labels(const std::vector<LatencyRecord>& labels);

}  // namespace gnnflow
