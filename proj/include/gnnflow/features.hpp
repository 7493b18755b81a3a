#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnnflow/dataflow.hpp"
#include "gnnflow/graph.hpp"

namespace gnnflow {

enum class FeatureVariant { base, base_features };

std::string_view variant_name(FeatureVariant v);
FeatureVariant parse_variant(std::string_view s);

/// Graph-level quantities shared by all 24 configurations of one graph.
struct GraphMetrics {
  std::uint64_t v = 0;
  std::uint64_t e = 0;
  double density = 0.0;
  double clustering = 0.0;
  double mean_degree = 0.0;
  std::array<double, 7> quantiles{};
};

GraphMetrics compute_metrics(const Graph& g);

/// Base features (sizes, tiles, density, clustering, degree quantiles) and the
/// composite cost estimators s1..s6. For the base variant s1..s6 are zero and
/// not emitted by values().
struct FeatureVector {
  FeatureVariant variant = FeatureVariant::base;
  std::uint64_t v = 0;
  std::uint64_t e = 0;
  std::uint64_t t_va = 1, t_fa = 1, t_n = 1, t_vc = 1, t_gc = 1, t_fc = 1;
  double density = 0.0;
  double clustering = 0.0;
  std::array<double, 7> q{};
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0, s5 = 0.0, s6 = 0.0;

  /// Model input row in column order.
  std::vector<double> values() const;
};

std::span<const std::string_view> feature_columns(FeatureVariant v);

FeatureVector extract_features(const Graph& g, const WorkloadDims& dims, const ResolvedTiling& t,
                               FeatureVariant variant);
FeatureVector extract_features(const Graph& g, const GraphMetrics& m, const WorkloadDims& dims,
                               const ResolvedTiling& t, FeatureVariant variant);

/// Row-major numeric table keyed by (graph id, config index).
struct FeatureTable {
  FeatureVariant variant = FeatureVariant::base;
  std::vector<std::string> graph_ids;
  std::vector<std::uint32_t> config_indices;
  std::vector<double> data;

  std::size_t cols() const { return feature_columns(variant).size(); }
  std::size_t rows() const { return graph_ids.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data).subspan(i * cols(), cols());
  }
  void append(std::string graph_id, std::uint32_t config_index, std::span<const double> values);
};

/// One row per graph for a single configuration, in input order.
FeatureTable feature_matrix(const std::vector<NamedGraph>& graphs, const WorkloadDims& dims,
                            const DataflowConfig& cfg, const AcceleratorParams& accel,
                            FeatureVariant variant);

/// 24 rows per graph in (graph, config_index) order.
FeatureTable feature_matrix_all(const std::vector<NamedGraph>& graphs, const WorkloadDims& dims,
                                const AcceleratorParams& accel, FeatureVariant variant);

/// graph_id,config_index,<feature columns>
std::string write_features_csv(const FeatureTable& table);
FeatureTable read_features_csv(std::string_view text);

}  // namespace gnnflow
