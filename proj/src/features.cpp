#include "gnnflow/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "gnnflow/csv.hpp"
#include "gnnflow/error.hpp"

namespace gnnflow {

namespace {

constexpr std::array<std::string_view, 17> kBaseColumns{
    "v",       "e",       "t_va",    "t_fa", "t_n", "t_vc", "t_gc", "t_fc", "density",
    "clustering", "q1", "q2", "q3", "q4", "q5", "q6", "q7"};

constexpr std::array<std::string_view, 23> kFullColumns{
    "v",       "e",       "t_va",    "t_fa", "t_n", "t_vc", "t_gc", "t_fc", "density",
    "clustering", "q1", "q2", "q3", "q4", "q5", "q6", "q7", "s1",   "s2",   "s3",
    "s4",      "s5",      "s6"};

}  // namespace

std::string_view variant_name(FeatureVariant v) {
  return v == FeatureVariant::base ? "base" : "base+features";
}

FeatureVariant parse_variant(std::string_view s) {
  if (s == "base") return FeatureVariant::base;
  if (s == "base+features") return FeatureVariant::base_features;
  throw UsageError("unknown feature variant '" + std::string(s) + "' (base | base+features)");
}

std::span<const std::string_view> feature_columns(FeatureVariant v) {
  if (v == FeatureVariant::base) return kBaseColumns;
  return kFullColumns;
}

GraphMetrics compute_metrics(const Graph& g) {
  GraphMetrics m;
  m.v = g.node_count();
  m.e = g.edge_count();
  m.density = density(g);
  m.clustering = clustering_coefficient(g);
  m.mean_degree = g.stats().mean_degree;
  m.quantiles = g.stats().quantiles;
  return m;
}

std::vector<double> FeatureVector::values() const {
  std::vector<double> out{static_cast<double>(v),    static_cast<double>(e),
                          static_cast<double>(t_va), static_cast<double>(t_fa),
                          static_cast<double>(t_n),  static_cast<double>(t_vc),
                          static_cast<double>(t_gc), static_cast<double>(t_fc),
                          density,                   clustering};
  out.insert(out.end(), q.begin(), q.end());
  if (variant == FeatureVariant::base_features) {
    out.insert(out.end(), {s1, s2, s3, s4, s5, s6});
  }
  return out;
}

FeatureVector extract_features(const Graph& g, const GraphMetrics& m, const WorkloadDims& dims,
                               const ResolvedTiling& t, FeatureVariant variant) {
  FeatureVector x;
  x.variant = variant;
  x.v = m.v;
  x.e = m.e;
  x.t_va = t.t_va;
  x.t_fa = t.t_fa;
  x.t_n = t.t_n;
  x.t_vc = t.t_vc;
  x.t_gc = t.t_gc;
  x.t_fc = t.t_fc;
  x.density = m.density;
  x.clustering = m.clustering;
  x.q = m.quantiles;
  if (variant == FeatureVariant::base) return x;

  const double v = static_cast<double>(m.v);
  const double f = static_cast<double>(dims.input_features);
  const double gout = static_cast<double>(dims.output_features);
  const double mean_degree = m.mean_degree;

  x.s1 = v * f * (gout + mean_degree);
  x.s2 = v * f * gout / static_cast<double>(t.t_vc * t.t_fc * t.t_gc);
  x.s3 = v * f * mean_degree / static_cast<double>(t.t_n * t.t_fa);
  x.s4 = x.s1 + x.s3;
  double s5 = 0.0;
  for (std::uint32_t d : g.degrees()) {
    if (d == 0) continue;
    const double denom = static_cast<double>(std::min<std::uint64_t>(d, t.t_n) * t.t_fa);
    s5 += static_cast<double>(d) * f / denom;
  }
  x.s5 = s5;
  x.s6 = x.s3 + x.s5 / static_cast<double>(t.t_va);
  return x;
}

FeatureVector extract_features(const Graph& g, const WorkloadDims& dims, const ResolvedTiling& t,
                               FeatureVariant variant) {
  return extract_features(g, compute_metrics(g), dims, t, variant);
}

void FeatureTable::append(std::string graph_id, std::uint32_t config_index,
                          std::span<const double> values) {
  if (values.size() != cols()) throw InvariantError("feature row width mismatch");
  graph_ids.push_back(std::move(graph_id));
  config_indices.push_back(config_index);
  data.insert(data.end(), values.begin(), values.end());
}

FeatureTable feature_matrix(const std::vector<NamedGraph>& graphs, const WorkloadDims& dims,
                            const DataflowConfig& cfg, const AcceleratorParams& accel,
                            FeatureVariant variant) {
  if (graphs.empty()) throw DataError("cannot featurize an empty graph set");
  FeatureTable table;
  table.variant = variant;
  for (const auto& [id, g] : graphs) {
    const auto t = resolve_tiling(cfg.scheme, g, dims, accel);
    table.append(id, cfg.index(), extract_features(g, dims, t, variant).values());
  }
  return table;
}

FeatureTable feature_matrix_all(const std::vector<NamedGraph>& graphs, const WorkloadDims& dims,
                                const AcceleratorParams& accel, FeatureVariant variant) {
  if (graphs.empty()) throw DataError("cannot featurize an empty graph set");
  FeatureTable table;
  table.variant = variant;
  table.data.reserve(graphs.size() * kConfigCount * table.cols());
  for (const auto& [id, g] : graphs) {
    const GraphMetrics m = compute_metrics(g);
    for (TilingScheme scheme : kAllSchemes) {
      const auto t = resolve_tiling(scheme, g, dims, accel);
      const auto row = extract_features(g, m, dims, t, variant).values();
      for (InterPhase phase : kAllInterPhases) {
        table.append(id, DataflowConfig{scheme, phase}.index(), row);
      }
    }
  }
  return table;
}

std::string write_features_csv(const FeatureTable& table) {
  std::string out = "graph_id,config_index";
  for (auto c : feature_columns(table.variant)) {
    out += ',';
    out += c;
  }
  out += '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out += table.graph_ids[i];
    out += ',';
    out += std::to_string(table.config_indices[i]);
    for (double x : table.row(i)) {
      out += ',';
      out += csv::format_double(x);
    }
    out += '\n';
  }
  return out;
}

FeatureTable read_features_csv(std::string_view text) {
  const csv::Table raw = csv::parse(text);
  FeatureTable table;
  const std::size_t width = raw.header.size();
  if (width == 2 + kBaseColumns.size()) {
    table.variant = FeatureVariant::base;
  } else if (width == 2 + kFullColumns.size()) {
    table.variant = FeatureVariant::base_features;
  } else {
    throw DataError("feature CSV has " + std::to_string(width) + " columns; expected " +
                    std::to_string(2 + kBaseColumns.size()) + " or " +
                    std::to_string(2 + kFullColumns.size()));
  }
  const auto columns = feature_columns(table.variant);
  if (raw.header[0] != "graph_id" || raw.header[1] != "config_index") {
    throw DataError("feature CSV must start with graph_id,config_index");
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (raw.header[c + 2] != columns[c]) {
      throw DataError("feature CSV column " + std::to_string(c + 2) + " is '" + raw.header[c + 2] +
                      "', expected '" + std::string(columns[c]) + "'");
    }
  }
  std::vector<double> row(columns.size());
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const auto& fields = raw.rows[i];
    const std::size_t line = i + 2;
    const auto index = csv::parse_uint(fields[1], line);
    if (index >= kConfigCount) throw ParseError(line, "config_index out of range");
    for (std::size_t c = 0; c < columns.size(); ++c) {
      row[c] = csv::parse_double(fields[c + 2], line);
      if (!std::isfinite(row[c])) throw ParseError(line, "non-finite feature value");
    }
    table.append(fields[0], static_cast<std::uint32_t>(index), row);
  }
  return table;
}

}  // namespace gnnflow
