#include "gnnflow/dataflow.hpp"

#include <algorithm>
#include <limits>

#include "gnnflow/csv.hpp"
#include "gnnflow/error.hpp"
#include "gnnflow/kernels.hpp"

namespace gnnflow {

namespace {

constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// Fixed tiles of one tiling-table row (everything except the node tiles).
struct TableRow {
  std::uint64_t t_fa, t_n, t_gc, t_fc;
};

TableRow table_row(TilingScheme scheme, std::uint64_t v, std::uint64_t f, std::uint64_t agg_pes,
                   std::uint64_t comb_pes) {
  const std::uint64_t half_f = std::max<std::uint64_t>(1, f / 2);
  switch (scheme) {
    case TilingScheme::a:
      return {std::min(agg_pes, f), 1, 1, std::min(comb_pes, f)};
    case TilingScheme::b:
      return {std::min<std::uint64_t>(2, f), half_f, 1, std::min<std::uint64_t>(2, f)};
    case TilingScheme::c:
      return {std::min<std::uint64_t>(8, f), half_f, 1, std::min<std::uint64_t>(8, f)};
    case TilingScheme::d:
      return {1, 1, 1, 1};
    case TilingScheme::e:
      return {std::min<std::uint64_t>(18, f), half_f, 1, std::min<std::uint64_t>(18, f)};
    case TilingScheme::f:
      return {1, std::min<std::uint64_t>(18, v), 1, 1};
    case TilingScheme::g:
      return {std::min<std::uint64_t>(18, f), 1, 1, std::min<std::uint64_t>(85, f)};
    case TilingScheme::h:
      return {1, std::min<std::uint64_t>(18, v), 1, std::min<std::uint64_t>(85, f)};
  }
  throw InvariantError("unknown tiling scheme");
}

ResolvedTiling fill_node_tiles(const TableRow& row, std::uint64_t v, std::uint64_t agg_pes,
                               std::uint64_t comb_pes) {
  const std::uint64_t vmax = std::max<std::uint64_t>(1, v);
  ResolvedTiling t;
  t.t_fa = row.t_fa;
  t.t_n = row.t_n;
  t.t_gc = row.t_gc;
  t.t_fc = row.t_fc;
  t.t_va = std::clamp<std::uint64_t>(agg_pes / (t.t_fa * t.t_n), 1, vmax);
  t.t_vc = std::clamp<std::uint64_t>(comb_pes / (t.t_gc * t.t_fc), 1, vmax);
  return t;
}

std::vector<std::uint64_t> group_sizes(std::uint64_t v, std::uint64_t group) {
  std::vector<std::uint64_t> sizes;
  sizes.reserve(ceil_div(v, group));
  for (std::uint64_t lo = 0; lo < v; lo += group) sizes.push_back(std::min(group, v - lo));
  return sizes;
}

std::vector<std::uint64_t> combination_group_cycles(const std::vector<std::uint64_t>& sizes,
                                                    const WorkloadDims& dims,
                                                    const ResolvedTiling& t) {
  const std::uint64_t per_tile =
      ceil_div(dims.input_features, t.t_fc) * ceil_div(dims.output_features, t.t_gc);
  std::vector<std::uint64_t> out;
  out.reserve(sizes.size());
  for (std::uint64_t s : sizes) out.push_back(ceil_div(s, t.t_vc) * per_tile);
  return out;
}

std::uint64_t sum(const std::vector<std::uint64_t>& xs) {
  std::uint64_t total = 0;
  for (std::uint64_t x : xs) total += x;
  return total;
}

std::uint64_t sequential_latency(const Graph& g, const WorkloadDims& dims,
                                 const ResolvedTiling& t, const AcceleratorParams& accel) {
  const std::uint64_t v = g.node_count();
  return aggregation_cycles(g, dims, t) + combination_cycles(v, dims, t) +
         dram_penalty_cycles(v, dims, accel);
}

std::uint64_t parse_param_value(std::string_view key, std::string_view value, std::size_t line) {
  try {
    return csv::parse_uint(value, line);
  } catch (const ParseError&) {
    throw ParseError(line, "'" + std::string(key) + "' expects a positive integer");
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void AcceleratorParams::validate() const {
  if (pe_count < 1) throw UsageError("pe_count must be >= 1");
  if (register_file_bytes_per_pe < 1 || global_buffer_bytes < 1 || dram_words_per_cycle < 1 ||
      bytes_per_word < 1) {
    throw UsageError("accelerator parameters must be positive");
  }
}

AcceleratorParams parse_accelerator_params(std::string_view text) {
  AcceleratorParams p;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto sep = line.find('=');
    if (sep == std::string_view::npos) sep = line.find(':');
    if (sep == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, sep));
    const std::string_view value = trim(line.substr(sep + 1));
    const std::uint64_t x = parse_param_value(key, value, line_no);
    if (key == "pe_count") {
      p.pe_count = x;
    } else if (key == "register_file_bytes_per_pe") {
      p.register_file_bytes_per_pe = x;
    } else if (key == "global_buffer_bytes") {
      p.global_buffer_bytes = x;
    } else if (key == "dram_words_per_cycle") {
      p.dram_words_per_cycle = x;
    } else if (key == "bytes_per_word") {
      p.bytes_per_word = x;
    } else {
      throw ParseError(line_no, "unknown accelerator key '" + std::string(key) + "'");
    }
    if (end == text.size()) break;
  }
  try {
    p.validate();
  } catch (const UsageError& e) {
    throw ParseError(0, e.what());
  }
  return p;
}

std::string format_accelerator_params(const AcceleratorParams& p) {
  return "pe_count = " + std::to_string(p.pe_count) + "\n" +
         "register_file_bytes_per_pe = " + std::to_string(p.register_file_bytes_per_pe) + "\n" +
         "global_buffer_bytes = " + std::to_string(p.global_buffer_bytes) + "\n" +
         "dram_words_per_cycle = " + std::to_string(p.dram_words_per_cycle) + "\n" +
         "bytes_per_word = " + std::to_string(p.bytes_per_word) + "\n";
}

void WorkloadDims::validate() const {
  if (input_features < 1 || output_features < 1) {
    throw UsageError("feature dimensions F and G must be >= 1");
  }
}

std::string_view scheme_name(TilingScheme s) {
  static constexpr std::string_view names[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
  return names[static_cast<std::size_t>(s)];
}

std::string_view inter_phase_name(InterPhase p) {
  static constexpr std::string_view names[] = {"seq", "sp", "pp"};
  return names[static_cast<std::size_t>(p)];
}

TilingScheme parse_scheme(std::string_view s) {
  for (TilingScheme x : kAllSchemes) {
    if (scheme_name(x) == s) return x;
  }
  throw DataError("unknown tiling scheme '" + std::string(s) + "'");
}

InterPhase parse_inter_phase(std::string_view s) {
  for (InterPhase x : kAllInterPhases) {
    if (inter_phase_name(x) == s) return x;
  }
  throw DataError("unknown inter-phase dataflow '" + std::string(s) + "'");
}

DataflowConfig DataflowConfig::from_index(std::uint32_t index) {
  if (index >= kConfigCount) {
    throw DataError("config index " + std::to_string(index) + " out of range");
  }
  return {static_cast<TilingScheme>(index / kInterPhaseCount),
          static_cast<InterPhase>(index % kInterPhaseCount)};
}

ResolvedTiling resolve_tiling(TilingScheme scheme, std::uint64_t node_count,
                              const WorkloadDims& dims, std::uint64_t pe_count) {
  TableRow row = table_row(scheme, node_count, dims.input_features, pe_count, pe_count);
  // Keep both fixed unroll products within the array (only bites when F > 2P or P < 85).
  row.t_fa = std::min(row.t_fa, pe_count);
  row.t_n = std::min(row.t_n, std::max<std::uint64_t>(1, pe_count / row.t_fa));
  row.t_fc = std::min(row.t_fc, pe_count);
  return fill_node_tiles(row, node_count, pe_count, pe_count);
}

ResolvedTiling resolve_tiling(TilingScheme scheme, const Graph& g, const WorkloadDims& dims,
                              const AcceleratorParams& accel) {
  return resolve_tiling(scheme, g.node_count(), dims, accel.pe_count);
}

std::optional<ResolvedTiling> resolve_pipeline_tiling(TilingScheme scheme,
                                                      std::uint64_t node_count,
                                                      const WorkloadDims& dims,
                                                      std::uint64_t aggregation_pes,
                                                      std::uint64_t combination_pes) {
  if (aggregation_pes == 0 || combination_pes == 0) return std::nullopt;
  const TableRow row =
      table_row(scheme, node_count, dims.input_features, aggregation_pes, combination_pes);
  if (row.t_fa * row.t_n > aggregation_pes || row.t_gc * row.t_fc > combination_pes) {
    return std::nullopt;
  }
  return fill_node_tiles(row, node_count, aggregation_pes, combination_pes);
}

std::vector<std::uint64_t> aggregation_group_cycles(const Graph& g, const WorkloadDims& dims,
                                                    const ResolvedTiling& t) {
  const auto degrees = g.degrees();
  std::vector<std::uint32_t> maxima(ceil_div(degrees.size(), t.t_va));
  kernels::active().group_max(degrees, t.t_va, maxima);
  const std::uint64_t feature_passes = ceil_div(dims.input_features, t.t_fa);
  std::vector<std::uint64_t> out;
  out.reserve(maxima.size());
  for (std::uint32_t m : maxima) {
    out.push_back(ceil_div(std::max<std::uint64_t>(m, 1), t.t_n) * feature_passes);
  }
  return out;
}

std::uint64_t aggregation_cycles(const Graph& g, const WorkloadDims& dims, const ResolvedTiling& t) {
  return sum(aggregation_group_cycles(g, dims, t));
}

std::uint64_t combination_cycles(std::uint64_t v_count, const WorkloadDims& dims,
                                 const ResolvedTiling& t) {
  return ceil_div(v_count, t.t_vc) * ceil_div(dims.input_features, t.t_fc) *
         ceil_div(dims.output_features, t.t_gc);
}

std::uint64_t dram_penalty_cycles(std::uint64_t v_count, const WorkloadDims& dims,
                                  const AcceleratorParams& accel) {
  const std::uint64_t words = v_count * dims.input_features;
  if (words * accel.bytes_per_word <= accel.global_buffer_bytes) return 0;
  return 2 * ceil_div(words, accel.dram_words_per_cycle);
}

std::vector<std::uint64_t> pipeline_split_candidates(std::uint64_t pe_count) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t k = 1; k <= 7; ++k) {
    const std::uint64_t share = pe_count * k / 8;
    if (share < 1 || share >= pe_count) continue;
    if (!out.empty() && out.back() == share) continue;
    out.push_back(share);
  }
  return out;
}

std::uint64_t pipeline_makespan(const std::vector<std::uint64_t>& agg,
                                const std::vector<std::uint64_t>& comb) {
  if (agg.size() != comb.size()) throw InvariantError("pipeline stages disagree on group count");
  std::uint64_t suffix = sum(comb);
  std::uint64_t prefix = 0;
  std::uint64_t makespan = 0;
  for (std::size_t k = 0; k < agg.size(); ++k) {
    prefix += agg[k];
    makespan = std::max(makespan, prefix + suffix);
    suffix -= comb[k];
  }
  return makespan;
}

std::uint64_t simulate_latency(const Graph& g, const WorkloadDims& dims, const DataflowConfig& cfg,
                               const AcceleratorParams& accel) {
  const std::uint64_t v = g.node_count();
  const ResolvedTiling t = resolve_tiling(cfg.scheme, g, dims, accel);
  switch (cfg.inter_phase) {
    case InterPhase::seq:
      return sequential_latency(g, dims, t, accel);

    case InterPhase::sp: {
      const auto agg = aggregation_group_cycles(g, dims, t);
      const auto comb = combination_group_cycles(group_sizes(v, t.t_va), dims, t);
      return sum(agg) + sum(comb);
    }

    case InterPhase::pp: {
      std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
      for (std::uint64_t agg_pes : pipeline_split_candidates(accel.pe_count)) {
        const auto split =
            resolve_pipeline_tiling(cfg.scheme, v, dims, agg_pes, accel.pe_count - agg_pes);
        if (!split) continue;
        const auto agg = aggregation_group_cycles(g, dims, *split);
        const auto comb = combination_group_cycles(group_sizes(v, split->t_va), dims, *split);
        best = std::min(best, pipeline_makespan(agg, comb));
      }
      if (best == std::numeric_limits<std::uint64_t>::max()) {
        return sequential_latency(g, dims, t, accel);
      }
      return best;
    }
  }
  throw InvariantError("unknown inter-phase dataflow");
}

std::vector<DataflowConfig> enumerate_configs() {
  std::vector<DataflowConfig> out;
  out.reserve(kConfigCount);
  for (std::uint32_t i = 0; i < kConfigCount; ++i) out.push_back(DataflowConfig::from_index(i));
  return out;
}

std::vector<LatencyRecord> label_dataset(const std::vector<NamedGraph>& graphs,
                                         const WorkloadDims& dims, const AcceleratorParams& accel) {
  if (graphs.empty()) throw DataError("cannot label an empty graph set");
  dims.validate();
  accel.validate();
  const auto configs = enumerate_configs();
  std::vector<LatencyRecord> records;
  records.reserve(graphs.size() * kConfigCount);
  for (const auto& [id, g] : graphs) {
    for (const auto& cfg : configs) {
      records.push_back({id, cfg.index(), simulate_latency(g, dims, cfg, accel)});
    }
  }
  return records;
}

std::string write_labels_csv(const std::vector<LatencyRecord>& records) {
  std::string out = "graph_id,config_index,scheme,inter_phase,cycles\n";
  for (const auto& r : records) {
    const auto cfg = DataflowConfig::from_index(r.config_index);
    out += r.graph_id;
    out += ',';
    out += std::to_string(r.config_index);
    out += ',';
    out += scheme_name(cfg.scheme);
    out += ',';
    out += inter_phase_name(cfg.inter_phase);
    out += ',';
    out += std::to_string(r.cycles);
    out += '\n';
  }
  return out;
}

std::vector<LatencyRecord> read_labels_csv(std::string_view text) {
  const csv::Table table = csv::parse(text);
  const std::size_t c_graph = table.column("graph_id");
  const std::size_t c_index = table.column("config_index");
  const std::size_t c_scheme = table.column("scheme");
  const std::size_t c_phase = table.column("inter_phase");
  const std::size_t c_cycles = table.column("cycles");
  std::vector<LatencyRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t line = i + 2;
    LatencyRecord r;
    r.graph_id = row[c_graph];
    r.config_index = static_cast<std::uint32_t>(csv::parse_uint(row[c_index], line));
    if (r.config_index >= kConfigCount) throw ParseError(line, "config_index out of range");
    const auto cfg = DataflowConfig::from_index(r.config_index);
    if (parse_scheme(row[c_scheme]) != cfg.scheme ||
        parse_inter_phase(row[c_phase]) != cfg.inter_phase) {
      throw ParseError(line, "scheme/inter_phase inconsistent with config_index");
    }
    r.cycles = csv::parse_uint(row[c_cycles], line);
    if (r.cycles < 1) throw ParseError(line, "cycles must be >= 1");
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace gnnflow
