#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnnflow/graph.hpp"

namespace gnnflow {

/// Spatial accelerator resources. The register file size is recorded for
/// completeness; none of the cost laws read it.
struct AcceleratorParams {
  std::uint64_t pe_count = 512;
  std::uint64_t register_file_bytes_per_pe = 64;
  std::uint64_t global_buffer_bytes = 524288;
  std::uint64_t dram_words_per_cycle = 16;
  std::uint64_t bytes_per_word = 4;

  void validate() const;
  bool operator==(const AcceleratorParams&) const = default;
};

/// "key = value" lines with '#' comments. Keys not present keep their defaults.
AcceleratorParams parse_accelerator_params(std::string_view text);
std::string format_accelerator_params(const AcceleratorParams& p);

/// GCN layer dimensions: F input features, G output features.
struct WorkloadDims {
  std::uint64_t input_features = 32;
  std::uint64_t output_features = 32;

  void validate() const;
};

enum class TilingScheme : std::uint8_t { a, b, c, d, e, f, g, h };
enum class InterPhase : std::uint8_t { seq, sp, pp };

inline constexpr std::size_t kSchemeCount = 8;
inline constexpr std::size_t kInterPhaseCount = 3;
inline constexpr std::size_t kConfigCount = kSchemeCount * kInterPhaseCount;

inline constexpr std::array<TilingScheme, kSchemeCount> kAllSchemes{
    TilingScheme::a, TilingScheme::b, TilingScheme::c, TilingScheme::d,
    TilingScheme::e, TilingScheme::f, TilingScheme::g, TilingScheme::h};
inline constexpr std::array<InterPhase, kInterPhaseCount> kAllInterPhases{
    InterPhase::seq, InterPhase::sp, InterPhase::pp};

std::string_view scheme_name(TilingScheme s);
std::string_view inter_phase_name(InterPhase p);
TilingScheme parse_scheme(std::string_view s);
InterPhase parse_inter_phase(std::string_view s);

/// Tile sizes of both loop nests. Aggregation uses (t_va, t_fa, t_n), combination
/// (t_vc, t_gc, t_fc).
struct ResolvedTiling {
  std::uint64_t t_va = 1;
  std::uint64_t t_fa = 1;
  std::uint64_t t_n = 1;
  std::uint64_t t_vc = 1;
  std::uint64_t t_gc = 1;
  std::uint64_t t_fc = 1;

  bool operator==(const ResolvedTiling&) const = default;
};

/// One of the 24 (tiling scheme, inter-phase dataflow) points.
/// index = 3 * scheme + inter_phase.
struct DataflowConfig {
  TilingScheme scheme = TilingScheme::a;
  InterPhase inter_phase = InterPhase::seq;

  std::uint32_t index() const {
    return static_cast<std::uint32_t>(scheme) * kInterPhaseCount +
           static_cast<std::uint32_t>(inter_phase);
  }
  static DataflowConfig from_index(std::uint32_t index);

  bool operator==(const DataflowConfig&) const = default;
};

struct LatencyRecord {
  std::string graph_id;
  std::uint32_t config_index = 0;
  std::uint64_t cycles = 0;

  bool operator==(const LatencyRecord&) const = default;
};

/// Applies the tiling table row and fills the node-dimension tiles so the
/// phase uses as many PEs as possible: t_va = clamp(P / (t_fa t_n), 1, V),
/// t_vc = clamp(P / (t_gc t_fc), 1, V).
ResolvedTiling resolve_tiling(TilingScheme scheme, const Graph& g, const WorkloadDims& dims,
                              const AcceleratorParams& accel);
ResolvedTiling resolve_tiling(TilingScheme scheme, std::uint64_t node_count,
                              const WorkloadDims& dims, std::uint64_t pe_count);

/// Tiling for one phase of the parallel pipeline, given that phase's PE share.
/// Empty when the scheme's fixed unroll product does not fit the share.
std::optional<ResolvedTiling> resolve_pipeline_tiling(TilingScheme scheme,
                                                      std::uint64_t node_count,
                                                      const WorkloadDims& dims,
                                                      std::uint64_t aggregation_pes,
                                                      std::uint64_t combination_pes);

/// Per-group aggregation cost: nodes in id order form groups of t_va; a group
/// costs ceil(max(N_v, 1) / t_n) * ceil(F / t_fa) for its largest N_v.
std::vector<std::uint64_t> aggregation_group_cycles(const Graph& g, const WorkloadDims& dims,
                                                    const ResolvedTiling& t);

std::uint64_t aggregation_cycles(const Graph& g, const WorkloadDims& dims, const ResolvedTiling& t);

/// ceil(V / t_vc) * ceil(F / t_fc) * ceil(G / t_gc).
std::uint64_t combination_cycles(std::uint64_t v_count, const WorkloadDims& dims,
                                 const ResolvedTiling& t);

/// Extra cycles the sequential dataflow pays to spill the V x F intermediate
/// matrix to DRAM and read it back; zero when it fits the global buffer.
std::uint64_t dram_penalty_cycles(std::uint64_t v_count, const WorkloadDims& dims,
                                  const AcceleratorParams& accel);

/// Candidate PE shares for the aggregation stage of the parallel pipeline:
/// P*k/8 for k = 1..7, keeping both shares >= 1.
std::vector<std::uint64_t> pipeline_split_candidates(std::uint64_t pe_count);

/// Two-stage pipeline makespan over the same group sequence:
/// max_k (sum_{i<=k} agg_i + sum_{i>=k} comb_i).
std::uint64_t pipeline_makespan(const std::vector<std::uint64_t>& agg,
                                const std::vector<std::uint64_t>& comb);

/// Latency in cycles of one GCN layer under `cfg`.
std::uint64_t simulate_latency(const Graph& g, const WorkloadDims& dims, const DataflowConfig& cfg,
                               const AcceleratorParams& accel);

/// The 24 configurations in index order.
std::vector<DataflowConfig> enumerate_configs();

/// 24 records per graph in (graph, config_index) order.
std::vector<LatencyRecord> label_dataset(const std::vector<NamedGraph>& graphs,
                                         const WorkloadDims& dims, const AcceleratorParams& accel);

/// graph_id,config_index,scheme,inter_phase,cycles
std::string write_labels_csv(const std::vector<LatencyRecord>& records);
std::vector<LatencyRecord> read_labels_csv(std::string_view text);

}  // namespace gnnflow
