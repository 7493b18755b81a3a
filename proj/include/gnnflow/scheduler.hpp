#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnnflow/bank.hpp"
#include "gnnflow/dataflow.hpp"
#include "gnnflow/selector.hpp"

namespace gnnflow {

enum class Strategy : std::uint8_t { random, fcfs, lifo, sjf_nodes, sjf_edges, sjf_truth, sjf_predicted };
enum class TilingPolicy : std::uint8_t { predicted, random, oracle };

inline constexpr std::array<Strategy, 7> kAllStrategies = {
    Strategy::random,    Strategy::fcfs,      Strategy::lifo,         Strategy::sjf_nodes,
    Strategy::sjf_edges, Strategy::sjf_truth, Strategy::sjf_predicted};

std::string_view strategy_name(Strategy s);
std::string_view tiling_policy_name(TilingPolicy p);
Strategy parse_strategy(std::string_view s);
TilingPolicy parse_tiling_policy(std::string_view s);

/// Per-graph data the simulator needs: oracle cycles for all 24 configs and,
/// when a bank is available, the predicted cycles.
struct JobProfile {
  std::string graph_id;
  std::uint64_t node_count = 0;
  std::uint64_t edge_count = 0;
  std::array<std::uint64_t, kConfigCount> truth{};
  std::optional<ConfigValues> predicted;
};

struct Job {
  std::uint32_t job_id = 0;
  std::uint32_t profile = 0;  // index into the profile pool
  std::uint64_t release = 0;
};

struct AcceleratorUnit {
  std::uint32_t unit_id = 0;
  InterPhase inter_phase = InterPhase::seq;
  AcceleratorParams params;
};

/// One unit per inter-phase dataflow, ids 0..2.
std::vector<AcceleratorUnit> default_units(const AcceleratorParams& params = {});

struct ArrivalSpec {
  double pareto_shape = 2.0;
  double target_utilization = 0.85;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Mean gap m = s / (units * U), s the mean over jobs of the fastest
/// (unit, scheme) latency; gaps are Pareto(alpha, x_m) with x_m = m (alpha-1)/alpha.
double mean_interarrival(const std::vector<JobProfile>& profiles, const std::vector<std::uint32_t>& order,
                         std::size_t unit_count, const ArrivalSpec& spec);

/// Release times for `order.size()` jobs: rounded cumulative sums of the gaps.
std::vector<std::uint64_t> generate_arrivals(const std::vector<JobProfile>& profiles,
                                             const std::vector<std::uint32_t>& order,
                                             const std::vector<AcceleratorUnit>& units,
                                             const ArrivalSpec& spec);

/// Ordering key of `job` on `unit`; smaller runs first. `decision` is the
/// global dispatch counter, used only by the random strategy.
double job_key(Strategy strategy, const Job& job, const JobProfile& profile,
               const AcceleratorUnit& unit, std::uint64_t seed, std::uint64_t decision);

struct TraceRecord {
  std::uint32_t job_id = 0;
  std::string graph_id;
  std::uint64_t release = 0;
  std::uint64_t start = 0;
  std::uint64_t finish = 0;
  std::uint32_t unit_id = 0;
  TilingScheme scheme = TilingScheme::a;
  std::uint64_t exec_cycles = 0;
  std::optional<double> predicted_cycles;
};

struct ScheduleTrace {
  Strategy strategy = Strategy::fcfs;
  TilingPolicy tiling = TilingPolicy::oracle;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;  // in dispatch order
};

ScheduleTrace run_schedule(const std::vector<Job>& jobs, const std::vector<JobProfile>& profiles,
                           const std::vector<AcceleratorUnit>& units, Strategy strategy,
                           TilingPolicy tiling, std::uint64_t seed);

struct SchedMetrics {
  double mean_completion = 0.0;
  double mean_turnaround = 0.0;
  double mean_execution = 0.0;
};

SchedMetrics metrics(const ScheduleTrace& trace);

/// Throws InvariantError on any broken trace invariant (start before release,
/// finish != start + exec, overlapping busy intervals, a unit left idle while
/// a released job waits, missing or repeated jobs).
void check_trace(const ScheduleTrace& trace, const std::vector<Job>& jobs,
                 const std::vector<AcceleratorUnit>& units);

/// job_id,graph_id,release,start,finish,unit_id,scheme,exec_cycles,predicted_cycles
std::string trace_csv(const ScheduleTrace& trace);

struct Cell {
  Strategy strategy;
  TilingPolicy tiling;
};

/// Baselines with random tiling, SJF-Truth with oracle, SJF-Predicted with predicted.
std::vector<Cell> scenario_cells(int scenario);

struct Scenario {
  std::vector<JobProfile> profiles;
  std::vector<AcceleratorUnit> units;
  std::vector<Cell> cells;
  ArrivalSpec arrivals;  // seed is replaced per run
  std::size_t runs = 5;
  std::uint64_t base_seed = 0;
  bool shuffle_jobs = true;
};

struct ReportRow {
  Cell cell;
  SchedMetrics mean;
  SchedMetrics normalized;
  std::optional<SchedMetrics> speedup;  // this row / SJF-Predicted row
};

struct ScheduleReport {
  std::vector<ReportRow> rows;
  std::vector<std::vector<ScheduleTrace>> traces;  // [run][cell]
};

/// Job set for run r: the profile pool, shuffled with the run seed when
/// requested, with releases from `generate_arrivals`. Shared by all cells.
std::vector<Job> make_jobs(const Scenario& s, std::uint64_t run_seed);

ScheduleReport compare_strategies(const Scenario& s, bool keep_traces = false);

/// strategy,tiling_policy,mean_completion,mean_turnaround,mean_execution,
/// norm_completion,norm_turnaround,norm_execution,speedup_completion,
/// speedup_turnaround,speedup_execution
std::string report_csv(const ScheduleReport& r);

/// Builds profiles for `graph_ids` from labels and, if given, the bank.
std::vector<JobProfile> make_profiles(const std::vector<NamedGraph>& graphs, const LabelIndex& labels,
                                      const std::vector<std::string>& graph_ids,
                                      const PredictorBank* bank, const WorkloadDims& dims,
                                      const AcceleratorParams& accel);

}  // namespace gnnflow
