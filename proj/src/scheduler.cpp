#include "gnnflow/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "gnnflow/csv.hpp"
#include "gnnflow/error.hpp"
#include "gnnflow/rng.hpp"

namespace gnnflow {

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint64_t kRandomKeyStream = 0x6b6579;
constexpr std::uint64_t kRandomTileStream = 0x74696c65;
constexpr std::uint64_t kArrivalStream = 0x617272;
constexpr std::uint64_t kShuffleStream = 0x73687566;

std::uint64_t truth_cycles(const JobProfile& p, InterPhase phase, TilingScheme s) {
  return p.truth[DataflowConfig{s, phase}.index()];
}

const ConfigValues& predictions(const JobProfile& p) {
  if (!p.predicted) throw UsageError("job '" + p.graph_id + "' has no predicted latencies (no bank)");
  return *p.predicted;
}

TilingScheme choose_scheme(TilingPolicy policy, const Job& job, const JobProfile& p,
                           const AcceleratorUnit& unit, std::uint64_t seed) {
  switch (policy) {
    case TilingPolicy::random: {
      Rng rng(derive_seed(seed, kRandomTileStream, (std::uint64_t{job.job_id} << 32) | unit.unit_id));
      return kAllSchemes[uniform_int(rng, 0, kSchemeCount - 1)];
    }
    case TilingPolicy::oracle: {
      TilingScheme best = TilingScheme::a;
      for (TilingScheme s : kAllSchemes) {
        if (truth_cycles(p, unit.inter_phase, s) < truth_cycles(p, unit.inter_phase, best)) best = s;
      }
      return best;
    }
    case TilingPolicy::predicted: {
      const auto& pred = predictions(p);
      TilingScheme best = TilingScheme::a;
      for (TilingScheme s : kAllSchemes) {
        if (pred[DataflowConfig{s, unit.inter_phase}.index()] <
            pred[DataflowConfig{best, unit.inter_phase}.index()]) {
          best = s;
        }
      }
      return best;
    }
  }
  throw InvariantError("unknown tiling policy");
}

std::string fmt(double x) { return csv::format_double(x); }

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::random: return "random";
    case Strategy::fcfs: return "fcfs";
    case Strategy::lifo: return "lifo";
    case Strategy::sjf_nodes: return "sjf-nodes";
    case Strategy::sjf_edges: return "sjf-edges";
    case Strategy::sjf_truth: return "sjf-truth";
    case Strategy::sjf_predicted: return "sjf-predicted";
  }
  return "?";
}

std::string_view tiling_policy_name(TilingPolicy p) {
  switch (p) {
    case TilingPolicy::predicted: return "predicted";
    case TilingPolicy::random: return "random";
    case TilingPolicy::oracle: return "oracle";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  for (Strategy x : kAllStrategies) {
    if (strategy_name(x) == s) return x;
  }
  throw UsageError("unknown strategy '" + std::string(s) + "'");
}

TilingPolicy parse_tiling_policy(std::string_view s) {
  for (TilingPolicy p : {TilingPolicy::predicted, TilingPolicy::random, TilingPolicy::oracle}) {
    if (tiling_policy_name(p) == s) return p;
  }
  throw UsageError("unknown tiling policy '" + std::string(s) + "'");
}

std::vector<AcceleratorUnit> default_units(const AcceleratorParams& params) {
  std::vector<AcceleratorUnit> units;
  for (InterPhase p : kAllInterPhases) {
    units.push_back({static_cast<std::uint32_t>(units.size()), p, params});
  }
  return units;
}

void ArrivalSpec::validate() const {
  if (!(pareto_shape > 1.0) || !std::isfinite(pareto_shape)) {
    throw UsageError("pareto shape must be > 1");
  }
  if (!(target_utilization > 0.0 && target_utilization < 1.0)) {
    throw UsageError("utilization must lie in (0, 1)");
  }
}

double mean_interarrival(const std::vector<JobProfile>& profiles, const std::vector<std::uint32_t>& order,
                         std::size_t unit_count, const ArrivalSpec& spec) {
  spec.validate();
  if (order.empty()) throw DataError("no jobs");
  if (unit_count == 0) throw UsageError("no accelerator units");
  double total = 0.0;
  for (std::uint32_t idx : order) {
    const auto& t = profiles.at(idx).truth;
    total += static_cast<double>(*std::min_element(t.begin(), t.end()));
  }
  const double mean_service = total / static_cast<double>(order.size());
  return mean_service / (static_cast<double>(unit_count) * spec.target_utilization);
}

std::vector<std::uint64_t> generate_arrivals(const std::vector<JobProfile>& profiles,
                                             const std::vector<std::uint32_t>& order,
                                             const std::vector<AcceleratorUnit>& units,
                                             const ArrivalSpec& spec) {
  const double m = mean_interarrival(profiles, order, units.size(), spec);
  const double alpha = spec.pareto_shape;
  const double x_m = m * (alpha - 1.0) / alpha;
  Rng rng(derive_seed(spec.seed, kArrivalStream));
  std::vector<std::uint64_t> releases;
  releases.reserve(order.size());
  double clock = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double u = 1.0 - uniform01(rng);  // (0, 1]
    clock += x_m / std::pow(u, 1.0 / alpha);
    releases.push_back(static_cast<std::uint64_t>(std::llround(clock)));
  }
  return releases;
}

double job_key(Strategy strategy, const Job& job, const JobProfile& p, const AcceleratorUnit& unit,
               std::uint64_t seed, std::uint64_t decision) {
  switch (strategy) {
    case Strategy::random:
      return uniform01(derive_seed(seed, kRandomKeyStream, (std::uint64_t{job.job_id} << 32) ^ decision));
    case Strategy::fcfs: return static_cast<double>(job.release);
    case Strategy::lifo: return -static_cast<double>(job.release);
    case Strategy::sjf_nodes: return static_cast<double>(p.node_count);
    case Strategy::sjf_edges: return static_cast<double>(p.edge_count);
    case Strategy::sjf_truth: {
      std::uint64_t best = kNever;
      for (TilingScheme s : kAllSchemes) best = std::min(best, truth_cycles(p, unit.inter_phase, s));
      return static_cast<double>(best);
    }
    case Strategy::sjf_predicted: {
      const auto& pred = predictions(p);
      double best = std::numeric_limits<double>::infinity();
      for (TilingScheme s : kAllSchemes) {
        best = std::min(best, pred[DataflowConfig{s, unit.inter_phase}.index()]);
      }
      return best;
    }
  }
  throw InvariantError("unknown strategy");
}

ScheduleTrace run_schedule(const std::vector<Job>& jobs, const std::vector<JobProfile>& profiles,
                           const std::vector<AcceleratorUnit>& units, Strategy strategy,
                           TilingPolicy tiling, std::uint64_t seed) {
  if (units.empty()) throw UsageError("no accelerator units");
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i].unit_id != i) throw UsageError("unit ids must be 0..n-1 in order");
  }
  for (const auto& j : jobs) {
    if (j.profile >= profiles.size()) throw DataError("job refers to a missing graph profile");
  }

  ScheduleTrace trace;
  trace.strategy = strategy;
  trace.tiling = tiling;
  trace.seed = seed;
  trace.records.reserve(jobs.size());

  std::vector<std::size_t> arrivals(jobs.size());
  std::iota(arrivals.begin(), arrivals.end(), 0);
  std::sort(arrivals.begin(), arrivals.end(), [&](std::size_t a, std::size_t b) {
    if (jobs[a].release != jobs[b].release) return jobs[a].release < jobs[b].release;
    return jobs[a].job_id < jobs[b].job_id;
  });

  std::vector<std::uint64_t> busy_until(units.size(), 0);
  std::vector<bool> running(units.size(), false);
  std::vector<std::size_t> queue;
  std::size_t next_arrival = 0;
  std::uint64_t decision = 0;

  while (true) {
    std::uint64_t t = next_arrival < arrivals.size() ? jobs[arrivals[next_arrival]].release : kNever;
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (running[u]) t = std::min(t, busy_until[u]);
    }
    if (t == kNever) break;

    for (std::size_t u = 0; u < units.size(); ++u) {
      if (running[u] && busy_until[u] == t) running[u] = false;
    }
    while (next_arrival < arrivals.size() && jobs[arrivals[next_arrival]].release == t) {
      queue.push_back(arrivals[next_arrival++]);
    }

    for (std::size_t u = 0; u < units.size() && !queue.empty(); ++u) {
      if (running[u]) continue;
      const auto& unit = units[u];
      std::size_t best_pos = 0;
      double best_key = 0.0;
      for (std::size_t pos = 0; pos < queue.size(); ++pos) {
        const Job& j = jobs[queue[pos]];
        const double key = job_key(strategy, j, profiles[j.profile], unit, seed, decision);
        if (pos == 0) {
          best_key = key;
          continue;
        }
        const Job& b = jobs[queue[best_pos]];
        if (key < best_key ||
            (key == best_key && (j.release < b.release || (j.release == b.release && j.job_id < b.job_id)))) {
          best_key = key;
          best_pos = pos;
        }
      }
      const Job& job = jobs[queue[best_pos]];
      queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(best_pos));
      ++decision;

      const JobProfile& p = profiles[job.profile];
      const TilingScheme scheme = choose_scheme(tiling, job, p, unit, seed);
      const std::uint64_t exec = truth_cycles(p, unit.inter_phase, scheme);
      if (exec == 0) throw DataError("zero latency label for '" + p.graph_id + "'");

      TraceRecord rec;
      rec.job_id = job.job_id;
      rec.graph_id = p.graph_id;
      rec.release = job.release;
      rec.start = t;
      rec.finish = t + exec;
      rec.unit_id = unit.unit_id;
      rec.scheme = scheme;
      rec.exec_cycles = exec;
      if (p.predicted) rec.predicted_cycles = (*p.predicted)[DataflowConfig{scheme, unit.inter_phase}.index()];
      trace.records.push_back(std::move(rec));

      running[u] = true;
      busy_until[u] = t + exec;
    }
  }
  return trace;
}

SchedMetrics metrics(const ScheduleTrace& trace) {
  if (trace.records.empty()) throw DataError("metrics of an empty trace");
  double c = 0.0, ta = 0.0, ex = 0.0;
  for (const auto& r : trace.records) {
    c += static_cast<double>(r.finish);
    ta += static_cast<double>(r.finish - r.release);
    ex += static_cast<double>(r.finish - r.start);
  }
  const double n = static_cast<double>(trace.records.size());
  return {c / n, ta / n, ex / n};
}

void check_trace(const ScheduleTrace& trace, const std::vector<Job>& jobs,
                 const std::vector<AcceleratorUnit>& units) {
  if (trace.records.size() != jobs.size()) throw InvariantError("trace does not cover every job");
  std::unordered_map<std::uint32_t, std::uint64_t> release;
  for (const auto& j : jobs) release.emplace(j.job_id, j.release);
  std::vector<bool> seen_job(jobs.size(), false);
  std::unordered_map<std::uint32_t, std::size_t> slot;
  for (std::size_t i = 0; i < jobs.size(); ++i) slot.emplace(jobs[i].job_id, i);

  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> busy(units.size());
  for (const auto& r : trace.records) {
    const auto it = slot.find(r.job_id);
    if (it == slot.end() || seen_job[it->second]) throw InvariantError("unknown or repeated job in trace");
    seen_job[it->second] = true;
    if (r.release != release.at(r.job_id)) throw InvariantError("release mismatch");
    if (r.start < r.release) throw InvariantError("job started before release");
    if (r.finish != r.start + r.exec_cycles) throw InvariantError("finish != start + exec");
    if (r.unit_id >= units.size()) throw InvariantError("unknown unit");
    busy[r.unit_id].emplace_back(r.start, r.finish);
  }

  // Idle gaps per unit, then no job may wait across any of them.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> gaps;
  for (auto& b : busy) {
    std::sort(b.begin(), b.end());
    std::uint64_t cursor = 0;
    for (const auto& [s, f] : b) {
      if (s < cursor) throw InvariantError("overlapping busy intervals");
      if (s > cursor) gaps.emplace_back(cursor, s);
      cursor = f;
    }
    gaps.emplace_back(cursor, kNever);
  }
  for (const auto& r : trace.records) {
    if (r.start == r.release) continue;
    for (const auto& [a, b] : gaps) {
      if (std::max(a, r.release) < std::min(b, r.start)) {
        throw InvariantError("a unit idled while job " + std::to_string(r.job_id) + " waited");
      }
    }
  }
}

std::string trace_csv(const ScheduleTrace& trace) {
  std::string out = "job_id,graph_id,release,start,finish,unit_id,scheme,exec_cycles,predicted_cycles\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.job_id) + "," + r.graph_id + "," + std::to_string(r.release) + "," +
           std::to_string(r.start) + "," + std::to_string(r.finish) + "," + std::to_string(r.unit_id) +
           "," + std::string(scheme_name(r.scheme)) + "," + std::to_string(r.exec_cycles) + "," +
           (r.predicted_cycles ? fmt(*r.predicted_cycles) : std::string()) + "\n";
  }
  return out;
}

std::vector<Cell> scenario_cells(int scenario) {
  if (scenario != 1 && scenario != 2) throw UsageError("scenario must be 1 or 2");
  const TilingPolicy baseline = scenario == 1 ? TilingPolicy::random : TilingPolicy::oracle;
  return {{Strategy::random, baseline},        {Strategy::fcfs, baseline},
          {Strategy::lifo, baseline},          {Strategy::sjf_nodes, baseline},
          {Strategy::sjf_edges, baseline},     {Strategy::sjf_truth, TilingPolicy::oracle},
          {Strategy::sjf_predicted, TilingPolicy::predicted}};
}

std::vector<Job> make_jobs(const Scenario& s, std::uint64_t run_seed) {
  std::vector<std::uint32_t> order(s.profiles.size());
  std::iota(order.begin(), order.end(), 0u);
  if (s.shuffle_jobs) {
    Rng rng(derive_seed(run_seed, kShuffleStream));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_int(rng, 0, i - 1)]);
    }
  }
  ArrivalSpec spec = s.arrivals;
  spec.seed = run_seed;
  const auto releases = generate_arrivals(s.profiles, order, s.units, spec);
  std::vector<Job> jobs(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    jobs[i] = {static_cast<std::uint32_t>(i), order[i], releases[i]};
  }
  return jobs;
}

ScheduleReport compare_strategies(const Scenario& s, bool keep_traces) {
  if (s.runs == 0) throw UsageError("runs must be >= 1");
  if (s.cells.empty()) throw UsageError("no strategies requested");
  ScheduleReport report;
  report.rows.resize(s.cells.size());
  for (std::size_t c = 0; c < s.cells.size(); ++c) report.rows[c].cell = s.cells[c];

  for (std::size_t run = 0; run < s.runs; ++run) {
    const std::uint64_t seed = s.base_seed + run;
    const auto jobs = make_jobs(s, seed);
    if (keep_traces) report.traces.emplace_back();
    for (std::size_t c = 0; c < s.cells.size(); ++c) {
      auto trace = run_schedule(jobs, s.profiles, s.units, s.cells[c].strategy, s.cells[c].tiling, seed);
      const auto m = metrics(trace);
      auto& acc = report.rows[c].mean;
      acc.mean_completion += m.mean_completion;
      acc.mean_turnaround += m.mean_turnaround;
      acc.mean_execution += m.mean_execution;
      if (keep_traces) report.traces.back().push_back(std::move(trace));
    }
  }

  const double runs = static_cast<double>(s.runs);
  SchedMetrics max{};
  for (auto& row : report.rows) {
    row.mean.mean_completion /= runs;
    row.mean.mean_turnaround /= runs;
    row.mean.mean_execution /= runs;
    max.mean_completion = std::max(max.mean_completion, row.mean.mean_completion);
    max.mean_turnaround = std::max(max.mean_turnaround, row.mean.mean_turnaround);
    max.mean_execution = std::max(max.mean_execution, row.mean.mean_execution);
  }
  const ReportRow* ours = nullptr;
  for (const auto& row : report.rows) {
    if (row.cell.strategy == Strategy::sjf_predicted && row.cell.tiling == TilingPolicy::predicted) {
      ours = &row;
      break;
    }
  }
  const auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
  for (auto& row : report.rows) {
    row.normalized = {ratio(row.mean.mean_completion, max.mean_completion),
                      ratio(row.mean.mean_turnaround, max.mean_turnaround),
                      ratio(row.mean.mean_execution, max.mean_execution)};
    if (ours) {
      row.speedup = SchedMetrics{ratio(row.mean.mean_completion, ours->mean.mean_completion),
                                 ratio(row.mean.mean_turnaround, ours->mean.mean_turnaround),
                                 ratio(row.mean.mean_execution, ours->mean.mean_execution)};
    }
  }
  return report;
}

std::string report_csv(const ScheduleReport& r) {
  std::string out =
      "strategy,tiling_policy,mean_completion,mean_turnaround,mean_execution,norm_completion,"
      "norm_turnaround,norm_execution,speedup_completion,speedup_turnaround,speedup_execution\n";
  for (const auto& row : r.rows) {
    out += std::string(strategy_name(row.cell.strategy)) + "," +
           std::string(tiling_policy_name(row.cell.tiling)) + "," + fmt(row.mean.mean_completion) +
           "," + fmt(row.mean.mean_turnaround) + "," + fmt(row.mean.mean_execution) + "," +
           fmt(row.normalized.mean_completion) + "," + fmt(row.normalized.mean_turnaround) + "," +
           fmt(row.normalized.mean_execution) + ",";
    if (row.speedup) {
      out += fmt(row.speedup->mean_completion) + "," + fmt(row.speedup->mean_turnaround) + "," +
             fmt(row.speedup->mean_execution);
    } else {
      out += ",,";
    }
    out += "\n";
  }
  return out;
}

std::vector<JobProfile> make_profiles(const std::vector<NamedGraph>& graphs, const LabelIndex& labels,
                                      const std::vector<std::string>& graph_ids,
                                      const PredictorBank* bank, const WorkloadDims& dims,
                                      const AcceleratorParams& accel) {
  std::unordered_map<std::string, const Graph*> by_id;
  for (const auto& g : graphs) by_id.emplace(g.id, &g.graph);
  const auto& ids = graph_ids.empty() ? labels.graph_ids : graph_ids;
  std::vector<JobProfile> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("no graph file for '" + id + "'");
    JobProfile p;
    p.graph_id = id;
    p.node_count = it->second->node_count();
    p.edge_count = it->second->edge_count();
    p.truth = labels.cycles[labels.find(id)];
    if (bank) p.predicted = predict_all(*bank, *it->second, dims, accel);
    out.push_back(std::move(p));
  }
  if (out.empty()) throw DataError("empty job pool");
  return out;
}

}  // namespace gnnflow
