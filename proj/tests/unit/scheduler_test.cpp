#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "gnnflow/error.hpp"
#include "gnnflow/scheduler.hpp"

using namespace gnnflow;

namespace {

JobProfile flat_profile(std::string id, std::uint64_t cycles) {
  JobProfile p;
  p.graph_id = std::move(id);
  p.node_count = cycles;
  p.edge_count = cycles;
  p.truth.fill(cycles);
  return p;
}

std::vector<AcceleratorUnit> one_unit() { return {AcceleratorUnit{0, InterPhase::seq, {}}}; }

std::vector<JobProfile> random_profiles(std::mt19937_64& rng, std::size_t n, bool with_predictions) {
  std::vector<JobProfile> out;
  for (std::size_t i = 0; i < n; ++i) {
    JobProfile p;
    p.graph_id = "g" + std::to_string(i);
    p.node_count = 10 + rng() % 200;
    p.edge_count = p.node_count + rng() % 1000;
    ConfigValues pred{};
    for (std::size_t c = 0; c < kConfigCount; ++c) {
      p.truth[c] = 50 + rng() % 5000;
      pred[c] = static_cast<double>(p.truth[c]) * (0.8 + 0.4 * static_cast<double>(rng() % 100) / 100.0);
    }
    if (with_predictions) p.predicted = pred;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Job> random_jobs(std::mt19937_64& rng, std::size_t n, std::size_t profiles, std::uint64_t span) {
  std::vector<Job> jobs(n);
  for (std::size_t i = 0; i < n; ++i) {
    jobs[i] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(rng() % profiles), rng() % (span + 1)};
  }
  return jobs;
}

std::vector<std::uint32_t> identity(std::size_t n) {
  std::vector<std::uint32_t> o(n);
  std::iota(o.begin(), o.end(), 0u);
  return o;
}

}  // namespace

TEST_SUITE("scheduler") {
  TEST_CASE("arrival calibration") {
    std::vector<JobProfile> p{flat_profile("a", 200), flat_profile("b", 400)};
    p[1].truth[13] = 400;
    const ArrivalSpec spec{2.0, 0.85, 7};
    const double m = mean_interarrival(p, identity(2), 3, spec);
    CHECK(m == doctest::Approx(300.0 / (3 * 0.85)));
    CHECK(m == doctest::Approx(117.647).epsilon(1e-4));

    // every gap is at least x_m = m/2; with many draws the sample mean approaches m
    std::vector<JobProfile> many(20000, flat_profile("x", 300));
    const auto units = default_units();
    const auto r = generate_arrivals(many, identity(many.size()), units, spec);
    CHECK(r == generate_arrivals(many, identity(many.size()), units, spec));
    double prev = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double gap = static_cast<double>(r[i]) - prev;
      prev = static_cast<double>(r[i]);
      REQUIRE(gap >= m / 2.0 - 1.0);
    }
    CHECK(static_cast<double>(r.back()) / static_cast<double>(r.size()) == doctest::Approx(m).epsilon(0.05));

    ArrivalSpec other = spec;
    other.seed = 8;
    CHECK(generate_arrivals(many, identity(10), units, other) != generate_arrivals(many, identity(10), units, spec));
    ArrivalSpec bad = spec;
    bad.pareto_shape = 1.0;
    CHECK_THROWS_AS(generate_arrivals(many, identity(10), units, bad), UsageError);
    bad = spec;
    bad.target_utilization = 1.0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
  }

  TEST_CASE("low utilization means no queueing") {
    std::mt19937_64 rng(81);
    const auto profiles = random_profiles(rng, 200, false);
    const auto units = default_units();
    const ArrivalSpec spec{2.0, 0.01, 3};
    const auto rel = generate_arrivals(profiles, identity(200), units, spec);
    std::vector<Job> jobs;
    for (std::uint32_t i = 0; i < 200; ++i) jobs.push_back({i, i, rel[i]});
    const auto trace = run_schedule(jobs, profiles, units, Strategy::fcfs, TilingPolicy::oracle, 3);
    const auto on_time = std::count_if(trace.records.begin(), trace.records.end(),
                                       [](const TraceRecord& r) { return r.start == r.release; });
    CHECK(on_time >= 190);
  }

  TEST_CASE("ordering keys") {
    const AcceleratorUnit unit{0, InterPhase::sp, {}};
    JobProfile p = flat_profile("p", 999);
    p.node_count = 17;
    p.edge_count = 33;
    p.truth[DataflowConfig{TilingScheme::c, InterPhase::sp}.index()] = 12;
    p.truth[DataflowConfig{TilingScheme::d, InterPhase::seq}.index()] = 5;  // other unit
    const Job j{3, 0, 41};
    CHECK(job_key(Strategy::fcfs, j, p, unit, 0, 0) == 41.0);
    CHECK(job_key(Strategy::lifo, j, p, unit, 0, 0) == -41.0);
    CHECK(job_key(Strategy::sjf_nodes, j, p, unit, 0, 0) == 17.0);
    CHECK(job_key(Strategy::sjf_edges, j, p, unit, 0, 0) == 33.0);
    CHECK(job_key(Strategy::sjf_truth, j, p, unit, 0, 0) == 12.0);
    CHECK_THROWS_AS(job_key(Strategy::sjf_predicted, j, p, unit, 0, 0), UsageError);

    const double r1 = job_key(Strategy::random, j, p, unit, 5, 2);
    CHECK(r1 == job_key(Strategy::random, j, p, unit, 5, 2));
    CHECK(r1 != job_key(Strategy::random, j, p, unit, 5, 3));
    CHECK(r1 >= 0.0);
    CHECK(r1 < 1.0);

    std::mt19937_64 rng(82);
    for (const auto& q : random_profiles(rng, 50, true)) {
      for (const auto& u : default_units()) {
        double best = 1e300;
        for (TilingScheme s : kAllSchemes) best = std::min(best, (*q.predicted)[DataflowConfig{s, u.inter_phase}.index()]);
        REQUIRE(job_key(Strategy::sjf_predicted, j, q, u, 0, 0) == best);
      }
    }
  }

  TEST_CASE("two-job queue by hand") {
    const std::vector<JobProfile> p{flat_profile("long", 10), flat_profile("short", 2)};
    const std::vector<Job> jobs{{0, 0, 0}, {1, 1, 0}};
    const auto sjf = run_schedule(jobs, p, one_unit(), Strategy::sjf_truth, TilingPolicy::oracle, 0);
    REQUIRE(sjf.records.size() == 2);
    CHECK(sjf.records[0].job_id == 1);
    CHECK(sjf.records[0].finish == 2);
    CHECK(sjf.records[1].finish == 12);
    CHECK(metrics(sjf).mean_completion == 7.0);
    CHECK(metrics(sjf).mean_turnaround == 7.0);

    const auto fcfs = run_schedule(jobs, p, one_unit(), Strategy::fcfs, TilingPolicy::oracle, 0);
    CHECK(fcfs.records[0].job_id == 0);
    CHECK(fcfs.records[0].finish == 10);
    CHECK(fcfs.records[1].finish == 12);
    CHECK(metrics(fcfs).mean_completion == 11.0);

    // FCFS with releases 5 < 7 picks the earlier job even though it is longer
    const std::vector<Job> staggered{{0, 1, 7}, {1, 0, 5}};
    const std::vector<JobProfile> busy{flat_profile("blocker", 10), flat_profile("x", 2)};
    const std::vector<Job> three{{0, 0, 0}, {1, 1, 7}, {2, 0, 5}};
    const auto t3 = run_schedule(three, busy, one_unit(), Strategy::fcfs, TilingPolicy::oracle, 0);
    CHECK(t3.records[1].job_id == 2);
    const auto t3l = run_schedule(three, busy, one_unit(), Strategy::lifo, TilingPolicy::oracle, 0);
    CHECK(t3l.records[1].job_id == 1);
    CHECK_NOTHROW(check_trace(t3, three, one_unit()));
    CHECK(run_schedule(staggered, busy, one_unit(), Strategy::fcfs, TilingPolicy::oracle, 0).records[0].job_id == 1);
  }

  TEST_CASE("tiling policies") {
    std::mt19937_64 rng(83);
    const auto profiles = random_profiles(rng, 30, true);
    const auto units = default_units();
    std::vector<Job> jobs;
    for (std::uint32_t i = 0; i < 30; ++i) jobs.push_back({i, i, 100000ull * i});
    const auto oracle = run_schedule(jobs, profiles, units, Strategy::fcfs, TilingPolicy::oracle, 1);
    const auto pred = run_schedule(jobs, profiles, units, Strategy::fcfs, TilingPolicy::predicted, 1);
    for (std::size_t i = 0; i < 30; ++i) {
      const auto& r = oracle.records[i];
      const auto& p = profiles[r.job_id];
      const auto phase = units[r.unit_id].inter_phase;
      std::uint64_t best = UINT64_MAX;
      double best_pred = 1e300;
      for (TilingScheme s : kAllSchemes) {
        best = std::min(best, p.truth[DataflowConfig{s, phase}.index()]);
        best_pred = std::min(best_pred, (*p.predicted)[DataflowConfig{s, phase}.index()]);
      }
      CHECK(r.exec_cycles == best);
      CHECK(*pred.records[i].predicted_cycles == best_pred);
    }
    auto no_pred = profiles;
    no_pred[4].predicted.reset();
    CHECK_THROWS_AS(run_schedule(jobs, no_pred, units, Strategy::fcfs, TilingPolicy::predicted, 1), UsageError);
  }

  TEST_CASE("sparse arrivals: turnaround equals execution") {
    std::mt19937_64 rng(84);
    const auto profiles = random_profiles(rng, 40, true);
    std::vector<Job> jobs;
    for (std::uint32_t i = 0; i < 40; ++i) jobs.push_back({i, i, 1000000ull * i});
    const auto units = default_units();
    for (Strategy s : kAllStrategies) {
      const auto t = run_schedule(jobs, profiles, units, s, TilingPolicy::random, 9);
      for (const auto& r : t.records) REQUIRE(r.start == r.release);
      const auto m = metrics(t);
      CHECK(m.mean_turnaround == m.mean_execution);
    }
    // with oracle tiling every strategy lands on the same unit (unit 0 is
    // always free first) and so the same execution time
    const auto ref = metrics(run_schedule(jobs, profiles, units, Strategy::sjf_truth, TilingPolicy::oracle, 9));
    for (Strategy s : kAllStrategies) {
      CHECK(metrics(run_schedule(jobs, profiles, units, s, TilingPolicy::oracle, 9)).mean_execution ==
            ref.mean_execution);
    }
  }

  TEST_CASE("randomized traces satisfy every invariant") {
    std::mt19937_64 rng(85);
    for (int trial = 0; trial < 100; ++trial) {
      const auto profiles = random_profiles(rng, 1 + rng() % 20, true);
      const auto jobs = random_jobs(rng, 1 + rng() % 60, profiles.size(), rng() % 20000);
      auto units = default_units();
      units.resize(1 + rng() % 3);
      const Strategy s = kAllStrategies[rng() % kAllStrategies.size()];
      const TilingPolicy t = static_cast<TilingPolicy>(rng() % 3);
      const auto trace = run_schedule(jobs, profiles, units, s, t, trial);
      REQUIRE_NOTHROW(check_trace(trace, jobs, units));
      const auto m = metrics(trace);
      REQUIRE(m.mean_turnaround >= m.mean_execution);
      REQUIRE(trace_csv(trace) == trace_csv(run_schedule(jobs, profiles, units, s, t, trial)));
    }
  }

  TEST_CASE("check_trace rejects broken traces") {
    const std::vector<JobProfile> p{flat_profile("a", 10), flat_profile("b", 2)};
    const std::vector<Job> jobs{{0, 0, 0}, {1, 1, 0}};
    const auto good = run_schedule(jobs, p, one_unit(), Strategy::fcfs, TilingPolicy::oracle, 0);
    auto t = good;
    t.records[1].start += 1;
    t.records[1].finish += 1;
    CHECK_THROWS_AS(check_trace(t, jobs, one_unit()), InvariantError);  // idle while waiting
    t = good;
    t.records[1].start -= 1;
    t.records[1].finish -= 1;
    CHECK_THROWS_AS(check_trace(t, jobs, one_unit()), InvariantError);  // overlap
    t = good;
    t.records[0].finish += 1;
    CHECK_THROWS_AS(check_trace(t, jobs, one_unit()), InvariantError);
    t = good;
    t.records.pop_back();
    CHECK_THROWS_AS(check_trace(t, jobs, one_unit()), InvariantError);
  }

  TEST_CASE("metric examples") {
    ScheduleTrace t;
    TraceRecord r;
    r.release = 5;
    r.start = 5;
    r.exec_cycles = 10;
    r.finish = 15;
    t.records = {r};
    const auto m = metrics(t);
    CHECK(m.mean_completion == 15.0);
    CHECK(m.mean_turnaround == 10.0);
    CHECK(m.mean_execution == 10.0);
    CHECK_THROWS_AS(metrics(ScheduleTrace{}), DataError);
  }

  TEST_CASE("strategy comparison") {
    std::mt19937_64 rng(86);
    Scenario s;
    s.profiles = random_profiles(rng, 60, true);
    s.units = default_units();
    s.cells = scenario_cells(1);
    s.runs = 3;
    s.base_seed = 10;
    const auto a = compare_strategies(s, true);
    REQUIRE(a.rows.size() == 7);
    REQUIRE(a.traces.size() == 3);
    CHECK(report_csv(a) == report_csv(compare_strategies(s)));
    for (auto get : {+[](const SchedMetrics& m) { return m.mean_completion; },
                     +[](const SchedMetrics& m) { return m.mean_turnaround; },
                     +[](const SchedMetrics& m) { return m.mean_execution; }}) {
      double mx = 0.0;
      for (const auto& row : a.rows) mx = std::max(mx, get(row.normalized));
      CHECK(mx == 1.0);
    }
    const auto& ours = a.rows.back();
    CHECK(ours.cell.strategy == Strategy::sjf_predicted);
    CHECK(ours.speedup->mean_completion == 1.0);

    // same release sequence for every cell of a run
    for (const auto& run : a.traces) {
      for (const auto& trace : run) {
        std::vector<std::uint64_t> rel(run[0].records.size());
        for (const auto& r : trace.records) rel[r.job_id] = r.release;
        std::vector<std::uint64_t> rel0(rel.size());
        for (const auto& r : run[0].records) rel0[r.job_id] = r.release;
        REQUIRE(rel == rel0);
      }
    }
    // oracle tiling gives the least execution time in every run
    for (const auto& run : a.traces) {
      const double truth = metrics(run[5]).mean_execution;
      for (std::size_t c = 0; c < 5; ++c) CHECK(truth < metrics(run[c]).mean_execution);
    }
    CHECK(scenario_cells(2)[0].tiling == TilingPolicy::oracle);
    CHECK_THROWS_AS(scenario_cells(3), UsageError);
    s.runs = 0;
    CHECK_THROWS_AS(compare_strategies(s), UsageError);
  }

  TEST_CASE("names") {
    for (Strategy s : kAllStrategies) CHECK(parse_strategy(strategy_name(s)) == s);
    CHECK(strategy_name(Strategy::sjf_predicted) == "sjf-predicted");
    CHECK(parse_tiling_policy("oracle") == TilingPolicy::oracle);
    CHECK_THROWS_AS(parse_strategy("edf"), UsageError);
  }
}
