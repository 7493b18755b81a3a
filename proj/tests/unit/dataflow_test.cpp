#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "../oracle/reference.hpp"
#include "gnnflow/dataflow.hpp"
#include "gnnflow/error.hpp"
#include "gnnflow/synthetic.hpp"
#include "helpers.hpp"

using namespace gnnflow;
using testutil::make;

namespace {

ref::Hw to_ref(const AcceleratorParams& a) {
  return {a.pe_count, a.global_buffer_bytes, a.dram_words_per_cycle, a.bytes_per_word};
}

Graph complete(std::size_t n) {
  testutil::EdgeList e;
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return make(n, e);
}

Graph ring(std::size_t n) {
  testutil::EdgeList e;
  for (std::uint32_t u = 0; u < n; ++u) e.emplace_back(u, static_cast<std::uint32_t>((u + 1) % n));
  return make(n, e);
}

}  // namespace

TEST_SUITE("dataflow") {
  TEST_CASE("tiling resolution examples") {
    const WorkloadDims d32{32, 32};
    const auto a = resolve_tiling(TilingScheme::a, 1000, d32, 512);
    CHECK(a.t_fa == 32);
    CHECK(a.t_n == 1);
    CHECK(a.t_va == 16);

    const auto dd = resolve_tiling(TilingScheme::d, 4, WorkloadDims{7, 3}, 512);
    CHECK(dd.t_fa == 1);
    CHECK(dd.t_n == 1);
    CHECK(dd.t_gc == 1);
    CHECK(dd.t_fc == 1);
    CHECK(dd.t_va == 4);
    CHECK(dd.t_vc == 4);

    CHECK(resolve_tiling(TilingScheme::b, 100, WorkloadDims{1, 1}, 512).t_n == 1);
  }

  TEST_CASE("tiling rows follow the table verbatim") {
    const WorkloadDims d{40, 16};
    const std::uint64_t V = 1000, P = 512;
    auto t = resolve_tiling(TilingScheme::b, V, d, P);
    CHECK((t.t_fa == 2 && t.t_n == 20 && t.t_gc == 1 && t.t_fc == 2));
    t = resolve_tiling(TilingScheme::c, V, d, P);
    CHECK((t.t_fa == 8 && t.t_n == 20 && t.t_fc == 8));
    t = resolve_tiling(TilingScheme::e, V, d, P);
    CHECK((t.t_fa == 18 && t.t_n == 20 && t.t_fc == 18));
    t = resolve_tiling(TilingScheme::f, V, d, P);
    CHECK((t.t_fa == 1 && t.t_n == 18 && t.t_fc == 1));
    t = resolve_tiling(TilingScheme::g, V, d, P);
    CHECK((t.t_fa == 18 && t.t_n == 1 && t.t_fc == 40));
    t = resolve_tiling(TilingScheme::h, V, d, P);
    CHECK((t.t_fa == 1 && t.t_n == 18 && t.t_fc == 40));
    CHECK(resolve_tiling(TilingScheme::f, 5, d, P).t_n == 5);
  }

  TEST_CASE("resolved tiling respects the PE budget") {
    for (std::uint64_t P : {1, 3, 16, 64, 100, 512, 4096}) {
      for (std::uint64_t F : {1, 2, 7, 32, 200, 2000}) {
        for (std::uint64_t V : {1, 5, 300}) {
          for (TilingScheme s : kAllSchemes) {
            const auto t = resolve_tiling(s, V, WorkloadDims{F, 9}, P);
            CAPTURE(P);
            CAPTURE(F);
            CAPTURE(V);
            REQUIRE(t.t_va >= 1);
            REQUIRE(t.t_vc >= 1);
            REQUIRE(t.t_fa * t.t_n * t.t_va <= std::max<std::uint64_t>(P, 1));
            REQUIRE(t.t_gc * t.t_fc * t.t_vc <= std::max<std::uint64_t>(P, 1));
            REQUIRE(t.t_va <= V);
            REQUIRE(t.t_vc <= V);
          }
        }
      }
    }
  }

  TEST_CASE("cost law examples") {
    const Graph star = testutil::star3();
    const WorkloadDims d4{4, 4};
    const AcceleratorParams accel;
    const auto t = resolve_tiling(TilingScheme::d, star, d4, accel);
    REQUIRE(t.t_va == 4);
    CHECK(aggregation_cycles(star, d4, t) == 12);
    CHECK(combination_cycles(4, d4, t) == 16);
    CHECK(simulate_latency(star, d4, {TilingScheme::d, InterPhase::seq}, accel) == 28);

    ResolvedTiling full{1, 4, 1, 4, 4, 4};
    CHECK(combination_cycles(4, d4, full) == 1);
    ResolvedTiling small{1, 1, 1, 2, 1, 1};
    CHECK(combination_cycles(5, WorkloadDims{1, 1}, small) == 3);

    // groups of one
    std::mt19937_64 rng(31);
    const Graph g = make(9, testutil::random_edges(rng, 9, 0.4));
    ResolvedTiling one{1, 3, 2, 1, 1, 1};
    std::uint64_t want = 0;
    for (auto deg : g.degrees()) want += ((std::max<std::uint64_t>(deg, 1) + 1) / 2) * 2;
    CHECK(aggregation_cycles(g, WorkloadDims{6, 1}, one) == want);

    // regular graph: grouping does not matter
    const Graph r = ring(10);
    ResolvedTiling grp{3, 2, 1, 1, 1, 1};
    CHECK(aggregation_cycles(r, WorkloadDims{5, 1}, grp) == 4 * 2 * 3);
  }

  TEST_CASE("dram penalty threshold") {
    AcceleratorParams a;
    a.bytes_per_word = 1;
    a.dram_words_per_cycle = 16;
    const WorkloadDims d{10, 2};
    a.global_buffer_bytes = 9 * 10 - 1;  // V*F*bytes = buffer + 1
    CHECK(dram_penalty_cycles(9, d, a) == 2 * ((90 + 15) / 16));
    a.global_buffer_bytes = 90;
    CHECK(dram_penalty_cycles(9, d, a) == 0);

    const Graph g = complete(9);
    for (TilingScheme s : kAllSchemes) {
      const auto t = resolve_tiling(s, g, d, a);
      CHECK(simulate_latency(g, d, {s, InterPhase::seq}, a) ==
            aggregation_cycles(g, d, t) + combination_cycles(9, d, t));
    }
  }

  TEST_CASE("configuration enumeration") {
    const auto cfgs = enumerate_configs();
    REQUIRE(cfgs.size() == 24);
    CHECK((cfgs[0].scheme == TilingScheme::a && cfgs[0].inter_phase == InterPhase::seq));
    CHECK((cfgs[23].scheme == TilingScheme::h && cfgs[23].inter_phase == InterPhase::pp));
    std::set<std::pair<int, int>> seen;
    for (std::uint32_t i = 0; i < 24; ++i) {
      CHECK(cfgs[i].index() == i);
      seen.emplace(static_cast<int>(cfgs[i].scheme), static_cast<int>(cfgs[i].inter_phase));
    }
    CHECK(seen.size() == 24);
    CHECK_THROWS_AS(DataflowConfig::from_index(24), DataError);
  }

  TEST_CASE("labeling") {
    SyntheticSpec s;
    s.count = 3;
    s.seed = 4;
    std::vector<NamedGraph> graphs;
    for (std::size_t i = 0; i < 3; ++i) graphs.push_back({"g" + std::to_string(i), generate_graph(s, i)});
    const auto labels = label_dataset(graphs, {}, {});
    REQUIRE(labels.size() == 72);
    CHECK(labels == label_dataset(graphs, {}, {}));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      CHECK(labels[i].graph_id == graphs[i / 24].id);
      CHECK(labels[i].config_index == i % 24);
      CHECK(labels[i].cycles ==
            simulate_latency(graphs[i / 24].graph, {}, DataflowConfig::from_index(i % 24), {}));
    }
    const auto csv = write_labels_csv(labels);
    CHECK(csv.rfind("graph_id,config_index,scheme,inter_phase,cycles\n", 0) == 0);
    CHECK(read_labels_csv(csv) == labels);
    CHECK_THROWS_AS(read_labels_csv("graph_id,config_index,scheme,inter_phase,cycles\ng,1,a,seq,5\n"), DataError);
    CHECK_THROWS_AS(label_dataset({}, {}, {}), DataError);
  }

  TEST_CASE("matches the reference model on random graphs and hardware") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 1 + rng() % 40;
      const auto edges = testutil::random_edges(rng, n, static_cast<double>(rng() % 100) / 100.0);
      const Graph g = make(n, edges);
      AcceleratorParams a;
      a.pe_count = 1 + rng() % 600;
      a.global_buffer_bytes = 1 + rng() % 6000;
      a.dram_words_per_cycle = 1 + rng() % 20;
      a.bytes_per_word = 1 + rng() % 8;
      const WorkloadDims d{1 + rng() % 70, 1 + rng() % 70};
      const auto deg = testutil::degrees_of(g);
      for (const auto& cfg : enumerate_configs()) {
        CAPTURE(trial);
        CAPTURE(cfg.index());
        REQUIRE(simulate_latency(g, d, cfg, a) ==
                ref::latency(deg, d.input_features, d.output_features, static_cast<int>(cfg.scheme),
                             static_cast<int>(cfg.inter_phase), to_ref(a)));
      }
    }
  }

  TEST_CASE("pipeline makespan bounds") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<std::uint64_t> agg(1 + rng() % 30), comb(agg.size());
      for (auto& x : agg) x = 1 + rng() % 100;
      for (auto& x : comb) x = 1 + rng() % 100;
      std::uint64_t sa = 0, sc = 0;
      for (auto x : agg) sa += x;
      for (auto x : comb) sc += x;
      const auto m = pipeline_makespan(agg, comb);
      REQUIRE(m >= std::max(sa, sc));
      REQUIRE(m <= sa + sc);
    }
    CHECK(pipeline_makespan({5}, {7}) == 12);
    CHECK(pipeline_makespan({1, 1, 1}, {5, 5, 5}) == 16);
    CHECK(pipeline_split_candidates(512) == std::vector<std::uint64_t>{64, 128, 192, 256, 320, 384, 448});
    CHECK(pipeline_split_candidates(1).empty());
    CHECK(pipeline_split_candidates(2) == std::vector<std::uint64_t>{1});
  }

  TEST_CASE("latency properties on synthetic graphs") {
    SyntheticSpec s;
    s.count = 40;
    s.seed = 9;
    s.node_range = {2, 300};
    const auto graphs = generate_synthetic(s);
    std::mt19937_64 rng(34);
    for (const Graph& g : graphs) {
      const WorkloadDims d;
      AcceleratorParams a;
      a.global_buffer_bytes = 1 + rng() % 60000;
      for (TilingScheme sch : kAllSchemes) {
        const auto t = resolve_tiling(sch, g, d, a);
        const auto agg = aggregation_cycles(g, d, t);
        const auto comb = combination_cycles(g.node_count(), d, t);
        const auto seq = simulate_latency(g, d, {sch, InterPhase::seq}, a);
        const bool fits = g.node_count() * d.input_features * a.bytes_per_word <= a.global_buffer_bytes;
        CHECK(seq >= agg + comb);
        CHECK((seq == agg + comb) == fits);
        for (InterPhase p : kAllInterPhases) CHECK(simulate_latency(g, d, {sch, p}, a) >= 1);

        // relabel neighbors within rows: rebuilding from a shuffled edge list
        auto e = g.edges();
        std::shuffle(e.begin(), e.end(), rng);
        for (auto& [u, v] : e)
          if (rng() & 1) std::swap(u, v);
        const Graph h = Graph::from_edges(g.node_count(), e);
        CHECK(aggregation_cycles(h, d, t) == agg);
      }
    }
  }

  TEST_CASE("doubling the PE count never increases seq latency when groups nest") {
    // t_va = P / (t_fa t_n) doubles exactly for power-of-two P once P >= t_fa t_n,
    // so every new group is a union of two old ones.
    SyntheticSpec s;
    s.count = 40;
    s.seed = 10;
    s.node_range = {2, 400};
    const WorkloadDims d{32, 32};
    for (const Graph& g : generate_synthetic(s)) {
      for (TilingScheme sch : {TilingScheme::a, TilingScheme::b, TilingScheme::c, TilingScheme::d}) {
        for (std::uint64_t P = 64; P <= 4096; P *= 2) {
          AcceleratorParams lo, hi;
          lo.pe_count = P;
          hi.pe_count = 2 * P;
          CAPTURE(P);
          CHECK(simulate_latency(g, d, {sch, InterPhase::seq}, hi) <=
                simulate_latency(g, d, {sch, InterPhase::seq}, lo));
        }
      }
    }
  }

  TEST_CASE("accelerator config file") {
    const auto p = parse_accelerator_params("# hw\npe_count = 256\nglobal_buffer_bytes: 1024\n\n");
    CHECK(p.pe_count == 256);
    CHECK(p.global_buffer_bytes == 1024);
    CHECK(p.dram_words_per_cycle == 16);
    CHECK(parse_accelerator_params(format_accelerator_params(p)) == p);
    CHECK_THROWS_AS(parse_accelerator_params("pe_count = 0\n"), DataError);
    CHECK_THROWS_AS(parse_accelerator_params("pes = 4\n"), ParseError);
    CHECK_THROWS_AS(parse_accelerator_params("pe_count 4\n"), ParseError);
    CHECK_THROWS_AS(parse_accelerator_params("pe_count = -4\n"), ParseError);
  }
}
