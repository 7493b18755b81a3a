#include <doctest.h>

#include <numeric>
#include <random>

#include "gnnflow/features.hpp"
#include "gnnflow/synthetic.hpp"
#include "helpers.hpp"

using namespace gnnflow;
using testutil::make;

TEST_SUITE("features") {
  TEST_CASE("composite examples on the star") {
    const Graph star = testutil::star3();
    const WorkloadDims d{4, 4};
    const ResolvedTiling t{4, 1, 1, 4, 1, 1};
    const auto x = extract_features(star, d, t, FeatureVariant::base_features);
    CHECK(x.s1 == 88.0);
    CHECK(x.s3 == 24.0);
    CHECK(x.s4 == 112.0);
    CHECK(x.s5 == 24.0);
    CHECK(x.s6 == 24.0 + 24.0 / 4.0);
    CHECK(x.s2 == 4.0 * 4.0 * 4.0 / 4.0);
    CHECK(x.v == 4);
    CHECK(x.e == 3);
    CHECK(x.values().size() == 23);

    const ResolvedTiling full{1, 1, 1, 4, 4, 4};
    CHECK(extract_features(star, d, full, FeatureVariant::base_features).s2 == 1.0);

    const auto b = extract_features(star, d, t, FeatureVariant::base);
    CHECK(b.values().size() == 17);
    CHECK(feature_columns(FeatureVariant::base).size() == 17);
    CHECK(feature_columns(FeatureVariant::base_features)[17] == "s1");
  }

  TEST_CASE("regular graph with d <= T_N") {
    testutil::EdgeList e;
    const std::uint32_t n = 12;
    for (std::uint32_t u = 0; u < n; ++u) {
      e.emplace_back(u, (u + 1) % n);
      e.emplace_back(u, (u + 2) % n);
    }
    const Graph g = make(n, e);
    REQUIRE(g.stats().min_degree == 4);
    REQUIRE(g.stats().max_degree == 4);
    const WorkloadDims d{16, 8};
    const ResolvedTiling t{2, 8, 5, 3, 1, 4};
    const auto x = extract_features(g, d, t, FeatureVariant::base_features);
    CHECK(x.s5 == doctest::Approx(12.0 * 16.0 / 8.0));
  }

  TEST_CASE("degree-zero nodes contribute nothing to S5") {
    const Graph g = make(5, {{0, 1}});
    const ResolvedTiling t{};
    const auto x = extract_features(g, WorkloadDims{3, 3}, t, FeatureVariant::base_features);
    CHECK(x.s5 == 6.0);
  }

  TEST_CASE("identities hold on every emitted row") {
    SyntheticSpec s;
    s.count = 30;
    s.seed = 41;
    std::vector<NamedGraph> graphs;
    for (std::size_t i = 0; i < s.count; ++i) graphs.push_back({"g" + std::to_string(i), generate_graph(s, i)});
    const auto table = feature_matrix_all(graphs, {}, {}, FeatureVariant::base_features);
    REQUIRE(table.rows() == 30 * 24);
    for (std::size_t r = 0; r < table.rows(); ++r) {
      const auto row = table.row(r);
      REQUIRE(row[20] == row[17] + row[19]);
      REQUIRE(row[22] == row[19] + row[21] / row[2]);
      for (double v : row) REQUIRE(v >= 0.0);
    }
    CHECK(read_features_csv(write_features_csv(table)).data == table.data);
    CHECK(write_features_csv(read_features_csv(write_features_csv(table))) == write_features_csv(table));
  }

  TEST_CASE("feature_matrix rows equal direct extraction") {
    SyntheticSpec s;
    s.count = 6;
    s.seed = 42;
    std::vector<NamedGraph> graphs;
    for (std::size_t i = 0; i < s.count; ++i) graphs.push_back({"g" + std::to_string(i), generate_graph(s, i)});
    const DataflowConfig cfg{TilingScheme::e, InterPhase::sp};
    const AcceleratorParams a;
    const WorkloadDims d;
    const auto table = feature_matrix(graphs, d, cfg, a, FeatureVariant::base_features);
    REQUIRE(table.rows() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
      const auto t = resolve_tiling(cfg.scheme, graphs[i].graph, d, a);
      const auto x = extract_features(graphs[i].graph, d, t, FeatureVariant::base_features).values();
      const auto row = table.row(i);
      CHECK(std::equal(x.begin(), x.end(), row.begin()));
      CHECK(table.graph_ids[i] == graphs[i].id);
    }
    CHECK(feature_matrix(graphs, d, cfg, a, FeatureVariant::base_features).data == table.data);
  }

  TEST_CASE("features are invariant under node relabeling") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 3 + rng() % 30;
      const auto edges = testutil::random_edges(rng, n, 0.3);
      std::vector<std::uint32_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0u);
      std::shuffle(perm.begin(), perm.end(), rng);
      testutil::EdgeList moved;
      for (auto [u, v] : edges) moved.emplace_back(perm[u], perm[v]);
      const Graph g = make(n, edges), h = make(n, moved);
      const WorkloadDims d;
      for (TilingScheme sch : kAllSchemes) {
        const auto t = resolve_tiling(sch, g, d, AcceleratorParams{});
        const auto a = extract_features(g, d, t, FeatureVariant::base_features).values();
        const auto b = extract_features(h, d, t, FeatureVariant::base_features).values();
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("variant names") {
    CHECK(parse_variant("base") == FeatureVariant::base);
    CHECK(parse_variant("base+features") == FeatureVariant::base_features);
    CHECK(variant_name(FeatureVariant::base_features) == "base+features");
    CHECK_THROWS(parse_variant("fancy"));
  }
}
