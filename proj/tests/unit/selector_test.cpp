#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "gnnflow/error.hpp"
#include "gnnflow/selector.hpp"
#include "helpers.hpp"

using namespace gnnflow;

namespace {

PredictorBank constant_bank(double value) {
  PredictorBank b;
  b.schema = FeatureSchema::for_variant(FeatureVariant::base_features);
  for (std::size_t c = 0; c < kConfigCount; ++c) {
    GbmModel m;
    m.schema = b.schema;
    m.log_target = false;
    m.base_prediction = value;
    b.models.push_back(m);
  }
  return b;
}

EvalSet random_set(std::mt19937_64& rng, std::size_t graphs, bool distinct) {
  EvalSet s;
  for (std::size_t g = 0; g < graphs; ++g) {
    s.graph_ids.push_back("g" + std::to_string(g));
    ConfigValues t{}, p{};
    std::vector<double> pool(kConfigCount);
    std::iota(pool.begin(), pool.end(), 1.0);
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t c = 0; c < kConfigCount; ++c) {
      t[c] = distinct ? 100.0 * pool[c] : static_cast<double>(100 + rng() % 5);
      p[c] = t[c] * (0.7 + 0.6 * static_cast<double>(rng() % 1000) / 1000.0);
    }
    s.truth.push_back(t);
    s.predicted.push_back(p);
  }
  return s;
}

std::size_t argmin(const ConfigValues& v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST_SUITE("selector") {
  TEST_CASE("constant bank ranks by index") {
    const auto bank = constant_bank(100.0);
    const NamedGraph g{"star", testutil::star3()};
    const auto r = rank_configs(bank, g, {}, {});
    REQUIRE(r.entries.size() == kConfigCount);
    for (std::uint32_t i = 0; i < kConfigCount; ++i) {
      CHECK(r.entries[i].first == i);
      CHECK(r.entries[i].second == 100.0);
    }
    CHECK(r.graph_id == "star");
  }

  TEST_CASE("the cheapest configuration is ranked first") {
    auto bank = constant_bank(100.0);
    bank.models[5].base_prediction = 40.0;
    bank.models[11].base_prediction = 60.0;
    const NamedGraph g{"tri", testutil::triangle()};
    const auto r = rank_configs(bank, g, {}, {});
    CHECK(r.entries[0].first == 5);
    CHECK(r.entries[1].first == 11);
    const auto preds = predict_all(bank, g.graph, {}, {});
    CHECK(r.entries[0].first == argmin(preds));
    for (std::size_t i = 1; i < r.entries.size(); ++i) CHECK(r.entries[i - 1].second <= r.entries[i].second);
  }

  TEST_CASE("schema mismatch is an error") {
    auto bank = constant_bank(1.0);
    bank.schema = FeatureSchema::for_variant(FeatureVariant::base);
    for (auto& m : bank.models) m.schema = bank.schema;
    bank.models[0].schema.columns.pop_back();
    CHECK_THROWS(rank_configs(bank, {"t", testutil::triangle()}, {}, {}));
  }

  TEST_CASE("mape examples") {
    const std::vector<double> t{100, 100};
    CHECK(mape(t, t) == 0.0);
    CHECK(mape(std::vector<double>{110}, std::vector<double>{100}) == doctest::Approx(10.0));
    CHECK(mape(std::vector<double>{90, 120}, t) == doctest::Approx(15.0));
    CHECK_THROWS_AS(mape(std::vector<double>{1}, t), DataError);
    CHECK_THROWS_AS(mape(std::vector<double>{}, std::vector<double>{}), DataError);
  }

  TEST_CASE("top-k accuracy") {
    std::mt19937_64 rng(71);
    auto s = random_set(rng, 50, true);
    auto perfect = s;
    perfect.predicted = perfect.truth;
    for (std::size_t k : {1u, 3u, 10u}) CHECK(topk_accuracy(perfect, k) == 100.0);
    CHECK(topk_accuracy(s, kConfigCount) == 100.0);
    auto adversarial = s;
    for (std::size_t g = 0; g < s.size(); ++g)
      for (std::size_t c = 0; c < kConfigCount; ++c) adversarial.predicted[g][c] = 1e9 - s.truth[g][c];
    CHECK(topk_accuracy(adversarial, 1) == 0.0);
  }

  TEST_CASE("random baseline is the mean over all outcomes") {
    EvalSet s;
    s.graph_ids = {"one"};
    ConfigValues t{};
    for (std::size_t c = 0; c < kConfigCount; ++c) t[c] = 10.0 * static_cast<double>(c + 1);
    s.truth = {t};
    s.predicted = {t};
    const auto r = strategy_comparison(s);
    double sum = 0.0;
    for (std::size_t pick = 0; pick < kConfigCount; ++pick) sum += t[pick];
    CHECK(r.random_mean == doctest::Approx(sum / kConfigCount));
    CHECK(r.random_mean == doctest::Approx(125.0));
    CHECK(r.model_mean == 10.0);
    CHECK(r.optimal_mean == 10.0);
    CHECK(r.degradation_over_optimal_percent == 0.0);
    CHECK(r.improvement_over_random_percent == doctest::Approx(100.0 * 115.0 / 125.0));
  }

  TEST_CASE("best-fixed policy has zero improvement over best fixed") {
    std::mt19937_64 rng(72);
    auto s = random_set(rng, 40, false);
    const auto base = strategy_comparison(s);
    for (auto& p : s.predicted) {
      p.fill(2.0);
      p[base.best_fixed_config] = 1.0;
    }
    const auto r = strategy_comparison(s);
    CHECK(r.improvement_over_best_fixed_percent == doctest::Approx(0.0));
    CHECK(r.model_mean == doctest::Approx(r.best_fixed_mean));
    CHECK(r.per_config_selected[base.best_fixed_config] == 40);
  }

  TEST_CASE("report invariants on random predictors") {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 50; ++trial) {
      auto s = random_set(rng, 1 + rng() % 30, trial % 2 == 0);
      const auto r = strategy_comparison(s);
      REQUIRE(r.degradation_over_optimal_percent >= 0.0);
      REQUIRE(r.top1_percent <= r.top3_percent);
      REQUIRE(r.top3_percent <= 100.0);
      REQUIRE(r.optimal_mean <= r.model_mean);
      REQUIRE(r.optimal_mean <= r.best_fixed_mean);
      REQUIRE(r.best_fixed_mean <= r.random_mean);

      // monotone re-ranking of the non-selected configs keeps M and the improvement
      auto moved = s;
      for (auto& p : moved.predicted) {
        const auto keep = argmin(p);
        for (std::size_t c = 0; c < kConfigCount; ++c)
          if (c != keep) p[c] = 2.0 * p[c] + 1.0;
      }
      const auto r2 = strategy_comparison(moved);
      REQUIRE(r2.model_mean == r.model_mean);
      REQUIRE(r2.improvement_over_random_percent == r.improvement_over_random_percent);
      REQUIRE(r2.top1_percent == r.top1_percent);
    }
  }

  TEST_CASE("csv rows") {
    std::mt19937_64 rng(74);
    const auto r = strategy_comparison(random_set(rng, 5, true));
    CHECK(eval_csv_header() ==
          "dataset,mape,top1,top3,improvement_over_random,improvement_over_best_fixed,degradation_over_optimal\n");
    const auto row = eval_csv_row("synthetic", r);
    CHECK(std::count(row.begin(), row.end(), ',') == 6);
    CHECK(row.rfind("synthetic,", 0) == 0);
    const auto ab = ablation_csv_header();
    CHECK(std::count(ab.begin(), ab.end(), ',') == 3);
  }
}
