#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>
#include <vector>

#include "gnnflow/kernels.hpp"

namespace k = gnnflow::kernels;

namespace {

std::vector<std::uint32_t> sorted_unique(std::mt19937_64& rng, std::size_t n, std::uint32_t range) {
  std::uniform_int_distribution<std::uint32_t> d(0, range);
  std::vector<std::uint32_t> v(n);
  for (auto& x : v) x = d(rng);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<k::Isa> vector_isas() {
  std::vector<k::Isa> out;
  for (k::Isa isa : {k::Isa::avx2, k::Isa::neon}) {
    if (k::supported(isa)) out.push_back(isa);
  }
  return out;
}

struct Restore {
  ~Restore() { k::reset(); }
};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar is always supported and selectable") {
    Restore r;
    CHECK(k::supported(k::Isa::scalar));
    CHECK(k::select(k::Isa::scalar));
    CHECK(k::active().isa == k::Isa::scalar);
  }

  TEST_CASE("intersect_count matches std::set_intersection on every ISA") {
    Restore r;
    std::mt19937_64 rng(11);
    for (k::Isa isa : vector_isas()) {
      REQUIRE(k::select(isa));
      for (int trial = 0; trial < 2000; ++trial) {
        const auto a = sorted_unique(rng, rng() % 70, 1 + rng() % 200);
        const auto b = sorted_unique(rng, rng() % 70, 1 + rng() % 200);
        std::vector<std::uint32_t> both;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
        REQUIRE(k::active().intersect_count(a, b) == both.size());
        REQUIRE(k::active().intersect_count(a, b) == k::scalar::intersect_count(a, b));
      }
    }
  }

  TEST_CASE("group_max is identical across ISAs for all group sizes") {
    Restore r;
    std::mt19937_64 rng(12);
    for (k::Isa isa : vector_isas()) {
      REQUIRE(k::select(isa));
      for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::uint32_t> v(rng() % 300);
        for (auto& x : v) x = static_cast<std::uint32_t>(rng() >> (rng() % 64));
        const std::size_t group = 1 + rng() % 40;
        const std::size_t groups = (v.size() + group - 1) / group;
        std::vector<std::uint32_t> got(groups), want(groups);
        k::active().group_max(v, group, got);
        k::scalar::group_max(v, group, want);
        REQUIRE(got == want);
        for (std::size_t g = 0; g < groups; ++g) {
          const auto lo = v.begin() + static_cast<long>(g * group);
          const auto hi = v.begin() + static_cast<long>(std::min(v.size(), (g + 1) * group));
          REQUIRE(want[g] == *std::max_element(lo, hi));
        }
      }
    }
  }

  TEST_CASE("floating kernels are bit-identical to scalar") {
    Restore r;
    std::mt19937_64 rng(13);
    std::normal_distribution<double> nd(0.0, 100.0);
    for (k::Isa isa : vector_isas()) {
      REQUIRE(k::select(isa));
      for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 90;
        std::vector<double> x(n), y(n), prefix(n);
        double run = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          x[i] = nd(rng);
          y[i] = nd(rng);
          run += x[i];
          prefix[i] = run;
        }
        std::vector<double> g1(n), g2(n);
        k::active().split_gains(prefix, run, g1);
        k::scalar::split_gains(prefix, run, g2);
        REQUIRE(std::equal(g1.begin(), g1.end(), g2.begin(),
                           [](double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }));
        CHECK(g2.back() == 0.0);

        const double a = nd(rng);
        auto y1 = y, y2 = y;
        k::active().axpy(a, x, y1);
        k::scalar::axpy(a, x, y2);
        REQUIRE(y1 == y2);

        std::vector<double> d1(n), d2(n);
        k::active().subtract(x, y, d1);
        k::scalar::subtract(x, y, d2);
        REQUIRE(d1 == d2);
      }
    }
  }

  TEST_CASE("split_gains formula") {
    const std::vector<double> prefix{1.0, 3.0, 6.0};
    std::vector<double> out(3);
    k::scalar::split_gains(prefix, 6.0, out);
    CHECK(out[0] == doctest::Approx(1.0 + 25.0 / 2.0));
    CHECK(out[1] == doctest::Approx(9.0 / 2.0 + 9.0));
    CHECK(out[2] == 0.0);
  }
}
