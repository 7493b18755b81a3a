#pragma once

#include <random>
#include <utility>
#include <vector>

#include "gnnflow/graph.hpp"

namespace testutil {

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

inline EdgeList random_edges(std::mt19937_64& rng, std::size_t n, double p) {
  EdgeList out;
  std::bernoulli_distribution coin(p);
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v = u + 1; v < n; ++v)
      if (coin(rng)) out.emplace_back(u, v);
  return out;
}

inline gnnflow::Graph make(std::size_t n, const EdgeList& edges) {
  std::vector<gnnflow::Edge> e(edges.begin(), edges.end());
  return gnnflow::Graph::from_edges(n, e);
}

inline gnnflow::Graph star3() { return make(4, {{0, 1}, {0, 2}, {0, 3}}); }
inline gnnflow::Graph triangle() { return make(3, {{0, 1}, {1, 2}, {0, 2}}); }
inline gnnflow::Graph path3() { return make(3, {{0, 1}, {1, 2}}); }

inline std::vector<std::uint64_t> degrees_of(const gnnflow::Graph& g) {
  return {g.degrees().begin(), g.degrees().end()};
}

}  // namespace testutil
