#include "gnnflow/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "gnnflow/error.hpp"
#include "gnnflow/rng.hpp"

namespace gnnflow {

namespace {

constexpr int kMaxAttempts = 64;

std::optional<Graph> uniform_random(std::size_t n, double p, Rng& rng) {
  if (p < 0.0 || p > 1.0) return std::nullopt;
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      // p == 1 must give the complete graph; uniform01 < 1 always holds
      if (uniform01(rng) < p) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

std::optional<Graph> preferential_attachment(std::size_t n, std::size_t m, Rng& rng) {
  if (m < 1 || m >= n) return std::nullopt;
  std::vector<Edge> edges;
  // endpoint multiset: node v appears deg(v) times
  std::vector<NodeId> endpoints;
  // seed clique on m + 1 nodes
  for (NodeId u = 0; u <= m; ++u) {
    for (NodeId v = u + 1; v <= m; ++v) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  std::vector<NodeId> targets;
  for (NodeId v = static_cast<NodeId>(m + 1); v < n; ++v) {
    targets.clear();
    while (targets.size() < m) {
      const NodeId t = endpoints[uniform_int(rng, 0, endpoints.size() - 1)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      edges.emplace_back(t, v);
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return Graph::from_edges(n, edges);
}

std::optional<Graph> small_world(std::size_t n, std::size_t k, double beta, Rng& rng) {
  k -= k % 2;
  if (k < 2 || k >= n || beta < 0.0 || beta > 1.0) return std::nullopt;
  std::vector<std::set<NodeId>> adj(n);
  auto link = [&](NodeId a, NodeId b) {
    adj[a].insert(b);
    adj[b].insert(a);
  };
  for (NodeId u = 0; u < n; ++u) {
    for (std::size_t j = 1; j <= k / 2; ++j) link(u, static_cast<NodeId>((u + j) % n));
  }
  // Watts-Strogatz rewiring, lattice edge by lattice edge
  for (std::size_t j = 1; j <= k / 2; ++j) {
    for (NodeId u = 0; u < n; ++u) {
      const auto v = static_cast<NodeId>((u + j) % n);
      if (uniform01(rng) >= beta) continue;
      if (adj[u].size() + 1 >= n || adj[u].count(v) == 0) continue;
      NodeId w;
      do {
        w = static_cast<NodeId>(uniform_int(rng, 0, n - 1));
      } while (w == u || adj[u].count(w) != 0);
      adj[u].erase(v);
      adj[v].erase(u);
      link(u, w);
    }
  }
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v : adj[u]) {
      if (u < v) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

GeneratorFamily pick_family(const SyntheticSpec& spec, Rng& rng) {
  const double x = uniform01(rng);
  if (x < spec.weight_uniform_random) return GeneratorFamily::uniform_random;
  if (x < spec.weight_uniform_random + spec.weight_preferential_attachment) {
    return GeneratorFamily::preferential_attachment;
  }
  if (spec.weight_small_world > 0.0) return GeneratorFamily::small_world;
  // rounding at the top of the interval
  return spec.weight_preferential_attachment > 0.0 ? GeneratorFamily::preferential_attachment
                                                   : GeneratorFamily::uniform_random;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (node_range.min < 2) throw UsageError("node range minimum must be at least 2");
  if (node_range.max < node_range.min) throw UsageError("node range is empty");
  const double weights[] = {weight_uniform_random, weight_preferential_attachment,
                            weight_small_world};
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw UsageError("generator weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw UsageError("generator weights must sum to 1");
  if (edge_probability.min < 0.0 || edge_probability.max > 1.0 ||
      edge_probability.max < edge_probability.min) {
    throw UsageError("edge probability range must lie in [0, 1]");
  }
  if (rewire_probability.min < 0.0 || rewire_probability.max > 1.0 ||
      rewire_probability.max < rewire_probability.min) {
    throw UsageError("rewire probability range must lie in [0, 1]");
  }
  if (attachment_edges.max < attachment_edges.min || attachment_edges.min < 1) {
    throw UsageError("attachment edge range must be non-empty and >= 1");
  }
  if (ring_neighbors.max < ring_neighbors.min || ring_neighbors.max < 2) {
    throw UsageError("ring neighbor range must be non-empty and reach 2");
  }
}

Graph generate_graph(const SyntheticSpec& spec, std::size_t index) {
  Rng rng(derive_seed(spec.seed, index));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const GeneratorFamily family = pick_family(spec, rng);
    const std::size_t n = uniform_int(rng, spec.node_range.min, spec.node_range.max);
    std::optional<Graph> g;
    switch (family) {
      case GeneratorFamily::uniform_random:
        g = uniform_random(n, uniform_real(rng, spec.edge_probability.min, spec.edge_probability.max),
                           rng);
        break;
      case GeneratorFamily::preferential_attachment:
        g = preferential_attachment(
            n, uniform_int(rng, spec.attachment_edges.min, spec.attachment_edges.max), rng);
        break;
      case GeneratorFamily::small_world: {
        const std::size_t k = uniform_int(rng, spec.ring_neighbors.min, spec.ring_neighbors.max);
        const double beta =
            uniform_real(rng, spec.rewire_probability.min, spec.rewire_probability.max);
        g = small_world(n, k, beta, rng);
        break;
      }
    }
    if (g) return std::move(*g);
  }
  throw DataError("synthetic graph " + std::to_string(index) + ": no feasible parameters after " +
                  std::to_string(kMaxAttempts) + " attempts");
}

std::vector<Graph> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<Graph> graphs;
  graphs.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) graphs.push_back(generate_graph(spec, i));
  return graphs;
}

}  // namespace gnnflow
