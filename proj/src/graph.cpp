#include "gnnflow/graph.hpp"

#include <algorithm>

#include "gnnflow/error.hpp"
#include "gnnflow/kernels.hpp"

namespace gnnflow {

Graph Graph::from_edges(std::size_t node_count, std::span<const Edge> edges) {
  if (node_count == 0) throw DataError("graph must have at least one node");
  if (node_count > UINT32_MAX) throw DataError("graph exceeds 2^32-1 nodes");

  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u >= node_count || v >= node_count) {
      throw DataError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") out of range for " + std::to_string(node_count) + " nodes");
    }
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.row_offsets_.assign(node_count + 1, 0);
  g.degrees_.assign(node_count, 0);
  g.neighbor_ids_.reserve(directed.size());
  for (const auto& [u, v] : directed) {
    ++g.degrees_[u];
    g.neighbor_ids_.push_back(v);
  }
  for (std::size_t v = 0; v < node_count; ++v) {
    g.row_offsets_[v + 1] = g.row_offsets_[v] + g.degrees_[v];
  }
  g.stats_ = degree_stats(g);
  return g;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < node_count(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  const std::size_t n = g.node_count();
  if (n == 0) return s;

  std::vector<std::uint32_t> sorted(g.degrees().begin(), g.degrees().end());
  std::sort(sorted.begin(), sorted.end());
  s.min_degree = sorted.front();
  s.max_degree = sorted.back();
  s.mean_degree = static_cast<double>(2 * g.edge_count()) / static_cast<double>(n);
  if (s.max_degree == 0) return s;

  for (std::size_t k = 0; k < 7; ++k) {
    // nearest rank: ceil(k*n/6), clamped to [1, n]
    const std::size_t rank = std::clamp<std::size_t>((k * n + 5) / 6, 1, n);
    s.quantiles[k] = static_cast<double>(sorted[rank - 1]) / static_cast<double>(s.max_degree);
  }
  return s;
}

double clustering_coefficient(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n == 0) return 0.0;
  const auto& kern = kernels::active();
  double sum = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    const std::uint64_t d = g.degree(v);
    if (d < 2) continue;
    const auto nv = g.neighbors(v);
    std::uint64_t twice_links = 0;
    for (NodeId u : nv) twice_links += kern.intersect_count(nv, g.neighbors(u));
    // twice_links counts every neighbor link twice, so c_v = twice_links / (d(d-1))
    sum += static_cast<double>(twice_links) / static_cast<double>(d * (d - 1));
  }
  return sum / static_cast<double>(n);
}

double density(const Graph& g) {
  const double v = static_cast<double>(g.node_count());
  if (v == 0.0) return 0.0;
  return static_cast<double>(g.edge_count()) / (v * v);
}

}  // namespace gnnflow
