#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gnnflow {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Degree summary. Quantiles are taken by nearest rank at p = 0, 1/6, ..., 1
/// over the sorted degree list and divided by the maximum degree.
struct DegreeStats {
  double mean_degree = 0.0;
  std::uint32_t max_degree = 0;
  std::uint32_t min_degree = 0;
  std::array<double, 7> quantiles{};

  bool operator==(const DegreeStats&) const = default;
};

/// Undirected, unweighted graph in compressed row storage. Both directions of
/// every edge are stored, rows are sorted, no self-loops, no duplicates.
/// Immutable once built.
class Graph {
 public:
  /// Canonicalizes an arbitrary edge list: symmetrizes, drops self-loops and
  /// duplicates. Throws DataError when node_count is 0 or an endpoint is out of range.
  static Graph from_edges(std::size_t node_count, std::span<const Edge> edges);

  std::size_t node_count() const noexcept { return degrees_.size(); }
  std::size_t edge_count() const noexcept { return neighbor_ids_.size() / 2; }

  std::span<const std::uint64_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const NodeId> neighbor_ids() const noexcept { return neighbor_ids_; }
  std::span<const std::uint32_t> degrees() const noexcept { return degrees_; }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return std::span<const NodeId>(neighbor_ids_)
        .subspan(row_offsets_[v], row_offsets_[v + 1] - row_offsets_[v]);
  }
  std::uint32_t degree(NodeId v) const noexcept { return degrees_[v]; }

  /// Cached at construction.
  const DegreeStats& stats() const noexcept { return stats_; }

  /// Undirected edges as (min, max) pairs in lexicographic order.
  std::vector<Edge> edges() const;

  bool operator==(const Graph& other) const {
    return row_offsets_ == other.row_offsets_ && neighbor_ids_ == other.neighbor_ids_;
  }

 private:
  Graph() = default;

  std::vector<std::uint64_t> row_offsets_;
  std::vector<NodeId> neighbor_ids_;
  std::vector<std::uint32_t> degrees_;
  DegreeStats stats_;
};

/// A graph together with the identifier used in label/feature tables.
struct NamedGraph {
  std::string id;
  Graph graph;
};

DegreeStats degree_stats(const Graph& g);

/// Average local clustering coefficient; nodes of degree < 2 contribute 0 and
/// the average is over all V nodes.
double clustering_coefficient(const Graph& g);

/// E / V^2 with undirected E counted once.
double density(const Graph& g);

}  // namespace gnnflow
