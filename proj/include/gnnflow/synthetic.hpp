#pragma once

#include <cstdint>
#include <vector>

#include "gnnflow/graph.hpp"

namespace gnnflow {

enum class GeneratorFamily { uniform_random, preferential_attachment, small_world };

template <typename T>
struct Range {
  T min;
  T max;
};

/// Mixture of three random-graph families spanning density and clustering.
/// Every draw is uniform within its range.
struct SyntheticSpec {
  std::size_t count = 100;
  Range<std::size_t> node_range{20, 400};

  double weight_uniform_random = 1.0 / 3.0;
  double weight_preferential_attachment = 1.0 / 3.0;
  double weight_small_world = 1.0 / 3.0;

  Range<double> edge_probability{0.005, 0.25};        // uniform random (G(n, p))
  Range<std::size_t> attachment_edges{1, 10};         // preferential attachment m
  Range<std::size_t> ring_neighbors{2, 20};           // small world k (rounded down to even)
  Range<double> rewire_probability{0.0, 0.6};         // small world beta

  std::uint64_t seed = 0;

  /// Throws UsageError on an invalid spec.
  void validate() const;
};

/// Graph `index` of the sequence; its RNG stream depends only on (seed, index).
Graph generate_graph(const SyntheticSpec& spec, std::size_t index);

std::vector<Graph> generate_synthetic(const SyntheticSpec& spec);

}  // namespace gnnflow
