#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gnnflow/graph.hpp"

namespace gnnflow {

/// Whitespace-separated "u v" pairs, 0-indexed, one per line; '#' starts a
/// comment line. A "# nodes N" comment raises the node count to N so that
/// trailing isolated nodes survive a round trip; otherwise V = max id + 1.
Graph load_edge_list(std::string_view text);

/// Canonical emission: "# nodes V" header, then edges as (min, max) in
/// lexicographic order.
std::string write_edge_list(const Graph& g);

/// Matrix Market coordinate subset (pattern/real/integer, general/symmetric).
/// The adjacency pattern is symmetrized; values are ignored.
Graph load_matrix_market(std::string_view text);

/// Dispatches on extension: ".mtx" loads Matrix Market, anything else an edge list.
Graph load_graph_file(const std::filesystem::path& path);

/// Loads every *.el / *.txt / *.mtx file in a directory, sorted by file name.
/// The graph id is the file stem.
std::vector<NamedGraph> load_graph_dir(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace gnnflow
