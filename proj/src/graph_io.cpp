#include "gnnflow/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gnnflow/error.hpp"

namespace gnnflow {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

template <typename F>
void for_each_line(std::string_view text, F&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    fn(line_no, text.substr(pos, end - pos));
    if (end == text.size()) break;
    pos = end + 1;
  }
}

std::uint64_t parse_count(std::string_view token, std::size_t line_no) {
  std::uint64_t value = 0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line_no, "expected a non-negative integer, got '" + std::string(token) + "'");
  }
  return value;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Graph load_edge_list(std::string_view text) {
  std::vector<Edge> edges;
  std::uint64_t declared_nodes = 0;
  bool saw_any = false;
  std::uint64_t max_id = 0;

  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) return;
    if (tokens.front().front() == '#') {
      // "# nodes N" directive
      if (tokens.size() == 3 && tokens[0] == "#" && tokens[1] == "nodes") {
        declared_nodes = std::max(declared_nodes, parse_count(tokens[2], line_no));
        saw_any = true;
      }
      return;
    }
    if (tokens.size() != 2) {
      throw ParseError(line_no, "expected 'u v', got " + std::to_string(tokens.size()) + " tokens");
    }
    const std::uint64_t u = parse_count(tokens[0], line_no);
    const std::uint64_t v = parse_count(tokens[1], line_no);
    if (u >= UINT32_MAX || v >= UINT32_MAX) throw ParseError(line_no, "node id too large");
    max_id = std::max({max_id, u, v});
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    saw_any = true;
  });

  if (!saw_any) throw ParseError(0, "empty edge list");
  const std::uint64_t nodes = std::max<std::uint64_t>(declared_nodes, edges.empty() ? 0 : max_id + 1);
  if (nodes == 0) throw ParseError(0, "edge list declares zero nodes");
  return Graph::from_edges(nodes, edges);
}

std::string write_edge_list(const Graph& g) {
  std::string out = "# nodes " + std::to_string(g.node_count()) + "\n";
  for (const auto& [u, v] : g.edges()) {
    out += std::to_string(u);
    out += ' ';
    out += std::to_string(v);
    out += '\n';
  }
  return out;
}

Graph load_matrix_market(std::string_view text) {
  bool header_seen = false;
  bool size_seen = false;
  std::uint64_t rows = 0, cols = 0, nnz = 0, entries = 0;
  std::size_t value_tokens = 0;
  std::vector<Edge> edges;

  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (!header_seen) {
      const auto tokens = split_ws(line);
      if (tokens.empty()) return;
      if (lower(tokens[0]) != "%%matrixmarket") {
        throw ParseError(line_no, "missing %%MatrixMarket header");
      }
      if (tokens.size() < 5 || lower(tokens[1]) != "matrix") {
        throw ParseError(line_no, "unsupported Matrix Market object");
      }
      if (lower(tokens[2]) != "coordinate") {
        throw ParseError(line_no, "unsupported Matrix Market format '" + std::string(tokens[2]) +
                                      "' (only coordinate is supported)");
      }
      const std::string field = lower(tokens[3]);
      if (field == "pattern") {
        value_tokens = 0;
      } else if (field == "real" || field == "integer") {
        value_tokens = 1;
      } else if (field == "complex") {
        value_tokens = 2;
      } else {
        throw ParseError(line_no, "unsupported Matrix Market field '" + field + "'");
      }
      const std::string symmetry = lower(tokens[4]);
      if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric" &&
          symmetry != "hermitian") {
        throw ParseError(line_no, "unsupported Matrix Market symmetry '" + symmetry + "'");
      }
      header_seen = true;
      return;
    }
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '%') return;
    if (!size_seen) {
      if (tokens.size() != 3) throw ParseError(line_no, "expected 'rows cols nnz'");
      rows = parse_count(tokens[0], line_no);
      cols = parse_count(tokens[1], line_no);
      nnz = parse_count(tokens[2], line_no);
      if (rows != cols) throw ParseError(line_no, "adjacency matrix must be square");
      if (rows == 0) throw ParseError(line_no, "matrix has zero rows");
      if (rows >= UINT32_MAX) throw ParseError(line_no, "matrix too large");
      size_seen = true;
      edges.reserve(nnz);
      return;
    }
    if (tokens.size() != 2 + value_tokens) {
      throw ParseError(line_no, "expected " + std::to_string(2 + value_tokens) + " tokens per entry");
    }
    const std::uint64_t i = parse_count(tokens[0], line_no);
    const std::uint64_t j = parse_count(tokens[1], line_no);
    if (i < 1 || j < 1 || i > rows || j > cols) {
      throw ParseError(line_no, "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    ++entries;
    edges.emplace_back(static_cast<NodeId>(i - 1), static_cast<NodeId>(j - 1));
  });

  if (!header_seen) throw ParseError(0, "empty Matrix Market input");
  if (!size_seen) throw ParseError(0, "missing size line");
  if (entries != nnz) {
    throw ParseError(0, "declared " + std::to_string(nnz) + " entries, found " + std::to_string(entries));
  }
  return Graph::from_edges(rows, edges);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Graph load_graph_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    if (path.extension() == ".mtx") return load_matrix_market(text);
    return load_edge_list(text);
  } catch (const ParseError& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

std::vector<NamedGraph> load_graph_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("'" + dir.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".el" || ext == ".txt" || ext == ".mtx") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no graph files in '" + dir.string() + "'");

  std::vector<NamedGraph> graphs;
  graphs.reserve(files.size());
  for (const auto& f : files) graphs.push_back({f.stem().string(), load_graph_file(f)});
  return graphs;
}

}  // namespace gnnflow
