#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gnnflow::csv {

/// A parsed CSV file with a mandatory header row. Fields are not quoted.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws DataError if absent.
  std::size_t column(std::string_view name) const;
};

/// Throws ParseError on ragged rows or an empty input.
Table parse(std::string_view text);

/// Shortest representation that round-trips exactly.
std::string format_double(double x);

double parse_double(std::string_view s, std::size_t line);
std::uint64_t parse_uint(std::string_view s, std::size_t line);

std::string join(const std::vector<std::string>& fields);

}  // namespace gnnflow::csv
