#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace panelcause::csv {

struct Record {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 style reader: quoted fields, doubled quotes, CRLF tolerated.
// Blank lines are skipped.
std::vector<Record> read_records(std::istream& in);

std::string quote_if_needed(std::string_view field);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

// Full-string numeric parse; surrounding whitespace allowed.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

bool is_blank(std::string_view text);

}  // namespace panelcause::csv
