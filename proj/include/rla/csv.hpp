#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rla::csv {

using Row = std::vector<std::string>;

/// Minimal RFC 4180 reader: quoted fields, "" escapes, CRLF tolerated.
/// Blank lines are skipped. Fields are not trimmed.
std::vector<Row> read(std::istream& in);

/// Reads a file and checks the header row equals `header` exactly.
std::vector<Row> read_with_header(const std::string& path, const Row& header);
std::vector<Row> read_with_header(std::istream& in, const Row& header, const std::string& source);

std::int64_t parse_int(std::string_view field, const std::string& context);
double parse_double(std::string_view field, const std::string& context);

std::string escape(std::string_view field);

/// Shortest round-trippable decimal for a double; stable across runs.
std::string format_double(double x);

} // namespace rla::csv
