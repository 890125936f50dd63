#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rpkitor::text {

std::string_view trim(std::string_view s);

// Splits on `sep` and trims each field. No quoting: none of the ingested formats use it.
std::vector<std::string_view> split(std::string_view line, char sep);
std::vector<std::string_view> split_ws(std::string_view line);

std::optional<std::uint64_t> parse_u64(std::string_view s);
std::optional<double> parse_double(std::string_view s);
// Accepts "65001", "AS65001" and "as65001".
std::optional<std::uint32_t> parse_asn(std::string_view s);

// Shortest round-trip decimal form; identical on every run.
std::string format_double(double v);

// Reads lines, stripping '\r'. Returns false at end of stream.
bool next_line(std::istream& in, std::string& line);

// Comma-separated list of doubles, or "start:stop:step" (inclusive stop).
std::vector<double> parse_double_list(std::string_view spec);

}  // namespace rpkitor::text
