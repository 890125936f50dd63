#include "rpkitor/text.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "rpkitor/error.hpp"

namespace rpkitor::text {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::uint32_t> parse_asn(std::string_view s) {
  s = trim(s);
  if (s.size() > 2 && (s[0] == 'A' || s[0] == 'a') && (s[1] == 'S' || s[1] == 's')) s.remove_prefix(2);
  const auto v = parse_u64(s);
  if (!v || *v > std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  return static_cast<std::uint32_t>(*v);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::vector<double> parse_double_list(std::string_view spec) {
  std::vector<double> out;
  const auto colon_parts = split(spec, ':');
  if (colon_parts.size() == 3) {
    const auto start = parse_double(colon_parts[0]);
    const auto stop = parse_double(colon_parts[1]);
    const auto step = parse_double(colon_parts[2]);
    if (!start || !stop || !step || *step <= 0 || *stop < *start) {
      throw InputError("bad range '" + std::string(spec) + "', expected start:stop:step");
    }
    const auto count = static_cast<long>(std::floor((*stop - *start) / *step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      const double v = *start + static_cast<double>(i) * *step;
      out.push_back(std::round(v * 1e12) / 1e12);
    }
    return out;
  }
  for (const auto part : split(spec, ',')) {
    const auto v = parse_double(part);
    if (!v) throw InputError("bad number '" + std::string(part) + "' in list '" + std::string(spec) + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace rpkitor::text
