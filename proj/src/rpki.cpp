#include "rpkitor/rpki.hpp"

#include <algorithm>

#include "rpkitor/text.hpp"

namespace rpkitor {

std::string_view to_string(RoaStatus s) {
  switch (s) {
    case RoaStatus::valid: return "valid";
    case RoaStatus::invalid: return "invalid";
    case RoaStatus::not_found: return "not-found";
  }
  return "?";
}

void RoaStore::add(const RoaRecord& roa) {
  if (roa.max_length < roa.prefix.length() || roa.max_length > max_length(roa.prefix.family())) {
    throw InputError("max_length " + std::to_string(roa.max_length) + " outside [" +
                     std::to_string(roa.prefix.length()) + ", " +
                     std::to_string(max_length(roa.prefix.family())) + "] for " + roa.prefix.to_string());
  }
  table_.insert(roa.prefix, roa);
  ++size_;
}

ValidationResult RoaStore::validate(const IpPrefix& announced, Asn origin) const {
  bool any_covering = false;
  bool any_origin_match = false;
  bool any_length_ok = false;
  ValidationResult result;
  for (const auto& match : table_.covering(announced)) {
    for (const auto& roa : match.values) {
      any_covering = true;
      const bool length_ok = announced.length() <= roa.max_length;
      any_length_ok = any_length_ok || length_ok;
      if (roa.asn != origin) continue;
      any_origin_match = true;
      if (length_ok) {
        result.status = RoaStatus::valid;
        result.exact_match = result.exact_match || roa.max_length == announced.length();
      }
    }
  }
  if (result.status == RoaStatus::valid) return result;
  if (!any_covering) return result;

  result.status = RoaStatus::invalid;
  result.asn_mismatch = !any_origin_match;
  // With the origin authorized somewhere, the only way to be invalid is the length.
  // Without it, the length is wrong too when no covering ROA admits this length at all.
  result.length_mismatch = any_origin_match ? true : !any_length_ok;
  return result;
}

namespace {

bool looks_like_header(const std::vector<std::string_view>& fields) {
  return !fields.empty() && !text::parse_asn(fields[0]) && fields[0].find('/') == std::string_view::npos;
}

}  // namespace

RoaLoadResult load_roas(std::istream& in) {
  if (!in) throw InputError("ROA stream is not readable");
  RoaLoadResult out;
  std::string line;
  std::size_t lineno = 0;
  while (text::next_line(in, line)) {
    ++lineno;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = text::split(trimmed, ',');
    if (lineno == 1 && looks_like_header(fields)) continue;
    if (fields.size() < 2) {
      out.errors.push_back({lineno, "expected asn,prefix,max_length"});
      continue;
    }
    const auto asn = text::parse_asn(fields[0]);
    if (!asn) {
      out.errors.push_back({lineno, "bad ASN '" + std::string(fields[0]) + "'"});
      continue;
    }
    try {
      RoaRecord roa{*asn, IpPrefix::parse(fields[1]), 0};
      if (fields.size() < 3 || fields[2].empty()) {
        roa.max_length = roa.prefix.length();
      } else {
        const auto ml = text::parse_u64(fields[2]);
        if (!ml || *ml > 128) {
          out.errors.push_back({lineno, "bad max_length '" + std::string(fields[2]) + "'"});
          continue;
        }
        roa.max_length = static_cast<int>(*ml);
      }
      out.store.add(roa);
    } catch (const InputError& e) {
      out.errors.push_back({lineno, e.what()});
    }
  }
  if (in.bad()) throw InputError("error while reading ROA stream");
  return out;
}

std::string_view to_string(RovSource s) {
  switch (s) {
    case RovSource::rov_monitor: return "rov-monitor";
    case RovSource::manrs_case1: return "manrs-case1";
    case RovSource::rovista: return "rovista";
    case RovSource::hlavacek: return "hlavacek";
    case RovSource::manrs_case2: return "manrs-case2";
    case RovSource::custom: return "custom";
  }
  return "?";
}

std::optional<RovSource> parse_rov_source(std::string_view text) {
  for (auto s : {RovSource::rov_monitor, RovSource::manrs_case1, RovSource::rovista, RovSource::hlavacek,
                 RovSource::manrs_case2, RovSource::custom}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

RovRegistry::RovRegistry(double threshold) : threshold_(0.5) { set_threshold(threshold); }

void RovRegistry::set_threshold(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("ROV threshold must lie in [0,1]");
  threshold_ = t;
}

void RovRegistry::add(Asn asn, double score, RovSource source) {
  if (!(score >= 0.0 && score <= 1.0)) throw InputError("ROV score must lie in [0,1]");
  auto [it, inserted] = entries_.try_emplace(asn, Entry{score, source});
  if (!inserted && score > it->second.score) it->second = Entry{score, source};
}

bool RovRegistry::is_enforcing(Asn asn) const {
  const auto it = entries_.find(asn);
  return it != entries_.end() && it->second.score >= threshold_;
}

std::optional<RovRegistry::Entry> RovRegistry::lookup(Asn asn) const {
  const auto it = entries_.find(asn);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<RowError> load_rov_list(std::istream& in, RovSource source, RovRegistry& registry) {
  if (!in) throw InputError("ROV stream is not readable");
  std::vector<RowError> errors;
  std::string line;
  std::size_t lineno = 0;
  while (text::next_line(in, line)) {
    ++lineno;
    auto content = std::string_view(line);
    if (const auto hash = content.find('#'); hash != std::string_view::npos) content = content.substr(0, hash);
    content = text::trim(content);
    if (content.empty()) continue;
    const auto fields = text::split(content, ',');
    const auto asn = text::parse_asn(fields[0]);
    if (!asn) {
      if (lineno == 1) continue;  // header
      errors.push_back({lineno, "bad ASN '" + std::string(fields[0]) + "'"});
      continue;
    }
    double score = 1.0;
    if (fields.size() >= 2 && !fields[1].empty()) {
      const auto s = text::parse_double(fields[1]);
      if (!s || *s < 0.0 || *s > 1.0) {
        errors.push_back({lineno, "score must be a number in [0,1]"});
        continue;
      }
      score = *s;
    }
    registry.add(*asn, score, source);
  }
  if (in.bad()) throw InputError("error while reading ROV stream");
  return errors;
}

RouteLoadResult load_routes(std::istream& in) {
  if (!in) throw InputError("route stream is not readable");
  RouteLoadResult out;
  std::string line;
  std::size_t lineno = 0;
  while (text::next_line(in, line)) {
    ++lineno;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = text::split(trimmed, ',');
    if (fields.size() < 2) {
      out.errors.push_back({lineno, "expected prefix,origin_asn"});
      continue;
    }
    const auto asn = text::parse_asn(fields[1]);
    if (!asn) {
      if (lineno == 1) continue;  // header
      out.errors.push_back({lineno, "bad origin ASN '" + std::string(fields[1]) + "'"});
      continue;
    }
    try {
      out.routes.insert(IpPrefix::parse(fields[0]), *asn);
    } catch (const InputError& e) {
      out.errors.push_back({lineno, e.what()});
    }
  }
  if (in.bad()) throw InputError("error while reading route stream");
  return out;
}

}  // namespace rpkitor
