#include "rpkitor/consensus.hpp"

#include <algorithm>

#include "rpkitor/text.hpp"

namespace rpkitor {

bool Relay::has_flag(std::string_view flag) const {
  return std::binary_search(flags.begin(), flags.end(), flag, std::less<>());
}

void ConsensusSnapshot::recompute_totals() {
  total_guard_weight = 0;
  for (const auto& r : relays) {
    if (r.is_guard()) total_guard_weight += r.bandwidth;
  }
}

namespace {

std::optional<IpAddress> parse_or_address(std::string_view token) {
  // "[2001:db8::1]:9001" or "192.0.2.1:9001"
  std::string_view host = token;
  if (!host.empty() && host.front() == '[') {
    const auto close = host.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = host.substr(1, close - 1);
  } else if (const auto colon = host.rfind(':'); colon != std::string_view::npos &&
                                                  host.find(':') == colon) {
    host = host.substr(0, colon);
  }
  IpAddress addr;
  if (!IpAddress::try_parse(host, addr)) return std::nullopt;
  return addr;
}

}  // namespace

ConsensusSnapshot parse_consensus(std::istream& in) {
  if (!in) throw InputError("consensus stream is not readable");
  ConsensusSnapshot snap;
  std::optional<Relay> current;
  bool skipping = false;  // inside a block whose "r" line was malformed

  auto flush = [&] {
    if (current) {
      std::sort(current->flags.begin(), current->flags.end());
      current->flags.erase(std::unique(current->flags.begin(), current->flags.end()), current->flags.end());
      snap.relays.push_back(std::move(*current));
      current.reset();
    }
  };
  auto warn = [&](std::size_t lineno, const std::string& msg) {
    ++snap.warnings;
    snap.warning_messages.push_back("line " + std::to_string(lineno) + ": " + msg);
  };

  std::string line;
  std::size_t lineno = 0;
  while (text::next_line(in, line)) {
    ++lineno;
    const auto tokens = text::split_ws(line);
    if (tokens.empty()) continue;
    const auto kind = tokens[0];

    if (kind == "valid-after") {
      if (tokens.size() >= 3) {
        snap.valid_after = std::string(tokens[1]) + " " + std::string(tokens[2]);
      } else if (tokens.size() == 2) {
        snap.valid_after = std::string(tokens[1]);
      }
      continue;
    }
    if (kind == "r") {
      flush();
      skipping = false;
      // Full consensus: r nick identity digest date time IP ORPort DirPort (9 tokens).
      // Microdescriptor consensus omits the digest (8 tokens).
      std::size_t ip_index = 0;
      if (tokens.size() >= 9) {
        ip_index = 6;
      } else if (tokens.size() == 8) {
        ip_index = 5;
      } else {
        warn(lineno, "malformed r line");
        skipping = true;
        continue;
      }
      IpAddress addr;
      if (!IpAddress::try_parse(tokens[ip_index], addr) || addr.family() != Family::v4) {
        warn(lineno, "r line has no IPv4 address");
        skipping = true;
        continue;
      }
      Relay r;
      r.nickname = std::string(tokens[1]);
      r.identity = std::string(tokens[2]);
      r.ipv4 = addr;
      current = std::move(r);
      continue;
    }
    if (kind == "directory-footer") {
      flush();
      skipping = false;
      continue;
    }
    if (!current || skipping) continue;

    if (kind == "a" && tokens.size() >= 2) {
      if (const auto addr = parse_or_address(tokens[1]); addr && addr->family() == Family::v6 && !current->ipv6) {
        current->ipv6 = *addr;
      }
    } else if (kind == "s") {
      for (std::size_t i = 1; i < tokens.size(); ++i) current->flags.emplace_back(tokens[i]);
    } else if (kind == "w") {
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (tokens[i].starts_with("Bandwidth=")) {
          if (const auto bw = text::parse_u64(tokens[i].substr(10))) {
            current->bandwidth = *bw;
          } else {
            warn(lineno, "bad Bandwidth value");
          }
        }
      }
    }
  }
  flush();
  if (in.bad()) throw InputError("error while reading consensus stream");
  snap.recompute_totals();
  return snap;
}

AddressStatus resolve_address(const IpAddress& addr, const PrefixTable<Asn>& routes, const RoaStore& roas,
                              const RovRegistry& rov) {
  AddressStatus st;
  const auto match = routes.longest_match(addr);
  if (!match) return st;

  std::optional<Asn> chosen;
  ValidationResult chosen_result;
  for (const Asn origin : match->values) {
    const auto res = roas.validate(match->prefix, origin);
    const bool better = !chosen || (res.valid() && !chosen_result.valid()) ||
                        (res.valid() == chosen_result.valid() && origin < *chosen);
    if (better) {
      chosen = origin;
      chosen_result = res;
    }
  }
  st.origin_asn = chosen;
  st.covering_prefix = match->prefix;
  st.roa = chosen_result;
  st.rov_enforcing = rov.is_enforcing(*chosen);
  return st;
}

void resolve_rpki(ConsensusSnapshot& snapshot, const PrefixTable<Asn>& routes, const RoaStore& roas,
                  const RovRegistry& rov) {
  for (auto& relay : snapshot.relays) {
    relay.v4 = resolve_address(relay.ipv4, routes, roas, rov);
    if (relay.ipv6) {
      relay.v6 = resolve_address(*relay.ipv6, routes, roas, rov);
    } else {
      relay.v6.reset();
    }
    relay.category = category_of(relay.v4.roa.valid(), relay.v4.rov_enforcing);
  }
  snapshot.recompute_totals();
}

std::vector<Relay> guard_set(const ConsensusSnapshot& snapshot) {
  std::vector<Relay> guards;
  for (const auto& r : snapshot.relays) {
    if (r.is_guard()) guards.push_back(r);
  }
  std::stable_sort(guards.begin(), guards.end(),
                   [](const Relay& a, const Relay& b) { return a.identity < b.identity; });
  return guards;
}

}  // namespace rpkitor
