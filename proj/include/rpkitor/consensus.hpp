#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "rpkitor/category.hpp"
#include "rpkitor/netprefix.hpp"
#include "rpkitor/prefix_table.hpp"
#include "rpkitor/rpki.hpp"

namespace rpkitor {

// Routing/RPKI view of one relay address.
struct AddressStatus {
  std::optional<Asn> origin_asn;
  std::optional<IpPrefix> covering_prefix;
  ValidationResult roa;
  bool rov_enforcing = false;
};

struct Relay {
  std::string identity;
  std::string nickname;
  IpAddress ipv4;
  std::optional<IpAddress> ipv6;
  std::vector<std::string> flags;  // sorted, unique
  std::uint64_t bandwidth = 0;     // consensus weight

  AddressStatus v4;
  std::optional<AddressStatus> v6;  // only when ipv6 is present
  Category category = Category::neither;

  bool has_flag(std::string_view flag) const;
  bool is_guard() const { return has_flag("Guard") && has_flag("Running"); }
  // Selection keys off the IPv4 origin validation; only Valid counts as covered.
  bool roa_covered() const { return v4.roa.valid(); }
};

struct ConsensusSnapshot {
  std::string valid_after;
  std::vector<Relay> relays;
  std::uint64_t total_guard_weight = 0;
  std::size_t warnings = 0;
  std::vector<std::string> warning_messages;

  void recompute_totals();
};

// Tor v3 network-status subset: "valid-after", "r", "a", "s", "w Bandwidth=".
// A malformed "r" line drops that block and counts a warning; other lines are ignored.
ConsensusSnapshot parse_consensus(std::istream& in);

// Attaches origin AS, origin validation, ROV status and category to every relay.
// When several origins announce the winning prefix, a validating origin is preferred,
// then the lowest ASN. Idempotent.
void resolve_rpki(ConsensusSnapshot& snapshot, const PrefixTable<Asn>& routes, const RoaStore& roas,
                  const RovRegistry& rov);

AddressStatus resolve_address(const IpAddress& addr, const PrefixTable<Asn>& routes, const RoaStore& roas,
                              const RovRegistry& rov);

// Guard AND Running relays, sorted by identity.
std::vector<Relay> guard_set(const ConsensusSnapshot& snapshot);

}  // namespace rpkitor
