#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rpkitor/error.hpp"
#include "rpkitor/netprefix.hpp"
#include "rpkitor/prefix_table.hpp"

namespace rpkitor {

using Asn = std::uint32_t;

struct RoaRecord {
  Asn asn = 0;
  IpPrefix prefix;
  int max_length = 0;

  bool operator==(const RoaRecord&) const = default;
};

enum class RoaStatus { valid, invalid, not_found };
std::string_view to_string(RoaStatus s);

struct ValidationResult {
  RoaStatus status = RoaStatus::not_found;
  // Set only for Invalid. Exactly one of the three classes applies:
  // asn only, length only, or both.
  bool asn_mismatch = false;
  bool length_mismatch = false;
  // Set only for Valid: some authorizing ROA has max_length == announced length.
  bool exact_match = false;

  bool valid() const { return status == RoaStatus::valid; }
  bool operator==(const ValidationResult&) const = default;
};

class RoaStore {
 public:
  // Throws InputError when the record breaks prefix.length <= max_length <= family max.
  void add(const RoaRecord& roa);

  std::span<const RoaRecord> find(const IpPrefix& prefix) const { return table_.find(prefix); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // Origin validation of an announcement: NotFound when no ROA prefix contains the
  // announced prefix, Valid when any covering ROA authorizes (origin, length),
  // otherwise Invalid with the mismatch class.
  ValidationResult validate(const IpPrefix& announced, Asn origin) const;

  template <class F>
  void for_each(F&& fn) const {
    table_.for_each([&](const IpPrefix&, const RoaRecord& r) { fn(r); });
  }

 private:
  PrefixTable<RoaRecord> table_;
  std::size_t size_ = 0;
};

struct RoaLoadResult {
  RoaStore store;
  std::vector<RowError> errors;
};

// Rows "asn,prefix,max_length"; header line optional; extra columns ignored; an
// empty max_length defaults to the prefix length. Bad rows are reported and skipped.
RoaLoadResult load_roas(std::istream& in);

inline ValidationResult validate_origin(const RoaStore& store, const IpPrefix& announced, Asn origin) {
  return store.validate(announced, origin);
}

enum class RovSource { rov_monitor, manrs_case1, rovista, hlavacek, manrs_case2, custom };
std::string_view to_string(RovSource s);
std::optional<RovSource> parse_rov_source(std::string_view text);

// AS-level ROV enforcement scores. An AS enforces iff its score reaches the threshold.
class RovRegistry {
 public:
  struct Entry {
    double score = 0.0;
    RovSource source = RovSource::custom;
  };

  explicit RovRegistry(double threshold = 0.5);

  double threshold() const { return threshold_; }
  void set_threshold(double t);

  // When an AS appears in several sources the highest score is kept, so membership
  // is the union across sources.
  void add(Asn asn, double score, RovSource source);

  bool is_enforcing(Asn asn) const;
  std::optional<Entry> lookup(Asn asn) const;
  std::size_t size() const { return entries_.size(); }

 private:
  double threshold_;
  std::unordered_map<Asn, Entry> entries_;
};

// Lines "asn[,score]"; '#' starts a comment; a bare asn scores 1.0. Bad rows are returned.
std::vector<RowError> load_rov_list(std::istream& in, RovSource source, RovRegistry& registry);

inline bool is_enforcing(const RovRegistry& reg, Asn asn) { return reg.is_enforcing(asn); }

// Route table: rows "prefix,origin_asn"; header optional.
struct RouteLoadResult {
  PrefixTable<Asn> routes;
  std::vector<RowError> errors;
};
RouteLoadResult load_routes(std::istream& in);

}  // namespace rpkitor
