#pragma once

#include <array>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "rpkitor/consensus.hpp"

namespace rpkitor {

enum class Scope { all = 0, guards = 1 };
std::string_view to_string(Scope s);

// Coverage figures for one (scope, family) population. Percentages are in [0,100];
// a zero denominator yields 0 and the matching count tells the two cases apart.
struct CoverageRecord {
  std::size_t relays = 0;           // relays in scope with an address of this family
  std::uint64_t bandwidth = 0;      // their summed consensus weight
  std::size_t roa_covered = 0;      // Valid + Invalid (prefix has at least one ROA)
  bool empty = true;                // relays == 0

  double pct_relays_valid_roa = 0;
  double pct_bandwidth_valid_roa = 0;
  double pct_relays_exact_maxlen = 0;
  double pct_announcements_valid = 0;  // over roa_covered
  double pct_invalid_asn_only = 0;     // over roa_covered
  double pct_invalid_length_only = 0;  // over roa_covered
  double pct_invalid_both = 0;         // over roa_covered
  double pct_relays_rov = 0;
  double pct_bandwidth_rov = 0;
};

struct CoverageStats {
  // [scope][family]
  std::array<std::array<CoverageRecord, 2>, 2> records{};

  const CoverageRecord& at(Scope s, Family f) const {
    return records[static_cast<int>(s)][static_cast<int>(f)];
  }
  CoverageRecord& at(Scope s, Family f) { return records[static_cast<int>(s)][static_cast<int>(f)]; }
};

// Expects a snapshot already passed through resolve_rpki.
CoverageStats coverage_report(const ConsensusSnapshot& snapshot);

struct DatedCoverage {
  std::string date;
  CoverageStats stats;
};

struct CoverageSeries {
  std::vector<DatedCoverage> rows;
  std::vector<std::string> warnings;
};

struct DatedSnapshot {
  std::string date;
  ConsensusSnapshot snapshot;  // unresolved
};

// Resolves and reports each dated snapshot against that date's ROAs and routes.
// Dates are opaque labels; a date missing either dataset is skipped with a warning.
CoverageSeries coverage_timeseries(std::vector<DatedSnapshot> snapshots,
                                   const std::map<std::string, RoaStore>& roas_by_date,
                                   const std::map<std::string, PrefixTable<Asn>>& routes_by_date,
                                   const RovRegistry& rov);

// Column order:
// date,scope,family,relays,bandwidth,roa_covered,empty,pct_relays_valid_roa,
// pct_bandwidth_valid_roa,pct_relays_exact_maxlen,pct_announcements_valid,
// pct_invalid_asn_only,pct_invalid_length_only,pct_invalid_both,pct_relays_rov,pct_bandwidth_rov
void write_coverage_header(std::ostream& out);
void write_coverage_rows(std::ostream& out, const std::string& date, const CoverageStats& stats);

}  // namespace rpkitor
