#include "rpkitor/coverage.hpp"

#include "rpkitor/text.hpp"

namespace rpkitor {

std::string_view to_string(Scope s) { return s == Scope::all ? "all" : "guards"; }

namespace {

struct Tally {
  std::size_t relays = 0;
  std::uint64_t bandwidth = 0;
  std::size_t valid = 0;
  std::uint64_t valid_bw = 0;
  std::size_t exact = 0;
  std::size_t covered = 0;
  std::size_t asn_only = 0;
  std::size_t length_only = 0;
  std::size_t both = 0;
  std::size_t rov = 0;
  std::uint64_t rov_bw = 0;

  void add(const AddressStatus& st, std::uint64_t bw) {
    ++relays;
    bandwidth += bw;
    if (st.roa.status != RoaStatus::not_found) ++covered;
    if (st.roa.valid()) {
      ++valid;
      valid_bw += bw;
      if (st.roa.exact_match) ++exact;
    } else if (st.roa.status == RoaStatus::invalid) {
      if (st.roa.asn_mismatch && st.roa.length_mismatch) {
        ++both;
      } else if (st.roa.asn_mismatch) {
        ++asn_only;
      } else {
        ++length_only;
      }
    }
    if (st.rov_enforcing) {
      ++rov;
      rov_bw += bw;
    }
  }
};

double pct(double num, double den) { return den > 0 ? 100.0 * num / den : 0.0; }

CoverageRecord finish(const Tally& t) {
  CoverageRecord r;
  r.relays = t.relays;
  r.bandwidth = t.bandwidth;
  r.roa_covered = t.covered;
  r.empty = t.relays == 0;
  const auto n = static_cast<double>(t.relays);
  const auto bw = static_cast<double>(t.bandwidth);
  const auto cov = static_cast<double>(t.covered);
  r.pct_relays_valid_roa = pct(static_cast<double>(t.valid), n);
  r.pct_bandwidth_valid_roa = pct(static_cast<double>(t.valid_bw), bw);
  r.pct_relays_exact_maxlen = pct(static_cast<double>(t.exact), n);
  r.pct_announcements_valid = pct(static_cast<double>(t.valid), cov);
  r.pct_invalid_asn_only = pct(static_cast<double>(t.asn_only), cov);
  r.pct_invalid_length_only = pct(static_cast<double>(t.length_only), cov);
  r.pct_invalid_both = pct(static_cast<double>(t.both), cov);
  r.pct_relays_rov = pct(static_cast<double>(t.rov), n);
  r.pct_bandwidth_rov = pct(static_cast<double>(t.rov_bw), bw);
  return r;
}

}  // namespace

CoverageStats coverage_report(const ConsensusSnapshot& snapshot) {
  std::array<std::array<Tally, 2>, 2> tallies{};
  for (const auto& relay : snapshot.relays) {
    const bool guard = relay.is_guard();
    for (const Scope scope : {Scope::all, Scope::guards}) {
      if (scope == Scope::guards && !guard) continue;
      auto& row = tallies[static_cast<int>(scope)];
      row[static_cast<int>(Family::v4)].add(relay.v4, relay.bandwidth);
      if (relay.v6) row[static_cast<int>(Family::v6)].add(*relay.v6, relay.bandwidth);
    }
  }
  CoverageStats stats;
  for (int s = 0; s < 2; ++s) {
    for (int f = 0; f < 2; ++f) stats.records[s][f] = finish(tallies[s][f]);
  }
  return stats;
}

CoverageSeries coverage_timeseries(std::vector<DatedSnapshot> snapshots,
                                   const std::map<std::string, RoaStore>& roas_by_date,
                                   const std::map<std::string, PrefixTable<Asn>>& routes_by_date,
                                   const RovRegistry& rov) {
  CoverageSeries out;
  for (auto& dated : snapshots) {
    const auto roas = roas_by_date.find(dated.date);
    const auto routes = routes_by_date.find(dated.date);
    if (roas == roas_by_date.end() || routes == routes_by_date.end()) {
      out.warnings.push_back("skipping " + dated.date + ": missing " +
                             (roas == roas_by_date.end() ? "ROA" : "route") + " data");
      continue;
    }
    resolve_rpki(dated.snapshot, routes->second, roas->second, rov);
    out.rows.push_back({dated.date, coverage_report(dated.snapshot)});
  }
  return out;
}

void write_coverage_header(std::ostream& out) {
  out << "date,scope,family,relays,bandwidth,roa_covered,empty,pct_relays_valid_roa,"
         "pct_bandwidth_valid_roa,pct_relays_exact_maxlen,pct_announcements_valid,"
         "pct_invalid_asn_only,pct_invalid_length_only,pct_invalid_both,pct_relays_rov,"
         "pct_bandwidth_rov\n";
}

void write_coverage_rows(std::ostream& out, const std::string& date, const CoverageStats& stats) {
  using text::format_double;
  for (const Scope scope : {Scope::all, Scope::guards}) {
    for (const Family fam : {Family::v4, Family::v6}) {
      const auto& r = stats.at(scope, fam);
      out << date << ',' << to_string(scope) << ',' << to_string(fam) << ',' << r.relays << ','
          << r.bandwidth << ',' << r.roa_covered << ',' << (r.empty ? 1 : 0) << ','
          << format_double(r.pct_relays_valid_roa) << ',' << format_double(r.pct_bandwidth_valid_roa) << ','
          << format_double(r.pct_relays_exact_maxlen) << ',' << format_double(r.pct_announcements_valid)
          << ',' << format_double(r.pct_invalid_asn_only) << ',' << format_double(r.pct_invalid_length_only)
          << ',' << format_double(r.pct_invalid_both) << ',' << format_double(r.pct_relays_rov) << ','
          << format_double(r.pct_bandwidth_rov) << '\n';
    }
  }
}

}  // namespace rpkitor
