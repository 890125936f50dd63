#include <doctest.h>

#include <sstream>

#include "consensus_text.hpp"
#include "rpkitor/coverage.hpp"

using namespace rpkitor;
using fixture::router;

namespace {

ConsensusSnapshot parse(const std::string& text) {
  std::istringstream in(text);
  return parse_consensus(in);
}

struct World {
  PrefixTable<Asn> routes;
  RoaStore roas;
  RovRegistry rov;
  World() {
    routes.insert(parse_prefix("10.1.0.0/16"), 1);  // valid, exact
    routes.insert(parse_prefix("10.2.0.0/16"), 2);  // valid, not exact
    routes.insert(parse_prefix("10.3.0.0/16"), 3);  // invalid asn
    routes.insert(parse_prefix("10.4.0.0/24"), 4);  // invalid length
    routes.insert(parse_prefix("10.5.0.0/24"), 5);  // invalid both
    routes.insert(parse_prefix("10.6.0.0/16"), 6);  // not found
    roas.add({1, parse_prefix("10.1.0.0/16"), 16});
    roas.add({2, parse_prefix("10.2.0.0/16"), 24});
    roas.add({99, parse_prefix("10.3.0.0/16"), 16});
    roas.add({4, parse_prefix("10.4.0.0/16"), 16});
    roas.add({98, parse_prefix("10.5.0.0/16"), 16});
    rov.add(1, 1.0, RovSource::custom);
    rov.add(6, 1.0, RovSource::custom);
  }
};

std::string mixed_network(long scale = 1) {
  return fixture::consensus_header() + router("a", "A", "10.1.0.1", "Guard Running", 10 * scale, "2001:db8::1") +
         router("b", "B", "10.2.0.1", "Guard Running", 20 * scale) +
         router("c", "C", "10.3.0.1", "Guard Running", 30 * scale) +
         router("d", "D", "10.4.0.1", "Guard Running", 40 * scale) +
         router("e", "E", "10.5.0.1", "Guard Running", 50 * scale) +
         router("f", "F", "10.6.0.1", "Guard Running", 60 * scale) +
         router("g", "G", "10.1.0.2", "Exit Running", 70 * scale);
}

CoverageStats report(const std::string& text, const World& w) {
  auto snap = parse(text);
  resolve_rpki(snap, w.routes, w.roas, w.rov);
  return coverage_report(snap);
}

}  // namespace

TEST_CASE("relay and bandwidth coverage on the 10/10/10/70 fixture") {
  World w;
  const auto stats = report(fixture::consensus_header() + router("a", "A", "10.1.0.1", "Guard Running", 10) +
                                router("b", "B", "10.1.0.2", "Guard Running", 10) +
                                router("c", "C", "10.2.0.1", "Guard Running", 10) +
                                router("d", "D", "10.6.0.1", "Guard Running", 70),
                            w);
  const auto& g = stats.at(Scope::guards, Family::v4);
  CHECK(g.relays == 4);
  CHECK(g.pct_relays_valid_roa == doctest::Approx(75.0));
  CHECK(g.pct_bandwidth_valid_roa == doctest::Approx(30.0));
  CHECK(g.pct_relays_exact_maxlen == doctest::Approx(50.0));
}

TEST_CASE("all NotFound gives zero ROA percentages") {
  World w;
  const auto stats = report(fixture::consensus_header() + router("f", "F", "10.6.0.1", "Guard Running", 5) +
                                router("x", "X", "192.0.2.1", "Guard Running", 5),
                            w);
  const auto& g = stats.at(Scope::guards, Family::v4);
  CHECK(g.pct_relays_valid_roa == 0);
  CHECK(g.pct_bandwidth_valid_roa == 0);
  CHECK(g.pct_announcements_valid == 0);
  CHECK(g.roa_covered == 0);
  CHECK(g.pct_relays_rov == doctest::Approx(50.0));
}

TEST_CASE("single exact relay") {
  World w;
  const auto stats = report(fixture::consensus_header() + router("a", "A", "10.1.0.1", "Guard Running", 5), w);
  CHECK(stats.at(Scope::guards, Family::v4).pct_relays_exact_maxlen == 100);
  CHECK(stats.at(Scope::guards, Family::v6).empty);
  CHECK(stats.at(Scope::guards, Family::v6).relays == 0);
}

TEST_CASE("invalid breakdown and invariants") {
  World w;
  const auto stats = report(mixed_network(), w);
  const auto& g = stats.at(Scope::guards, Family::v4);
  CHECK(g.relays == 6);
  CHECK(g.roa_covered == 5);
  CHECK(g.pct_announcements_valid == doctest::Approx(40.0));
  CHECK(g.pct_invalid_asn_only == doctest::Approx(20.0));
  CHECK(g.pct_invalid_length_only == doctest::Approx(20.0));
  CHECK(g.pct_invalid_both == doctest::Approx(20.0));
  for (const auto scope : {Scope::all, Scope::guards}) {
    for (const auto fam : {Family::v4, Family::v6}) {
      const auto& r = stats.at(scope, fam);
      if (r.roa_covered > 0) {
        CHECK(r.pct_invalid_asn_only + r.pct_invalid_length_only + r.pct_invalid_both ==
              doctest::Approx(100.0 - r.pct_announcements_valid).epsilon(1e-12));
      }
      CHECK(r.pct_relays_exact_maxlen <= r.pct_relays_valid_roa);
    }
  }
  const auto& all = stats.at(Scope::all, Family::v4);
  CHECK(all.relays == 7);
  CHECK(stats.at(Scope::all, Family::v6).relays == 1);
}

TEST_CASE("bandwidth percentages are scale invariant and reports are deterministic") {
  World w;
  const auto a = report(mixed_network(1), w);
  const auto b = report(mixed_network(1000), w);
  const auto c = report(mixed_network(1), w);
  for (const auto scope : {Scope::all, Scope::guards}) {
    CHECK(a.at(scope, Family::v4).pct_bandwidth_valid_roa ==
          doctest::Approx(b.at(scope, Family::v4).pct_bandwidth_valid_roa).epsilon(1e-12));
    CHECK(a.at(scope, Family::v4).pct_bandwidth_rov ==
          doctest::Approx(b.at(scope, Family::v4).pct_bandwidth_rov).epsilon(1e-12));
  }
  std::ostringstream x, y;
  write_coverage_rows(x, "d", a);
  write_coverage_rows(y, "d", c);
  CHECK(x.str() == y.str());
}

TEST_CASE("non-guard relays do not affect guard statistics") {
  World w;
  const auto with = report(mixed_network(), w);
  auto text = mixed_network();
  text = text.substr(0, text.find("r g "));
  const auto without = report(text, w);
  std::ostringstream x, y;
  write_coverage_rows(x, "d", with);
  write_coverage_rows(y, "d", without);
  const auto guard_lines = [](const std::string& s) {
    std::string out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find(",guards,") != std::string::npos) out += line + "\n";
    }
    return out;
  };
  CHECK(guard_lines(x.str()) == guard_lines(y.str()));
  CHECK(guard_lines(x.str()).size() > 0);
}

TEST_CASE("coverage_timeseries") {
  World w;
  std::vector<DatedSnapshot> snaps{{"2024-01", parse(mixed_network())}, {"2024-02", parse(mixed_network())}};
  std::map<std::string, RoaStore> roas{{"2024-01", w.roas}, {"2024-02", w.roas}};
  std::map<std::string, PrefixTable<Asn>> routes{{"2024-01", w.routes}, {"2024-02", w.routes}};

  auto series = coverage_timeseries(snaps, roas, routes, w.rov);
  CHECK(series.rows.size() == 2);
  CHECK(series.warnings.empty());

  roas.erase("2024-02");
  series = coverage_timeseries(snaps, roas, routes, w.rov);
  REQUIRE(series.rows.size() == 1);
  CHECK(series.rows[0].date == "2024-01");
  CHECK(series.warnings.size() == 1);
}

TEST_CASE("rising ROA deployment gives a monotone coverage column") {
  World w;
  std::vector<DatedSnapshot> snaps;
  std::map<std::string, RoaStore> roas;
  std::map<std::string, PrefixTable<Asn>> routes;
  RoaStore growing;
  const char* months[] = {"m1", "m2", "m3", "m4"};
  const char* new_roas[] = {"10.3.0.0/16", "10.4.0.0/16", "10.5.0.0/16", "10.6.0.0/16"};
  const Asn origins[] = {3, 4, 5, 6};
  for (int i = 0; i < 4; ++i) {
    growing.add({origins[i], parse_prefix(new_roas[i]), 24});
    snaps.push_back({months[i], parse(mixed_network())});
    roas.emplace(months[i], growing);
    routes.emplace(months[i], w.routes);
  }
  const auto series = coverage_timeseries(snaps, roas, routes, w.rov);
  REQUIRE(series.rows.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(series.rows[i].stats.at(Scope::guards, Family::v4).pct_relays_valid_roa >
          series.rows[i - 1].stats.at(Scope::guards, Family::v4).pct_relays_valid_roa);
  }
}

TEST_CASE("coverage CSV header") {
  std::ostringstream s;
  write_coverage_header(s);
  CHECK(s.str().rfind("date,scope,family,relays,bandwidth,roa_covered,empty,", 0) == 0);
}
