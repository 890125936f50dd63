#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "rpkitor/random.hpp"
#include "rpkitor/rpki.hpp"

using namespace rpkitor;

namespace {

RoaStore store_of(const std::vector<RoaRecord>& roas) {
  RoaStore s;
  for (const auto& r : roas) s.add(r);
  return s;
}

}  // namespace

TEST_CASE("load_roas") {
  SUBCASE("AS-prefixed asn") {
    std::istringstream in("AS65001,203.0.113.0/24,24\n");
    const auto res = load_roas(in);
    CHECK(res.store.size() == 1);
    CHECK(res.errors.empty());
    const auto found = res.store.find(parse_prefix("203.0.113.0/24"));
    REQUIRE(found.size() == 1);
    CHECK(found[0].asn == 65001U);
    CHECK(found[0].max_length == 24);
  }
  SUBCASE("max_length below prefix length is rejected with its line") {
    std::istringstream in("asn,prefix,max_length\n65001,203.0.113.0/24,23\n65002,198.51.100.0/24,24\n");
    const auto res = load_roas(in);
    CHECK(res.store.size() == 1);
    REQUIRE(res.errors.size() == 1);
    CHECK(res.errors[0].line == 2);
  }
  SUBCASE("empty file") {
    std::istringstream in("");
    const auto res = load_roas(in);
    CHECK(res.store.empty());
    CHECK(res.errors.empty());
  }
  SUBCASE("missing max_length defaults to the prefix length; junk rows reported") {
    std::istringstream in("65001,203.0.113.0/24,\nnot,a,row\n65001,2001:db8::/32,129\n");
    const auto res = load_roas(in);
    CHECK(res.store.size() == 1);
    CHECK(res.store.find(parse_prefix("203.0.113.0/24"))[0].max_length == 24);
    CHECK(res.errors.size() == 2);
  }
}

TEST_CASE("validate_origin examples") {
  const auto store = store_of({{65001, parse_prefix("203.0.113.0/24"), 24}});

  auto r = validate_origin(store, parse_prefix("203.0.113.0/24"), 65001);
  CHECK(r.status == RoaStatus::valid);
  CHECK(r.exact_match);

  r = validate_origin(store, parse_prefix("203.0.113.0/25"), 65001);
  CHECK(r.status == RoaStatus::invalid);
  CHECK(r.length_mismatch);
  CHECK_FALSE(r.asn_mismatch);

  r = validate_origin(store, parse_prefix("203.0.113.0/25"), 65002);
  CHECK(r.status == RoaStatus::invalid);
  CHECK(r.length_mismatch);
  CHECK(r.asn_mismatch);

  r = validate_origin(store, parse_prefix("203.0.113.0/24"), 65002);
  CHECK(r.status == RoaStatus::invalid);
  CHECK(r.asn_mismatch);
  CHECK_FALSE(r.length_mismatch);

  r = validate_origin(store, parse_prefix("198.51.100.0/24"), 65001);
  CHECK(r.status == RoaStatus::not_found);
  CHECK_FALSE(r.asn_mismatch);
  CHECK_FALSE(r.length_mismatch);
}

TEST_CASE("any authorizing ROA makes the announcement valid") {
  const auto store = store_of({{65001, parse_prefix("10.0.0.0/8"), 8},
                               {65002, parse_prefix("10.0.0.0/8"), 24},
                               {65001, parse_prefix("10.1.0.0/16"), 20}});
  const auto r = validate_origin(store, parse_prefix("10.1.2.0/20"), 65001);
  CHECK(r.status == RoaStatus::valid);
  CHECK(r.exact_match);
  CHECK_FALSE(validate_origin(store, parse_prefix("10.1.2.0/24"), 65001).valid());
  CHECK(validate_origin(store, parse_prefix("10.1.2.0/24"), 65002).valid());
  CHECK(validate_origin(store, parse_prefix("10.1.2.0/24"), 65002).exact_match);
}

TEST_CASE("validate_origin agrees with the brute-force scan") {
  Rng rng(77);
  for (int fixture = 0; fixture < 300; ++fixture) {
    std::vector<RoaRecord> roas;
    const int count = 1 + static_cast<int>(uniform_index(rng, 8));
    for (int i = 0; i < count; ++i) {
      const int len = 8 + static_cast<int>(uniform_index(rng, 17));
      const auto addr = IpAddress::v4(0x0A000000U | static_cast<std::uint32_t>(uniform_index(rng, 4)) << 20);
      roas.push_back({65000 + static_cast<Asn>(uniform_index(rng, 3)), IpPrefix(addr, len),
                      len + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(33 - len)))});
    }
    const auto store = store_of(roas);
    for (int q = 0; q < 30; ++q) {
      const auto addr = IpAddress::v4(0x0A000000U | static_cast<std::uint32_t>(uniform_index(rng, 1U << 22)));
      const IpPrefix ann(addr, 8 + static_cast<int>(uniform_index(rng, 25)));
      const Asn origin = 65000 + static_cast<Asn>(uniform_index(rng, 4));
      const auto got = validate_origin(store, ann, origin);
      const auto want = oracle::validate(roas, ann, origin);
      CHECK(got == want);
      if (got.status == RoaStatus::invalid) CHECK((got.asn_mismatch || got.length_mismatch));
    }
  }
}

TEST_CASE("raising max_length never invalidates a valid announcement") {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const int len = 8 + static_cast<int>(uniform_index(rng, 17));
    const IpPrefix p(IpAddress::v4(0x0A000000U), len);
    const int maxlen = len + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(33 - len)));
    const IpPrefix ann(IpAddress::v4(0x0A000000U), len + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(33 - len))));
    const bool before = validate_origin(store_of({{1, p, maxlen}}), ann, 1).valid();
    for (int m = maxlen; m <= 32; ++m) {
      if (before) CHECK(validate_origin(store_of({{1, p, m}}), ann, 1).valid());
    }
  }
}

TEST_CASE("RoaStore rejects records breaking the length invariant") {
  RoaStore s;
  CHECK_THROWS_AS(s.add({1, parse_prefix("10.0.0.0/16"), 15}), InputError);
  CHECK_THROWS_AS(s.add({1, parse_prefix("10.0.0.0/16"), 33}), InputError);
  CHECK_NOTHROW(s.add({1, parse_prefix("2001:db8::/32"), 128}));
}

TEST_CASE("ROV registry thresholds") {
  RovRegistry reg(0.5);
  reg.add(1, 0.9, RovSource::rovista);
  reg.add(2, 0.5, RovSource::rovista);
  reg.add(3, 0.49, RovSource::rovista);
  CHECK(is_enforcing(reg, 1));
  CHECK(is_enforcing(reg, 2));
  CHECK_FALSE(is_enforcing(reg, 3));
  CHECK_FALSE(is_enforcing(reg, 4));
  reg.set_threshold(0.95);
  CHECK_FALSE(is_enforcing(reg, 1));
}

TEST_CASE("ROV lists from several sources combine as a union") {
  RovRegistry reg;
  std::istringstream a("# monitor\n100\n200,0.2\n");
  std::istringstream b("300\n200,0.8\nbogus\n");
  CHECK(load_rov_list(a, RovSource::rov_monitor, reg).empty());
  const auto errs = load_rov_list(b, RovSource::manrs_case1, reg);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].line == 3);
  CHECK(is_enforcing(reg, 100));
  CHECK(is_enforcing(reg, 200));
  CHECK(is_enforcing(reg, 300));
  CHECK(reg.lookup(200)->source == RovSource::manrs_case1);
  CHECK(reg.lookup(100)->score == 1.0);
}

TEST_CASE("ROV source labels") {
  for (const auto s : {RovSource::rov_monitor, RovSource::manrs_case1, RovSource::rovista, RovSource::hlavacek,
                       RovSource::manrs_case2, RovSource::custom}) {
    CHECK(parse_rov_source(to_string(s)) == s);
  }
  CHECK_FALSE(parse_rov_source("nope"));
}

TEST_CASE("load_routes") {
  std::istringstream in("prefix,origin_asn\n10.0.0.0/8,AS1\n10.1.0.0/16,2\n10.1.0.0/16,3\nbad\n10.2.0.0/16,x\n");
  const auto res = load_routes(in);
  CHECK(res.routes.prefix_count() == 2);
  CHECK(res.errors.size() == 2);
  CHECK(res.routes.find(parse_prefix("10.1.0.0/16")).size() == 2);
}
