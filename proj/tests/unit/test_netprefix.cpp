#include <doctest.h>

#include "oracles.hpp"
#include "rpkitor/netprefix.hpp"
#include "rpkitor/prefix_table.hpp"
#include "rpkitor/random.hpp"

using namespace rpkitor;

TEST_CASE("parse_prefix canonicalizes") {
  const auto p = parse_prefix("203.0.113.0/24");
  CHECK(p.family() == Family::v4);
  CHECK(p.length() == 24);
  CHECK(p.to_string() == "203.0.113.0/24");

  CHECK(parse_prefix("203.0.113.7/24").to_string() == "203.0.113.0/24");
  CHECK(parse_prefix("2001:db8::1/32").to_string() == "2001:db8::/32");
  CHECK(parse_prefix("0.0.0.0/0").length() == 0);
}

TEST_CASE("parse_prefix rejects bad input") {
  CHECK_THROWS_AS(parse_prefix("2001:db8::/129"), InputError);
  CHECK_THROWS_AS(parse_prefix("10.0.0.0/33"), InputError);
  CHECK_THROWS_AS(parse_prefix("10.0.0.0"), InputError);
  CHECK_THROWS_AS(parse_prefix("10.0.0.256/8"), InputError);
  CHECK_THROWS_AS(parse_prefix("10.0.0.0/-1"), InputError);
  CHECK_THROWS_AS(parse_prefix("10.0.0.0/x"), InputError);
  CHECK_THROWS_AS(parse_prefix(""), InputError);
}

TEST_CASE("contains") {
  CHECK(contains(parse_prefix("10.0.0.0/8"), parse_prefix("10.1.0.0/16")));
  CHECK_FALSE(contains(parse_prefix("10.1.0.0/16"), parse_prefix("10.0.0.0/8")));
  CHECK_FALSE(contains(parse_prefix("10.0.0.0/8"), parse_prefix("::/0")));
  CHECK(contains(parse_prefix("::/0"), parse_prefix("2001:db8::/32")));
  CHECK_FALSE(contains(parse_prefix("::/0"), parse_prefix("10.0.0.0/8")));
}

TEST_CASE("round trip of random prefixes") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const bool v6 = uniform01(rng) < 0.5;
    std::array<std::uint8_t, 16> bytes{};
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    const Family f = v6 ? Family::v6 : Family::v4;
    const int len = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(max_length(f)) + 1));
    const IpPrefix p(IpAddress(f, bytes), len);
    const auto again = parse_prefix(p.to_string());
    CHECK(again == p);
    // host bits are zero
    for (int b = len; b < max_length(f); ++b) CHECK_FALSE(p.address().bit(b));
  }
}

TEST_CASE("contains is a partial order") {
  Rng rng(5);
  std::vector<IpPrefix> ps;
  for (int i = 0; i < 60; ++i) {
    const auto len = static_cast<int>(uniform_index(rng, 9));
    ps.emplace_back(IpAddress::v4(static_cast<std::uint32_t>(uniform_index(rng, 4)) << 30), len);
  }
  for (const auto& a : ps) {
    CHECK(contains(a, a));
    for (const auto& b : ps) {
      if (contains(a, b) && contains(b, a)) CHECK(a == b);
      for (const auto& c : ps) {
        if (contains(a, b) && contains(b, c)) CHECK(contains(a, c));
      }
    }
  }
}

TEST_CASE("longest_match examples") {
  PrefixTable<char> t;
  t.insert(parse_prefix("10.0.0.0/8"), 'A');
  t.insert(parse_prefix("10.1.0.0/16"), 'B');
  auto m = t.longest_match(IpAddress::parse("10.1.2.3"));
  REQUIRE(m);
  CHECK(m->prefix == parse_prefix("10.1.0.0/16"));
  REQUIRE(m->values.size() == 1);
  CHECK(m->values[0] == 'B');
  CHECK_FALSE(t.longest_match(IpAddress::parse("11.0.0.1")));

  t.insert(parse_prefix("0.0.0.0/0"), 'D');
  m = t.longest_match(IpAddress::parse("192.0.2.1"));
  REQUIRE(m);
  CHECK(m->prefix.length() == 0);
  CHECK(m->values[0] == 'D');
  // v4 default route never answers a v6 lookup
  CHECK_FALSE(t.longest_match(IpAddress::parse("2001:db8::1")));
}

TEST_CASE("duplicate prefixes accumulate") {
  PrefixTable<int> t;
  t.insert(parse_prefix("192.0.2.0/24"), 1);
  t.insert(parse_prefix("192.0.2.9/24"), 2);
  CHECK(t.prefix_count() == 1);
  const auto vals = t.find(parse_prefix("192.0.2.0/24"));
  REQUIRE(vals.size() == 2);
  CHECK(vals[0] == 1);
  CHECK(vals[1] == 2);
  CHECK(t.find(parse_prefix("192.0.3.0/24")).empty());
}

TEST_CASE("covering lists every containing entry, most specific first") {
  PrefixTable<int> t;
  t.insert(parse_prefix("10.0.0.0/8"), 8);
  t.insert(parse_prefix("10.1.0.0/16"), 16);
  t.insert(parse_prefix("10.1.2.0/24"), 24);
  t.insert(parse_prefix("10.2.0.0/16"), 99);
  const auto cov = t.covering(parse_prefix("10.1.2.0/23"));
  REQUIRE(cov.size() == 2);
  CHECK(cov[0].prefix.length() == 16);
  CHECK(cov[1].prefix.length() == 8);
}

TEST_CASE("longest_match agrees with a linear scan") {
  Rng rng(2024);
  for (int round = 0; round < 20; ++round) {
    PrefixTable<int> t;
    std::vector<std::pair<IpPrefix, int>> entries;
    for (int i = 0; i < 200; ++i) {
      // a narrow address space so prefixes nest often
      const auto addr = IpAddress::v4(0x0A000000U | static_cast<std::uint32_t>(uniform_index(rng, 1U << 12)) << 12);
      const IpPrefix p(addr, 8 + static_cast<int>(uniform_index(rng, 17)));
      t.insert(p, i);
      entries.emplace_back(p, i);
    }
    for (int q = 0; q < 500; ++q) {
      const auto addr = IpAddress::v4(0x0A000000U | static_cast<std::uint32_t>(uniform_index(rng, 1U << 24)));
      const auto got = t.longest_match(addr);
      const auto want = oracle::longest_match(entries, addr);
      REQUIRE(got.has_value() == want.has_value());
      if (!got) continue;
      CHECK(got->prefix.length() == want->first);
      CHECK(std::vector<int>(got->values.begin(), got->values.end()) == want->second);
    }
  }
}
