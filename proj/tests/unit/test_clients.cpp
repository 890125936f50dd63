#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "rpkitor/clients.hpp"

using namespace rpkitor;

namespace {

struct World {
  PrefixTable<Asn> routes;
  RoaStore roas;
  RovRegistry rov;
};

CountryCensus census_for(const World& w, const std::vector<Asn>& asns) {
  return build_census({{"xx", 1.0}}, {{"xx", asns}}, w.routes, w.roas, w.rov);
}

std::array<std::uint64_t, 4> counts(const ClientPopulation& pop) {
  std::array<std::uint64_t, 4> c{};
  for (const auto& cl : pop.clients()) ++c[index(cl.category)];
  return c;
}

}  // namespace

TEST_CASE("build_census examples") {
  World w;
  w.routes.insert(parse_prefix("10.0.0.0/24"), 1);
  w.roas.add({1, parse_prefix("10.0.0.0/24"), 24});
  w.rov.add(1, 1.0, RovSource::custom);
  auto c = census_for(w, {1});
  CHECK(c.countries[0].distribution[index(Category::both)] == doctest::Approx(1.0));

  w.routes.insert(parse_prefix("10.0.1.0/24"), 2);
  c = census_for(w, {1, 2});
  CHECK(c.countries[0].distribution[index(Category::both)] == doctest::Approx(0.5));
  CHECK(c.countries[0].distribution[index(Category::neither)] == doctest::Approx(0.5));

  World w2;
  w2.routes.insert(parse_prefix("10.0.0.0/23"), 1);
  w2.routes.insert(parse_prefix("10.1.0.0/24"), 2);
  w2.roas.add({1, parse_prefix("10.0.0.0/23"), 23});
  w2.rov.add(1, 1.0, RovSource::custom);
  c = census_for(w2, {1, 2});
  CHECK(c.countries[0].distribution[index(Category::both)] == doctest::Approx(2.0 / 3.0));
  CHECK(c.countries[0].distribution[index(Category::neither)] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("build_census falls back to uniform with a warning") {
  World w;
  const auto c = build_census({{"aa", 0.6}, {"bb", 0.4}}, {{"aa", {7}}}, w.routes, w.roas, w.rov);
  CHECK(c.warnings.size() == 2);
  for (const auto& country : c.countries) {
    for (double f : country.distribution) CHECK(f == doctest::Approx(0.25));
  }
  CHECK(c.countries[0].code == "aa");
  CHECK(c.countries[0].user_fraction == doctest::Approx(0.6));
}

TEST_CASE("country file loaders") {
  std::istringstream users("country,fraction\nde,2\nus,1\nde,1\n");
  const auto u = load_country_users(users, "users.csv");
  REQUIRE(u.size() == 2);
  CHECK(u[0].first == "de");
  CHECK(u[0].second == doctest::Approx(0.75));

  std::istringstream bad("de,0.5\nus,abc\n");
  CHECK_THROWS_WITH_AS(load_country_users(bad, "u.csv"), "u.csv:2: expected country,fraction", InputError);

  std::istringstream asns("country,asn\nde,AS3\nde,1\nde,3\n");
  const auto a = load_country_asns(asns, "a.csv");
  CHECK(a.at("de") == std::vector<Asn>{1, 3});
}

TEST_CASE("sample_clients") {
  Rng rng(1);
  const auto one = sample_clients(census_from_distribution({0, 1, 0, 0}), 1, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0].category == Category::rov);
  CHECK_FALSE(one[0].has_guard());

  const auto census = census_from_distribution({0.1, 0.2, 0.6, 0.1});
  Rng a(42), b(42);
  const auto p1 = sample_clients(census, 1'000'000, a);
  const auto p2 = sample_clients(census, 1'000'000, b);
  CHECK(p1.category_count(Category::both) == p2.category_count(Category::both));
  const double frac = static_cast<double>(p1.category_count(Category::both)) / 1e6;
  CHECK(std::abs(frac - 0.6) < 0.002);
  CHECK(p1.consistent());
  CHECK_THROWS_AS(sample_clients(census, 0, a), InputError);
}

TEST_CASE("sample_clients draws countries by user share") {
  CountryCensus c;
  c.countries.push_back({"aa", 0.25, {1, 0, 0, 0}});
  c.countries.push_back({"bb", 0.75, {0, 0, 0, 1}});
  Rng rng(3);
  const auto pop = sample_clients(c, 200000, rng);
  std::uint64_t bb = 0;
  for (const auto& cl : pop.clients()) {
    if (pop.country_codes[cl.country] == "bb") {
      ++bb;
      CHECK(cl.category == Category::neither);
    }
  }
  CHECK(std::abs(bb / 200000.0 - 0.75) < 0.005);
}

TEST_CASE("category targets use largest remainders") {
  CHECK(category_targets({0.25, 0.25, 0.5, 0}, 100) == std::array<std::uint64_t, 4>{25, 25, 50, 0});
  const auto t = category_targets({1.0 / 3, 1.0 / 3, 1.0 / 3, 0}, 10);
  CHECK(t[0] + t[1] + t[2] + t[3] == 10);
  CHECK(t == std::array<std::uint64_t, 4>{4, 3, 3, 0});
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    CategoryArray f{};
    double sum = 0;
    for (auto& v : f) sum += (v = uniform01(rng));
    for (auto& v : f) v /= sum;
    const auto n = uniform_index(rng, 100000);
    const auto tt = category_targets(f, n);
    CHECK(tt[0] + tt[1] + tt[2] + tt[3] == n);
    for (std::size_t s = 0; s < 4; ++s) CHECK(std::abs(static_cast<double>(tt[s]) - f[s] * n) < 1.0);
  }
}

TEST_CASE("apply_churn example") {
  ClientPopulation pop;
  for (int i = 0; i < 50; ++i) pop.set_guard(pop.add(Category::both), "G1", 0);
  for (int i = 0; i < 30; ++i) pop.set_guard(pop.add(Category::roa), "G2", 0);
  for (int i = 0; i < 10; ++i) pop.set_guard(pop.add(Category::rov), "G1", 0);
  for (int i = 0; i < 10; ++i) pop.set_guard(pop.add(Category::neither), "G3", 0);
  std::set<std::uint64_t> rov_ids;
  for (const auto& c : pop.clients()) {
    if (c.category != Category::roa) rov_ids.insert(c.id);
  }

  Rng rng(5);
  const auto res = apply_churn(pop, {0.25, 0.10, 0.55, 0.10}, rng);
  CHECK(res.delta.change == std::array<std::int64_t, 4>{-5, 0, 5, 0});
  CHECK(res.removed.size() == 5);
  for (const auto& c : res.removed) CHECK(c.category == Category::roa);
  CHECK(res.added.size() == 5);
  for (auto i : res.added) {
    CHECK(pop[i].category == Category::both);
    CHECK_FALSE(pop[i].has_guard());
  }
  CHECK(pop.size() == 100);
  CHECK(counts(pop) == std::array<std::uint64_t, 4>{25, 10, 55, 10});
  CHECK(pop.guard_count("G2") == 25);
  CHECK(pop.consistent());
  // every non-Roa client survived
  std::set<std::uint64_t> left;
  for (const auto& c : pop.clients()) left.insert(c.id);
  for (auto id : rov_ids) CHECK(left.count(id) == 1);
}

TEST_CASE("identical distribution means no churn") {
  Rng rng(9);
  auto pop = sample_clients(census_from_distribution({0.4, 0.3, 0.2, 0.1}), 1000, rng);
  CategoryArray now{};
  for (const auto c : kAllCategories) now[index(c)] = pop.category_count(c) / 1000.0;
  const auto before = pop.clients();
  const auto res = apply_churn(pop, now, rng);
  CHECK(res.delta.zero());
  CHECK(res.added.empty());
  CHECK(res.removed.empty());
  CHECK(pop.size() == before.size());
}

TEST_CASE("churn keeps size, guards and selection days of retained clients") {
  Rng rng(10);
  auto pop = sample_clients(census_from_distribution({0.25, 0.25, 0.25, 0.25}), 5000, rng);
  for (std::size_t i = 0; i < pop.size(); ++i) pop.set_guard(i, "G" + std::to_string(i % 7), static_cast<int>(i % 3));
  for (int day = 1; day <= 20; ++day) {
    std::map<std::uint64_t, std::pair<std::string, int>> before;
    for (const auto& c : pop.clients()) {
      if (c.has_guard()) before[c.id] = {pop.guard_id(c), c.selected_on};
    }
    CategoryArray f{};
    double sum = 0;
    for (auto& v : f) sum += (v = 0.1 + uniform01(rng));
    for (auto& v : f) v /= sum;
    const auto res = apply_churn(pop, f, rng);
    CHECK(pop.size() == 5000);
    CHECK(pop.consistent());
    for (const auto& c : pop.clients()) {
      const auto it = before.find(c.id);
      if (it == before.end()) continue;
      CHECK(pop.guard_id(c) == it->second.first);
      CHECK(c.selected_on == it->second.second);
    }
    for (auto i : res.added) pop.set_guard(i, "N", day);
  }
}

TEST_CASE("age_out clears stale guards") {
  ClientPopulation pop;
  pop.set_guard(pop.add(Category::roa), "A", 0);
  pop.set_guard(pop.add(Category::roa), "A", 50);
  const auto gone = age_out(pop, 120, 120);
  REQUIRE(gone.size() == 1);
  CHECK(gone[0] == 0);
  CHECK_FALSE(pop[0].has_guard());
  CHECK(pop[1].has_guard());
  CHECK(pop.guard_count("A") == 1);
  CHECK(age_out(pop, 1000, 0).empty());
}
