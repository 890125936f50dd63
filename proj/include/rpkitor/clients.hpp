#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "rpkitor/category.hpp"
#include "rpkitor/prefix_table.hpp"
#include "rpkitor/random.hpp"
#include "rpkitor/rpki.hpp"

namespace rpkitor {

struct CountryShare {
  std::string code;
  double user_fraction = 0;
  CategoryArray distribution{};  // indexed by Category, sums to 1
};

struct CountryCensus {
  std::vector<CountryShare> countries;  // sorted by code
  std::vector<std::string> warnings;

  // sum over countries of user_fraction * distribution
  CategoryArray overall() const;

  // Throws InputError unless user fractions and every distribution sum to 1 (1e-9).
  void validate() const;
};

// A census with one pseudo-country "*" carrying the given category distribution.
CountryCensus census_from_distribution(const CategoryArray& distribution);

// "country,fraction". Fractions are normalized to sum to 1; a header is optional.
std::vector<std::pair<std::string, double>> load_country_users(std::istream& in, const std::string& source);
// "country,asn"; a header is optional.
std::map<std::string, std::vector<Asn>> load_country_asns(std::istream& in, const std::string& source);

// Per-country category fractions, each announced IPv4 prefix of the country's ASes
// weighted by its address count and classified by origin validation plus the AS's
// ROV enforcement. Countries with no known addresses fall back to uniform.
CountryCensus build_census(const std::vector<std::pair<std::string, double>>& country_users,
                           const std::map<std::string, std::vector<Asn>>& country_asns,
                           const PrefixTable<Asn>& routes, const RoaStore& roas, const RovRegistry& rov);

struct Client {
  static constexpr std::uint32_t kNoCountry = UINT32_MAX;
  static constexpr std::uint32_t kNoGuard = UINT32_MAX;

  std::uint64_t id = 0;
  std::uint32_t country = kNoCountry;  // index into ClientPopulation::country_codes
  Category category = Category::neither;
  std::uint32_t guard = kNoGuard;  // index into ClientPopulation::guard_ids
  int selected_on = -1;            // day of the last guard selection

  bool has_guard() const { return guard != kNoGuard; }
};

class ClientPopulation {
 public:
  std::vector<std::string> country_codes;

  std::size_t size() const { return clients_.size(); }
  const std::vector<Client>& clients() const { return clients_; }
  const Client& operator[](std::size_t i) const { return clients_[i]; }

  std::uint64_t category_count(Category c) const { return category_counts_[index(c)]; }
  // Clients currently assigned to a guard identity.
  std::uint64_t guard_count(const std::string& identity) const;
  const std::string& guard_id(const Client& c) const { return guard_ids_.at(c.guard); }

  // Appends a client without a guard; returns its index.
  std::size_t add(Category category, std::uint32_t country = Client::kNoCountry);
  void set_guard(std::size_t client, const std::string& identity, int day);
  void clear_guard(std::size_t client);
  // Removes the listed clients (any order, no duplicates); relative order of the rest is kept.
  std::vector<Client> remove(std::vector<std::size_t> indices);

  // Recounts from the client list and compares with the maintained counters.
  bool consistent() const;

 private:
  std::uint32_t intern(const std::string& identity);

  std::vector<Client> clients_;
  std::array<std::uint64_t, kCategoryCount> category_counts_{};
  std::vector<std::string> guard_ids_;
  std::vector<std::uint64_t> guard_counts_;
  std::unordered_map<std::string, std::uint32_t> guard_index_;
  std::uint64_t next_id_ = 0;
};

// n clients; country drawn from user fractions, category from that country's distribution.
ClientPopulation sample_clients(const CountryCensus& census, std::uint64_t n, Rng& rng);

// Signed per-category change in client count for one day.
struct ChurnDelta {
  std::array<std::int64_t, kCategoryCount> change{};
  bool zero() const;
};

// Largest-remainder apportionment of `total` clients to the fractions.
std::array<std::uint64_t, kCategoryCount> category_targets(const CategoryArray& fractions, std::uint64_t total);

ChurnDelta churn_delta(const ClientPopulation& pop, const CategoryArray& fractions);

struct ChurnResult {
  ChurnDelta delta;
  std::vector<Client> removed;
  std::vector<std::size_t> added;  // indices of the fresh clients, which need a guard
};

// Moves the population to the target marginals: surplus categories lose uniformly
// random clients, deficit categories gain fresh guardless clients. Everyone else keeps
// their guard and selection day.
ChurnResult apply_churn(ClientPopulation& pop, const CategoryArray& fractions, Rng& rng);

// Clears the guard of clients who selected it max_age_days or more before `day`;
// returns their indices.
std::vector<std::size_t> age_out(ClientPopulation& pop, int day, int max_age_days);

}  // namespace rpkitor
