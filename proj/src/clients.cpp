#include "rpkitor/clients.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rpkitor/text.hpp"

namespace rpkitor {

CategoryArray CountryCensus::overall() const {
  CategoryArray out{};
  for (const auto& c : countries) {
    for (std::size_t s = 0; s < kCategoryCount; ++s) out[s] += c.user_fraction * c.distribution[s];
  }
  return out;
}

void CountryCensus::validate() const {
  if (countries.empty()) throw InputError("census has no countries");
  double users = 0;
  for (const auto& c : countries) {
    if (!(c.user_fraction >= 0.0)) throw InputError("negative user fraction for " + c.code);
    users += c.user_fraction;
    double sum = 0;
    for (double f : c.distribution) {
      if (!(f >= 0.0)) throw InputError("negative category fraction for " + c.code);
      sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InputError("category distribution of " + c.code + " does not sum to 1");
  }
  if (std::abs(users - 1.0) > 1e-9) throw InputError("user fractions do not sum to 1");
}

CountryCensus census_from_distribution(const CategoryArray& distribution) {
  CountryCensus c;
  c.countries.push_back({"*", 1.0, distribution});
  c.validate();
  return c;
}

std::vector<std::pair<std::string, double>> load_country_users(std::istream& in, const std::string& source) {
  if (!in) throw InputError(source + ": not readable");
  std::map<std::string, double> acc;
  std::string line;
  std::size_t lineno = 0;
  while (text::next_line(in, line)) {
    ++lineno;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = text::split(trimmed, ',');
    const auto frac = fields.size() >= 2 ? text::parse_double(fields[1]) : std::nullopt;
    if (!frac) {
      if (lineno == 1) continue;  // header
      throw InputError(source, lineno, "expected country,fraction");
    }
    if (fields[0].empty() || !(*frac >= 0.0)) throw InputError(source, lineno, "bad country or negative fraction");
    acc[std::string(fields[0])] += *frac;
  }
  double total = 0;
  for (const auto& [code, f] : acc) total += f;
  if (!(total > 0.0)) throw InputError(source + ": user fractions sum to zero");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [code, f] : acc) out.emplace_back(code, f / total);
  return out;
}

std::map<std::string, std::vector<Asn>> load_country_asns(std::istream& in, const std::string& source) {
  if (!in) throw InputError(source + ": not readable");
  std::map<std::string, std::vector<Asn>> out;
  std::string line;
  std::size_t lineno = 0;
  while (text::next_line(in, line)) {
    ++lineno;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = text::split(trimmed, ',');
    const auto asn = fields.size() >= 2 ? text::parse_asn(fields[1]) : std::nullopt;
    if (!asn) {
      if (lineno == 1) continue;
      throw InputError(source, lineno, "expected country,asn");
    }
    out[std::string(fields[0])].push_back(*asn);
  }
  for (auto& [code, asns] : out) {
    std::sort(asns.begin(), asns.end());
    asns.erase(std::unique(asns.begin(), asns.end()), asns.end());
  }
  return out;
}

CountryCensus build_census(const std::vector<std::pair<std::string, double>>& country_users,
                           const std::map<std::string, std::vector<Asn>>& country_asns,
                           const PrefixTable<Asn>& routes, const RoaStore& roas, const RovRegistry& rov) {
  std::unordered_map<Asn, std::vector<IpPrefix>> prefixes_of;
  routes.for_each([&](const IpPrefix& p, Asn asn) {
    if (p.family() == Family::v4) prefixes_of[asn].push_back(p);
  });

  CountryCensus census;
  double users = 0;
  for (const auto& [code, frac] : country_users) users += frac;
  for (const auto& [code, frac] : country_users) {
    CountryShare share;
    share.code = code;
    share.user_fraction = users > 0.0 ? frac / users : 0.0;
    double total = 0;
    if (const auto it = country_asns.find(code); it != country_asns.end()) {
      for (const Asn asn : it->second) {
        const auto pit = prefixes_of.find(asn);
        if (pit == prefixes_of.end()) continue;
        const bool enforcing = rov.is_enforcing(asn);
        for (const auto& p : pit->second) {
          const double addresses = std::ldexp(1.0, 32 - p.length());
          const Category c = category_of(roas.validate(p, asn).valid(), enforcing);
          share.distribution[index(c)] += addresses;
          total += addresses;
        }
      }
    }
    if (total > 0.0) {
      for (double& f : share.distribution) f /= total;
    } else {
      share.distribution.fill(0.25);
      census.warnings.push_back("country " + code + " has no known addresses; using a uniform distribution");
    }
    census.countries.push_back(std::move(share));
  }
  std::sort(census.countries.begin(), census.countries.end(),
            [](const CountryShare& a, const CountryShare& b) { return a.code < b.code; });
  census.validate();
  return census;
}

std::uint64_t ClientPopulation::guard_count(const std::string& identity) const {
  const auto it = guard_index_.find(identity);
  return it == guard_index_.end() ? 0 : guard_counts_[it->second];
}

std::size_t ClientPopulation::add(Category category, std::uint32_t country) {
  Client c;
  c.id = next_id_++;
  c.country = country;
  c.category = category;
  clients_.push_back(c);
  ++category_counts_[index(category)];
  return clients_.size() - 1;
}

std::uint32_t ClientPopulation::intern(const std::string& identity) {
  const auto [it, inserted] = guard_index_.try_emplace(identity, static_cast<std::uint32_t>(guard_ids_.size()));
  if (inserted) {
    guard_ids_.push_back(identity);
    guard_counts_.push_back(0);
  }
  return it->second;
}

void ClientPopulation::set_guard(std::size_t client, const std::string& identity, int day) {
  clear_guard(client);
  Client& c = clients_.at(client);
  c.guard = intern(identity);
  c.selected_on = day;
  ++guard_counts_[c.guard];
}

void ClientPopulation::clear_guard(std::size_t client) {
  Client& c = clients_.at(client);
  if (!c.has_guard()) return;
  --guard_counts_[c.guard];
  c.guard = Client::kNoGuard;
}

std::vector<Client> ClientPopulation::remove(std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  std::vector<Client> removed;
  removed.reserve(indices.size());
  std::vector<Client> kept;
  kept.reserve(clients_.size() - indices.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    if (k < indices.size() && indices[k] == i) {
      ++k;
      const Client& c = clients_[i];
      if (c.has_guard()) --guard_counts_[c.guard];
      --category_counts_[index(c.category)];
      removed.push_back(c);
    } else {
      kept.push_back(clients_[i]);
    }
  }
  clients_ = std::move(kept);
  return removed;
}

bool ClientPopulation::consistent() const {
  std::array<std::uint64_t, kCategoryCount> cats{};
  std::vector<std::uint64_t> guards(guard_counts_.size(), 0);
  for (const auto& c : clients_) {
    ++cats[index(c.category)];
    if (c.has_guard()) ++guards.at(c.guard);
  }
  return cats == category_counts_ && guards == guard_counts_;
}

namespace {

std::size_t draw_category(const CategoryArray& dist, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0;
  std::size_t last = 0;
  for (std::size_t s = 0; s < kCategoryCount; ++s) {
    if (dist[s] <= 0.0) continue;
    last = s;
    acc += dist[s];
    if (u < acc) return s;
  }
  return last;  // u landed in the rounding gap below 1
}

}  // namespace

ClientPopulation sample_clients(const CountryCensus& census, std::uint64_t n, Rng& rng) {
  if (n == 0) throw InputError("client count must be at least 1");
  census.validate();
  std::vector<double> users;
  ClientPopulation pop;
  for (const auto& c : census.countries) {
    users.push_back(c.user_fraction);
    pop.country_codes.push_back(c.code);
  }
  const WeightTree countries(users);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::size_t k = countries.sample(rng);
    const std::size_t s = draw_category(census.countries[k].distribution, rng);
    pop.add(static_cast<Category>(s), static_cast<std::uint32_t>(k));
  }
  return pop;
}

bool ChurnDelta::zero() const {
  return std::all_of(change.begin(), change.end(), [](std::int64_t v) { return v == 0; });
}

std::array<std::uint64_t, kCategoryCount> category_targets(const CategoryArray& fractions, std::uint64_t total) {
  double sum = 0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw InputError("category fractions must be nonnegative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("category fractions must sum to 1");

  std::array<std::uint64_t, kCategoryCount> target{};
  std::array<double, kCategoryCount> remainder{};
  std::uint64_t assigned = 0;
  for (std::size_t s = 0; s < kCategoryCount; ++s) {
    const double exact = fractions[s] / sum * static_cast<double>(total);
    target[s] = static_cast<std::uint64_t>(std::floor(exact));
    remainder[s] = exact - static_cast<double>(target[s]);
    assigned += target[s];
  }
  std::array<std::size_t, kCategoryCount> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % kCategoryCount) {
    ++target[order[i]];
    ++assigned;
  }
  // floor() of a value a hair above an integer can overshoot; take back from the
  // smallest remainders first.
  for (auto it = order.rbegin(); assigned > total;) {
    if (target[*it] > 0) {
      --target[*it];
      --assigned;
    }
    if (++it == order.rend()) it = order.rbegin();
  }
  return target;
}

ChurnDelta churn_delta(const ClientPopulation& pop, const CategoryArray& fractions) {
  const auto target = category_targets(fractions, pop.size());
  ChurnDelta d;
  for (const auto c : kAllCategories) {
    d.change[index(c)] = static_cast<std::int64_t>(target[index(c)]) - static_cast<std::int64_t>(pop.category_count(c));
  }
  return d;
}

ChurnResult apply_churn(ClientPopulation& pop, const CategoryArray& fractions, Rng& rng) {
  ChurnResult out;
  out.delta = churn_delta(pop, fractions);
  if (out.delta.zero()) return out;

  std::array<std::vector<std::size_t>, kCategoryCount> members;
  for (std::size_t i = 0; i < pop.size(); ++i) members[index(pop[i].category)].push_back(i);

  std::vector<std::size_t> doomed;
  for (const auto c : kAllCategories) {
    const std::int64_t change = out.delta.change[index(c)];
    if (change >= 0) continue;
    auto& pool = members[index(c)];
    const auto k = static_cast<std::size_t>(-change);
    // Partial Fisher-Yates: the first k entries become a uniform sample.
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + uniform_index(rng, pool.size() - i);
      std::swap(pool[i], pool[j]);
      doomed.push_back(pool[i]);
    }
  }
  out.removed = pop.remove(std::move(doomed));

  for (const auto c : kAllCategories) {
    const std::int64_t change = out.delta.change[index(c)];
    for (std::int64_t i = 0; i < change; ++i) out.added.push_back(pop.add(c));
  }
  return out;
}

std::vector<std::size_t> age_out(ClientPopulation& pop, int day, int max_age_days) {
  std::vector<std::size_t> out;
  if (max_age_days <= 0) return out;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const Client& c = pop[i];
    if (c.has_guard() && day - c.selected_on >= max_age_days) {
      pop.clear_guard(i);
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace rpkitor
