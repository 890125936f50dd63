#pragma once

// Small builders for hand-made networks.

#include <string>
#include <vector>

#include "rpkitor/consensus.hpp"
#include "rpkitor/random.hpp"

namespace fixture {

inline rpkitor::Relay guard(const std::string& id, std::uint64_t bandwidth, rpkitor::Category c) {
  rpkitor::Relay r;
  r.identity = id;
  r.nickname = id;
  r.flags = {"Guard", "Running"};
  r.bandwidth = bandwidth;
  r.category = c;
  r.v4.roa.status = rpkitor::has_roa(c) ? rpkitor::RoaStatus::valid : rpkitor::RoaStatus::not_found;
  r.v4.rov_enforcing = rpkitor::has_rov(c);
  return r;
}

inline std::string relay_id(std::size_t i) {
  std::string s = "R";
  const std::string n = std::to_string(i);
  s.append(6 - std::min<std::size_t>(6, n.size()), '0');
  return s + n;
}

// `count` guards with random categories and bandwidths in [1, max_bw].
inline std::vector<rpkitor::Relay> random_guards(std::size_t count, rpkitor::Rng& rng,
                                                 std::uint64_t max_bw = 10000) {
  std::vector<rpkitor::Relay> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto c = rpkitor::kAllCategories[rpkitor::uniform_index(rng, 4)];
    out.push_back(guard(relay_id(i), 1 + rpkitor::uniform_index(rng, max_bw), c));
  }
  return out;
}

// Random point of the probability simplex; with `sparse`, some entries are zeroed.
inline rpkitor::CategoryArray random_distribution(rpkitor::Rng& rng, bool sparse = false) {
  rpkitor::CategoryArray t{};
  double sum = 0;
  for (auto& v : t) {
    v = rpkitor::uniform01(rng) + 1e-3;
    if (sparse && rpkitor::uniform01(rng) < 0.3) v = 0.0;
    sum += v;
  }
  if (sum == 0.0) {
    t[rpkitor::index(rpkitor::Category::both)] = 1.0;
    return t;
  }
  for (auto& v : t) v /= sum;
  return t;
}

}  // namespace fixture
