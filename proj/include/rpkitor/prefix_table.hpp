#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rpkitor/netprefix.hpp"

namespace rpkitor {

// Prefix -> values map with exact and longest-prefix lookup.
//
// Duplicate prefixes accumulate: every value inserted under the same prefix is
// kept, in insertion order. Lookups probe one hash map per prefix length that is
// actually present, longest first. Immutable after build; concurrent readers are
// fine.
template <class V>
class PrefixTable {
 public:
  struct Match {
    IpPrefix prefix;
    std::span<const V> values;
  };

  void insert(const IpPrefix& prefix, V value) {
    auto& by_len = index_for(prefix.family(), prefix.length());
    const Key key{prefix.address().high(), prefix.address().low()};
    const auto it = by_len.find(key);
    if (it != by_len.end()) {
      entries_[it->second].values.push_back(std::move(value));
      return;
    }
    by_len.emplace(key, entries_.size());
    entries_.push_back(Entry{prefix, {std::move(value)}});
    auto& lens = lengths_[static_cast<int>(prefix.family())];
    const auto pos = std::lower_bound(lens.begin(), lens.end(), prefix.length(), std::greater<>());
    if (pos == lens.end() || *pos != prefix.length()) lens.insert(pos, prefix.length());
  }

  std::span<const V> find(const IpPrefix& prefix) const {
    const auto idx = lookup(prefix);
    if (!idx) return {};
    return entries_[*idx].values;
  }

  std::optional<Match> longest_match(const IpAddress& addr) const {
    for (int len : lengths_[static_cast<int>(addr.family())]) {
      const IpPrefix probe(addr, len);
      if (const auto idx = lookup(probe)) return Match{probe, entries_[*idx].values};
    }
    return std::nullopt;
  }

  // Every entry whose prefix contains `inner` (including `inner` itself), most specific first.
  std::vector<Match> covering(const IpPrefix& inner) const {
    std::vector<Match> out;
    for (int len : lengths_[static_cast<int>(inner.family())]) {
      if (len > inner.length()) continue;
      const IpPrefix probe(inner.address(), len);
      if (const auto idx = lookup(probe)) out.push_back(Match{probe, entries_[*idx].values});
    }
    return out;
  }

  std::size_t prefix_count() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  template <class F>
  void for_each(F&& fn) const {
    for (const auto& e : entries_) {
      for (const auto& v : e.values) fn(e.prefix, v);
    }
  }

 private:
  struct Key {
    std::uint64_t high;
    std::uint64_t low;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = k.high * 0x9E3779B97F4A7C15ULL;
      h ^= (k.low + 0x632BE59BD9B4E019ULL) + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h ^ (h >> 31));
    }
  };
  struct Entry {
    IpPrefix prefix;
    std::vector<V> values;
  };
  using LengthIndex = std::unordered_map<Key, std::size_t, KeyHash>;

  LengthIndex& index_for(Family f, int len) {
    auto& slots = index_[static_cast<int>(f)];
    if (slots.empty()) slots.resize(static_cast<std::size_t>(max_length(f)) + 1);
    return slots[static_cast<std::size_t>(len)];
  }

  std::optional<std::size_t> lookup(const IpPrefix& prefix) const {
    const auto& slots = index_[static_cast<int>(prefix.family())];
    if (slots.empty()) return std::nullopt;
    const auto& by_len = slots[static_cast<std::size_t>(prefix.length())];
    const auto it = by_len.find(Key{prefix.address().high(), prefix.address().low()});
    if (it == by_len.end()) return std::nullopt;
    return it->second;
  }

  std::vector<Entry> entries_;
  std::array<std::vector<LengthIndex>, 2> index_;
  std::array<std::vector<int>, 2> lengths_;  // descending
};

}  // namespace rpkitor
