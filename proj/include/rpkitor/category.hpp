#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace rpkitor {

// Joint ROA/ROV status of an AS (client side or relay side). Every AS has exactly one.
enum class Category : std::size_t { roa = 0, rov = 1, both = 2, neither = 3 };

inline constexpr std::size_t kCategoryCount = 4;
inline constexpr std::array<Category, kCategoryCount> kAllCategories{
    Category::roa, Category::rov, Category::both, Category::neither};

// Indexed by Category.
using CategoryArray = std::array<double, kCategoryCount>;

constexpr std::size_t index(Category c) { return static_cast<std::size_t>(c); }

constexpr Category category_of(bool roa_valid, bool rov_enforcing) {
  if (roa_valid) return rov_enforcing ? Category::both : Category::roa;
  return rov_enforcing ? Category::rov : Category::neither;
}

constexpr bool has_roa(Category c) { return c == Category::roa || c == Category::both; }
constexpr bool has_rov(Category c) { return c == Category::rov || c == Category::both; }

// A pair is matched when one side's ROA is backed by the other side's ROV.
constexpr bool is_matched(Category client, Category relay) {
  return (has_roa(client) && has_rov(relay)) || (has_rov(client) && has_roa(relay));
}

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view text);

}  // namespace rpkitor
