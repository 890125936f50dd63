#include "rpkitor/category.hpp"

namespace rpkitor {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::roa: return "roa";
    case Category::rov: return "rov";
    case Category::both: return "both";
    case Category::neither: return "neither";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view text) {
  for (const auto c : kAllCategories) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

}  // namespace rpkitor
