#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rpkitor {

// Malformed user input (bad file row, bad flag value). The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
  InputError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what) {}
};

// A single rejected row of a tolerant loader.
struct RowError {
  std::size_t line = 0;
  std::string message;
};

}  // namespace rpkitor
