#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace rpkitor {

enum class Family : std::uint8_t { v4 = 0, v6 = 1 };

constexpr int max_length(Family f) { return f == Family::v4 ? 32 : 128; }
const char* to_string(Family f);

// An IPv4 or IPv6 address. IPv4 occupies the first four bytes.
class IpAddress {
 public:
  IpAddress() = default;
  IpAddress(Family family, const std::array<std::uint8_t, 16>& bytes);

  // Throws InputError on malformed text.
  static IpAddress parse(std::string_view text);
  static bool try_parse(std::string_view text, IpAddress& out);

  static IpAddress v4(std::uint32_t host_order);

  Family family() const { return family_; }
  const std::array<std::uint8_t, 16>& bytes() const { return bytes_; }
  bool bit(int index) const { return (bytes_[index / 8] >> (7 - index % 8)) & 1U; }

  // Top 64 and bottom 64 bits, big-endian; v4 lives in the high word.
  std::uint64_t high() const;
  std::uint64_t low() const;

  std::string to_string() const;

  auto operator<=>(const IpAddress&) const = default;

 private:
  Family family_ = Family::v4;
  std::array<std::uint8_t, 16> bytes_{};
};

// Canonical prefix: every bit past `length` is zero.
class IpPrefix {
 public:
  IpPrefix() = default;
  // Host bits are masked; throws InputError when length is out of range for the family.
  IpPrefix(const IpAddress& address, int length);

  // "addr/len". Host bits are silently cleared.
  static IpPrefix parse(std::string_view text);

  Family family() const { return address_.family(); }
  const IpAddress& address() const { return address_; }
  int length() const { return length_; }

  bool contains(const IpPrefix& inner) const;
  bool contains(const IpAddress& addr) const;

  // Number of addresses covered, as a double (2^128 fits).
  double address_count() const;

  std::string to_string() const;

  auto operator<=>(const IpPrefix&) const = default;

 private:
  IpAddress address_;
  int length_ = 0;
};

IpPrefix parse_prefix(std::string_view text);
bool contains(const IpPrefix& outer, const IpPrefix& inner);

}  // namespace rpkitor
