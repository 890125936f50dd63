#include "rpkitor/netprefix.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>

#include "rpkitor/error.hpp"

namespace rpkitor {

const char* to_string(Family f) { return f == Family::v4 ? "v4" : "v6"; }

IpAddress::IpAddress(Family family, const std::array<std::uint8_t, 16>& bytes)
    : family_(family), bytes_(bytes) {
  if (family_ == Family::v4) {
    std::fill(bytes_.begin() + 4, bytes_.end(), 0);
  }
}

bool IpAddress::try_parse(std::string_view text, IpAddress& out) {
  if (text.empty() || text.size() > 64) return false;
  char buf[65];
  std::memcpy(buf, text.data(), text.size());
  buf[text.size()] = '\0';

  std::array<std::uint8_t, 16> bytes{};
  if (text.find(':') == std::string_view::npos) {
    if (inet_pton(AF_INET, buf, bytes.data()) != 1) return false;
    out = IpAddress(Family::v4, bytes);
    return true;
  }
  if (inet_pton(AF_INET6, buf, bytes.data()) != 1) return false;
  out = IpAddress(Family::v6, bytes);
  return true;
}

IpAddress IpAddress::parse(std::string_view text) {
  IpAddress out;
  if (!try_parse(text, out)) {
    throw InputError("malformed IP address '" + std::string(text) + "'");
  }
  return out;
}

IpAddress IpAddress::v4(std::uint32_t host_order) {
  std::array<std::uint8_t, 16> bytes{};
  bytes[0] = static_cast<std::uint8_t>(host_order >> 24);
  bytes[1] = static_cast<std::uint8_t>(host_order >> 16);
  bytes[2] = static_cast<std::uint8_t>(host_order >> 8);
  bytes[3] = static_cast<std::uint8_t>(host_order);
  return IpAddress(Family::v4, bytes);
}

std::uint64_t IpAddress::high() const {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | bytes_[i];
  return v;
}

std::uint64_t IpAddress::low() const {
  std::uint64_t v = 0;
  for (int i = 8; i < 16; ++i) v = (v << 8) | bytes_[i];
  return v;
}

std::string IpAddress::to_string() const {
  char buf[INET6_ADDRSTRLEN];
  const int af = family_ == Family::v4 ? AF_INET : AF_INET6;
  inet_ntop(af, bytes_.data(), buf, sizeof buf);
  return buf;
}

IpPrefix::IpPrefix(const IpAddress& address, int length) : length_(length) {
  if (length < 0 || length > max_length(address.family())) {
    throw InputError("prefix length " + std::to_string(length) + " out of range for " +
                     rpkitor::to_string(address.family()));
  }
  auto bytes = address.bytes();
  for (int i = 0; i < 16; ++i) {
    const int keep = std::clamp(length - i * 8, 0, 8);
    bytes[i] &= static_cast<std::uint8_t>(0xFF00U >> keep);
  }
  address_ = IpAddress(address.family(), bytes);
}

IpPrefix IpPrefix::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw InputError("prefix '" + std::string(text) + "' lacks '/length'");
  }
  const auto addr = IpAddress::parse(text.substr(0, slash));
  const auto len_text = text.substr(slash + 1);
  int len = -1;
  const auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
  if (ec != std::errc() || ptr != len_text.data() + len_text.size() || len_text.empty()) {
    throw InputError("malformed prefix length in '" + std::string(text) + "'");
  }
  return IpPrefix(addr, len);
}

bool IpPrefix::contains(const IpPrefix& inner) const {
  if (family() != inner.family() || length_ > inner.length_) return false;
  return IpPrefix(inner.address_, length_).address_ == address_;
}

bool IpPrefix::contains(const IpAddress& addr) const {
  if (family() != addr.family()) return false;
  return IpPrefix(addr, length_).address_ == address_;
}

double IpPrefix::address_count() const {
  return std::ldexp(1.0, max_length(family()) - length_);
}

std::string IpPrefix::to_string() const {
  return address_.to_string() + "/" + std::to_string(length_);
}

IpPrefix parse_prefix(std::string_view text) { return IpPrefix::parse(text); }

bool contains(const IpPrefix& outer, const IpPrefix& inner) { return outer.contains(inner); }

}  // namespace rpkitor
