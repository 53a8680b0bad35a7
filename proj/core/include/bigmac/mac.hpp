#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace bigmac {

using Octets = std::array<std::uint8_t, 6>;

/// Raw 6-byte link-layer address. Whether it is a genuine factory MAC, a
/// BigMac locator or broadcast is decided by the reader, not by the type.
class MacAddr {
 public:
  constexpr MacAddr() = default;
  constexpr explicit MacAddr(const Octets& bytes) : bytes_(bytes) {}

  static constexpr MacAddr broadcast() { return MacAddr(Octets{0xff, 0xff, 0xff, 0xff, 0xff, 0xff}); }
  static MacAddr parse(std::string_view text);

  constexpr const Octets& bytes() const { return bytes_; }
  constexpr std::uint8_t operator[](std::size_t i) const { return bytes_[i]; }
  constexpr bool is_broadcast() const { return *this == broadcast(); }
  constexpr bool is_zero() const { return *this == MacAddr(); }

  std::string to_string() const;

  constexpr auto operator<=>(const MacAddr&) const = default;

 private:
  Octets bytes_{};
};

class Ipv4Addr {
 public:
  constexpr Ipv4Addr() = default;
  constexpr explicit Ipv4Addr(std::uint32_t value) : value_(value) {}

  static Ipv4Addr parse(std::string_view text);

  constexpr std::uint32_t value() const { return value_; }
  constexpr bool is_unspecified() const { return value_ == 0; }
  std::string to_string() const;

  constexpr auto operator<=>(const Ipv4Addr&) const = default;

 private:
  std::uint32_t value_ = 0;
};

/// Address pool in CIDR notation. Usable addresses exclude the network and
/// broadcast addresses for prefixes shorter than /31.
class Ipv4Cidr {
 public:
  Ipv4Cidr(Ipv4Addr network, int prefix_len);
  static Ipv4Cidr parse(std::string_view text);

  Ipv4Addr network() const { return network_; }
  int prefix_len() const { return prefix_len_; }
  Ipv4Addr first_usable() const;
  Ipv4Addr last_usable() const;
  bool contains(Ipv4Addr addr) const;
  std::string to_string() const;

 private:
  Ipv4Addr network_;
  int prefix_len_;
};

}  // namespace bigmac
