#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "bigmac/mac.hpp"

namespace bigmac {

inline constexpr int kMaxTier = 6;

// Delta packing: uplink index in the high 3 bits, downlink port in the low 5.
inline constexpr int kDeltaMaxUplinks = 8;
inline constexpr int kDeltaMaxPort = 31;
inline constexpr std::uint8_t kDeltaPortMask = 0x1f;

enum class AddressEncoding { plain, delta };

/// Hierarchical locator: `tier` meaningful nonzero bytes followed by zero
/// padding. Byte k (0-based) below the tier is the downlink port taken at the
/// tier-k switch on the downward path from a top-tier switch.
class BigMac {
 public:
  static BigMac root(std::uint8_t root_byte);
  /// Returns nullopt for anything that is not a wellformed locator
  /// (zero byte inside the prefix, nonzero padding, broadcast, all zero).
  static std::optional<BigMac> from_mac(const MacAddr& mac);
  static BigMac parse(std::string_view text);

  int tier() const { return tier_; }
  const Octets& bytes() const { return bytes_; }
  std::uint8_t operator[](std::size_t i) const { return bytes_[i]; }
  MacAddr mac() const { return MacAddr(bytes_); }

  /// Appends one meaningful byte.
  BigMac extend(std::uint8_t downlink_port) const;
  /// First `len` bytes as a locator of tier `len`.
  BigMac prefix(int len) const;
  bool has_prefix(const BigMac& p) const;
  /// Replaces the first p.tier() bytes with p; the remaining bytes stay.
  BigMac with_prefix(const BigMac& p) const;
  /// Overwrites byte `pos` (0-based, must be meaningful) with a new value.
  BigMac with_byte(int pos, std::uint8_t value) const;

  std::string to_string() const { return mac().to_string(); }

  auto operator<=>(const BigMac&) const = default;

 private:
  BigMac(const Octets& bytes, int tier) : bytes_(bytes), tier_(static_cast<std::uint8_t>(tier)) {}

  Octets bytes_{};
  std::uint8_t tier_ = 0;
};

int common_prefix_len(const BigMac& a, const BigMac& b);

struct DeltaByte {
  std::uint8_t uplink_index;
  std::uint8_t downlink_port;

  auto operator<=>(const DeltaByte&) const = default;
};

std::uint8_t pack_delta(std::uint8_t uplink_index, std::uint8_t downlink_port);
DeltaByte unpack_delta(std::uint8_t value);

/// Port encoded by a meaningful address byte under the given encoding.
inline std::uint8_t port_of_byte(std::uint8_t value, AddressEncoding enc) {
  return enc == AddressEncoding::delta ? static_cast<std::uint8_t>(value & kDeltaPortMask) : value;
}

struct FanoutParams {
  double n_hosts;
  int uplink_fanout;
  int downlink_fanout;
};

/// Mean number of locators per host, N^(log2 u / (log2 d - log2 u)).
double expected_addresses(const FanoutParams& p);

}  // namespace bigmac
