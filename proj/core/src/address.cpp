#include "bigmac/address.hpp"

#include <fmt/format.h>

#include <cmath>

#include "bigmac/error.hpp"

namespace bigmac {

BigMac BigMac::root(std::uint8_t root_byte) {
  if (root_byte == 0) throw Error(Errc::zero_port, "root byte must be nonzero");
  Octets b{};
  b[0] = root_byte;
  return BigMac(b, 1);
}

std::optional<BigMac> BigMac::from_mac(const MacAddr& mac) {
  const Octets& b = mac.bytes();
  int tier = 0;
  while (tier < kMaxTier && b[tier] != 0) ++tier;
  if (tier == 0) return std::nullopt;
  for (int k = tier; k < kMaxTier; ++k) {
    if (b[k] != 0) return std::nullopt;
  }
  if (mac.is_broadcast()) return std::nullopt;
  return BigMac(b, tier);
}

BigMac BigMac::parse(std::string_view text) {
  auto parsed = from_mac(MacAddr::parse(text));
  if (!parsed) throw Error(Errc::parse, fmt::format("'{}' is not a wellformed BigMAC", text));
  return *parsed;
}

BigMac BigMac::extend(std::uint8_t downlink_port) const {
  if (tier_ >= kMaxTier) throw Error(Errc::tier_overflow, fmt::format("{} already has tier 6", to_string()));
  if (downlink_port == 0) throw Error(Errc::zero_port, "downlink port 0 collides with padding");
  Octets b = bytes_;
  b[tier_] = downlink_port;
  return BigMac(b, tier_ + 1);
}

BigMac BigMac::prefix(int len) const {
  if (len < 1 || len > tier_) throw Error(Errc::port_range, fmt::format("prefix length {} of {}", len, to_string()));
  Octets b{};
  for (int k = 0; k < len; ++k) b[k] = bytes_[k];
  return BigMac(b, len);
}

bool BigMac::has_prefix(const BigMac& p) const {
  if (p.tier_ > tier_) return false;
  for (int k = 0; k < p.tier_; ++k) {
    if (bytes_[k] != p.bytes_[k]) return false;
  }
  return true;
}

BigMac BigMac::with_prefix(const BigMac& p) const {
  if (p.tier_ > tier_) throw Error(Errc::tier_overflow, "prefix longer than address");
  Octets b = bytes_;
  for (int k = 0; k < p.tier_; ++k) b[k] = p.bytes_[k];
  return BigMac(b, tier_);
}

BigMac BigMac::with_byte(int pos, std::uint8_t value) const {
  if (pos < 0 || pos >= tier_) throw Error(Errc::port_range, "byte outside meaningful prefix");
  if (value == 0) throw Error(Errc::zero_port, "meaningful byte must be nonzero");
  Octets b = bytes_;
  b[pos] = value;
  return BigMac(b, tier_);
}

int common_prefix_len(const BigMac& a, const BigMac& b) {
  const int cap = std::min(a.tier(), b.tier());
  int n = 0;
  while (n < cap && a[n] == b[n]) ++n;
  return n;
}

std::uint8_t pack_delta(std::uint8_t uplink_index, std::uint8_t downlink_port) {
  if (downlink_port == 0) throw Error(Errc::zero_port, "delta downlink port 0");
  if (downlink_port > kDeltaMaxPort) {
    throw Error(Errc::port_range, fmt::format("delta downlink port {} > {}", downlink_port, kDeltaMaxPort));
  }
  if (uplink_index >= kDeltaMaxUplinks) {
    throw Error(Errc::port_range, fmt::format("delta uplink index {} > 7", uplink_index));
  }
  return static_cast<std::uint8_t>(uplink_index << 5 | downlink_port);
}

DeltaByte unpack_delta(std::uint8_t value) {
  const auto port = static_cast<std::uint8_t>(value & kDeltaPortMask);
  if (port == 0) throw Error(Errc::zero_port, fmt::format("delta byte {:#04x} has no downlink port", value));
  return DeltaByte{static_cast<std::uint8_t>(value >> 5), port};
}

double expected_addresses(const FanoutParams& p) {
  if (p.uplink_fanout < 1 || p.downlink_fanout <= p.uplink_fanout) {
    throw Error(Errc::bad_fanout, fmt::format("need d > u >= 1, got u={} d={}", p.uplink_fanout, p.downlink_fanout));
  }
  if (p.n_hosts < 1) throw Error(Errc::bad_fanout, "need N >= 1");
  if (p.uplink_fanout == 1) return 1.0;
  const double lu = std::log2(static_cast<double>(p.uplink_fanout));
  const double ld = std::log2(static_cast<double>(p.downlink_fanout));
  return std::pow(p.n_hosts, lu / (ld - lu));
}

}  // namespace bigmac
