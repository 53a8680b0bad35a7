#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bigmac/mac.hpp"

namespace bigmac {

inline constexpr std::uint16_t kEtherIpv4 = 0x0800;  // carries DHCP records
inline constexpr std::uint16_t kEtherArp = 0x0806;
inline constexpr std::uint16_t kEtherEcho = 0x88b5;  // minimal ping, IEEE local experimental

struct Frame {
  MacAddr dst;
  MacAddr src;
  std::uint16_t ethertype = 0;
  std::vector<std::uint8_t> payload;

  bool operator==(const Frame&) const = default;
};

// Payload records are simulator-internal fixed-field layouts, big-endian:
//
//   ArpRecord  (25 bytes): op:1 sender_mac:6 sender_ip:4 target_mac:6 target_ip:4 seq:4
//   DhcpRecord (15 bytes): op:1 client_mac:6 seq:4 yiaddr:4
//   EchoRecord (13 bytes): op:1 src_ip:4 dst_ip:4 id:4
//
// decode() returns nullopt on a length mismatch or unknown op.

struct ArpRecord {
  enum class Op : std::uint8_t { request = 1, reply = 2 };

  Op op = Op::request;
  MacAddr sender_mac;
  Ipv4Addr sender_ip;
  MacAddr target_mac;
  Ipv4Addr target_ip;
  std::uint32_t seq = 0;

  std::vector<std::uint8_t> encode() const;
  static std::optional<ArpRecord> decode(std::span<const std::uint8_t> bytes);
  bool operator==(const ArpRecord&) const = default;
};

struct DhcpRecord {
  enum class Op : std::uint8_t { request = 1, ack = 2, nak = 3 };

  Op op = Op::request;
  MacAddr client_mac;
  std::uint32_t seq = 0;
  Ipv4Addr yiaddr;

  std::vector<std::uint8_t> encode() const;
  static std::optional<DhcpRecord> decode(std::span<const std::uint8_t> bytes);
  bool operator==(const DhcpRecord&) const = default;
};

struct EchoRecord {
  enum class Op : std::uint8_t { request = 1, reply = 2 };

  Op op = Op::request;
  Ipv4Addr src_ip;
  Ipv4Addr dst_ip;
  std::uint32_t id = 0;

  std::vector<std::uint8_t> encode() const;
  static std::optional<EchoRecord> decode(std::span<const std::uint8_t> bytes);
  bool operator==(const EchoRecord&) const = default;
};

/// Short human-readable tag for logs, e.g. "arp-req", "dhcp-ack", "echo-rep".
std::string describe(const Frame& f);

}  // namespace bigmac
