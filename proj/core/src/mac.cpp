#include "bigmac/mac.hpp"

#include <fmt/format.h>

#include <charconv>

#include "bigmac/error.hpp"

namespace bigmac {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::tier_overflow: return "TierOverflow";
    case Errc::zero_port: return "ZeroPort";
    case Errc::port_range: return "PortRange";
    case Errc::bad_fanout: return "BadFanout";
    case Errc::parse: return "ParseError";
    case Errc::merge_conflict: return "MergeConflict";
    case Errc::invalid_topology: return "InvalidTopology";
    case Errc::no_such_node: return "NoSuchNode";
    case Errc::no_such_link: return "NoSuchLink";
    case Errc::empty_set: return "EmptySet";
    case Errc::scenario: return "ScenarioError";
  }
  return "Unknown";
}

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

MacAddr MacAddr::parse(std::string_view text) {
  if (text.size() != 17) throw Error(Errc::parse, fmt::format("bad MAC '{}'", text));
  Octets out{};
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t at = i * 3;
    const int hi = hex_digit(text[at]);
    const int lo = hex_digit(text[at + 1]);
    if (hi < 0 || lo < 0 || (i < 5 && text[at + 2] != ':')) {
      throw Error(Errc::parse, fmt::format("bad MAC '{}'", text));
    }
    out[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return MacAddr(out);
}

std::string MacAddr::to_string() const {
  return fmt::format("{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}", bytes_[0], bytes_[1], bytes_[2],
                     bytes_[3], bytes_[4], bytes_[5]);
}

Ipv4Addr Ipv4Addr::parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 4; ++i) {
    unsigned octet = 0;
    auto [next, ec] = std::from_chars(p, end, octet);
    if (ec != std::errc() || octet > 255 || next == p) {
      throw Error(Errc::parse, fmt::format("bad IPv4 address '{}'", text));
    }
    value = (value << 8) | octet;
    p = next;
    if (i < 3) {
      if (p == end || *p != '.') throw Error(Errc::parse, fmt::format("bad IPv4 address '{}'", text));
      ++p;
    }
  }
  if (p != end) throw Error(Errc::parse, fmt::format("bad IPv4 address '{}'", text));
  return Ipv4Addr(value);
}

std::string Ipv4Addr::to_string() const {
  return fmt::format("{}.{}.{}.{}", value_ >> 24, (value_ >> 16) & 0xff, (value_ >> 8) & 0xff,
                     value_ & 0xff);
}

namespace {

std::uint32_t prefix_mask(int len) { return len == 0 ? 0u : ~0u << (32 - len); }

}  // namespace

Ipv4Cidr::Ipv4Cidr(Ipv4Addr network, int prefix_len) : network_(network), prefix_len_(prefix_len) {
  if (prefix_len < 0 || prefix_len > 32) throw Error(Errc::parse, "CIDR prefix length out of range");
  network_ = Ipv4Addr(network.value() & prefix_mask(prefix_len));
}

Ipv4Cidr Ipv4Cidr::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) throw Error(Errc::parse, fmt::format("bad CIDR '{}'", text));
  int len = -1;
  auto tail = text.substr(slash + 1);
  auto [next, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), len);
  if (ec != std::errc() || next != tail.data() + tail.size()) {
    throw Error(Errc::parse, fmt::format("bad CIDR '{}'", text));
  }
  return Ipv4Cidr(Ipv4Addr::parse(text.substr(0, slash)), len);
}

Ipv4Addr Ipv4Cidr::first_usable() const {
  return prefix_len_ >= 31 ? network_ : Ipv4Addr(network_.value() + 1);
}

Ipv4Addr Ipv4Cidr::last_usable() const {
  const std::uint32_t last = network_.value() | ~prefix_mask(prefix_len_);
  return prefix_len_ >= 31 ? Ipv4Addr(last) : Ipv4Addr(last - 1);
}

bool Ipv4Cidr::contains(Ipv4Addr addr) const {
  return (addr.value() & prefix_mask(prefix_len_)) == network_.value();
}

std::string Ipv4Cidr::to_string() const { return fmt::format("{}/{}", network_.to_string(), prefix_len_); }

}  // namespace bigmac
