#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bigmac/address.hpp"
#include "bigmac/frame.hpp"
#include "bigmac/topology.hpp"

namespace bigmac {

/// Source MAC of frames originated by the ARP&DHCP server.
inline constexpr MacAddr kServerMac{Octets{0x0a, 0x00, 0x00, 0x00, 0x00, 0xfe}};

enum class TeMode { first, round_robin, common_root };

std::string_view to_string(TeMode m);
std::optional<TeMode> parse_te_mode(std::string_view text);

/// (requester source locator, target locator)
using AddressPair = std::pair<BigMac, BigMac>;

class TePolicy {
 public:
  explicit TePolicy(TeMode mode = TeMode::first, std::uint64_t seed = 0) : mode_(mode), seed_(seed) {}

  TeMode mode() const { return mode_; }
  void set_mode(TeMode m) { mode_ = m; }

  /// Throws Error(empty_set) if either side is empty.
  AddressPair select_pair(std::span<const BigMac> requester, std::span<const BigMac> target);
  /// Same rules over an explicit candidate list (sorted on entry);
  /// `key` identifies the host pair for round-robin rotation.
  AddressPair select_from(std::vector<AddressPair> candidates, const AddressPair& key);

 private:
  TeMode mode_;
  std::uint64_t seed_;
  std::map<AddressPair, std::uint64_t> counters_;
};

struct Binding {
  MacAddr genuine;
  std::set<BigMac> addresses;
};

struct Lease {
  Ipv4Addr ip;
  std::uint64_t expiry = std::numeric_limits<std::uint64_t>::max();
};

struct Association {
  Ipv4Addr requester_ip;
  BigMac requester_src;
  BigMac target_addr;
};

struct ControlDb {
  std::map<Ipv4Addr, Binding> bindings;
  std::map<MacAddr, std::set<BigMac>> learned;
  std::map<MacAddr, std::string> edge_of;
  std::map<MacAddr, Lease> leases;
  /// Keyed by (requester genuine MAC, target IP).
  std::map<std::pair<MacAddr, Ipv4Addr>, Association> associations;
  std::uint64_t copy_counter = 0;
  std::uint64_t unknown_targets = 0;
  std::uint64_t pool_exhausted = 0;
};

struct ServerConfig {
  Ipv4Cidr pool{Ipv4Addr(0x0a000000), 24};
  std::uint64_t lease_ticks = std::numeric_limits<std::uint64_t>::max();
  TeMode mode = TeMode::first;
  std::uint64_t seed = 0;
};

struct FailoverResult {
  std::vector<Frame> announcements;
  /// (requester genuine MAC, target IP) pairs with no surviving locator pair.
  std::vector<std::pair<MacAddr, Ipv4Addr>> unreachable;
};

/// Set of links a unicast frame between the two locators crosses when it
/// climbs along the source path to the deepest shared prefix and descends
/// along the destination path.
std::set<LinkKey> route_links(const AddressTable& table, const BigMac& src, const BigMac& dst);

/// Centralized ARP&DHCP server. Input is the batch of flooded copies of one
/// broadcast; output frames are injected at the top-tier switch owning the
/// first byte of their destination.
class ControlServer {
 public:
  ControlServer(const AddressTable& table, ServerConfig cfg);

  /// Learns the client's locators, leases an address and replies (ack or nak)
  /// to a single client locator.
  Frame handle_dhcp(std::span<const Frame> copies, std::uint64_t now = 0);
  /// Nothing when the target IP is unknown or unreachable.
  std::optional<Frame> handle_arp(std::span<const Frame> copies);
  FailoverResult failover_announce(const LinkKey& failed);
  void link_restored(const LinkKey& link);

  const ControlDb& db() const { return db_; }
  TePolicy& policy() { return policy_; }
  const std::set<LinkKey>& dead_links() const { return dead_; }
  /// Re-reads locators after an address table rebuild with the same topology.
  void reset_table(const AddressTable& table) { table_ = &table; }

 private:
  void learn(const MacAddr& mac, std::span<const Frame> copies);
  bool route_live(const BigMac& src, const BigMac& dst) const;
  std::optional<AddressPair> choose(const std::set<BigMac>& requester, const std::set<BigMac>& target);
  Frame arp_reply(const MacAddr& requester, Ipv4Addr requester_ip, Ipv4Addr target_ip, const AddressPair& pair,
                  std::uint32_t seq) const;

  const AddressTable* table_;
  ServerConfig cfg_;
  TePolicy policy_;
  ControlDb db_;
  std::set<LinkKey> dead_;
};

}  // namespace bigmac
