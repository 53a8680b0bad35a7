#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bigmac/address.hpp"
#include "bigmac/mac.hpp"

namespace bigmac {

struct SwitchDecl {
  std::string id;
  int tier = 1;
  std::optional<std::uint8_t> root_byte;
  std::optional<std::string> stack_group;

  bool operator==(const SwitchDecl&) const = default;
};

/// Parent downlink port `port` is wired to child uplink `uplink_index`.
struct Link {
  std::string parent;
  std::uint8_t port = 0;
  std::string child;
  std::uint8_t uplink_index = 0;

  bool operator==(const Link&) const = default;
};

struct HostDecl {
  std::string id;
  std::string edge;
  std::uint8_t port = 0;
  MacAddr mac;
  std::optional<Ipv4Addr> ip;

  bool operator==(const HostDecl&) const = default;
};

struct Shortcut {
  std::string a;
  std::string b;

  bool operator==(const Shortcut&) const = default;
};

/// Undirected node pair; identifies every physical link between two nodes.
struct LinkKey {
  std::string a;
  std::string b;

  LinkKey() = default;
  LinkKey(std::string x, std::string y);

  std::string to_string() const { return a + "-" + b; }
  auto operator<=>(const LinkKey&) const = default;
};

/// Tiered switch/host graph as declared. Tier 1 is the top tier.
struct Topology {
  std::map<std::string, SwitchDecl> switches;
  std::vector<Link> links;
  std::map<std::string, HostDecl> hosts;
  std::vector<Shortcut> shortcuts;

  void add_switch(SwitchDecl sw);
  /// Without an explicit index the child's lowest unused uplink index is taken.
  void add_link(const std::string& parent, std::uint8_t port, const std::string& child,
                std::optional<std::uint8_t> uplink_index = std::nullopt);
  void add_host(HostDecl host);
  void add_shortcut(const std::string& a, const std::string& b);

  bool has_node(const std::string& id) const { return switches.contains(id) || hosts.contains(id); }
  bool has_link(const LinkKey& key) const;
  /// Tier of the deepest host (edge tier + 1), or the deepest switch tier.
  int depth() const;
  std::vector<std::string> top_switches() const;

  bool operator==(const Topology&) const = default;
};

enum class ViolationKind {
  DuplicateRootByte,
  RootByteOnNonTop,
  TooManyRoots,
  BadTier,
  NonLayeredLink,
  UnknownNode,
  ZeroPort,
  DuplicateDownlinkPort,
  DuplicateUplinkIndex,
  UplinkIndexRange,
  OrphanSwitch,
  HostNotOnSwitch,
  DepthExceeded,
  DuplicateMac,
  MacCollision,
  BroadcastMac,
  UnnormalizedStack,
  UnnormalizedShortcut,
  DeltaPortBound,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

std::vector<Violation> validate(const Topology& t, AddressEncoding enc = AddressEncoding::plain);

/// Merges stack groups into single switches and replaces shortcut links with
/// fictive common uplink switches. Throws Error(merge_conflict).
Topology normalize(const Topology& t);

/// Explicit root bytes, plus sequential auto-assignment from 0x01 (skipping
/// used values) for top-tier switches without one, in id order.
std::map<std::string, std::uint8_t> root_bytes(const Topology& t);

Topology parse_topology(std::string_view text);
std::string format_topology(const Topology& t);

/// Adjacency view of a topology; ports ascending, uplinks by index.
class AddressTable;
namespace detail {
AddressTable assign_unchecked(const Topology& t, AddressEncoding enc);
}

class Fabric {
 public:
  struct Uplink {
    std::uint8_t index;
    std::string parent;
    std::uint8_t parent_port;
  };
  struct Downlink {
    std::uint8_t port;
    std::string child;
    bool to_host;
    std::uint8_t child_uplink;  // uplink index on the child side (0 for hosts)
  };
  struct Switch {
    std::string id;
    int tier;
    std::optional<std::uint8_t> root;
    std::vector<Uplink> uplinks;
    std::vector<Downlink> downlinks;
  };

  /// Throws Error(invalid_topology) unless validate(t, enc) is empty.
  explicit Fabric(const Topology& t, AddressEncoding enc = AddressEncoding::plain);

  const Switch& at(const std::string& id) const;
  const std::map<std::string, Switch>& switches() const { return switches_; }
  /// Switch ids ordered by (tier, id).
  const std::vector<std::string>& by_tier() const { return by_tier_; }
  const Topology& topology() const { return topo_; }

 private:
  struct Unchecked {};
  Fabric(const Topology& t, Unchecked);
  friend AddressTable detail::assign_unchecked(const Topology& t, AddressEncoding enc);

  Topology topo_;
  std::map<std::string, Switch> switches_;
  std::vector<std::string> by_tier_;
};

/// The branch bunch: every node's set of locators, one per downward path.
class AddressTable {
 public:
  AddressEncoding encoding() const { return enc_; }
  /// Sorted; empty for unknown ids.
  const std::vector<BigMac>& addresses(const std::string& node) const;
  /// For a switch: addresses received through each uplink index.
  const std::map<std::uint8_t, std::vector<BigMac>>& uplink_addresses(const std::string& sw) const;
  std::optional<std::string> owner(const BigMac& addr) const;
  /// Nodes on the downward path of `addr`, top-tier switch first.
  std::vector<std::string> path(const BigMac& addr) const;
  const std::map<std::string, std::vector<BigMac>>& nodes() const { return by_node_; }
  std::size_t size() const { return owner_.size(); }

 private:
  friend AddressTable detail::assign_unchecked(const Topology& t, AddressEncoding enc);

  AddressEncoding enc_ = AddressEncoding::plain;
  std::map<std::string, std::vector<BigMac>> by_node_;
  std::map<std::string, std::map<std::uint8_t, std::vector<BigMac>>> by_uplink_;
  std::map<BigMac, std::string> owner_;
};

/// Requires validate(t, enc) to be empty.
AddressTable assign_addresses(const Topology& t, AddressEncoding enc = AddressEncoding::plain);

/// Every uplink-following path from the host's edge switch to the top tier,
/// skipping links in `dead`. Built from the raw link list, independently of
/// assign_addresses.
std::vector<std::vector<std::string>> enumerate_upward_paths(const Topology& t, const std::string& host,
                                                             const std::set<LinkKey>& dead = {});

/// Regular tiered family: `levels` switch tiers; every non-top switch has
/// `up` uplinks and every non-edge switch `down` downlinks. Parents are grouped
/// in blocks of `up`, each block fully wired to `down` children.
struct RegularParams {
  int levels = 2;
  int up = 2;
  int down = 2;
  std::optional<int> top;             // top-tier switch count, default `down`
  std::optional<int> hosts_per_edge;  // default max(1, down / up)
};

Topology generate_regular(const RegularParams& p);

}  // namespace bigmac
