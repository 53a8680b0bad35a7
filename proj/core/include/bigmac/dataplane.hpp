#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bigmac/address.hpp"
#include "bigmac/frame.hpp"
#include "bigmac/topology.hpp"

namespace bigmac {

/// Upward forwarding rule. alpha: uplink owning the source prefix. beta:
/// free uplink choice plus source-prefix rewrite. gamma: longest common prefix
/// with the destination. delta: uplink index read from the source byte.
enum class Strategy { alpha, beta, gamma, delta };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);
/// delta needs uplink indices packed into address bytes; the rest use plain bytes.
AddressEncoding encoding_for(Strategy s);

enum class PortKind : std::uint8_t { uplink, downlink, mesh, control };

/// `number` is the uplink index, the downlink port, or for mesh the root byte
/// of the peer top-tier switch. Control ports carry no number.
struct PortRef {
  PortKind kind = PortKind::downlink;
  std::uint8_t number = 0;

  static PortRef up(std::uint8_t index) { return {PortKind::uplink, index}; }
  static PortRef down(std::uint8_t port) { return {PortKind::downlink, port}; }
  static PortRef mesh(std::uint8_t root) { return {PortKind::mesh, root}; }
  static PortRef control() { return {PortKind::control, 0}; }

  std::string to_string() const;
  auto operator<=>(const PortRef&) const = default;
};

enum class DropReason {
  NoSuchPort,
  NoOwningUplink,
  EmptyUplinks,
  NotBigMac,
  PrefixMismatch,
  UnknownHostMac,
  NoHostAddress,
  UnknownRoot,
  UnexpectedBroadcast,
  LinkDown,
  UnknownTarget,
  TickLimit,
};

std::string_view to_string(DropReason r);

template <class T>
class Outcome {
 public:
  Outcome(T value) : v_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  Outcome(DropReason reason) : v_(reason) {}  // NOLINT(google-explicit-constructor)

  bool ok() const { return std::holds_alternative<T>(v_); }
  const T& value() const { return std::get<T>(v_); }
  T& value() { return std::get<T>(v_); }
  DropReason reason() const { return std::get<DropReason>(v_); }

 private:
  std::variant<T, DropReason> v_;
};

struct Action {
  PortRef egress;
  Frame frame;
};

struct ForwardDecision {
  std::vector<Action> actions;
  std::optional<DropReason> drop;

  static ForwardDecision dropped(DropReason r) { return {{}, r}; }
  static ForwardDecision single(PortRef egress, Frame f) { return {{Action{egress, std::move(f)}}, std::nullopt}; }
};

/// Customer-edge tables. Only this part of a switch learns from traffic.
struct EdgeState {
  std::map<std::uint8_t, std::vector<BigMac>> host_addresses;  // sorted per port
  std::map<std::uint8_t, MacAddr> genuine_by_port;
  std::map<std::pair<std::uint8_t, BigMac>, BigMac> src_for_dst;
};

struct SwitchState {
  std::string id;
  int tier = 1;
  Strategy strategy = Strategy::alpha;
  std::optional<std::uint8_t> root;                               // top tier only
  std::map<std::uint8_t, std::vector<BigMac>> uplink_prefixes;  // sorted per uplink
  std::set<std::uint8_t> downlink_ports;
  std::set<std::uint8_t> mesh_roots;  // top tier: peer root bytes
  std::optional<EdgeState> edge;

  AddressEncoding encoding() const { return encoding_for(strategy); }
  bool is_host_port(std::uint8_t port) const { return edge && edge->host_addresses.contains(port); }
};

/// One state per switch, derived from the topology and its address table.
std::map<std::string, SwitchState> build_switch_states(const Topology& t, const AddressTable& table,
                                                       Strategy strategy);

/// Canonical bytes of everything forwarding depends on, excluding the
/// traffic-learned edge tables.
std::string serialize_forwarding_state(const SwitchState& s);

/// Byte check on the destination for a frame coming from above. The frame is
/// not rewritten here.
ForwardDecision forward_down(const SwitchState& s, const Frame& f, PortRef ingress);
/// Picks the uplink for a frame that did not hairpin.
ForwardDecision forward_up(const SwitchState& s, const Frame& f, std::uint8_t ingress_port);
/// Downlink port to hairpin to when the first `tier` bytes of source and
/// destination agree.
std::optional<std::uint8_t> hairpin_check(const SwitchState& s, const Frame& f);
/// Host-to-network rewrite of the genuine source MAC.
Outcome<Frame> edge_ingress(SwitchState& s, Frame f, std::uint8_t port);
/// Network-to-host rewrite of the destination back to the genuine MAC.
Outcome<Frame> edge_egress(SwitchState& s, Frame f, std::uint8_t port);
/// Upward flooding: one copy per uplink with the source prefix set to that
/// uplink's own address; top-tier switches hand broadcasts to the control server.
ForwardDecision flood_broadcast(const SwitchState& s, const Frame& f, PortRef ingress);
/// Full per-switch pipeline: edge ingress, hairpin, up/down/flood, edge egress.
ForwardDecision switch_handle(SwitchState& s, const Frame& f, PortRef ingress);

}  // namespace bigmac
