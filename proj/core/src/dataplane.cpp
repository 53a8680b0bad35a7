#include "bigmac/dataplane.hpp"

#include <fmt/format.h>

#include <numeric>

namespace bigmac {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::alpha: return "alpha";
    case Strategy::beta: return "beta";
    case Strategy::gamma: return "gamma";
    case Strategy::delta: return "delta";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (auto s : {Strategy::alpha, Strategy::beta, Strategy::gamma, Strategy::delta}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

AddressEncoding encoding_for(Strategy s) {
  return s == Strategy::delta ? AddressEncoding::delta : AddressEncoding::plain;
}

std::string PortRef::to_string() const {
  switch (kind) {
    case PortKind::uplink: return fmt::format("up{}", number);
    case PortKind::downlink: return fmt::format("dn{}", number);
    case PortKind::mesh: return fmt::format("mesh{:02x}", number);
    case PortKind::control: return "ctl";
  }
  return "?";
}

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::NoSuchPort: return "NoSuchPort";
    case DropReason::NoOwningUplink: return "NoOwningUplink";
    case DropReason::EmptyUplinks: return "EmptyUplinks";
    case DropReason::NotBigMac: return "NotBigMac";
    case DropReason::PrefixMismatch: return "PrefixMismatch";
    case DropReason::UnknownHostMac: return "UnknownHostMac";
    case DropReason::NoHostAddress: return "NoHostAddress";
    case DropReason::UnknownRoot: return "UnknownRoot";
    case DropReason::UnexpectedBroadcast: return "UnexpectedBroadcast";
    case DropReason::LinkDown: return "LinkDown";
    case DropReason::UnknownTarget: return "UnknownTarget";
    case DropReason::TickLimit: return "TickLimit";
  }
  return "?";
}

std::map<std::string, SwitchState> build_switch_states(const Topology& t, const AddressTable& table,
                                                       Strategy strategy) {
  const Fabric fabric(t, encoding_for(strategy));
  std::set<std::uint8_t> roots;
  for (const auto& [id, sw] : fabric.switches()) {
    if (sw.root) roots.insert(*sw.root);
  }
  std::map<std::string, SwitchState> out;
  for (const auto& [id, sw] : fabric.switches()) {
    SwitchState s;
    s.id = id;
    s.tier = sw.tier;
    s.strategy = strategy;
    s.root = sw.root;
    if (sw.tier > 1) s.uplink_prefixes = table.uplink_addresses(id);
    for (const auto& d : sw.downlinks) {
      s.downlink_ports.insert(d.port);
      if (d.to_host) {
        if (!s.edge) s.edge.emplace();
        s.edge->host_addresses[d.port] = table.addresses(d.child);
      }
    }
    if (sw.root) {
      s.mesh_roots = roots;
      s.mesh_roots.erase(*sw.root);
    }
    out.emplace(id, std::move(s));
  }
  return out;
}

std::string serialize_forwarding_state(const SwitchState& s) {
  std::string out = fmt::format("switch {}\ntier {}\nstrategy {}\n", s.id, s.tier, to_string(s.strategy));
  if (s.root) out += fmt::format("root {:02x}\n", *s.root);
  for (const auto& [k, prefixes] : s.uplink_prefixes) {
    out += fmt::format("up {}", k);
    for (const auto& p : prefixes) out += " " + p.to_string();
    out += '\n';
  }
  out += "down";
  for (auto p : s.downlink_ports) out += fmt::format(" {}", p);
  out += '\n';
  if (!s.mesh_roots.empty()) {
    out += "mesh";
    for (auto r : s.mesh_roots) out += fmt::format(" {:02x}", r);
    out += '\n';
  }
  return out;
}

namespace {

bool owns_prefix(const std::vector<BigMac>& prefixes, const BigMac& p) {
  return std::binary_search(prefixes.begin(), prefixes.end(), p);
}

ForwardDecision down_by_byte(const SwitchState& s, const Frame& f, const BigMac& dst) {
  if (dst.tier() <= s.tier) return ForwardDecision::dropped(DropReason::PrefixMismatch);
  const std::uint8_t port = port_of_byte(dst[s.tier], s.encoding());
  if (!s.downlink_ports.contains(port)) return ForwardDecision::dropped(DropReason::NoSuchPort);
  return ForwardDecision::single(PortRef::down(port), f);
}

// Source prefix rewrite for beta/gamma and flooding. Under delta the uplink
// bits of the next byte are refreshed too, so rewritten sources stay valid
// locators of the sender.
BigMac rewrite_source(const SwitchState& s, const BigMac& src, const BigMac& prefix, std::uint8_t uplink) {
  BigMac out = src.with_prefix(prefix);
  if (s.encoding() == AddressEncoding::delta && src.tier() > s.tier) {
    out = out.with_byte(s.tier, pack_delta(uplink, port_of_byte(src[s.tier], AddressEncoding::delta)));
  }
  return out;
}

struct GammaChoice {
  std::uint8_t uplink;
  BigMac prefix;
  int match;
};

std::optional<GammaChoice> gamma_choice(const SwitchState& s, const BigMac& dst) {
  std::optional<GammaChoice> best;
  for (const auto& [k, prefixes] : s.uplink_prefixes) {
    for (const auto& p : prefixes) {
      const int m = common_prefix_len(p, dst);
      if (!best || m > best->match) best = GammaChoice{k, p, m};
    }
  }
  return best;
}

}  // namespace

std::optional<std::uint8_t> hairpin_check(const SwitchState& s, const Frame& f) {
  auto src = BigMac::from_mac(f.src);
  auto dst = BigMac::from_mac(f.dst);
  if (!src || !dst || src->tier() <= s.tier || dst->tier() <= s.tier) return std::nullopt;
  if (common_prefix_len(*src, *dst) < s.tier) return std::nullopt;
  return port_of_byte((*dst)[s.tier], s.encoding());
}

ForwardDecision forward_down(const SwitchState& s, const Frame& f, PortRef ingress) {
  auto dst = BigMac::from_mac(f.dst);
  if (!dst) return ForwardDecision::dropped(DropReason::NotBigMac);
  if (dst->tier() <= s.tier) return ForwardDecision::dropped(DropReason::PrefixMismatch);
  if (ingress.kind == PortKind::uplink) {
    auto it = s.uplink_prefixes.find(ingress.number);
    if (it == s.uplink_prefixes.end() || !owns_prefix(it->second, dst->prefix(s.tier))) {
      return ForwardDecision::dropped(DropReason::PrefixMismatch);
    }
  } else if (!s.root || (*dst)[0] != *s.root || s.tier != 1) {
    return ForwardDecision::dropped(DropReason::PrefixMismatch);
  }
  return down_by_byte(s, f, *dst);
}

ForwardDecision forward_up(const SwitchState& s, const Frame& f, std::uint8_t /*ingress_port*/) {
  if (s.uplink_prefixes.empty()) return ForwardDecision::dropped(DropReason::EmptyUplinks);
  auto src = BigMac::from_mac(f.src);
  auto dst = BigMac::from_mac(f.dst);
  if (!src || !dst || src->tier() <= s.tier) return ForwardDecision::dropped(DropReason::NotBigMac);

  switch (s.strategy) {
    case Strategy::alpha: {
      const BigMac own = src->prefix(s.tier);
      for (const auto& [k, prefixes] : s.uplink_prefixes) {
        if (owns_prefix(prefixes, own)) return ForwardDecision::single(PortRef::up(k), f);
      }
      return ForwardDecision::dropped(DropReason::NoOwningUplink);
    }
    case Strategy::delta: {
      const auto k = static_cast<std::uint8_t>((*src)[s.tier] >> 5);
      if (!s.uplink_prefixes.contains(k)) return ForwardDecision::dropped(DropReason::NoOwningUplink);
      return ForwardDecision::single(PortRef::up(k), f);
    }
    case Strategy::beta: {
      // Stateless rotation keyed on the destination; keeps the core table-free.
      const auto& bytes = dst->bytes();
      const unsigned spread = std::accumulate(bytes.begin(), bytes.end(), 0u);
      auto it = s.uplink_prefixes.begin();
      std::advance(it, spread % s.uplink_prefixes.size());
      Frame out = f;
      out.src = rewrite_source(s, *src, it->second.front(), it->first).mac();
      return ForwardDecision::single(PortRef::up(it->first), std::move(out));
    }
    case Strategy::gamma: {
      auto choice = gamma_choice(s, *dst);
      Frame out = f;
      out.src = rewrite_source(s, *src, choice->prefix, choice->uplink).mac();
      return ForwardDecision::single(PortRef::up(choice->uplink), std::move(out));
    }
  }
  return ForwardDecision::dropped(DropReason::NoOwningUplink);
}

Outcome<Frame> edge_ingress(SwitchState& s, Frame f, std::uint8_t port) {
  if (!s.edge) return DropReason::NoHostAddress;
  auto addrs = s.edge->host_addresses.find(port);
  if (addrs == s.edge->host_addresses.end() || addrs->second.empty()) return DropReason::NoHostAddress;
  s.edge->genuine_by_port[port] = f.src;

  const BigMac& fallback = addrs->second.front();
  auto dst = BigMac::from_mac(f.dst);
  if (!dst) {
    f.src = fallback.mac();
    return f;
  }
  auto [it, fresh] = s.edge->src_for_dst.try_emplace({port, *dst}, fallback);
  f.src = it->second.mac();
  return f;
}

Outcome<Frame> edge_egress(SwitchState& s, Frame f, std::uint8_t port) {
  if (!s.edge) return DropReason::UnknownHostMac;
  auto genuine = s.edge->genuine_by_port.find(port);
  if (genuine == s.edge->genuine_by_port.end()) return DropReason::UnknownHostMac;

  const auto& mine = s.edge->host_addresses[port];
  auto dst = BigMac::from_mac(f.dst);
  if (dst && std::binary_search(mine.begin(), mine.end(), *dst)) {
    // Remember which of the host's locators this peer locator pairs with.
    std::optional<BigMac> peer;
    if (f.ethertype == kEtherArp) {
      if (auto arp = ArpRecord::decode(f.payload); arp && arp->op == ArpRecord::Op::reply) {
        peer = BigMac::from_mac(arp->sender_mac);
      }
    }
    if (!peer) peer = BigMac::from_mac(f.src);
    if (peer) s.edge->src_for_dst.insert_or_assign({port, *peer}, *dst);
  }
  f.dst = genuine->second;
  return f;
}

ForwardDecision flood_broadcast(const SwitchState& s, const Frame& f, PortRef ingress) {
  if (ingress.kind != PortKind::downlink) return ForwardDecision::dropped(DropReason::UnexpectedBroadcast);
  if (s.tier == 1) return ForwardDecision::single(PortRef::control(), f);
  if (s.uplink_prefixes.empty()) return ForwardDecision::dropped(DropReason::EmptyUplinks);
  auto src = BigMac::from_mac(f.src);
  if (!src || src->tier() <= s.tier) return ForwardDecision::dropped(DropReason::NotBigMac);

  ForwardDecision out;
  for (const auto& [k, prefixes] : s.uplink_prefixes) {
    Frame copy = f;
    copy.src = rewrite_source(s, *src, prefixes.front(), k).mac();
    out.actions.push_back({PortRef::up(k), std::move(copy)});
  }
  return out;
}

ForwardDecision switch_handle(SwitchState& s, const Frame& f, PortRef ingress) {
  Frame frame = f;
  if (ingress.kind == PortKind::downlink && s.is_host_port(ingress.number)) {
    auto in = edge_ingress(s, std::move(frame), ingress.number);
    if (!in.ok()) return ForwardDecision::dropped(in.reason());
    frame = std::move(in.value());
  }
  if (frame.dst.is_broadcast()) return flood_broadcast(s, frame, ingress);

  auto dst = BigMac::from_mac(frame.dst);
  if (!dst) return ForwardDecision::dropped(DropReason::NotBigMac);

  ForwardDecision decision;
  if (ingress.kind != PortKind::downlink) {
    decision = forward_down(s, frame, ingress);
  } else if (s.tier == 1) {
    if (s.root && (*dst)[0] == *s.root) {
      decision = down_by_byte(s, frame, *dst);
    } else if (s.mesh_roots.contains((*dst)[0])) {
      decision = ForwardDecision::single(PortRef::mesh((*dst)[0]), frame);
    } else {
      decision = ForwardDecision::dropped(DropReason::UnknownRoot);
    }
  } else if (s.strategy == Strategy::gamma) {
    auto src = BigMac::from_mac(frame.src);
    if (!src || src->tier() <= s.tier) return ForwardDecision::dropped(DropReason::NotBigMac);
    auto choice = gamma_choice(s, *dst);
    if (choice && choice->match >= s.tier) {
      // One of our own prefixes leads to the destination: this is the LCA.
      Frame rewritten = frame;
      rewritten.src = rewrite_source(s, *src, choice->prefix, choice->uplink).mac();
      decision = down_by_byte(s, rewritten, *dst);
    } else {
      decision = forward_up(s, frame, ingress.number);
    }
  } else if (hairpin_check(s, frame)) {
    decision = down_by_byte(s, frame, *dst);
  } else {
    decision = forward_up(s, frame, ingress.number);
  }

  if (decision.drop) return decision;
  for (auto& a : decision.actions) {
    if (a.egress.kind == PortKind::downlink && s.is_host_port(a.egress.number)) {
      auto out = edge_egress(s, std::move(a.frame), a.egress.number);
      if (!out.ok()) return ForwardDecision::dropped(out.reason());
      a.frame = std::move(out.value());
    }
  }
  return decision;
}

}  // namespace bigmac
