#include "bigmac/topology.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>

#include "bigmac/error.hpp"

namespace bigmac {

LinkKey::LinkKey(std::string x, std::string y) {
  if (y < x) std::swap(x, y);
  a = std::move(x);
  b = std::move(y);
}

void Topology::add_switch(SwitchDecl sw) {
  if (has_node(sw.id)) throw Error(Errc::parse, fmt::format("duplicate node id '{}'", sw.id));
  auto id = sw.id;
  switches.emplace(std::move(id), std::move(sw));
}

void Topology::add_link(const std::string& parent, std::uint8_t port, const std::string& child,
                        std::optional<std::uint8_t> uplink_index) {
  std::uint8_t index = 0;
  if (uplink_index) {
    index = *uplink_index;
  } else {
    std::set<std::uint8_t> used;
    for (const auto& l : links) {
      if (l.child == child) used.insert(l.uplink_index);
    }
    while (used.contains(index)) ++index;
  }
  links.push_back(Link{parent, port, child, index});
}

void Topology::add_host(HostDecl host) {
  if (has_node(host.id)) throw Error(Errc::parse, fmt::format("duplicate node id '{}'", host.id));
  auto id = host.id;
  hosts.emplace(std::move(id), std::move(host));
}

void Topology::add_shortcut(const std::string& a, const std::string& b) { shortcuts.push_back({a, b}); }

bool Topology::has_link(const LinkKey& key) const {
  for (const auto& l : links) {
    if (LinkKey(l.parent, l.child) == key) return true;
  }
  for (const auto& [id, h] : hosts) {
    if (LinkKey(h.id, h.edge) == key) return true;
  }
  return false;
}

int Topology::depth() const {
  int d = 0;
  for (const auto& [id, sw] : switches) d = std::max(d, sw.tier);
  for (const auto& [id, h] : hosts) {
    auto it = switches.find(h.edge);
    if (it != switches.end()) d = std::max(d, it->second.tier + 1);
  }
  return d;
}

std::vector<std::string> Topology::top_switches() const {
  std::vector<std::string> out;
  for (const auto& [id, sw] : switches) {
    if (sw.tier == 1) out.push_back(id);
  }
  return out;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DuplicateRootByte: return "DuplicateRootByte";
    case ViolationKind::RootByteOnNonTop: return "RootByteOnNonTop";
    case ViolationKind::TooManyRoots: return "TooManyRoots";
    case ViolationKind::BadTier: return "BadTier";
    case ViolationKind::NonLayeredLink: return "NonLayeredLink";
    case ViolationKind::UnknownNode: return "UnknownNode";
    case ViolationKind::ZeroPort: return "ZeroPort";
    case ViolationKind::DuplicateDownlinkPort: return "DuplicateDownlinkPort";
    case ViolationKind::DuplicateUplinkIndex: return "DuplicateUplinkIndex";
    case ViolationKind::UplinkIndexRange: return "UplinkIndexRange";
    case ViolationKind::OrphanSwitch: return "OrphanSwitch";
    case ViolationKind::HostNotOnSwitch: return "HostNotOnSwitch";
    case ViolationKind::DepthExceeded: return "DepthExceeded";
    case ViolationKind::DuplicateMac: return "DuplicateMac";
    case ViolationKind::MacCollision: return "MacCollision";
    case ViolationKind::BroadcastMac: return "BroadcastMac";
    case ViolationKind::UnnormalizedStack: return "UnnormalizedStack";
    case ViolationKind::UnnormalizedShortcut: return "UnnormalizedShortcut";
    case ViolationKind::DeltaPortBound: return "DeltaPortBound";
  }
  return "Unknown";
}

std::map<std::string, std::uint8_t> root_bytes(const Topology& t) {
  std::map<std::string, std::uint8_t> out;
  std::set<int> used;
  for (const auto& [id, sw] : t.switches) {
    if (sw.tier == 1 && sw.root_byte) {
      out[id] = *sw.root_byte;
      used.insert(*sw.root_byte);
    }
  }
  int next = 1;
  for (const auto& [id, sw] : t.switches) {
    if (sw.tier != 1 || sw.root_byte) continue;
    while (used.contains(next)) ++next;
    if (next > 255) break;
    out[id] = static_cast<std::uint8_t>(next);
    used.insert(next);
  }
  return out;
}

std::vector<Violation> validate(const Topology& t, AddressEncoding enc) {
  std::vector<Violation> out;
  auto flag = [&](ViolationKind k, std::string detail) { out.push_back({k, std::move(detail)}); };

  std::map<int, std::vector<std::string>> explicit_roots;
  std::set<std::string> groups;
  std::size_t top_count = 0;
  for (const auto& [id, sw] : t.switches) {
    if (sw.tier < 1) flag(ViolationKind::BadTier, fmt::format("{} has tier {}", id, sw.tier));
    if (sw.tier > kMaxTier) flag(ViolationKind::DepthExceeded, fmt::format("{} has tier {}", id, sw.tier));
    if (sw.tier == 1) ++top_count;
    if (sw.root_byte) {
      if (sw.tier != 1) {
        flag(ViolationKind::RootByteOnNonTop, fmt::format("{} is tier {}", id, sw.tier));
      } else if (*sw.root_byte == 0) {
        flag(ViolationKind::ZeroPort, fmt::format("{} has root byte 0x00", id));
      } else {
        explicit_roots[*sw.root_byte].push_back(id);
      }
    }
    if (sw.stack_group) groups.insert(*sw.stack_group);
  }
  for (const auto& [byte, ids] : explicit_roots) {
    if (ids.size() > 1) {
      flag(ViolationKind::DuplicateRootByte, fmt::format("{:#04x} used by {}", byte, fmt::join(ids, ", ")));
    }
  }
  if (top_count > 255) flag(ViolationKind::TooManyRoots, fmt::format("{} top-tier switches", top_count));
  for (const auto& g : groups) flag(ViolationKind::UnnormalizedStack, fmt::format("stack group {}", g));
  for (const auto& s : t.shortcuts) flag(ViolationKind::UnnormalizedShortcut, fmt::format("{} {}", s.a, s.b));

  std::map<std::string, std::set<int>> down_ports;
  std::map<std::string, std::set<int>> up_indices;
  auto claim_port = [&](const std::string& sw, int port, const std::string& what) {
    if (port == 0) {
      flag(ViolationKind::ZeroPort, fmt::format("{} port 0 ({})", sw, what));
      return;
    }
    if (!down_ports[sw].insert(port).second) {
      flag(ViolationKind::DuplicateDownlinkPort, fmt::format("{} port {} ({})", sw, port, what));
    }
    if (enc == AddressEncoding::delta && port > kDeltaMaxPort) {
      flag(ViolationKind::DeltaPortBound, fmt::format("{} port {} > {}", sw, port, kDeltaMaxPort));
    }
  };

  for (const auto& l : t.links) {
    auto p = t.switches.find(l.parent);
    auto c = t.switches.find(l.child);
    if (p == t.switches.end() || c == t.switches.end()) {
      flag(ViolationKind::UnknownNode,
           fmt::format("link {}:{} {}", l.parent, l.port, l.child));
      continue;
    }
    if (c->second.tier != p->second.tier + 1) {
      flag(ViolationKind::NonLayeredLink, fmt::format("{} (tier {}) -> {} (tier {})", l.parent, p->second.tier,
                                                      l.child, c->second.tier));
    }
    claim_port(l.parent, l.port, l.child);
    if (l.uplink_index >= kDeltaMaxUplinks) {
      flag(ViolationKind::UplinkIndexRange, fmt::format("{} uplink {}", l.child, l.uplink_index));
    }
    if (!up_indices[l.child].insert(l.uplink_index).second) {
      flag(ViolationKind::DuplicateUplinkIndex, fmt::format("{} uplink {}", l.child, l.uplink_index));
    }
  }
  for (const auto& [id, sw] : t.switches) {
    if (sw.tier > 1 && !up_indices.contains(id)) {
      flag(ViolationKind::OrphanSwitch, fmt::format("{} (tier {}) has no uplinks", id, sw.tier));
    }
  }

  std::map<MacAddr, std::string> macs;
  for (const auto& [id, h] : t.hosts) {
    auto e = t.switches.find(h.edge);
    if (e == t.switches.end()) {
      flag(ViolationKind::HostNotOnSwitch, fmt::format("{} at {}", id, h.edge));
    } else {
      claim_port(h.edge, h.port, id);
      if (e->second.tier + 1 > kMaxTier) {
        flag(ViolationKind::DepthExceeded, fmt::format("{} would be tier {}", id, e->second.tier + 1));
      }
    }
    if (h.mac.is_broadcast()) flag(ViolationKind::BroadcastMac, id);
    auto [it, fresh] = macs.emplace(h.mac, id);
    if (!fresh) flag(ViolationKind::DuplicateMac, fmt::format("{} and {} share {}", it->second, id, h.mac.to_string()));
  }

  if (out.empty()) {
    const AddressTable table = detail::assign_unchecked(t, enc);
    for (const auto& [id, h] : t.hosts) {
      if (auto as_big = BigMac::from_mac(h.mac)) {
        if (auto owner = table.owner(*as_big)) {
          flag(ViolationKind::MacCollision, fmt::format("{} genuine MAC equals locator of {}", id, *owner));
        }
      }
    }
  }
  return out;
}

namespace {

std::uint8_t lowest_free_port(const Topology& t, const std::string& sw) {
  std::set<int> used;
  for (const auto& l : t.links) {
    if (l.parent == sw) used.insert(l.port);
  }
  for (const auto& [id, h] : t.hosts) {
    if (h.edge == sw) used.insert(h.port);
  }
  int port = 1;
  while (used.contains(port)) ++port;
  if (port > 255) throw Error(Errc::merge_conflict, fmt::format("{} has no free downlink port", sw));
  return static_cast<std::uint8_t>(port);
}

Topology merge_stacks(const Topology& t) {
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& [id, sw] : t.switches) {
    if (sw.stack_group) groups[*sw.stack_group].push_back(id);
  }
  if (groups.empty()) return t;

  std::map<std::string, std::string> rename;
  Topology out;
  for (const auto& [group, members] : groups) {
    if (members.size() == 1) continue;
    if (t.has_node(group) && std::find(members.begin(), members.end(), group) == members.end()) {
      throw Error(Errc::merge_conflict, fmt::format("stack group '{}' collides with a node id", group));
    }
    for (const auto& m : members) rename[m] = group;
  }
  auto renamed = [&](const std::string& id) {
    auto it = rename.find(id);
    return it == rename.end() ? id : it->second;
  };

  for (const auto& [group, members] : groups) {
    if (members.size() == 1) {
      SwitchDecl sw = t.switches.at(members.front());
      sw.stack_group.reset();
      out.switches.emplace(sw.id, sw);
      continue;
    }
    SwitchDecl merged{group, t.switches.at(members.front()).tier, std::nullopt, std::nullopt};
    for (const auto& m : members) {
      const auto& sw = t.switches.at(m);
      if (sw.tier != merged.tier) {
        throw Error(Errc::merge_conflict, fmt::format("stack group '{}' mixes tiers {} and {}", group,
                                                      merged.tier, sw.tier));
      }
      if (sw.root_byte && (!merged.root_byte || *sw.root_byte < *merged.root_byte)) merged.root_byte = sw.root_byte;
    }
    out.switches.emplace(group, merged);
  }
  for (const auto& [id, sw] : t.switches) {
    if (!sw.stack_group) out.switches.emplace(id, sw);
  }

  // Downlink ports of merged switches must stay distinct across members.
  std::map<std::pair<std::string, int>, std::string> port_owner;
  auto claim = [&](const std::string& original, int port) {
    const std::string merged = renamed(original);
    if (merged == original) return;
    auto [it, fresh] = port_owner.emplace(std::make_pair(merged, port), original);
    if (!fresh && it->second != original) {
      throw Error(Errc::merge_conflict, fmt::format("port {} used by both {} and {} in stack '{}'", port,
                                                    it->second, original, merged));
    }
  };
  for (const auto& l : t.links) claim(l.parent, l.port);
  for (const auto& [id, h] : t.hosts) claim(h.edge, h.port);

  // Uplinks of merged switches are renumbered by (peer id, peer port).
  std::map<std::string, std::vector<std::pair<std::string, int>>> merged_uplinks;
  for (const auto& l : t.links) {
    if (rename.contains(l.child)) merged_uplinks[renamed(l.child)].emplace_back(renamed(l.parent), l.port);
  }
  std::map<std::tuple<std::string, std::string, int>, std::uint8_t> new_index;
  for (auto& [child, ups] : merged_uplinks) {
    std::sort(ups.begin(), ups.end());
    for (std::size_t i = 0; i < ups.size(); ++i) {
      new_index[{child, ups[i].first, ups[i].second}] = static_cast<std::uint8_t>(i);
    }
  }
  for (const auto& l : t.links) {
    Link n{renamed(l.parent), l.port, renamed(l.child), l.uplink_index};
    if (rename.contains(l.child)) n.uplink_index = new_index.at({n.child, n.parent, n.port});
    out.links.push_back(std::move(n));
  }
  for (const auto& [id, h] : t.hosts) {
    HostDecl n = h;
    n.edge = renamed(h.edge);
    out.hosts.emplace(id, std::move(n));
  }
  for (const auto& s : t.shortcuts) out.shortcuts.push_back({renamed(s.a), renamed(s.b)});
  return out;
}

void expand_shortcuts(Topology& t) {
  std::set<std::pair<std::string, std::string>> seen;
  const auto shortcuts = std::move(t.shortcuts);
  t.shortcuts.clear();
  for (const auto& s : shortcuts) {
    auto [lo, hi] = std::minmax(s.a, s.b);
    if (lo == hi || !seen.emplace(lo, hi).second) continue;
    auto a = t.switches.find(lo);
    auto b = t.switches.find(hi);
    if (a == t.switches.end() || b == t.switches.end()) {
      throw Error(Errc::invalid_topology, fmt::format("shortcut {} {} names an unknown switch", lo, hi));
    }
    const int tier = a->second.tier;
    if (b->second.tier != tier) {
      throw Error(Errc::invalid_topology, fmt::format("shortcut {} {} joins tiers {} and {}", lo, hi, tier,
                                                      b->second.tier));
    }
    // Top-tier switches are already logically meshed.
    if (tier <= 1) continue;

    std::string fictive = fmt::format("~{}+{}", lo, hi);
    while (t.has_node(fictive)) fictive += "'";
    t.switches.emplace(fictive, SwitchDecl{fictive, tier - 1, std::nullopt, std::nullopt});

    if (tier - 1 >= 2) {
      std::set<std::string> parents;
      for (const auto& l : t.links) {
        if (l.child == lo || l.child == hi) parents.insert(l.parent);
      }
      std::set<std::string> grandparents;
      for (const auto& l : t.links) {
        if (parents.contains(l.child)) grandparents.insert(l.parent);
      }
      for (const auto& g : grandparents) t.add_link(g, lowest_free_port(t, g), fictive);
    }
    t.add_link(fictive, 1, lo);
    t.add_link(fictive, 2, hi);
  }
}

}  // namespace

Topology normalize(const Topology& t) {
  if (t.shortcuts.empty() &&
      std::none_of(t.switches.begin(), t.switches.end(), [](const auto& kv) { return kv.second.stack_group; })) {
    return t;
  }
  Topology out = merge_stacks(t);
  expand_shortcuts(out);
  return out;
}

Fabric::Fabric(const Topology& t, AddressEncoding enc) : Fabric(t, Unchecked{}) {
  auto violations = validate(t, enc);
  if (!violations.empty()) {
    throw Error(Errc::invalid_topology,
                fmt::format("{}: {}", to_string(violations.front().kind), violations.front().detail));
  }
}

Fabric::Fabric(const Topology& t, Unchecked) : topo_(t) {
  const auto roots = root_bytes(t);
  for (const auto& [id, sw] : t.switches) {
    Switch s{id, sw.tier, std::nullopt, {}, {}};
    if (auto r = roots.find(id); r != roots.end()) s.root = r->second;
    switches_.emplace(id, std::move(s));
  }
  for (const auto& l : t.links) {
    switches_.at(l.child).uplinks.push_back({l.uplink_index, l.parent, l.port});
    switches_.at(l.parent).downlinks.push_back({l.port, l.child, false, l.uplink_index});
  }
  for (const auto& [id, h] : t.hosts) switches_.at(h.edge).downlinks.push_back({h.port, id, true, 0});
  for (auto& [id, s] : switches_) {
    std::sort(s.uplinks.begin(), s.uplinks.end(), [](const auto& x, const auto& y) { return x.index < y.index; });
    std::sort(s.downlinks.begin(), s.downlinks.end(), [](const auto& x, const auto& y) { return x.port < y.port; });
    by_tier_.push_back(id);
  }
  std::stable_sort(by_tier_.begin(), by_tier_.end(), [this](const auto& x, const auto& y) {
    return switches_.at(x).tier < switches_.at(y).tier;
  });
}

const Fabric::Switch& Fabric::at(const std::string& id) const {
  auto it = switches_.find(id);
  if (it == switches_.end()) throw Error(Errc::no_such_node, id);
  return it->second;
}

std::vector<std::vector<std::string>> enumerate_upward_paths(const Topology& t, const std::string& host,
                                                             const std::set<LinkKey>& dead) {
  auto h = t.hosts.find(host);
  if (h == t.hosts.end()) throw Error(Errc::no_such_node, host);
  std::vector<std::vector<std::string>> out;
  if (dead.contains(LinkKey(host, h->second.edge))) return out;

  std::map<std::string, std::vector<const Link*>> ups;
  for (const auto& l : t.links) ups[l.child].push_back(&l);
  for (auto& [child, v] : ups) {
    std::sort(v.begin(), v.end(), [](const Link* x, const Link* y) { return x->uplink_index < y->uplink_index; });
  }

  std::vector<std::string> path;
  std::function<void(const std::string&)> walk = [&](const std::string& node) {
    path.push_back(node);
    if (t.switches.at(node).tier == 1) {
      out.push_back(path);
    } else if (auto it = ups.find(node); it != ups.end()) {
      for (const Link* l : it->second) {
        if (!dead.contains(LinkKey(l->child, l->parent))) walk(l->parent);
      }
    }
    path.pop_back();
  };
  walk(h->second.edge);
  return out;
}

}  // namespace bigmac
