#include <fmt/format.h>

#include <algorithm>

#include "bigmac/error.hpp"
#include "bigmac/topology.hpp"

namespace bigmac {

namespace {

const std::vector<BigMac> kNoAddresses;
const std::map<std::uint8_t, std::vector<BigMac>> kNoUplinks;

}  // namespace

const std::vector<BigMac>& AddressTable::addresses(const std::string& node) const {
  auto it = by_node_.find(node);
  return it == by_node_.end() ? kNoAddresses : it->second;
}

const std::map<std::uint8_t, std::vector<BigMac>>& AddressTable::uplink_addresses(const std::string& sw) const {
  auto it = by_uplink_.find(sw);
  return it == by_uplink_.end() ? kNoUplinks : it->second;
}

std::optional<std::string> AddressTable::owner(const BigMac& addr) const {
  auto it = owner_.find(addr);
  if (it == owner_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> AddressTable::path(const BigMac& addr) const {
  std::vector<std::string> out;
  for (int len = 1; len <= addr.tier(); ++len) {
    auto node = owner(addr.prefix(len));
    if (!node) throw Error(Errc::no_such_node, fmt::format("no node owns {}", addr.prefix(len).to_string()));
    out.push_back(*node);
  }
  return out;
}

namespace detail {

AddressTable assign_unchecked(const Topology& t, AddressEncoding enc) {
  const Fabric fabric(t, Fabric::Unchecked{});
  AddressTable table;
  table.enc_ = enc;

  struct Acquired {
    BigMac addr;
    std::uint8_t via_uplink;
  };
  std::map<std::string, std::vector<Acquired>> acquired;
  for (const auto& id : fabric.by_tier()) {
    const auto& sw = fabric.at(id);
    if (sw.tier == 1 && sw.root) acquired[id].push_back({BigMac::root(*sw.root), 0});
  }

  for (const auto& id : fabric.by_tier()) {
    const auto& sw = fabric.at(id);
    auto& mine = acquired[id];
    std::sort(mine.begin(), mine.end(), [](const auto& x, const auto& y) { return x.addr < y.addr; });
    for (const auto& a : mine) {
      table.by_node_[id].push_back(a.addr);
      if (sw.tier > 1) table.by_uplink_[id][a.via_uplink].push_back(a.addr);
      table.owner_.emplace(a.addr, id);
      for (const auto& down : sw.downlinks) {
        const std::uint8_t byte =
            enc == AddressEncoding::delta ? pack_delta(a.via_uplink, down.port) : down.port;
        const BigMac child = a.addr.extend(byte);
        if (down.to_host) {
          table.by_node_[down.child].push_back(child);
          table.owner_.emplace(child, down.child);
        } else {
          acquired[down.child].push_back({child, down.child_uplink});
        }
      }
    }
  }
  for (auto& [node, addrs] : table.by_node_) std::sort(addrs.begin(), addrs.end());
  return table;
}

}  // namespace detail

AddressTable assign_addresses(const Topology& t, AddressEncoding enc) {
  auto violations = validate(t, enc);
  if (!violations.empty()) {
    throw Error(Errc::invalid_topology,
                fmt::format("{}: {}", to_string(violations.front().kind), violations.front().detail));
  }
  return detail::assign_unchecked(t, enc);
}

}  // namespace bigmac
