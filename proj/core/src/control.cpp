#include "bigmac/control.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "bigmac/error.hpp"

namespace bigmac {

std::string_view to_string(TeMode m) {
  switch (m) {
    case TeMode::first: return "first";
    case TeMode::round_robin: return "round_robin";
    case TeMode::common_root: return "common_root";
  }
  return "?";
}

std::optional<TeMode> parse_te_mode(std::string_view text) {
  for (auto m : {TeMode::first, TeMode::round_robin, TeMode::common_root}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

AddressPair TePolicy::select_pair(std::span<const BigMac> requester, std::span<const BigMac> target) {
  if (requester.empty() || target.empty()) throw Error(Errc::empty_set, "select_pair needs two nonempty sets");
  std::vector<AddressPair> candidates;
  candidates.reserve(requester.size() * target.size());
  for (const auto& r : requester) {
    for (const auto& t : target) candidates.emplace_back(r, t);
  }
  const AddressPair key{*std::min_element(requester.begin(), requester.end()),
                        *std::min_element(target.begin(), target.end())};
  return select_from(std::move(candidates), key);
}

AddressPair TePolicy::select_from(std::vector<AddressPair> candidates, const AddressPair& key) {
  if (candidates.empty()) throw Error(Errc::empty_set, "no candidate locator pairs");
  std::sort(candidates.begin(), candidates.end());
  switch (mode_) {
    case TeMode::first:
      return candidates.front();
    case TeMode::round_robin: {
      auto& n = counters_[key];
      return candidates[(seed_ + n++) % candidates.size()];
    }
    case TeMode::common_root: {
      auto best = candidates.begin();
      int best_len = common_prefix_len(best->first, best->second);
      for (auto it = candidates.begin() + 1; it != candidates.end(); ++it) {
        const int len = common_prefix_len(it->first, it->second);
        if (len > best_len) {
          best = it;
          best_len = len;
        }
      }
      return *best;
    }
  }
  return candidates.front();
}

std::set<LinkKey> route_links(const AddressTable& table, const BigMac& src, const BigMac& dst) {
  const auto src_path = table.path(src);
  const auto dst_path = table.path(dst);
  const int shared = common_prefix_len(src, dst);
  // Path element i is the node at tier i + 1; the turn happens at tier `shared`.
  const std::size_t from = shared == 0 ? 0 : static_cast<std::size_t>(shared - 1);
  std::set<LinkKey> out;
  for (std::size_t i = from; i + 1 < src_path.size(); ++i) out.emplace(src_path[i], src_path[i + 1]);
  for (std::size_t i = from; i + 1 < dst_path.size(); ++i) out.emplace(dst_path[i], dst_path[i + 1]);
  return out;
}

ControlServer::ControlServer(const AddressTable& table, ServerConfig cfg)
    : table_(&table), cfg_(cfg), policy_(cfg.mode, cfg.seed) {}

void ControlServer::learn(const MacAddr& mac, std::span<const Frame> copies) {
  db_.copy_counter += copies.size();
  auto& known = db_.learned[mac];
  for (const auto& c : copies) {
    auto src = BigMac::from_mac(c.src);
    if (!src) continue;
    known.insert(*src);
    if (src->tier() > 1 && !db_.edge_of.contains(mac)) {
      if (auto edge = table_->owner(src->prefix(src->tier() - 1))) db_.edge_of[mac] = *edge;
    }
  }
  for (auto& [ip, b] : db_.bindings) {
    if (b.genuine == mac) b.addresses = known;
  }
}

bool ControlServer::route_live(const BigMac& src, const BigMac& dst) const {
  if (dead_.empty()) return true;
  for (const auto& link : route_links(*table_, src, dst)) {
    if (dead_.contains(link)) return false;
  }
  return true;
}

std::optional<AddressPair> ControlServer::choose(const std::set<BigMac>& requester, const std::set<BigMac>& target) {
  if (requester.empty() || target.empty()) return std::nullopt;
  std::vector<AddressPair> candidates;
  for (const auto& r : requester) {
    for (const auto& t : target) {
      if (route_live(r, t)) candidates.emplace_back(r, t);
    }
  }
  if (candidates.empty()) return std::nullopt;
  return policy_.select_from(std::move(candidates), {*requester.begin(), *target.begin()});
}

Frame ControlServer::arp_reply(const MacAddr& requester, Ipv4Addr requester_ip, Ipv4Addr target_ip,
                               const AddressPair& pair, std::uint32_t seq) const {
  ArpRecord a{ArpRecord::Op::reply, pair.second.mac(), target_ip, requester, requester_ip, seq};
  return Frame{pair.first.mac(), pair.second.mac(), kEtherArp, a.encode()};
}

Frame ControlServer::handle_dhcp(std::span<const Frame> copies, std::uint64_t now) {
  if (copies.empty()) throw Error(Errc::empty_set, "handle_dhcp needs at least one copy");
  auto req = DhcpRecord::decode(copies.front().payload);
  if (!req) throw Error(Errc::parse, "malformed DHCP record");
  const MacAddr mac = req->client_mac;
  learn(mac, copies);

  std::optional<BigMac> reply_to;
  for (const auto& c : copies) {
    auto src = BigMac::from_mac(c.src);
    if (src && (!reply_to || *src < *reply_to)) reply_to = src;
  }
  if (!reply_to) throw Error(Errc::parse, "DHCP copies carry no locator");

  std::optional<Ipv4Addr> ip;
  if (auto lease = db_.leases.find(mac); lease != db_.leases.end() && lease->second.expiry > now) {
    ip = lease->second.ip;
  } else {
    std::set<Ipv4Addr> taken;
    for (const auto& [m, l] : db_.leases) {
      if (m != mac && l.expiry > now) taken.insert(l.ip);
    }
    for (const auto& [bound, b] : db_.bindings) {
      if (b.genuine != mac) taken.insert(bound);
    }
    for (std::uint64_t v = cfg_.pool.first_usable().value(); v <= cfg_.pool.last_usable().value(); ++v) {
      if (!taken.contains(Ipv4Addr(static_cast<std::uint32_t>(v)))) {
        ip = Ipv4Addr(static_cast<std::uint32_t>(v));
        break;
      }
    }
  }

  DhcpRecord reply{DhcpRecord::Op::nak, mac, req->seq, Ipv4Addr()};
  if (ip) {
    const std::uint64_t expiry =
        cfg_.lease_ticks == std::numeric_limits<std::uint64_t>::max() ? cfg_.lease_ticks : now + cfg_.lease_ticks;
    db_.leases[mac] = Lease{*ip, expiry};
    db_.bindings[*ip] = Binding{mac, db_.learned[mac]};
    reply.op = DhcpRecord::Op::ack;
    reply.yiaddr = *ip;
  } else {
    ++db_.pool_exhausted;
  }
  return Frame{reply_to->mac(), kServerMac, kEtherIpv4, reply.encode()};
}

std::optional<Frame> ControlServer::handle_arp(std::span<const Frame> copies) {
  if (copies.empty()) throw Error(Errc::empty_set, "handle_arp needs at least one copy");
  auto req = ArpRecord::decode(copies.front().payload);
  if (!req || req->op != ArpRecord::Op::request) throw Error(Errc::parse, "malformed ARP request");
  const MacAddr mac = req->sender_mac;
  learn(mac, copies);
  if (!req->sender_ip.is_unspecified()) {
    auto& b = db_.bindings[req->sender_ip];
    b.genuine = mac;
    b.addresses = db_.learned[mac];
  }

  auto target = db_.bindings.find(req->target_ip);
  if (target == db_.bindings.end()) {
    ++db_.unknown_targets;
    return std::nullopt;
  }
  auto pair = choose(db_.learned[mac], target->second.addresses);
  if (!pair) {
    ++db_.unknown_targets;
    return std::nullopt;
  }
  db_.associations.insert_or_assign({mac, req->target_ip}, Association{req->sender_ip, pair->first, pair->second});
  return arp_reply(mac, req->sender_ip, req->target_ip, *pair, req->seq);
}

FailoverResult ControlServer::failover_announce(const LinkKey& failed) {
  dead_.insert(failed);
  FailoverResult out;
  for (auto& [key, assoc] : db_.associations) {
    if (route_live(assoc.requester_src, assoc.target_addr)) continue;
    const auto& [requester, target_ip] = key;
    auto target = db_.bindings.find(target_ip);
    std::optional<AddressPair> pair;
    if (target != db_.bindings.end()) pair = choose(db_.learned[requester], target->second.addresses);
    if (!pair) {
      out.unreachable.emplace_back(requester, target_ip);
      continue;
    }
    assoc.requester_src = pair->first;
    assoc.target_addr = pair->second;
    out.announcements.push_back(arp_reply(requester, assoc.requester_ip, target_ip, *pair, 0));
  }
  return out;
}

void ControlServer::link_restored(const LinkKey& link) { dead_.erase(link); }

}  // namespace bigmac
