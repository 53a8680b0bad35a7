#include "bigmac/host.hpp"

namespace bigmac {

void HostOutput::append(HostOutput&& other) {
  for (auto& f : other.frames) frames.push_back(std::move(f));
  timers.insert(timers.end(), other.timers.begin(), other.timers.end());
  events.insert(events.end(), other.events.begin(), other.events.end());
}

HostStack::HostStack(MacAddr genuine_mac, std::optional<Ipv4Addr> ip, HostConfig cfg)
    : mac_(genuine_mac), ip_(ip), cfg_(cfg) {
  if (ip_) state_ = DhcpState::configured;
}

std::uint64_t HostStack::arm(HostOutput& out, std::uint64_t delay, Timer t) {
  const std::uint64_t token = next_token_++;
  timers_.emplace(token, t);
  out.timers.push_back({delay, token});
  return token;
}

Frame HostStack::dhcp_frame() {
  DhcpRecord d{DhcpRecord::Op::request, mac_, ++seq_, Ipv4Addr()};
  return Frame{MacAddr::broadcast(), mac_, kEtherIpv4, d.encode()};
}

Frame HostStack::arp_frame(Ipv4Addr target) {
  ArpRecord a{ArpRecord::Op::request, mac_, ip_.value_or(Ipv4Addr()), MacAddr(), target, ++seq_};
  return Frame{MacAddr::broadcast(), mac_, kEtherArp, a.encode()};
}

Frame HostStack::echo_frame(const MacAddr& dst, EchoRecord::Op op, Ipv4Addr from, Ipv4Addr to,
                            std::uint32_t id) const {
  EchoRecord e{op, from, to, id};
  return Frame{dst, mac_, kEtherEcho, e.encode()};
}

HostOutput HostStack::dhcp_acquire() {
  HostOutput out;
  if (state_ != DhcpState::unconfigured) return out;
  state_ = DhcpState::requesting;
  dhcp_attempts_ = 1;
  out.frames.push_back(dhcp_frame());
  dhcp_token_ = arm(out, cfg_.dhcp_timeout, Timer{true, Ipv4Addr()});
  return out;
}

HostOutput HostStack::arp_resolve(Ipv4Addr ip) {
  HostOutput out;
  if (!ip_) {
    out.events.push_back({HostEvent::Kind::host_unreachable, ip, 0});
    return out;
  }
  if (arp_cache_.contains(ip) || pending_arp_.contains(ip)) return out;
  auto& p = pending_arp_[ip];
  p.attempts = 1;
  out.frames.push_back(arp_frame(ip));
  p.token = arm(out, cfg_.arp_timeout, Timer{false, ip});
  return out;
}

HostOutput HostStack::send_ping(Ipv4Addr peer, std::uint32_t ping_id) {
  HostOutput out;
  if (!ip_) {
    out.events.push_back({HostEvent::Kind::host_unreachable, peer, ping_id});
    return out;
  }
  if (peer == *ip_) {
    out.events.push_back({HostEvent::Kind::echo_reply, peer, ping_id});
    return out;
  }
  if (auto hit = arp_cache_.find(peer); hit != arp_cache_.end()) {
    out.frames.push_back(echo_frame(hit->second, EchoRecord::Op::request, *ip_, peer, ping_id));
    return out;
  }
  out.append(arp_resolve(peer));
  pending_arp_[peer].queued_pings.push_back(ping_id);
  return out;
}

HostOutput HostStack::receive(const Frame& f) {
  HostOutput out;
  if (f.dst != mac_ && !f.dst.is_broadcast()) {
    out.events.push_back({HostEvent::Kind::rejected_frame, Ipv4Addr(), 0});
    return out;
  }
  switch (f.ethertype) {
    case kEtherArp: {
      auto arp = ArpRecord::decode(f.payload);
      if (!arp || arp->op != ArpRecord::Op::reply) break;
      if (arp->target_mac != mac_ && !arp->target_mac.is_broadcast()) break;
      // Replies, solicited or not, overwrite the cache.
      const bool known = arp_cache_.contains(arp->sender_ip);
      arp_cache_[arp->sender_ip] = arp->sender_mac;
      auto pending = pending_arp_.find(arp->sender_ip);
      if (pending != pending_arp_.end()) {
        out.events.push_back({HostEvent::Kind::arp_resolved, arp->sender_ip, 0});
        for (auto id : pending->second.queued_pings) {
          out.frames.push_back(echo_frame(arp->sender_mac, EchoRecord::Op::request, *ip_, arp->sender_ip, id));
        }
        timers_.erase(pending->second.token);
        pending_arp_.erase(pending);
      } else if (known) {
        out.events.push_back({HostEvent::Kind::arp_updated, arp->sender_ip, 0});
      }
      break;
    }
    case kEtherIpv4: {
      auto d = DhcpRecord::decode(f.payload);
      if (!d || d->client_mac != mac_ || state_ != DhcpState::requesting) break;
      timers_.erase(dhcp_token_);
      if (d->op == DhcpRecord::Op::ack) {
        ip_ = d->yiaddr;
        state_ = DhcpState::configured;
        out.events.push_back({HostEvent::Kind::configured, d->yiaddr, 0});
      } else if (d->op == DhcpRecord::Op::nak) {
        state_ = DhcpState::unconfigured;
        out.events.push_back({HostEvent::Kind::dhcp_failed, Ipv4Addr(), 0});
      }
      break;
    }
    case kEtherEcho: {
      auto e = EchoRecord::decode(f.payload);
      if (!e || !ip_ || e->dst_ip != *ip_) break;
      if (e->op == EchoRecord::Op::request) {
        out.frames.push_back(echo_frame(f.src, EchoRecord::Op::reply, *ip_, e->src_ip, e->id));
        out.events.push_back({HostEvent::Kind::echo_served, e->src_ip, e->id});
      } else {
        out.events.push_back({HostEvent::Kind::echo_reply, e->src_ip, e->id});
      }
      break;
    }
    default:
      break;
  }
  return out;
}

HostOutput HostStack::on_timer(std::uint64_t token) {
  HostOutput out;
  auto it = timers_.find(token);
  if (it == timers_.end()) return out;
  const Timer t = it->second;
  timers_.erase(it);

  if (t.dhcp) {
    if (state_ != DhcpState::requesting || token != dhcp_token_) return out;
    if (dhcp_attempts_ <= cfg_.dhcp_retries) {
      ++dhcp_attempts_;
      out.frames.push_back(dhcp_frame());
      dhcp_token_ = arm(out, cfg_.dhcp_timeout, Timer{true, Ipv4Addr()});
    } else {
      state_ = DhcpState::unconfigured;
      out.events.push_back({HostEvent::Kind::dhcp_failed, Ipv4Addr(), 0});
    }
    return out;
  }

  auto pending = pending_arp_.find(t.ip);
  if (pending == pending_arp_.end() || pending->second.token != token) return out;
  if (pending->second.attempts <= cfg_.arp_retries) {
    ++pending->second.attempts;
    out.frames.push_back(arp_frame(t.ip));
    pending->second.token = arm(out, cfg_.arp_timeout, Timer{false, t.ip});
  } else {
    out.events.push_back({HostEvent::Kind::host_unreachable, t.ip, 0});
    for (auto id : pending->second.queued_pings) out.events.push_back({HostEvent::Kind::host_unreachable, t.ip, id});
    pending_arp_.erase(pending);
  }
  return out;
}

}  // namespace bigmac
