#include "bigmac/engine.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "bigmac/error.hpp"

namespace bigmac {

namespace {

constexpr DropReason kAllDropReasons[] = {
    DropReason::NoSuchPort,     DropReason::NoOwningUplink, DropReason::EmptyUplinks,
    DropReason::NotBigMac,      DropReason::PrefixMismatch, DropReason::UnknownHostMac,
    DropReason::NoHostAddress,  DropReason::UnknownRoot,    DropReason::UnexpectedBroadcast,
    DropReason::LinkDown,       DropReason::UnknownTarget,  DropReason::TickLimit,
};

bool expected_drop(DropReason r) { return r == DropReason::LinkDown || r == DropReason::UnknownTarget; }

std::string violation_list(const std::vector<Violation>& v) {
  std::string out;
  for (const auto& x : v) {
    if (!out.empty()) out += "; ";
    out += fmt::format("{}: {}", to_string(x.kind), x.detail);
  }
  return out;
}

}  // namespace

std::uint64_t Metrics::total_drops() const {
  std::uint64_t n = 0;
  for (const auto& [r, c] : drops) n += c;
  return n;
}

std::uint64_t Metrics::unexpected_drops() const {
  std::uint64_t n = host_rejections;
  for (const auto& [r, c] : drops) {
    if (!expected_drop(r)) n += c;
  }
  return n;
}

std::map<std::string, double> Metrics::flatten() const {
  std::map<std::string, double> m;
  auto put = [&m](const std::string& k, double v) { m[k] = v; };
  put("events", static_cast<double>(events));
  put("ticks", static_cast<double>(final_tick));
  put("deliveries", static_cast<double>(host_deliveries));
  put("rejected", static_cast<double>(host_rejections));
  put("unreachable", static_cast<double>(host_unreachable));
  put("drops", static_cast<double>(total_drops()));
  put("drops.unexpected", static_cast<double>(unexpected_drops()));
  for (auto r : kAllDropReasons) {
    auto it = drops.find(r);
    put(fmt::format("drops.{}", to_string(r)), it == drops.end() ? 0.0 : static_cast<double>(it->second));
  }
  put("copies", static_cast<double>(copies_last));
  put("copies.total", static_cast<double>(copies_total));
  put("copies.arp", static_cast<double>(copies_arp));
  put("copies.dhcp", static_cast<double>(copies_dhcp));
  for (const auto& [h, c] : copies_by_host) put("copies.host." + h, static_cast<double>(c));

  std::uint64_t ok = 0, dup = 0, unreach = 0, hop_sum = 0, hop_n = 0, hop_max = 0;
  for (const auto& p : pings) {
    if (p.replies > 0) ++ok;
    if (p.replies > 1) ++dup;
    if (p.unreachable) ++unreach;
    if (!p.request_path.empty()) {
      hop_sum += p.request_path.size();
      hop_max = std::max<std::uint64_t>(hop_max, p.request_path.size());
      ++hop_n;
    }
  }
  put("pings.sent", static_cast<double>(pings.size()));
  put("pings.ok", static_cast<double>(ok));
  put("pings.failed", static_cast<double>(pings.size() - ok));
  put("pings.duplicate", static_cast<double>(dup));
  put("pings.unreachable", static_cast<double>(unreach));
  put("hops.mean", hop_n == 0 ? 0.0 : static_cast<double>(hop_sum) / static_cast<double>(hop_n));
  put("hops.max", static_cast<double>(hop_max));
  if (!pings.empty()) put("hops.last", static_cast<double>(pings.back().request_path.size()));
  if (convergence) put("convergence", static_cast<double>(*convergence));
  put("tick_limit", tick_limit_exceeded ? 1.0 : 0.0);
  if (!state_samples.empty()) {
    std::size_t max_bytes = 0;
    for (const auto& [sw, samples] : state_samples) {
      put("state." + sw, static_cast<double>(samples.back()));
      max_bytes = std::max(max_bytes, samples.back());
    }
    put("state.max", static_cast<double>(max_bytes));
  }
  return m;
}

Simulation::Simulation(const Topology& t, EngineConfig cfg) : topo_(normalize(t)), cfg_(cfg) {
  rebuild(cfg_.strategy);

  const Fabric fabric(topo_);
  const auto roots = root_bytes(topo_);
  for (const auto& [id, r] : roots) top_by_root_[r] = id;
  for (const auto& [id, sw] : fabric.switches()) {
    for (const auto& u : sw.uplinks) {
      wiring_[{id, PortRef::up(u.index)}] = Endpoint{u.parent, false, PortRef::down(u.parent_port), LinkKey(id, u.parent)};
    }
    for (const auto& d : sw.downlinks) {
      wiring_[{id, PortRef::down(d.port)}] =
          Endpoint{d.child, d.to_host, d.to_host ? PortRef::down(0) : PortRef::up(d.child_uplink), LinkKey(id, d.child)};
    }
    if (sw.tier == 1 && sw.root) {
      for (const auto& [r, peer] : top_by_root_) {
        if (peer != id) wiring_[{id, PortRef::mesh(r)}] = Endpoint{peer, false, PortRef::mesh(*sw.root), std::nullopt};
      }
    }
  }
  for (const auto& [id, h] : topo_.hosts) {
    hosts_.emplace(id, HostStack(h.mac, h.ip, cfg_.host));
    host_by_mac_[h.mac] = id;
    wiring_[{id, PortRef::up(0)}] = Endpoint{h.edge, false, PortRef::down(h.port), LinkKey(id, h.edge)};
  }
}

void Simulation::rebuild(Strategy s) {
  const auto enc = encoding_for(s);
  if (auto v = validate(topo_, enc); !v.empty()) {
    throw Error(Errc::invalid_topology, violation_list(v));
  }
  auto table = std::make_unique<AddressTable>(assign_addresses(topo_, enc));
  states_ = build_switch_states(topo_, *table, s);
  ServerConfig sc;
  sc.pool = cfg_.pool;
  sc.mode = cfg_.policy;
  sc.seed = cfg_.seed;
  server_ = std::make_unique<ControlServer>(*table, sc);
  table_ = std::move(table);
  cfg_.strategy = s;
}

const HostStack& Simulation::host(const std::string& id) const {
  auto it = hosts_.find(id);
  if (it == hosts_.end()) throw Error(Errc::no_such_node, "no host " + id);
  return it->second;
}

std::string Simulation::log_text() const {
  std::string out;
  for (const auto& line : log_) {
    out += line;
    out += '\n';
  }
  return out;
}

void Simulation::schedule(std::uint64_t delay, Payload p) {
  queue_.push(Event{now_ + delay, seq_++, std::move(p)});
}

void Simulation::log_line(std::string_view kind, std::string_view node, std::string_view ingress,
                          std::string_view egress, const MacAddr* dst, const MacAddr* src, std::string_view note) {
  if (!cfg_.record_log) return;
  auto dash = [](std::string_view s) { return s.empty() ? std::string_view("-") : s; };
  log_.push_back(fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}", now_, kind, dash(node), dash(ingress), dash(egress),
                             dst ? dst->to_string() : "-", src ? src->to_string() : "-", dash(note)));
}

void Simulation::drop(std::string_view node, DropReason r, std::string_view note) {
  ++metrics_.drops[r];
  metrics_.drop_log.push_back(DropRecord{now_, std::string(node), r});
  log_line("drop", node, {}, {}, nullptr, nullptr,
           note.empty() ? std::string(to_string(r)) : fmt::format("{} {}", to_string(r), note));
}

void Simulation::sample_state() {
  for (const auto& [id, s] : states_) metrics_.state_samples[id].push_back(serialize_forwarding_state(s).size());
}

void Simulation::mark_traffic() {
  if (traffic_started_) return;
  traffic_started_ = true;
  sample_state();
}

LinkKey Simulation::checked_link(const std::string& a, const std::string& b) const {
  LinkKey key(a, b);
  if (!topo_.has_link(key)) throw Error(Errc::no_such_link, fmt::format("no link {}", key.to_string()));
  return key;
}

const std::string& Simulation::host_of_mac(const MacAddr& mac) const {
  static const std::string unknown = "?";
  auto it = host_by_mac_.find(mac);
  return it == host_by_mac_.end() ? unknown : it->second;
}

void Simulation::dhcp(const std::string& host, std::uint64_t delay) {
  this->host(host);
  dhcp_started_ = true;
  schedule(delay, Action{[this, host] {
             log_line("cmd", host, {}, {}, nullptr, nullptr, "dhcp");
             host_output(host, hosts_.at(host).dhcp_acquire());
           }});
}

void Simulation::arp(const std::string& host, Ipv4Addr target, std::uint64_t delay) {
  this->host(host);
  schedule(delay, Action{[this, host, target] {
             log_line("cmd", host, {}, {}, nullptr, nullptr, "arp " + target.to_string());
             host_output(host, hosts_.at(host).arp_resolve(target));
           }});
}

void Simulation::ping(const std::string& from, const std::string& to, int count, std::uint64_t every,
                      std::uint64_t delay) {
  this->host(from);
  this->host(to);
  for (int i = 0; i < count; ++i) {
    schedule(delay + static_cast<std::uint64_t>(i) * every, Action{[this, from, to] { do_ping(from, to); }});
  }
}

void Simulation::do_ping(const std::string& from, const std::string& to) {
  const std::uint32_t id = next_ping_++;
  ping_index_[id] = metrics_.pings.size();
  PingRecord rec;
  rec.id = id;
  rec.from = from;
  rec.to = to;
  rec.sent = now_;
  metrics_.pings.push_back(rec);
  log_line("cmd", from, {}, {}, nullptr, nullptr, fmt::format("ping {} id={}", to, id));

  auto peer = hosts_.at(to).ip();
  if (!peer) {
    metrics_.pings.back().unreachable = true;
    ++metrics_.host_unreachable;
    log_line("host-ev", from, {}, {}, nullptr, nullptr, fmt::format("unreachable {} (no ip)", to));
    return;
  }
  host_output(from, hosts_.at(from).send_ping(*peer, id));
}

void Simulation::fail_link(const std::string& a, const std::string& b, std::uint64_t delay) {
  const LinkKey key = checked_link(a, b);
  schedule(delay, Action{[this, key] {
             if (dead_.contains(key)) {
               log_line("link-down", key.to_string(), {}, {}, nullptr, nullptr, "already down");
               return;
             }
             dead_.insert(key);
             metrics_.fail_tick = now_;
             metrics_.convergence.reset();
             log_line("link-down", key.to_string(), {}, {}, nullptr, nullptr, {});
             auto result = server_->failover_announce(key);
             for (auto& f : result.announcements) inject_from_server(std::move(f), true);
             for (const auto& [mac, ip] : result.unreachable) {
               log_line("srv-unreach", "server", {}, {}, &mac, nullptr, ip.to_string());
             }
           }});
}

void Simulation::restore_link(const std::string& a, const std::string& b, std::uint64_t delay) {
  const LinkKey key = checked_link(a, b);
  schedule(delay, Action{[this, key] {
             if (dead_.erase(key) == 0) {
               log_line("link-up", key.to_string(), {}, {}, nullptr, nullptr, "already up");
               return;
             }
             server_->link_restored(key);
             log_line("link-up", key.to_string(), {}, {}, nullptr, nullptr, {});
           }});
}

void Simulation::set_strategy(Strategy s) {
  if (encoding_for(s) != encoding_for(cfg_.strategy)) {
    if (traffic_started_ || !queue_.empty()) {
      throw Error(Errc::scenario, "strategy change alters address encoding after traffic started");
    }
    rebuild(s);
    return;
  }
  auto next = build_switch_states(topo_, *table_, s);
  for (auto& [id, st] : next) st.edge = states_.at(id).edge;
  states_ = std::move(next);
  cfg_.strategy = s;
}

void Simulation::set_policy(TeMode m) {
  cfg_.policy = m;
  server_->policy().set_mode(m);
}

void Simulation::set_pool(const Ipv4Cidr& pool) {
  if (traffic_started_ || dhcp_started_) throw Error(Errc::scenario, "pool must be set before traffic");
  cfg_.pool = pool;
  rebuild(cfg_.strategy);
}

bool Simulation::run() {
  while (!queue_.empty()) {
    if (queue_.top().tick > cfg_.tick_limit) {
      metrics_.tick_limit_exceeded = true;
      while (!queue_.empty()) {
        const Event& ev = queue_.top();
        if (const auto* d = std::get_if<Delivery>(&ev.payload)) {
          drop(d->node, DropReason::TickLimit);
        } else if (std::holds_alternative<ServerCopy>(ev.payload)) {
          drop("server", DropReason::TickLimit);
        }
        queue_.pop();
      }
      break;
    }
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.tick;
    ++metrics_.events;
    std::visit(
        [this](auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Delivery>) {
            on_delivery(p);
          } else if constexpr (std::is_same_v<T, ServerCopy>) {
            on_server_copy(p);
          } else if constexpr (std::is_same_v<T, HostTimer>) {
            host_output(p.host, hosts_.at(p.host).on_timer(p.token));
          } else if constexpr (std::is_same_v<T, ServerBatch>) {
            on_batch(p);
          } else {
            p.fn();
          }
        },
        ev.payload);
  }
  metrics_.final_tick = now_;
  if (traffic_started_) sample_state();
  return !metrics_.tick_limit_exceeded;
}

void Simulation::on_delivery(Delivery& d) {
  if (d.link && dead_.contains(*d.link)) {
    drop(d.node, DropReason::LinkDown, d.link->to_string());
    return;
  }
  if (d.to_host) {
    on_host(d);
  } else {
    on_switch(d);
  }
}

void Simulation::on_switch(Delivery& d) {
  auto& s = states_.at(d.node);
  d.path.push_back(d.node);
  auto decision = switch_handle(s, d.frame, d.ingress);
  const std::string ingress = d.ingress.to_string();
  if (decision.drop) {
    log_line("rx", d.node, ingress, {}, &d.frame.dst, &d.frame.src, describe(d.frame));
    drop(d.node, *decision.drop);
    return;
  }
  for (auto& a : decision.actions) {
    log_line("fwd", d.node, ingress, a.egress.to_string(), &a.frame.dst, &a.frame.src, describe(a.frame));
    if (a.egress.kind == PortKind::control) {
      schedule(1, ServerCopy{std::move(a.frame)});
      continue;
    }
    auto ep = wiring_.find({d.node, a.egress});
    if (ep == wiring_.end()) {
      drop(d.node, DropReason::NoSuchPort, a.egress.to_string());
      continue;
    }
    schedule(1, Delivery{ep->second.node, ep->second.to_host, ep->second.ingress, std::move(a.frame), ep->second.link,
                         d.path, d.announcement});
  }
}

void Simulation::on_host(Delivery& d) {
  ++metrics_.host_deliveries;
  log_line("host-rx", d.node, {}, {}, &d.frame.dst, &d.frame.src, describe(d.frame));
  if (d.frame.ethertype == kEtherEcho) {
    if (auto e = EchoRecord::decode(d.frame.payload)) {
      if (auto it = ping_index_.find(e->id); it != ping_index_.end()) {
        auto& rec = metrics_.pings[it->second];
        if (e->op == EchoRecord::Op::request && rec.to == d.node && rec.request_path.empty()) {
          rec.request_path = d.path;
        } else if (e->op == EchoRecord::Op::reply && rec.from == d.node && rec.reply_path.empty()) {
          rec.reply_path = d.path;
        }
      }
    }
  }
  auto out = hosts_.at(d.node).receive(d.frame);
  if (d.announcement && metrics_.fail_tick) {
    const std::uint64_t c = now_ - *metrics_.fail_tick;
    metrics_.convergence = std::max(metrics_.convergence.value_or(0), c);
  }
  host_output(d.node, std::move(out));
}

void Simulation::host_output(const std::string& host, HostOutput out) {
  for (auto& f : out.frames) send_from_host(host, std::move(f));
  for (const auto& t : out.timers) schedule(t.delay, HostTimer{host, t.token});
  for (const auto& ev : out.events) {
    std::string note;
    switch (ev.kind) {
      case HostEvent::Kind::configured: note = "configured " + ev.ip.to_string(); break;
      case HostEvent::Kind::dhcp_failed: note = "dhcp-failed"; break;
      case HostEvent::Kind::arp_resolved: note = "arp-resolved " + ev.ip.to_string(); break;
      case HostEvent::Kind::arp_updated: note = "arp-updated " + ev.ip.to_string(); break;
      case HostEvent::Kind::host_unreachable:
        note = "unreachable " + ev.ip.to_string();
        ++metrics_.host_unreachable;
        if (auto it = ping_index_.find(ev.ping_id); ev.ping_id != 0 && it != ping_index_.end()) {
          metrics_.pings[it->second].unreachable = true;
        }
        break;
      case HostEvent::Kind::echo_reply:
        note = fmt::format("echo-reply {} id={}", ev.ip.to_string(), ev.ping_id);
        if (auto it = ping_index_.find(ev.ping_id); it != ping_index_.end()) {
          auto& rec = metrics_.pings[it->second];
          if (!rec.answered) rec.answered = now_;
          ++rec.replies;
        }
        break;
      case HostEvent::Kind::echo_served: note = fmt::format("echo-served {} id={}", ev.ip.to_string(), ev.ping_id); break;
      case HostEvent::Kind::rejected_frame:
        note = "rejected";
        ++metrics_.host_rejections;
        break;
    }
    log_line("host-ev", host, {}, {}, nullptr, nullptr, note);
  }
}

void Simulation::send_from_host(const std::string& host, Frame f) {
  mark_traffic();
  log_line("host-tx", host, {}, {}, &f.dst, &f.src, describe(f));
  const auto& ep = wiring_.at({host, PortRef::up(0)});
  schedule(1, Delivery{ep.node, false, ep.ingress, std::move(f), ep.link, {}, false});
}

void Simulation::on_server_copy(ServerCopy& c) {
  MacAddr genuine;
  std::uint32_t seq = 0;
  if (c.frame.ethertype == kEtherArp) {
    auto a = ArpRecord::decode(c.frame.payload);
    if (!a || a->op != ArpRecord::Op::request) {
      drop("server", DropReason::UnexpectedBroadcast, describe(c.frame));
      return;
    }
    genuine = a->sender_mac;
    seq = a->seq;
  } else if (c.frame.ethertype == kEtherIpv4) {
    auto d = DhcpRecord::decode(c.frame.payload);
    if (!d || d->op != DhcpRecord::Op::request) {
      drop("server", DropReason::UnexpectedBroadcast, describe(c.frame));
      return;
    }
    genuine = d->client_mac;
    seq = d->seq;
  } else {
    drop("server", DropReason::UnexpectedBroadcast, describe(c.frame));
    return;
  }
  log_line("srv-rx", "server", "ctl", {}, &c.frame.dst, &c.frame.src, describe(c.frame));

  const auto key = std::make_tuple(genuine, seq, c.frame.ethertype);
  auto [it, fresh] = batch_keys_.try_emplace(key, next_batch_);
  if (fresh) {
    batches_[next_batch_].host = host_of_mac(genuine);
    schedule(batch_window(), ServerBatch{next_batch_});
    ++next_batch_;
  }
  batches_[it->second].copies.push_back(std::move(c.frame));
}

void Simulation::on_batch(const ServerBatch& b) {
  auto node = batches_.extract(b.key);
  Batch& batch = node.mapped();
  for (auto it = batch_keys_.begin(); it != batch_keys_.end(); ++it) {
    if (it->second == b.key) {
      batch_keys_.erase(it);
      break;
    }
  }
  const std::uint64_t n = batch.copies.size();
  const Frame& first = batch.copies.front();
  metrics_.copies_total += n;
  metrics_.copies_last = n;
  metrics_.copies_by_host[batch.host] += n;
  if (first.ethertype == kEtherArp) {
    metrics_.copies_arp += n;
    log_line("srv-batch", "server", {}, {}, nullptr, nullptr, fmt::format("{} arp copies={}", batch.host, n));
    auto reply = server_->handle_arp(batch.copies);
    if (!reply) {
      drop("server", DropReason::UnknownTarget, batch.host);
      return;
    }
    inject_from_server(std::move(*reply), false);
  } else {
    metrics_.copies_dhcp += n;
    log_line("srv-batch", "server", {}, {}, nullptr, nullptr, fmt::format("{} dhcp copies={}", batch.host, n));
    inject_from_server(server_->handle_dhcp(batch.copies, now_), false);
  }
}

void Simulation::inject_from_server(Frame f, bool announcement) {
  auto dst = BigMac::from_mac(f.dst);
  auto top = dst ? top_by_root_.find((*dst)[0]) : top_by_root_.end();
  if (top == top_by_root_.end()) {
    drop("server", DropReason::UnknownRoot, f.dst.to_string());
    return;
  }
  log_line("srv-tx", "server", {}, "ctl", &f.dst, &f.src, announcement ? describe(f) + " announce" : describe(f));
  schedule(1, Delivery{top->second, false, PortRef::control(), std::move(f), std::nullopt, {}, announcement});
}

}  // namespace bigmac
