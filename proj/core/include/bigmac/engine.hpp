#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "bigmac/control.hpp"
#include "bigmac/dataplane.hpp"
#include "bigmac/host.hpp"
#include "bigmac/topology.hpp"

namespace bigmac {

struct EngineConfig {
  Strategy strategy = Strategy::alpha;
  TeMode policy = TeMode::first;
  std::uint64_t seed = 0;
  std::uint64_t tick_limit = 1'000'000;
  Ipv4Cidr pool{Ipv4Addr(0x0a000000), 24};
  HostConfig host;
  bool record_log = true;
};

struct DropRecord {
  std::uint64_t tick;
  std::string node;
  DropReason reason;
};

struct PingRecord {
  std::uint32_t id = 0;
  std::string from;
  std::string to;
  std::uint64_t sent = 0;
  std::optional<std::uint64_t> answered;
  int replies = 0;
  bool unreachable = false;
  std::vector<std::string> request_path;  // switches, in traversal order
  std::vector<std::string> reply_path;
};

struct Metrics {
  std::uint64_t events = 0;
  std::uint64_t final_tick = 0;
  std::uint64_t host_deliveries = 0;
  std::uint64_t host_rejections = 0;
  std::uint64_t host_unreachable = 0;
  std::map<DropReason, std::uint64_t> drops;
  std::vector<DropRecord> drop_log;
  std::uint64_t copies_total = 0;
  std::uint64_t copies_arp = 0;
  std::uint64_t copies_dhcp = 0;
  std::uint64_t copies_last = 0;
  std::map<std::string, std::uint64_t> copies_by_host;
  std::vector<PingRecord> pings;
  /// Bytes of forwarding-relevant state per switch, sampled when traffic
  /// starts and again when each run drains.
  std::map<std::string, std::vector<std::size_t>> state_samples;
  std::optional<std::uint64_t> fail_tick;
  std::optional<std::uint64_t> convergence;
  bool tick_limit_exceeded = false;

  std::uint64_t total_drops() const;
  /// Drops other than dead links and unresolvable ARP targets, plus any
  /// frame a host had to reject.
  std::uint64_t unexpected_drops() const;
  /// Dotted metric names used by scenario assertions and reports.
  std::map<std::string, double> flatten() const;
};

/// Deterministic discrete-event simulation of one fabric. Events run in
/// (tick, insertion order); every link hop costs one tick.
class Simulation {
 public:
  /// Normalizes `t`; throws Error(invalid_topology) if it does not validate.
  Simulation(const Topology& t, EngineConfig cfg = {});

  // Commands. `delay` is relative to now; nothing runs until run().
  void dhcp(const std::string& host, std::uint64_t delay = 0);
  void arp(const std::string& host, Ipv4Addr target, std::uint64_t delay = 0);
  void ping(const std::string& from, const std::string& to, int count = 1, std::uint64_t every = 1,
            std::uint64_t delay = 0);
  /// Throws Error(no_such_link). Failing a dead link is a no-op.
  void fail_link(const std::string& a, const std::string& b, std::uint64_t delay = 0);
  void restore_link(const std::string& a, const std::string& b, std::uint64_t delay = 0);
  /// Throws Error(scenario) when the address encoding would change after
  /// traffic has started.
  void set_strategy(Strategy s);
  void set_policy(TeMode m);
  /// Only before any DHCP traffic.
  void set_pool(const Ipv4Cidr& pool);

  /// Processes events until the queue drains. False if the tick limit hit.
  bool run();

  std::uint64_t now() const { return now_; }
  std::uint64_t batch_window() const { return 2 * static_cast<std::uint64_t>(topo_.depth()); }
  const Topology& topology() const { return topo_; }
  const AddressTable& table() const { return *table_; }
  const std::map<std::string, SwitchState>& states() const { return states_; }
  const ControlServer& server() const { return *server_; }
  const HostStack& host(const std::string& id) const;
  const Metrics& metrics() const { return metrics_; }
  const std::vector<std::string>& log() const { return log_; }
  std::string log_text() const;
  bool link_alive(const LinkKey& k) const { return !dead_.contains(k); }

 private:
  struct Endpoint {
    std::string node;
    bool to_host = false;
    PortRef ingress;
    std::optional<LinkKey> link;  // failable links only
  };
  struct Delivery {
    std::string node;
    bool to_host;
    PortRef ingress;
    Frame frame;
    std::optional<LinkKey> link;
    std::vector<std::string> path;
    bool announcement = false;
  };
  struct ServerCopy {
    Frame frame;
  };
  struct HostTimer {
    std::string host;
    std::uint64_t token;
  };
  struct ServerBatch {
    std::uint64_t key;
  };
  struct Action {
    std::function<void()> fn;
  };
  using Payload = std::variant<Delivery, ServerCopy, HostTimer, ServerBatch, Action>;
  struct Event {
    std::uint64_t tick;
    std::uint64_t seq;
    Payload payload;
    bool operator>(const Event& o) const { return tick != o.tick ? tick > o.tick : seq > o.seq; }
  };
  struct Batch {
    std::vector<Frame> copies;
    std::string host;
  };

  void rebuild(Strategy s);
  void schedule(std::uint64_t delay, Payload p);
  void log_line(std::string_view kind, std::string_view node, std::string_view ingress, std::string_view egress,
                const MacAddr* dst, const MacAddr* src, std::string_view note);
  void drop(std::string_view node, DropReason r, std::string_view note = {});
  void sample_state();
  void mark_traffic();

  void on_delivery(Delivery& d);
  void on_switch(Delivery& d);
  void on_host(Delivery& d);
  void on_server_copy(ServerCopy& c);
  void on_batch(const ServerBatch& b);
  void inject_from_server(Frame f, bool announcement);
  void host_output(const std::string& host, HostOutput out);
  void send_from_host(const std::string& host, Frame f);
  void do_ping(const std::string& from, const std::string& to);
  const std::string& host_of_mac(const MacAddr& mac) const;
  LinkKey checked_link(const std::string& a, const std::string& b) const;

  Topology topo_;
  EngineConfig cfg_;
  std::unique_ptr<AddressTable> table_;
  std::map<std::string, SwitchState> states_;
  std::unique_ptr<ControlServer> server_;
  std::map<std::string, HostStack> hosts_;
  std::map<MacAddr, std::string> host_by_mac_;
  std::map<std::pair<std::string, PortRef>, Endpoint> wiring_;
  std::map<std::uint8_t, std::string> top_by_root_;
  std::set<LinkKey> dead_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t now_ = 0;
  std::uint64_t seq_ = 0;
  bool traffic_started_ = false;
  bool dhcp_started_ = false;

  std::map<std::tuple<MacAddr, std::uint32_t, std::uint16_t>, std::uint64_t> batch_keys_;
  std::map<std::uint64_t, Batch> batches_;
  std::uint64_t next_batch_ = 1;
  std::uint32_t next_ping_ = 1;
  std::map<std::uint32_t, std::size_t> ping_index_;

  Metrics metrics_;
  std::vector<std::string> log_;
};

}  // namespace bigmac
