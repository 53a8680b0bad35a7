#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bigmac/frame.hpp"
#include "bigmac/mac.hpp"

namespace bigmac {

// An ordinary Ethernet+IP end host. It sees only standard frame fields: its
// own genuine MAC, broadcast, and whatever MACs ARP hands it for peers.

struct HostConfig {
  std::uint64_t dhcp_timeout = 32;
  int dhcp_retries = 3;
  std::uint64_t arp_timeout = 32;
  int arp_retries = 3;
};

enum class DhcpState { unconfigured, requesting, configured };

struct HostEvent {
  enum class Kind {
    configured,
    dhcp_failed,
    arp_resolved,
    arp_updated,
    host_unreachable,
    echo_reply,
    echo_served,
    rejected_frame,
  };
  Kind kind;
  Ipv4Addr ip;
  std::uint32_t ping_id = 0;
};

struct TimerRequest {
  std::uint64_t delay;
  std::uint64_t token;
};

struct HostOutput {
  std::vector<Frame> frames;
  std::vector<TimerRequest> timers;
  std::vector<HostEvent> events;

  void append(HostOutput&& other);
};

class HostStack {
 public:
  HostStack(MacAddr genuine_mac, std::optional<Ipv4Addr> ip, HostConfig cfg = {});

  /// Broadcasts a DHCP request unless already configured or in progress.
  HostOutput dhcp_acquire();
  /// Broadcasts who-has on a cache miss; nothing on a hit.
  HostOutput arp_resolve(Ipv4Addr ip);
  /// Sends an echo request, resolving the peer first if needed.
  HostOutput send_ping(Ipv4Addr peer, std::uint32_t ping_id);
  HostOutput receive(const Frame& f);
  HostOutput on_timer(std::uint64_t token);

  const MacAddr& genuine_mac() const { return mac_; }
  std::optional<Ipv4Addr> ip() const { return ip_; }
  DhcpState dhcp_state() const { return state_; }
  const std::map<Ipv4Addr, MacAddr>& arp_cache() const { return arp_cache_; }
  std::uint32_t seq() const { return seq_; }

 private:
  struct PendingArp {
    int attempts = 0;
    std::uint64_t token = 0;
    std::vector<std::uint32_t> queued_pings;
  };
  struct Timer {
    bool dhcp;
    Ipv4Addr ip;
  };

  Frame dhcp_frame();
  Frame arp_frame(Ipv4Addr target);
  Frame echo_frame(const MacAddr& dst, EchoRecord::Op op, Ipv4Addr from, Ipv4Addr to, std::uint32_t id) const;
  std::uint64_t arm(HostOutput& out, std::uint64_t delay, Timer t);

  MacAddr mac_;
  std::optional<Ipv4Addr> ip_;
  HostConfig cfg_;
  DhcpState state_ = DhcpState::unconfigured;
  int dhcp_attempts_ = 0;
  std::uint64_t dhcp_token_ = 0;
  std::map<Ipv4Addr, MacAddr> arp_cache_;
  std::map<Ipv4Addr, PendingArp> pending_arp_;
  std::map<std::uint64_t, Timer> timers_;
  std::uint64_t next_token_ = 1;
  std::uint32_t seq_ = 0;
};

}  // namespace bigmac
