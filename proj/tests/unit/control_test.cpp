#include <gtest/gtest.h>

#include "bigmac/control.hpp"
#include "bigmac/error.hpp"
#include "oracles.hpp"

using namespace bigmac;

namespace {

const MacAddr kH1 = MacAddr::parse("00:16:3e:00:00:01");
const MacAddr kH2 = MacAddr::parse("00:16:3e:00:00:02");

std::vector<Frame> copies(const AddressTable& table, const std::string& host, std::uint16_t type,
                          const std::vector<std::uint8_t>& payload) {
  std::vector<Frame> out;
  for (const auto& a : table.addresses(host)) out.push_back(Frame{MacAddr::broadcast(), a.mac(), type, payload});
  return out;
}

std::vector<std::uint8_t> dhcp_req(const MacAddr& m, std::uint32_t seq) {
  return DhcpRecord{DhcpRecord::Op::request, m, seq, {}}.encode();
}

std::vector<std::uint8_t> arp_req(const MacAddr& m, const char* sip, const char* tip, std::uint32_t seq = 1) {
  return ArpRecord{ArpRecord::Op::request, m, Ipv4Addr::parse(sip), {}, Ipv4Addr::parse(tip), seq}.encode();
}

struct T1Server {
  explicit T1Server(TeMode mode = TeMode::first, const char* pool = "10.0.0.0/24")
      : table(assign_addresses(oracle::t1())), server(table, ServerConfig{Ipv4Cidr::parse(pool), UINT64_MAX, mode, 0}) {}
  void configure_both() {
    server.handle_dhcp(copies(table, "H1", kEtherIpv4, dhcp_req(kH1, 1)));
    server.handle_dhcp(copies(table, "H2", kEtherIpv4, dhcp_req(kH2, 1)));
  }
  AddressTable table;
  ControlServer server;
};

BigMac bm(const char* s) { return BigMac::parse(s); }

}  // namespace

TEST(TePolicy, Modes) {
  const std::vector<BigMac> req{bm("01:01:01:00:00:00"), bm("02:01:01:00:00:00")};
  const std::vector<BigMac> tgt{bm("02:02:01:00:00:00"), bm("01:02:01:00:00:00")};

  TePolicy first(TeMode::first);
  EXPECT_EQ(first.select_pair(req, tgt), AddressPair(req[0], tgt[1]));

  TePolicy common(TeMode::common_root);
  EXPECT_EQ(common.select_pair({req.begin() + 1, req.end()}, tgt), AddressPair(req[1], tgt[0]));

  TePolicy rr(TeMode::round_robin, 1);
  std::set<AddressPair> seen;
  for (int i = 0; i < 4; ++i) seen.insert(rr.select_pair(req, tgt));
  EXPECT_EQ(seen.size(), 4u);

  EXPECT_THROW(first.select_pair({}, tgt), Error);
  EXPECT_EQ(parse_te_mode("round_robin"), TeMode::round_robin);
  EXPECT_FALSE(parse_te_mode("random"));
}

TEST(RouteLinks, FollowsSharedPrefix) {
  const auto table = assign_addresses(oracle::t1());
  EXPECT_EQ(route_links(table, bm("01:01:01:00:00:00"), bm("01:02:01:00:00:00")),
            (std::set<LinkKey>{{"H1", "S1"}, {"R1", "S1"}, {"R1", "S2"}, {"H2", "S2"}}));
  EXPECT_EQ(route_links(table, bm("01:01:01:00:00:00"), bm("02:02:01:00:00:00")),
            (std::set<LinkKey>{{"H1", "S1"}, {"R1", "S1"}, {"R2", "S2"}, {"H2", "S2"}}));
}

TEST(ControlServer, DhcpLearnsAndLeases) {
  T1Server t;
  auto reply = t.server.handle_dhcp(copies(t.table, "H1", kEtherIpv4, dhcp_req(kH1, 7)));
  EXPECT_EQ(reply.dst.to_string(), "01:01:01:00:00:00");
  EXPECT_EQ(reply.src, kServerMac);
  auto rec = DhcpRecord::decode(reply.payload);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->op, DhcpRecord::Op::ack);
  EXPECT_EQ(rec->yiaddr.to_string(), "10.0.0.1");
  EXPECT_EQ(rec->seq, 7u);

  const auto& db = t.server.db();
  EXPECT_EQ(db.copy_counter, 2u);
  EXPECT_EQ(db.learned.at(kH1), (std::set<BigMac>{bm("01:01:01:00:00:00"), bm("02:01:01:00:00:00")}));
  EXPECT_EQ(db.edge_of.at(kH1), "S1");

  // Retries keep the lease.
  auto again = t.server.handle_dhcp(copies(t.table, "H1", kEtherIpv4, dhcp_req(kH1, 8)));
  EXPECT_EQ(DhcpRecord::decode(again.payload)->yiaddr.to_string(), "10.0.0.1");
  auto second = t.server.handle_dhcp(copies(t.table, "H2", kEtherIpv4, dhcp_req(kH2, 1)));
  EXPECT_EQ(DhcpRecord::decode(second.payload)->yiaddr.to_string(), "10.0.0.2");
}

TEST(ControlServer, PoolExhaustionNaks) {
  T1Server t(TeMode::first, "10.0.0.0/30");  // two usable addresses
  t.configure_both();
  const MacAddr h3 = MacAddr::parse("00:16:3e:00:00:03");
  const std::vector<Frame> req{Frame{MacAddr::broadcast(), bm("01:01:01:00:00:00").mac(), kEtherIpv4, dhcp_req(h3, 1)}};
  auto reply = t.server.handle_dhcp(req);
  EXPECT_EQ(DhcpRecord::decode(reply.payload)->op, DhcpRecord::Op::nak);
  EXPECT_EQ(t.server.db().pool_exhausted, 1u);
}

TEST(ControlServer, ArpReplyCarriesTargetLocator) {
  T1Server t;
  t.configure_both();
  auto reply = t.server.handle_arp(copies(t.table, "H1", kEtherArp, arp_req(kH1, "10.0.0.1", "10.0.0.2")));
  ASSERT_TRUE(reply);
  EXPECT_EQ(reply->dst.to_string(), "01:01:01:00:00:00");
  EXPECT_EQ(reply->src.to_string(), "01:02:01:00:00:00");
  auto a = ArpRecord::decode(reply->payload);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->op, ArpRecord::Op::reply);
  EXPECT_EQ(a->sender_mac.to_string(), "01:02:01:00:00:00");
  EXPECT_EQ(a->sender_ip.to_string(), "10.0.0.2");
  EXPECT_EQ(a->target_mac, kH1);
  EXPECT_EQ(t.server.db().copy_counter, 6u);
}

TEST(ControlServer, CommonRootAvoidsMeshHop) {
  T1Server t(TeMode::common_root);
  t.configure_both();
  auto reply = t.server.handle_arp(copies(t.table, "H1", kEtherArp, arp_req(kH1, "10.0.0.1", "10.0.0.2")));
  ASSERT_TRUE(reply);
  EXPECT_EQ(common_prefix_len(*BigMac::from_mac(reply->dst), *BigMac::from_mac(reply->src)), 1);
}

TEST(ControlServer, UnknownTargetIsSilent) {
  T1Server t;
  t.configure_both();
  EXPECT_FALSE(t.server.handle_arp(copies(t.table, "H1", kEtherArp, arp_req(kH1, "10.0.0.1", "10.0.0.99"))));
  EXPECT_EQ(t.server.db().unknown_targets, 1u);
}

TEST(ControlServer, FailoverRepointsAffectedPairs) {
  T1Server t(TeMode::common_root);
  t.configure_both();
  ASSERT_TRUE(t.server.handle_arp(copies(t.table, "H1", kEtherArp, arp_req(kH1, "10.0.0.1", "10.0.0.2"))));
  const auto& assoc = t.server.db().associations.at({kH1, Ipv4Addr::parse("10.0.0.2")});
  EXPECT_EQ(assoc.requester_src.to_string(), "01:01:01:00:00:00");

  // A link off the route changes nothing.
  EXPECT_TRUE(t.server.failover_announce({"R2", "S2"}).announcements.empty());
  t.server.link_restored({"R2", "S2"});

  auto result = t.server.failover_announce({"S1", "R1"});
  ASSERT_EQ(result.announcements.size(), 1u);
  const auto& f = result.announcements[0];
  EXPECT_EQ(f.dst.to_string(), "02:01:01:00:00:00");
  auto a = ArpRecord::decode(f.payload);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->sender_mac.to_string(), "02:02:01:00:00:00");
  EXPECT_EQ(a->target_mac, kH1);
  EXPECT_TRUE(result.unreachable.empty());

  // Losing the other root too leaves nothing.
  auto none = t.server.failover_announce({"S1", "R2"});
  EXPECT_TRUE(none.announcements.empty());
  ASSERT_EQ(none.unreachable.size(), 1u);
  EXPECT_EQ(none.unreachable[0].first, kH1);
}

TEST(ControlServer, RoundRobinUsesRestoredRoutes) {
  T1Server t(TeMode::round_robin);
  t.configure_both();
  auto ask = [&t](std::uint32_t seq) {
    auto r = t.server.handle_arp(copies(t.table, "H1", kEtherArp, arp_req(kH1, "10.0.0.1", "10.0.0.2", seq)));
    return r ? (*BigMac::from_mac(r->dst))[0] : 0;
  };
  t.server.failover_announce({"S1", "R1"});
  for (std::uint32_t i = 0; i < 4; ++i) EXPECT_EQ(ask(i), 0x02);
  t.server.link_restored({"S1", "R1"});
  std::set<int> roots;
  for (std::uint32_t i = 4; i < 12; ++i) roots.insert(ask(i));
  EXPECT_EQ(roots, (std::set<int>{0x01, 0x02}));
}
