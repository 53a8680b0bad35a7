#include <gtest/gtest.h>

#include "bigmac/engine.hpp"
#include "bigmac/error.hpp"
#include "oracles.hpp"

using namespace bigmac;

namespace {

Simulation configured_t1(EngineConfig cfg = {}) {
  Simulation sim(oracle::t1(), cfg);
  sim.dhcp("H1");
  sim.dhcp("H2");
  sim.run();
  return sim;
}

}  // namespace

TEST(Engine, EmptyRunDoesNothing) {
  Simulation sim(oracle::t1());
  EXPECT_TRUE(sim.run());
  EXPECT_EQ(sim.metrics().events, 0u);
  EXPECT_TRUE(sim.log().empty());
  EXPECT_TRUE(sim.metrics().state_samples.empty());
  EXPECT_EQ(sim.metrics().total_drops(), 0u);
}

TEST(Engine, DhcpConfiguresFromPool) {
  auto sim = configured_t1();
  EXPECT_EQ(sim.host("H1").ip()->to_string(), "10.0.0.1");
  EXPECT_EQ(sim.host("H2").ip()->to_string(), "10.0.0.2");
  EXPECT_EQ(sim.metrics().copies_dhcp, 4u);
}

TEST(Engine, PingT1) {
  auto sim = configured_t1();
  sim.arp("H1", *sim.host("H2").ip());
  sim.run();
  EXPECT_EQ(sim.metrics().copies_last, 2u);
  sim.ping("H1", "H2");
  sim.run();
  ASSERT_EQ(sim.metrics().pings.size(), 1u);
  const auto& p = sim.metrics().pings[0];
  EXPECT_EQ(p.replies, 1);
  EXPECT_EQ(p.request_path, (std::vector<std::string>{"S1", "R1", "S2"}));
  EXPECT_EQ(p.reply_path, (std::vector<std::string>{"S2", "R1", "S1"}));
  EXPECT_EQ(sim.metrics().total_drops(), 0u);
  EXPECT_EQ(sim.metrics().host_rejections, 0u);
}

TEST(Engine, PingWithoutArpResolvesFirst) {
  auto sim = configured_t1();
  sim.ping("H2", "H1", 3, 5);
  sim.run();
  for (const auto& p : sim.metrics().pings) EXPECT_EQ(p.replies, 1);
  EXPECT_EQ(sim.metrics().unexpected_drops(), 0u);
}

TEST(Engine, PingUnconfiguredPeerIsUnreachable) {
  Simulation sim(oracle::t1());
  sim.ping("H1", "H2");
  sim.run();
  EXPECT_TRUE(sim.metrics().pings.at(0).unreachable);
}

TEST(Engine, FailLinkErrorsAndIdempotence) {
  auto sim = configured_t1();
  EXPECT_THROW(sim.fail_link("H1", "H2"), Error);
  sim.fail_link("S1", "R1");
  sim.fail_link("R1", "S1");
  sim.run();
  EXPECT_FALSE(sim.link_alive({"S1", "R1"}));
  sim.restore_link("S1", "R1");
  sim.restore_link("S1", "R1");
  sim.run();
  EXPECT_TRUE(sim.link_alive({"S1", "R1"}));
}

TEST(Engine, FailoverAnnouncementRepointsTraffic) {
  EngineConfig cfg;
  cfg.policy = TeMode::common_root;
  auto sim = configured_t1(cfg);
  sim.arp("H1", *sim.host("H2").ip());
  sim.run();
  sim.ping("H1", "H2");
  sim.run();
  EXPECT_EQ(sim.metrics().pings.back().request_path[1], "R1");

  sim.fail_link("S1", "R1");
  sim.run();
  EXPECT_EQ(sim.host("H1").arp_cache().at(*sim.host("H2").ip()).to_string(), "02:02:01:00:00:00");
  ASSERT_TRUE(sim.metrics().convergence);
  EXPECT_LE(*sim.metrics().convergence, 2 * 3 + sim.batch_window());

  sim.ping("H1", "H2");
  sim.run();
  const auto& p = sim.metrics().pings.back();
  EXPECT_EQ(p.replies, 1);
  EXPECT_EQ(p.request_path, (std::vector<std::string>{"S1", "R2", "S2"}));
  EXPECT_EQ(p.reply_path, (std::vector<std::string>{"S2", "R2", "S1"}));
}

TEST(Engine, FramesOnDeadLinkAreDropped) {
  auto sim = configured_t1();
  sim.arp("H1", *sim.host("H2").ip());
  sim.run();
  // Fail one tick after the ping leaves H1, while it is between S1 and R1.
  sim.ping("H1", "H2");
  sim.fail_link("S1", "R1", 1);
  sim.run();
  EXPECT_EQ(sim.metrics().drops.at(DropReason::LinkDown), 1u);
  EXPECT_EQ(sim.metrics().pings.back().replies, 0);
  EXPECT_EQ(sim.metrics().unexpected_drops(), 0u);
}

TEST(Engine, RestoredLinkCarriesTrafficAgain) {
  EngineConfig cfg;
  cfg.policy = TeMode::common_root;
  auto sim = configured_t1(cfg);
  sim.arp("H1", *sim.host("H2").ip());
  sim.run();
  sim.fail_link("S1", "R1");
  sim.run();
  sim.restore_link("S1", "R1");
  sim.fail_link("S1", "R2", 1);
  sim.run();
  EXPECT_EQ(sim.host("H1").arp_cache().at(*sim.host("H2").ip()).to_string(), "01:02:01:00:00:00");
  sim.ping("H1", "H2");
  sim.run();
  EXPECT_EQ(sim.metrics().pings.back().request_path, (std::vector<std::string>{"S1", "R1", "S2"}));
  EXPECT_EQ(sim.metrics().pings.back().replies, 1);
}

TEST(Engine, TickLimitStopsRun) {
  EngineConfig cfg;
  cfg.tick_limit = 5;
  Simulation sim(oracle::t1(), cfg);
  sim.dhcp("H1");
  EXPECT_FALSE(sim.run());
  EXPECT_TRUE(sim.metrics().tick_limit_exceeded);
  EXPECT_LE(sim.now(), 5u);
}

TEST(Engine, NonEdgeStateUnchangedByTraffic) {
  auto sim = configured_t1();
  sim.ping("H1", "H2", 5);
  sim.run();
  for (const auto& [id, samples] : sim.metrics().state_samples) {
    for (auto s : samples) EXPECT_EQ(s, samples.front()) << id;
  }
}

TEST(Engine, StrategyChangeRules) {
  Simulation sim(oracle::t1());
  sim.set_strategy(Strategy::delta);
  EXPECT_EQ(sim.table().addresses("H1").back().to_string(), "02:01:21:00:00:00");
  sim.dhcp("H1");
  sim.run();
  EXPECT_THROW(sim.set_strategy(Strategy::alpha), Error);
  EXPECT_NO_THROW(sim.set_strategy(Strategy::delta));
  EXPECT_THROW(sim.set_pool(Ipv4Cidr::parse("192.168.0.0/24")), Error);
}

TEST(Engine, CustomPool) {
  Simulation sim(oracle::t1());
  sim.set_pool(Ipv4Cidr::parse("192.168.7.0/24"));
  sim.dhcp("H2");
  sim.run();
  EXPECT_EQ(sim.host("H2").ip()->to_string(), "192.168.7.1");
}

TEST(Engine, ReplayIsByteIdentical) {
  auto once = [] {
    EngineConfig cfg;
    cfg.policy = TeMode::round_robin;
    cfg.seed = 3;
    Simulation sim(generate_regular({3, 2, 4}), cfg);
    for (const auto& [id, h] : sim.topology().hosts) sim.dhcp(id);
    sim.run();
    sim.ping("h01", "h20", 3);
    sim.fail_link("s2_1", "r1", 4);
    sim.run();
    return sim.log_text();
  };
  const auto a = once();
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, once());
}

TEST(Engine, LogFieldLayout) {
  auto sim = configured_t1();
  for (const auto& line : sim.log()) EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 7) << line;
}
