#include <benchmark/benchmark.h>

#include <string>

#include "bigmac/dataplane.hpp"
#include "bigmac/engine.hpp"
#include "bigmac/topology.hpp"

using namespace bigmac;

namespace {

void BM_AssignAddresses(benchmark::State& state) {
  const auto t = generate_regular({3, 2, static_cast<int>(state.range(0))});
  for (auto _ : state) {
    auto table = assign_addresses(t);
    benchmark::DoNotOptimize(table.size());
  }
  state.counters["hosts"] = static_cast<double>(t.hosts.size());
}
BENCHMARK(BM_AssignAddresses)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

// Downward forwarding at a middle-tier switch. The per-frame cost should not
// move with network size.
void BM_SwitchHandleDown(benchmark::State& state) {
  const auto t = generate_regular({3, 2, static_cast<int>(state.range(0))});
  const auto table = assign_addresses(t);
  auto states = build_switch_states(t, table, Strategy::alpha);
  SwitchState* mid = nullptr;
  for (auto& [id, s] : states) {
    if (s.tier == 2) {
      mid = &s;
      break;
    }
  }
  const BigMac* dst = nullptr;
  for (const auto& [node, addrs] : table.nodes()) {
    if (!t.hosts.contains(node)) continue;
    for (const auto& a : addrs) {
      const auto path = table.path(a);
      if (path.size() > 1 && path[1] == mid->id) {
        dst = &a;
        break;
      }
    }
    if (dst) break;
  }
  const Frame f{dst->mac(), MacAddr::parse("01:01:01:00:00:00"), kEtherIpv4, {}};
  for (auto _ : state) {
    auto d = switch_handle(*mid, f, PortRef::up(0));
    benchmark::DoNotOptimize(d.actions.data());
  }
  state.counters["hosts"] = static_cast<double>(t.hosts.size());
}
BENCHMARK(BM_SwitchHandleDown)->Arg(4)->Arg(8)->Arg(16);

// DHCP for every host, then one ping per host to a fixed offset peer.
void BM_SimulationRun(benchmark::State& state) {
  const auto t = generate_regular({3, 2, static_cast<int>(state.range(0))});
  std::vector<std::string> ids;
  for (const auto& [id, h] : t.hosts) ids.push_back(id);
  EngineConfig cfg;
  cfg.record_log = false;
  cfg.pool = Ipv4Cidr::parse("10.0.0.0/16");
  std::uint64_t events = 0;
  for (auto _ : state) {
    Simulation sim(t, cfg);
    for (const auto& id : ids) sim.dhcp(id);
    sim.run();
    for (std::size_t i = 0; i < ids.size(); ++i) sim.ping(ids[i], ids[(i + ids.size() / 2) % ids.size()]);
    sim.run();
    events += sim.metrics().events;
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulationRun)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
