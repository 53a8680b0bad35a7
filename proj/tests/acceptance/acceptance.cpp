// Acceptance criteria, one PASS/FAIL line each. Tolerances live next to the
// check that uses them.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bigmac/engine.hpp"
#include "bigmac/scenario.hpp"
#include "cli/commands.hpp"
#include "oracles.hpp"

using namespace bigmac;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, std::string what) {
    if (!ok) pass = false;
    if (!ok || notes.size() < 32) notes.push_back((ok ? "" : "!! ") + std::move(what));
  }
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int g_failed = 0;

void run(const char* id, const char* title, double limit_ms, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.check(false, fmt::format("exception: {}", e.what()));
  }
  const double elapsed = ms_since(t0);
  if (limit_ms > 0) v.check(elapsed <= limit_ms, fmt::format("runtime {:.0f} ms (limit {:.0f} ms)", elapsed, limit_ms));
  if (!v.pass) ++g_failed;
  fmt::print("{} {}: {} [{:.0f} ms]\n", v.pass ? "PASS" : "FAIL", id, title, elapsed);
  for (const auto& n : v.notes) fmt::print("    {}\n", n);
}

double mean_host_addresses(const Topology& t, const AddressTable& table) {
  double sum = 0;
  for (const auto& [id, h] : t.hosts) sum += static_cast<double>(table.addresses(id).size());
  return sum / static_cast<double>(t.hosts.size());
}

bool matches_oracle(const Topology& t, const AddressTable& table, bool delta) {
  const auto b = oracle::bunch(t, delta);
  for (const auto& [id, h] : t.hosts) {
    std::vector<std::string> got;
    for (const auto& a : table.addresses(id)) got.push_back(a.to_string());
    if (got != oracle::addresses(b, id)) return false;
  }
  return true;
}

// Address counts on generated families against the analytic estimate.
void ac1(Verdict& v) {
  {
    const auto t = generate_regular({3, 2, 8});
    const auto table = assign_addresses(t);
    const double mean = mean_host_addresses(t, table);
    const double est = expected_addresses({static_cast<double>(t.hosts.size()), 2, 8});
    v.check(t.hosts.size() == 512, fmt::format("gen(3,2,8): N = {}", t.hosts.size()));
    v.check(mean == 4.0, fmt::format("gen(3,2,8): mean addresses {:.3f}, oracle u^(levels-1) = 4", mean));
    v.check(matches_oracle(t, table, false), "gen(3,2,8): per-host address sets equal the path-enumeration oracle");
    v.check(matches_oracle(t, assign_addresses(t, AddressEncoding::delta), true),
            "gen(3,2,8): delta address sets equal the oracle");
    v.check(std::abs(est - 22.627) < 0.01, fmt::format("gen(3,2,8): analytic estimate {:.3f} (informational)", est));
  }
  {
    // Reference fanout u=2, d=32, cut to two roots and two hosts per edge.
    const auto t = generate_regular({.levels = 3, .up = 2, .down = 32, .top = 2, .hosts_per_edge = 2});
    const auto table = assign_addresses(t);
    const double n = static_cast<double>(t.hosts.size());
    const double mean = mean_host_addresses(t, table);
    const double est = expected_addresses({n, 2, 32});
    constexpr double kFactor = 2.0;
    v.check(n == 1024, fmt::format("reference slice: N = {}", n));
    v.check(std::abs(est - std::pow(n, 0.25)) < 1e-9, fmt::format("reference slice: estimate {:.3f} = N^(1/4)", est));
    v.check(mean <= est * kFactor && mean >= est / kFactor,
            fmt::format("reference slice: mean {:.3f} within x{} of {:.3f}", mean, kFactor, est));
    v.check(matches_oracle(t, table, false), "reference slice: address sets equal the oracle");
    // 32 downlinks do not fit the five port bits left by delta packing.
    const auto violations = validate(t, AddressEncoding::delta);
    v.check(!violations.empty() && violations.front().kind == ViolationKind::DeltaPortBound,
            "reference slice: delta encoding rejected for ports above 31");
  }
  v.check(std::abs(expected_addresses({65536, 2, 32}) - 16.0) < 1e-9, "N=65536, u=2, d=32: estimate 16");
}

// ARP flooding: the server sees one copy per upward path.
void ac2(Verdict& v) {
  struct Case {
    const char* name;
    RegularParams p;
  };
  for (const Case& c : {Case{"gen(3,2,8)", {3, 2, 8}},
                        Case{"reference slice", {.levels = 3, .up = 2, .down = 32, .top = 2, .hosts_per_edge = 2}}}) {
    const auto t = generate_regular(c.p);
    EngineConfig cfg;
    cfg.pool = Ipv4Cidr::parse("10.0.0.0/16");
    cfg.record_log = false;
    Simulation sim(t, cfg);
    std::vector<std::string> ids;
    for (const auto& [id, h] : t.hosts) {
      ids.push_back(id);
      sim.dhcp(id);
    }
    sim.run();
    const auto before = sim.metrics().copies_by_host;
    const auto arp_before = sim.metrics().copies_arp;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      sim.arp(ids[i], *sim.host(ids[(i + 1) % ids.size()]).ip());
    }
    sim.run();
    const auto& m = sim.metrics();
    const double n = static_cast<double>(ids.size());
    std::uint64_t expected_total = 0;
    bool per_host = true;
    for (const auto& id : ids) {
      const auto want = oracle::upward_path_count(t, id);
      expected_total += want;
      const auto got = m.copies_by_host.at(id) - (before.contains(id) ? before.at(id) : 0);
      if (got != want) per_host = false;
    }
    const auto arp = m.copies_arp - arp_before;
    constexpr double kFitConstant = 4.0;
    const double bound = kFitConstant * std::pow(n, 1.25);
    v.check(arp == expected_total, fmt::format("{}: {} ARP copies, oracle {}", c.name, arp, expected_total));
    v.check(per_host, fmt::format("{}: per-host copies equal upward path counts", c.name));
    v.check(static_cast<double>(arp) <= bound,
            fmt::format("{}: {} <= {}*N^1.25 = {:.0f} (copies / N^1.25 = {:.3f})", c.name, arp, kFitConstant, bound,
                        static_cast<double>(arp) * kFitConstant / bound));
    v.check(arp == ids.size() * 4, fmt::format("{}: total equals N*u^(L-1) = {}", c.name, ids.size() * 4));
    v.check(m.unexpected_drops() == 0 && m.drops.empty(), fmt::format("{}: no drops", c.name));
  }
}

// Every ordered host pair resolves and pings under every strategy.
void ac3(Verdict& v) {
  for (const auto& [name, topo] : {std::pair<std::string, Topology>{"T1", oracle::t1()},
                                   std::pair<std::string, Topology>{"gen(3,2,4)", generate_regular({3, 2, 4})}}) {
    std::map<Strategy, std::vector<std::vector<std::string>>> paths;
    for (auto s : {Strategy::alpha, Strategy::beta, Strategy::gamma, Strategy::delta}) {
      EngineConfig cfg;
      cfg.strategy = s;
      cfg.record_log = false;
      Simulation sim(topo, cfg);
      std::vector<std::string> ids;
      for (const auto& [id, h] : topo.hosts) {
        ids.push_back(id);
        sim.dhcp(id);
      }
      sim.run();
      for (const auto& a : ids) {
        for (const auto& b : ids) {
          if (a != b) sim.arp(a, *sim.host(b).ip());
        }
      }
      sim.run();
      for (const auto& a : ids) {
        for (const auto& b : ids) {
          if (a != b) sim.ping(a, b);
        }
      }
      sim.run();

      const auto& m = sim.metrics();
      const auto b = oracle::bunch(topo, s == Strategy::delta);
      std::size_t ok = 0;
      std::size_t route_ok = 0;
      for (const auto& p : m.pings) {
        if (p.replies == 1 && p.answered) ++ok;
        paths[s].push_back(p.request_path);
        const auto dst = sim.host(p.from).arp_cache().at(*sim.host(p.to).ip()).to_string();
        if (s == Strategy::alpha || s == Strategy::delta) {
          const auto src = oracle::addresses(b, p.from).front();
          const bool first_pair = dst == oracle::addresses(b, p.to).front();
          if (first_pair && p.request_path == oracle::route(b, p.from, src, p.to, dst)) ++route_ok;
        } else if (s == Strategy::gamma) {
          std::size_t best = SIZE_MAX;
          for (const auto& src : oracle::addresses(b, p.from)) best = std::min(best, oracle::route(b, p.from, src, p.to, dst).size());
          if (p.request_path.size() == best) ++route_ok;
        } else {
          ++route_ok;
        }
      }
      const auto n_pairs = ids.size() * (ids.size() - 1);
      v.check(m.pings.size() == n_pairs && ok == n_pairs,
              fmt::format("{} {}: {}/{} pings answered exactly once", name, to_string(s), ok, n_pairs));
      v.check(m.drops.empty() && m.host_rejections == 0, fmt::format("{} {}: zero drops", name, to_string(s)));
      v.check(route_ok == m.pings.size(), fmt::format("{} {}: {}/{} request paths match the route oracle", name,
                                                      to_string(s), route_ok, m.pings.size()));
    }
    v.check(paths[Strategy::alpha] == paths[Strategy::delta], name + ": alpha and delta take identical paths");
  }
}

// Non-edge switch state does not depend on host count or on traffic.
void ac4(Verdict& v) {
  auto build = [](int hpe) {
    const auto t = generate_regular({.levels = 3, .up = 2, .down = 4, .hosts_per_edge = hpe});
    return build_switch_states(t, assign_addresses(t), Strategy::alpha);
  };
  const auto small = build(2);
  const auto large = build(8);
  std::size_t compared = 0;
  bool same = true;
  for (const auto& [id, s] : small) {
    if (s.edge) continue;
    ++compared;
    if (serialize_forwarding_state(s) != serialize_forwarding_state(large.at(id))) same = false;
  }
  v.check(compared == 12 && same, fmt::format("{} non-edge switches byte-identical for 2 and 8 hosts per edge", compared));

  const auto t = generate_regular({.levels = 3, .up = 2, .down = 4, .hosts_per_edge = 8});
  Simulation sim(t);
  std::vector<std::string> ids;
  for (const auto& [id, h] : t.hosts) ids.push_back(id);
  for (const auto& id : ids) sim.dhcp(id);
  sim.run();
  for (std::size_t i = 0; i < ids.size(); ++i) sim.ping(ids[i], ids[(i * 7 + 3) % ids.size()], 2);
  sim.run();
  bool invariant = true;
  std::size_t sampled = 0;
  for (const auto& [id, samples] : sim.metrics().state_samples) {
    if (sim.states().at(id).edge) continue;
    ++sampled;
    if (samples.size() < 2 || std::adjacent_find(samples.begin(), samples.end(), std::not_equal_to<>()) != samples.end())
      invariant = false;
  }
  v.check(sampled == 12 && invariant, fmt::format("{} non-edge switches keep constant state size under traffic", sampled));
  bool edge_same = true;
  for (const auto& [id, s] : sim.states()) {
    if (serialize_forwarding_state(s) != serialize_forwarding_state(build(8).at(id))) edge_same = false;
  }
  v.check(edge_same, "forwarding state after traffic equals the freshly built state");
}

// Link failure inside a ping train; traffic moves to the surviving root.
void ac5(Verdict& v) {
  EngineConfig cfg;
  cfg.policy = TeMode::common_root;
  Simulation sim(oracle::t1(), cfg);
  sim.dhcp("H1");
  sim.dhcp("H2");
  sim.run();
  sim.arp("H1", *sim.host("H2").ip());
  sim.arp("H2", *sim.host("H1").ip());
  sim.run();
  const auto depth = static_cast<std::uint64_t>(sim.topology().depth());
  sim.fail_link("S1", "R1", 100);
  sim.ping("H1", "H2", 100, 2);
  sim.run();

  const auto& m = sim.metrics();
  v.check(m.fail_tick && m.convergence, "failure observed and convergence measured");
  if (!m.fail_tick || !m.convergence) return;
  const auto fail = *m.fail_tick;
  const auto conv = *m.convergence;
  const auto limit = 2 * depth + sim.batch_window();
  v.check(conv <= limit, fmt::format("convergence {} ticks (limit 2*depth + window = {})", conv, limit));

  auto via = [](const std::vector<std::string>& path, const std::string& node) {
    return std::find(path.begin(), path.end(), node) != path.end();
  };
  const auto& first = m.pings.front();
  v.check(first.answered && via(first.request_path, "R1"), "pre-failure pings use R1");
  const std::uint64_t rtt = first.answered ? *first.answered - first.sent : 0;

  std::size_t after_ok = 0, after_total = 0, lost = 0, lost_in_window = 0;
  for (const auto& p : m.pings) {
    if (p.sent >= fail + conv) {
      ++after_total;
      if (p.replies == 1 && via(p.request_path, "R2") && !via(p.request_path, "R1") && via(p.reply_path, "R2")) ++after_ok;
    }
    if (!p.answered) {
      ++lost;
      if (p.sent + rtt >= fail && p.sent <= fail + conv) ++lost_in_window;
    }
  }
  v.check(m.pings.size() == 100, fmt::format("{} pings sent", m.pings.size()));
  v.check(after_total > 0 && after_ok == after_total,
          fmt::format("{}/{} pings sent after convergence answered via R2 only", after_ok, after_total));
  v.check(lost == lost_in_window, fmt::format("{} lost pings, all sent within [fail - rtt, fail + convergence]", lost));
  bool drops_ok = true;
  for (const auto& d : m.drop_log) {
    if (d.reason != DropReason::LinkDown || d.tick < fail || d.tick > fail + conv + depth) drops_ok = false;
  }
  v.check(drops_ok, fmt::format("{} drops, all LinkDown within [fail, fail + convergence + depth]", m.drop_log.size()));
  v.check(m.unexpected_drops() == 0 && !m.tick_limit_exceeded, "no unexpected drops");
}

// Same inputs, same bytes.
void ac6(Verdict& v) {
  for (const char* scn : {"t1_ping", "t1_failover"}) {
    cli::RunOptions o;
    o.topology_path = oracle::data_dir() + "/t1.topo";
    o.scenario_path = oracle::data_dir() + "/" + scn + ".scn";
    std::string logs[2];
    std::string reports[2];
    for (int i = 0; i < 2; ++i) {
      o.log_path = (std::filesystem::temp_directory_path() / fmt::format("bigmac_ac6_{}_{}.log", scn, i)).string();
      std::ostringstream out, err;
      const int rc = cli::cmd_run(o, out, err);
      v.check(rc == cli::kOk, fmt::format("{} run {}: exit {}", scn, i + 1, rc));
      logs[i] = oracle::slurp(*o.log_path);
      reports[i] = out.str();
    }
    v.check(!logs[0].empty() && logs[0] == logs[1] && reports[0] == reports[1],
            fmt::format("{}: two runs give byte-identical logs ({} bytes) and reports", scn, logs[0].size()));
    const auto golden = oracle::slurp(oracle::data_dir() + "/" + scn + ".golden.log");
    v.check(logs[0] == golden, fmt::format("{}: log equals the checked-in golden log", scn));
  }
}

}  // namespace

int main() {
  run("AC1", "address counts per host", 10'000, ac1);
  run("AC2", "ARP copies per host equal upward paths", 30'000, ac2);
  run("AC3", "all-pairs connectivity under every strategy", 60'000, ac3);
  run("AC4", "non-edge state independent of hosts and traffic", 0, ac4);
  run("AC5", "failover within the convergence bound", 0, ac5);
  run("AC6", "deterministic logs", 0, ac6);
  fmt::print("{}\n", g_failed ? fmt::format("{} criteria failed", g_failed) : std::string("all criteria passed"));
  return g_failed ? 1 : 0;
}
