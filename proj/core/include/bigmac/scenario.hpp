#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bigmac/engine.hpp"

namespace bigmac {

// Scenario file grammar, one command per line, `#` starts a comment:
//
//   dhcp <host|all>
//   arp <host> <ip|host>
//   ping <host> <host> [count] [every <ticks>] [after <ticks>]
//   fail <a> <b> [after <ticks>]
//   restore <a> <b> [after <ticks>]
//   policy <first|round_robin|common_root>
//   strategy <alpha|beta|gamma|delta>
//   pool <cidr>
//   assert <metric> <==|!=|<|<=|>|>=> <number>
//
// Commands without `after` run the simulation until it drains. Delayed
// commands are only queued, so they fire during the next command's run.

struct Command {
  enum class Kind { dhcp, arp, ping, fail, restore, policy, strategy, pool, assertion };

  Kind kind;
  int line = 0;
  std::string text;
  std::vector<std::string> args;
  int count = 1;
  std::uint64_t every = 1;
  std::optional<std::uint64_t> after;
  std::string op;
  double value = 0;
};

struct Scenario {
  std::vector<Command> commands;
};

/// Throws Error(scenario) with "line N: ..." on syntax errors.
Scenario parse_scenario(std::string_view text);

struct AssertionResult {
  int line = 0;
  std::string text;
  std::optional<double> actual;
  bool passed = false;
};

struct RunResult {
  Metrics metrics;
  std::vector<std::string> log;
  std::vector<AssertionResult> assertions;
  std::map<std::string, double> flat;

  bool assertions_passed() const;
  /// All assertions hold, no unexpected drops and no tick-limit overrun.
  bool ok() const;
};

/// Throws Error(scenario) for references to undeclared nodes or misordered
/// strategy changes, Error(invalid_topology) for bad topologies.
RunResult run_scenario(const Topology& t, const Scenario& s, EngineConfig cfg = {});

bool compare(double actual, std::string_view op, double expected);

}  // namespace bigmac
