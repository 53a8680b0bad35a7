#include "bigmac/scenario.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <sstream>

#include "bigmac/error.hpp"

namespace bigmac {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(Errc::scenario, fmt::format("line {}: {}", line, msg));
}

std::uint64_t parse_count(int line, const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail(line, "expected a nonnegative integer, got '" + s + "'");
  return v;
}

bool is_op(const std::string& s) {
  return s == "==" || s == "!=" || s == "<" || s == "<=" || s == ">" || s == ">=";
}

// Consumes trailing `every N` / `after N` options.
void take_options(Command& c, std::vector<std::string>& words, bool allow_every) {
  for (std::size_t i = 0; i < words.size();) {
    if ((words[i] == "after" || (allow_every && words[i] == "every")) && i + 1 < words.size()) {
      const auto v = parse_count(c.line, words[i + 1]);
      if (words[i] == "after") {
        c.after = v;
      } else {
        if (v == 0) fail(c.line, "every needs a positive interval");
        c.every = v;
      }
      words.erase(words.begin() + static_cast<std::ptrdiff_t>(i), words.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else {
      ++i;
    }
  }
}

std::optional<Ipv4Addr> try_ip(const std::string& s) {
  try {
    return Ipv4Addr::parse(s);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

bool compare(double actual, std::string_view op, double expected) {
  constexpr double eps = 1e-9;
  if (op == "==") return std::fabs(actual - expected) <= eps;
  if (op == "!=") return std::fabs(actual - expected) > eps;
  if (op == "<") return actual < expected;
  if (op == "<=") return actual <= expected + eps;
  if (op == ">") return actual > expected;
  if (op == ">=") return actual >= expected - eps;
  return false;
}

Scenario parse_scenario(std::string_view text) {
  Scenario sc;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ws(raw);
    std::vector<std::string> words;
    for (std::string w; ws >> w;) words.push_back(w);
    if (words.empty()) continue;

    Command c{};
    c.line = line;
    const std::string verb = words.front();
    words.erase(words.begin());
    {
      std::string joined = verb;
      for (const auto& w : words) joined += " " + w;
      c.text = joined;
    }

    if (verb == "dhcp") {
      c.kind = Command::Kind::dhcp;
      take_options(c, words, false);
      if (words.size() != 1) fail(line, "usage: dhcp <host|all>");
    } else if (verb == "arp") {
      c.kind = Command::Kind::arp;
      take_options(c, words, false);
      if (words.size() != 2) fail(line, "usage: arp <host> <ip|host>");
    } else if (verb == "ping") {
      c.kind = Command::Kind::ping;
      take_options(c, words, true);
      if (words.size() == 3) {
        const auto n = parse_count(line, words[2]);
        if (n == 0 || n > 1'000'000) fail(line, "ping count out of range");
        c.count = static_cast<int>(n);
        words.pop_back();
      }
      if (words.size() != 2) fail(line, "usage: ping <host> <host> [count] [every <n>] [after <n>]");
    } else if (verb == "fail" || verb == "restore") {
      c.kind = verb == "fail" ? Command::Kind::fail : Command::Kind::restore;
      take_options(c, words, false);
      if (words.size() != 2) fail(line, "usage: " + verb + " <a> <b> [after <n>]");
    } else if (verb == "policy") {
      c.kind = Command::Kind::policy;
      if (words.size() != 1 || !parse_te_mode(words[0])) fail(line, "usage: policy <first|round_robin|common_root>");
    } else if (verb == "strategy") {
      c.kind = Command::Kind::strategy;
      if (words.size() != 1 || !parse_strategy(words[0])) fail(line, "usage: strategy <alpha|beta|gamma|delta>");
    } else if (verb == "pool") {
      c.kind = Command::Kind::pool;
      if (words.size() != 1) fail(line, "usage: pool <cidr>");
      try {
        Ipv4Cidr::parse(words[0]);
      } catch (const Error& e) {
        fail(line, e.what());
      }
    } else if (verb == "assert") {
      c.kind = Command::Kind::assertion;
      if (words.size() != 3 || !is_op(words[1])) fail(line, "usage: assert <metric> <op> <number>");
      c.op = words[1];
      try {
        std::size_t used = 0;
        c.value = std::stod(words[2], &used);
        if (used != words[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        fail(line, "bad number '" + words[2] + "'");
      }
      words.erase(words.begin() + 1, words.end());
    } else {
      fail(line, "unknown command '" + verb + "'");
    }
    c.args = std::move(words);
    sc.commands.push_back(std::move(c));
  }
  return sc;
}

bool RunResult::assertions_passed() const {
  for (const auto& a : assertions) {
    if (!a.passed) return false;
  }
  return true;
}

bool RunResult::ok() const {
  return assertions_passed() && metrics.unexpected_drops() == 0 && !metrics.tick_limit_exceeded;
}

RunResult run_scenario(const Topology& t, const Scenario& s, EngineConfig cfg) {
  Simulation sim(t, cfg);
  const auto& topo = sim.topology();

  auto need_host = [&](const Command& c, const std::string& id) {
    if (!topo.hosts.contains(id)) fail(c.line, "unknown host '" + id + "'");
  };
  for (const auto& c : s.commands) {
    switch (c.kind) {
      case Command::Kind::dhcp:
        if (c.args[0] != "all") need_host(c, c.args[0]);
        break;
      case Command::Kind::arp:
        need_host(c, c.args[0]);
        if (!try_ip(c.args[1])) need_host(c, c.args[1]);
        break;
      case Command::Kind::ping:
        need_host(c, c.args[0]);
        need_host(c, c.args[1]);
        break;
      case Command::Kind::fail:
      case Command::Kind::restore:
        if (!topo.has_link(LinkKey(c.args[0], c.args[1]))) {
          fail(c.line, fmt::format("no link {}-{}", c.args[0], c.args[1]));
        }
        break;
      default:
        break;
    }
  }

  RunResult result;
  for (const auto& c : s.commands) {
    const std::uint64_t delay = c.after.value_or(0);
    try {
      switch (c.kind) {
        case Command::Kind::dhcp:
          if (c.args[0] == "all") {
            for (const auto& [id, h] : topo.hosts) sim.dhcp(id, delay);
          } else {
            sim.dhcp(c.args[0], delay);
          }
          break;
        case Command::Kind::arp: {
          auto ip = try_ip(c.args[1]);
          if (!ip) {
            ip = sim.host(c.args[1]).ip();
            if (!ip) fail(c.line, "host '" + c.args[1] + "' has no IP address yet");
          }
          sim.arp(c.args[0], *ip, delay);
          break;
        }
        case Command::Kind::ping:
          sim.ping(c.args[0], c.args[1], c.count, c.every, delay);
          break;
        case Command::Kind::fail:
          sim.fail_link(c.args[0], c.args[1], delay);
          break;
        case Command::Kind::restore:
          sim.restore_link(c.args[0], c.args[1], delay);
          break;
        case Command::Kind::policy:
          sim.set_policy(*parse_te_mode(c.args[0]));
          break;
        case Command::Kind::strategy:
          sim.set_strategy(*parse_strategy(c.args[0]));
          break;
        case Command::Kind::pool:
          sim.set_pool(Ipv4Cidr::parse(c.args[0]));
          break;
        case Command::Kind::assertion: {
          const auto flat = sim.metrics().flatten();
          AssertionResult a;
          a.line = c.line;
          a.text = c.text;
          if (auto it = flat.find(c.args[0]); it != flat.end()) {
            a.actual = it->second;
          } else if (c.args[0].starts_with("copies.host.")) {
            a.actual = 0.0;
          }
          a.passed = a.actual && compare(*a.actual, c.op, c.value);
          result.assertions.push_back(a);
          break;
        }
      }
    } catch (const Error& e) {
      if (e.code() == Errc::scenario && std::string_view(e.what()).find("line ") != std::string_view::npos) throw;
      fail(c.line, e.what());
    }
    if (!c.after && c.kind != Command::Kind::assertion) {
      if (!sim.run()) break;
    }
  }
  sim.run();

  result.metrics = sim.metrics();
  result.log = sim.log();
  result.flat = result.metrics.flatten();
  return result;
}

}  // namespace bigmac
