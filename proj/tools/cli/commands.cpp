#include "cli/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bigmac/error.hpp"
#include "bigmac/scenario.hpp"

namespace bigmac::cli {

std::optional<Format> parse_format(const std::string& s) {
  if (s == "text") return Format::text;
  if (s == "csv") return Format::csv;
  return std::nullopt;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::parse, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_value(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) return fmt::format("{}", static_cast<long long>(v));
  return fmt::format("{:.4f}", v);
}

namespace {

void print_violations(const std::vector<Violation>& v, std::ostream& err) {
  for (const auto& x : v) fmt::print(err, "violation: {}: {}\n", to_string(x.kind), x.detail);
}

}  // namespace

int cmd_addresses(const AddressesOptions& o, std::ostream& out, std::ostream& err) {
  try {
    std::optional<AddressTable> table;
    std::size_t n_hosts = 0;
    double host_addr_sum = 0;
    if (o.topology_path) {
      const Topology t = normalize(parse_topology(read_file(*o.topology_path)));
      const auto enc = encoding_for(o.strategy);
      if (auto v = validate(t, enc); !v.empty()) {
        print_violations(v, err);
        return kInputError;
      }
      table = assign_addresses(t, enc);
      if (o.format == Format::csv) fmt::print(out, "node,address\n");
      for (const auto& [node, addrs] : table->nodes()) {
        if (o.format == Format::csv) {
          for (const auto& a : addrs) fmt::print(out, "{},{}\n", node, a.to_string());
          continue;
        }
        std::string line;
        for (const auto& a : addrs) line += (line.empty() ? "" : ", ") + a.to_string();
        fmt::print(out, "{}: {}\n", node, line);
      }
      for (const auto& [id, h] : t.hosts) {
        ++n_hosts;
        host_addr_sum += static_cast<double>(table->addresses(id).size());
      }
    } else if (!o.stats) {
      err << "addresses: a topology file is required unless --stats is given\n";
      return kInputError;
    }

    if (o.stats) {
      auto row = [&](std::string_view k, const std::string& v) {
        if (o.format == Format::csv) {
          fmt::print(out, "{},{}\n", k, v);
        } else {
          fmt::print(out, "{}: {}\n", k, v);
        }
      };
      if (table) {
        row("hosts", fmt::format("{}", n_hosts));
        row("mean_addresses_per_host", fmt::format("{:.3f}", n_hosts ? host_addr_sum / static_cast<double>(n_hosts) : 0.0));
      }
      if (o.up || o.down) {
        if (!o.up || !o.down) {
          err << "--stats needs both --u and --d for the expected count\n";
          return kInputError;
        }
        const double n = o.hosts.value_or(static_cast<double>(n_hosts));
        row("expected_addresses", fmt::format("{:.1f}", expected_addresses({n, *o.up, *o.down})));
      }
    }
    return kOk;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInputError;
  }
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  RunResult r;
  try {
    const Topology t = parse_topology(read_file(o.topology_path));
    const Scenario sc = parse_scenario(read_file(o.scenario_path));
    EngineConfig cfg;
    cfg.strategy = o.strategy;
    cfg.policy = o.policy;
    cfg.seed = o.seed;
    cfg.tick_limit = o.tick_limit;
    cfg.record_log = o.log_path.has_value();
    r = run_scenario(t, sc, cfg);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInputError;
  }

  if (o.log_path) {
    std::ofstream log(*o.log_path, std::ios::binary);
    if (!log) {
      fmt::print(err, "error: cannot write {}\n", *o.log_path);
      return kInputError;
    }
    for (const auto& line : r.log) log << line << '\n';
  }

  if (o.format == Format::csv) {
    fmt::print(out, "metric,value\n");
    for (const auto& [k, v] : r.flat) fmt::print(out, "{},{}\n", k, format_value(v));
  } else {
    for (const auto& [k, v] : r.flat) fmt::print(out, "{} = {}\n", k, format_value(v));
  }
  for (const auto& a : r.assertions) {
    const std::string actual = a.actual ? format_value(*a.actual) : "undefined";
    if (a.passed) {
      if (o.format == Format::text) fmt::print(out, "PASS line {}: {}\n", a.line, a.text);
    } else {
      fmt::print(err, "FAIL line {}: {} (actual {})\n", a.line, a.text, actual);
    }
  }
  if (const auto n = r.metrics.unexpected_drops(); n > 0) {
    fmt::print(err, "unexpected drops: {}\n", n);
    for (const auto& d : r.metrics.drop_log) {
      if (d.reason != DropReason::LinkDown && d.reason != DropReason::UnknownTarget) {
        fmt::print(err, "  tick {} at {}: {}\n", d.tick, d.node, to_string(d.reason));
      }
    }
  }
  if (r.metrics.tick_limit_exceeded) fmt::print(err, "tick limit exceeded\n");
  return r.ok() ? kOk : kCheckFailed;
}

int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const std::string text = format_topology(generate_regular(o.params));
    if (o.output_path) {
      std::ofstream f(*o.output_path, std::ios::binary);
      if (!f) {
        fmt::print(err, "error: cannot write {}\n", *o.output_path);
        return kInputError;
      }
      f << text;
    } else {
      out << text;
    }
    return kOk;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInputError;
  }
}

}  // namespace bigmac::cli
