#include <CLI11.hpp>

#include <iostream>

#include "cli/commands.hpp"

namespace {

template <class T, class F>
CLI::Option* add_enum(CLI::App* app, const std::string& name, T& target, F parse, const std::string& help) {
  return app->add_option_function<std::string>(
      name,
      [&target, parse, name](const std::string& s) {
        auto v = parse(s);
        if (!v) throw CLI::ValidationError(name, "unrecognized value '" + s + "'");
        target = *v;
      },
      help);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bigmac;
  CLI::App app{"bigmac: branch-bunch locator fabric simulator"};
  app.require_subcommand(1);

  cli::AddressesOptions ao;
  auto* addresses = app.add_subcommand("addresses", "Print every node's locators");
  addresses->add_option("topology", ao.topology_path, "Topology file");
  addresses->add_flag("--stats", ao.stats, "Print address-count statistics");
  addresses->add_option("--u", ao.up, "Uplink fanout for the expected count");
  addresses->add_option("--d", ao.down, "Downlink fanout for the expected count");
  addresses->add_option("--n", ao.hosts, "Host count for the expected count (default: topology hosts)");
  add_enum(addresses, "--strategy", ao.strategy, parse_strategy, "alpha|beta|gamma|delta");
  add_enum(addresses, "--format", ao.format, cli::parse_format, "text|csv");

  cli::RunOptions ro;
  auto* run = app.add_subcommand("run", "Run a scenario against a topology");
  run->add_option("topology", ro.topology_path, "Topology file")->required();
  run->add_option("scenario", ro.scenario_path, "Scenario file")->required();
  add_enum(run, "--strategy", ro.strategy, parse_strategy, "alpha|beta|gamma|delta");
  add_enum(run, "--policy", ro.policy, parse_te_mode, "first|round_robin|common_root");
  run->add_option("--seed", ro.seed, "Round-robin starting offset");
  run->add_option("--tick-limit", ro.tick_limit, "Stop after this tick");
  run->add_option("--log", ro.log_path, "Write the event log here");
  add_enum(run, "--format", ro.format, cli::parse_format, "text|csv");

  cli::GenOptions go;
  auto* gen = app.add_subcommand("gen", "Emit a regular tiered topology");
  gen->add_option("--levels", go.params.levels, "Switch tiers")->required();
  gen->add_option("--u", go.params.up, "Uplinks per non-top switch")->required();
  gen->add_option("--d", go.params.down, "Downlinks per switch")->required();
  gen->add_option("--top", go.params.top, "Top-tier switch count");
  gen->add_option("--hosts-per-edge", go.params.hosts_per_edge, "Hosts on each edge switch");
  gen->add_option("-o,--output", go.output_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInputError;
  }

  if (addresses->parsed()) return cli::cmd_addresses(ao, std::cout, std::cerr);
  if (run->parsed()) return cli::cmd_run(ro, std::cout, std::cerr);
  return cli::cmd_gen(go, std::cout, std::cerr);
}
