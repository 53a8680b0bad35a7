#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "bigmac/control.hpp"
#include "bigmac/dataplane.hpp"
#include "bigmac/topology.hpp"

namespace bigmac::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInputError = 2 };

enum class Format { text, csv };
std::optional<Format> parse_format(const std::string& s);

struct AddressesOptions {
  std::optional<std::string> topology_path;
  Strategy strategy = Strategy::alpha;
  Format format = Format::text;
  bool stats = false;
  std::optional<int> up;
  std::optional<int> down;
  std::optional<double> hosts;
};

struct RunOptions {
  std::string topology_path;
  std::string scenario_path;
  Strategy strategy = Strategy::alpha;
  TeMode policy = TeMode::first;
  std::uint64_t seed = 0;
  std::uint64_t tick_limit = 1'000'000;
  Format format = Format::text;
  std::optional<std::string> log_path;
};

struct GenOptions {
  RegularParams params;
  std::optional<std::string> output_path;
};

int cmd_addresses(const AddressesOptions& o, std::ostream& out, std::ostream& err);
int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err);
int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err);

/// Throws Error(parse) if the file cannot be read.
std::string read_file(const std::string& path);
/// Integral values print without a fractional part.
std::string format_value(double v);

}  // namespace bigmac::cli
