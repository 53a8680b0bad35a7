#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bigmac {

enum class Errc {
  tier_overflow,
  zero_port,
  port_range,
  bad_fanout,
  parse,
  merge_conflict,
  invalid_topology,
  no_such_node,
  no_such_link,
  empty_set,
  scenario,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bigmac
