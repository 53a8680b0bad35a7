#include <fmt/format.h>

#include <charconv>
#include <sstream>

#include "bigmac/error.hpp"
#include "bigmac/topology.hpp"

namespace bigmac {

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
  throw Error(Errc::parse, fmt::format("line {}: {}", line_no, msg));
}

int parse_int(std::string_view s, int base, std::size_t line_no, std::string_view what) {
  if (base == 16 && (s.starts_with("0x") || s.starts_with("0X"))) s.remove_prefix(2);
  int v = 0;
  auto [next, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || next != s.data() + s.size() || s.empty()) {
    fail(line_no, fmt::format("bad {} '{}'", what, s));
  }
  return v;
}

std::uint8_t parse_octet(std::string_view s, int base, std::size_t line_no, std::string_view what) {
  const int v = parse_int(s, base, line_no, what);
  if (v < 0 || v > 255) fail(line_no, fmt::format("{} {} out of range 0..255", what, v));
  return static_cast<std::uint8_t>(v);
}

std::pair<std::string_view, std::optional<std::string_view>> split_colon(std::string_view s) {
  auto c = s.rfind(':');
  if (c == std::string_view::npos) return {s, std::nullopt};
  return {s.substr(0, c), s.substr(c + 1)};
}

}  // namespace

Topology parse_topology(std::string_view text) {
  Topology t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = tokenize(line);
    if (tok.empty()) continue;

    try {
      if (tok[0] == "switch") {
        if (tok.size() < 4 || tok[2] != "tier") fail(line_no, "expected: switch <id> tier <n> [root 0xNN] [stack <group>]");
        SwitchDecl sw{std::string(tok[1]), parse_int(tok[3], 10, line_no, "tier"), std::nullopt, std::nullopt};
        for (std::size_t i = 4; i < tok.size(); i += 2) {
          if (i + 1 >= tok.size()) fail(line_no, fmt::format("'{}' needs a value", tok[i]));
          if (tok[i] == "root") {
            sw.root_byte = parse_octet(tok[i + 1], 16, line_no, "root byte");
          } else if (tok[i] == "stack") {
            sw.stack_group = std::string(tok[i + 1]);
          } else {
            fail(line_no, fmt::format("unknown switch attribute '{}'", tok[i]));
          }
        }
        t.add_switch(std::move(sw));
      } else if (tok[0] == "link") {
        if (tok.size() != 3) fail(line_no, "expected: link <parent>:<port> <child>[:<uplink-index>]");
        auto [parent, port] = split_colon(tok[1]);
        if (!port) fail(line_no, "link parent needs :<port>");
        auto [child, index] = split_colon(tok[2]);
        std::optional<std::uint8_t> idx;
        if (index) idx = parse_octet(*index, 10, line_no, "uplink index");
        t.add_link(std::string(parent), parse_octet(*port, 10, line_no, "port"), std::string(child), idx);
      } else if (tok[0] == "shortcut") {
        if (tok.size() != 3) fail(line_no, "expected: shortcut <id1> <id2>");
        t.add_shortcut(std::string(tok[1]), std::string(tok[2]));
      } else if (tok[0] == "host") {
        if (tok.size() != 6 && tok.size() != 8) fail(line_no, "expected: host <id> at <switch>:<port> mac <mac> [ip <a.b.c.d>]");
        if (tok[2] != "at" || tok[4] != "mac") fail(line_no, "expected: host <id> at <switch>:<port> mac <mac>");
        auto [edge, port] = split_colon(tok[3]);
        if (!port) fail(line_no, "host attachment needs <switch>:<port>");
        HostDecl h{std::string(tok[1]), std::string(edge), parse_octet(*port, 10, line_no, "port"),
                   MacAddr::parse(tok[5]), std::nullopt};
        if (tok.size() == 8) {
          if (tok[6] != "ip") fail(line_no, fmt::format("unknown host attribute '{}'", tok[6]));
          h.ip = Ipv4Addr::parse(tok[7]);
        }
        t.add_host(std::move(h));
      } else {
        fail(line_no, fmt::format("unknown directive '{}'", tok[0]));
      }
    } catch (const Error& e) {
      if (e.code() == Errc::parse && std::string_view(e.what()).find("line ") != std::string_view::npos) throw;
      fail(line_no, e.what());
    }
  }
  return t;
}

std::string format_topology(const Topology& t) {
  std::ostringstream out;
  for (const auto& [id, sw] : t.switches) {
    out << fmt::format("switch {} tier {}", id, sw.tier);
    if (sw.root_byte) out << fmt::format(" root {:#04x}", *sw.root_byte);
    if (sw.stack_group) out << " stack " << *sw.stack_group;
    out << '\n';
  }
  for (const auto& l : t.links) out << fmt::format("link {}:{} {}:{}\n", l.parent, l.port, l.child, l.uplink_index);
  for (const auto& s : t.shortcuts) out << fmt::format("shortcut {} {}\n", s.a, s.b);
  for (const auto& [id, h] : t.hosts) {
    out << fmt::format("host {} at {}:{} mac {}", id, h.edge, h.port, h.mac.to_string());
    if (h.ip) out << " ip " << h.ip->to_string();
    out << '\n';
  }
  return out.str();
}

}  // namespace bigmac
