#include <fmt/format.h>

#include "bigmac/error.hpp"
#include "bigmac/topology.hpp"

namespace bigmac {

namespace {

constexpr long kMaxGeneratedNodes = 2'000'000;

std::string switch_name(int tier, long index, long count) {
  const int width = static_cast<int>(fmt::format("{}", count).size());
  if (tier == 1) return fmt::format("r{:0{}}", index + 1, width);
  return fmt::format("s{}_{:0{}}", tier, index + 1, width);
}

}  // namespace

Topology generate_regular(const RegularParams& p) {
  if (p.levels < 1 || p.levels > 5) throw Error(Errc::bad_fanout, fmt::format("levels {} outside 1..5", p.levels));
  if (p.up < 1 || p.up > kDeltaMaxUplinks) throw Error(Errc::bad_fanout, fmt::format("u={} outside 1..8", p.up));
  if (p.down < p.up) throw Error(Errc::bad_fanout, fmt::format("need d >= u, got u={} d={}", p.up, p.down));
  if (p.down > 255) throw Error(Errc::bad_fanout, fmt::format("d={} exceeds 255 ports", p.down));
  const int top = p.top.value_or(p.down);
  const int per_edge = p.hosts_per_edge.value_or(std::max(1, p.down / p.up));
  if (top < 1 || top > 255) throw Error(Errc::bad_fanout, fmt::format("top-tier count {} outside 1..255", top));
  if (per_edge < 1 || per_edge > 255) throw Error(Errc::bad_fanout, fmt::format("hosts per edge {} outside 1..255", per_edge));

  std::vector<long> count{top};
  long total = top;
  for (int tier = 2; tier <= p.levels; ++tier) {
    const long parents = count.back();
    if (parents % p.up != 0) {
      throw Error(Errc::bad_fanout,
                  fmt::format("tier {} has {} switches, not a multiple of u={}", tier - 1, parents, p.up));
    }
    count.push_back(parents / p.up * p.down);
    total += count.back();
    if (total > kMaxGeneratedNodes) throw Error(Errc::bad_fanout, "generated topology too large");
  }
  const long host_count = count.back() * per_edge;
  if (total + host_count > kMaxGeneratedNodes) throw Error(Errc::bad_fanout, "generated topology too large");

  Topology t;
  for (int tier = 1; tier <= p.levels; ++tier) {
    for (long i = 0; i < count[tier - 1]; ++i) {
      SwitchDecl sw{switch_name(tier, i, count[tier - 1]), tier, std::nullopt, std::nullopt};
      if (tier == 1) sw.root_byte = static_cast<std::uint8_t>(i + 1);
      t.add_switch(std::move(sw));
    }
  }
  for (int tier = 1; tier < p.levels; ++tier) {
    for (long parent = 0; parent < count[tier - 1]; ++parent) {
      const long block = parent / p.up;
      const auto uplink = static_cast<std::uint8_t>(parent % p.up);
      for (int j = 0; j < p.down; ++j) {
        const long child = block * p.down + j;
        t.add_link(switch_name(tier, parent, count[tier - 1]), static_cast<std::uint8_t>(j + 1),
                   switch_name(tier + 1, child, count[tier]), uplink);
      }
    }
  }
  const int width = static_cast<int>(fmt::format("{}", host_count).size());
  for (long e = 0; e < count.back(); ++e) {
    for (int k = 0; k < per_edge; ++k) {
      const long n = e * per_edge + k + 1;
      const Octets mac{0x02, 0x00, 0x00, static_cast<std::uint8_t>(n >> 16), static_cast<std::uint8_t>(n >> 8),
                       static_cast<std::uint8_t>(n)};
      t.add_host(HostDecl{fmt::format("h{:0{}}", n, width), switch_name(p.levels, e, count.back()),
                          static_cast<std::uint8_t>(k + 1), MacAddr(mac), std::nullopt});
    }
  }
  return t;
}

}  // namespace bigmac
