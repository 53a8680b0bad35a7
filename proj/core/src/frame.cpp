#include "bigmac/frame.hpp"

namespace bigmac {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void mac(const MacAddr& m) { out_.insert(out_.end(), m.bytes().begin(), m.bytes().end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return in_[at_++]; }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | in_[at_++];
    return v;
  }
  MacAddr mac() {
    Octets b{};
    for (auto& x : b) x = in_[at_++];
    return MacAddr(b);
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t at_ = 0;
};

}  // namespace

std::vector<std::uint8_t> ArpRecord::encode() const {
  Writer w;
  w.u8(static_cast<std::uint8_t>(op));
  w.mac(sender_mac);
  w.u32(sender_ip.value());
  w.mac(target_mac);
  w.u32(target_ip.value());
  w.u32(seq);
  return w.take();
}

std::optional<ArpRecord> ArpRecord::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != 25) return std::nullopt;
  Reader r(bytes);
  ArpRecord a;
  const auto op = r.u8();
  if (op != 1 && op != 2) return std::nullopt;
  a.op = static_cast<Op>(op);
  a.sender_mac = r.mac();
  a.sender_ip = Ipv4Addr(r.u32());
  a.target_mac = r.mac();
  a.target_ip = Ipv4Addr(r.u32());
  a.seq = r.u32();
  return a;
}

std::vector<std::uint8_t> DhcpRecord::encode() const {
  Writer w;
  w.u8(static_cast<std::uint8_t>(op));
  w.mac(client_mac);
  w.u32(seq);
  w.u32(yiaddr.value());
  return w.take();
}

std::optional<DhcpRecord> DhcpRecord::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != 15) return std::nullopt;
  Reader r(bytes);
  DhcpRecord d;
  const auto op = r.u8();
  if (op < 1 || op > 3) return std::nullopt;
  d.op = static_cast<Op>(op);
  d.client_mac = r.mac();
  d.seq = r.u32();
  d.yiaddr = Ipv4Addr(r.u32());
  return d;
}

std::vector<std::uint8_t> EchoRecord::encode() const {
  Writer w;
  w.u8(static_cast<std::uint8_t>(op));
  w.u32(src_ip.value());
  w.u32(dst_ip.value());
  w.u32(id);
  return w.take();
}

std::optional<EchoRecord> EchoRecord::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != 13) return std::nullopt;
  Reader r(bytes);
  EchoRecord e;
  const auto op = r.u8();
  if (op != 1 && op != 2) return std::nullopt;
  e.op = static_cast<Op>(op);
  e.src_ip = Ipv4Addr(r.u32());
  e.dst_ip = Ipv4Addr(r.u32());
  e.id = r.u32();
  return e;
}

std::string describe(const Frame& f) {
  switch (f.ethertype) {
    case kEtherArp:
      if (auto a = ArpRecord::decode(f.payload)) {
        return a->op == ArpRecord::Op::request ? "arp-req " + a->target_ip.to_string()
                                               : "arp-rep " + a->sender_ip.to_string();
      }
      return "arp-?";
    case kEtherIpv4:
      if (auto d = DhcpRecord::decode(f.payload)) {
        switch (d->op) {
          case DhcpRecord::Op::request: return "dhcp-req";
          case DhcpRecord::Op::ack: return "dhcp-ack " + d->yiaddr.to_string();
          case DhcpRecord::Op::nak: return "dhcp-nak";
        }
      }
      return "ipv4-?";
    case kEtherEcho:
      if (auto e = EchoRecord::decode(f.payload)) {
        return (e->op == EchoRecord::Op::request ? "echo-req #" : "echo-rep #") + std::to_string(e->id);
      }
      return "echo-?";
    default:
      return "other";
  }
}

}  // namespace bigmac
