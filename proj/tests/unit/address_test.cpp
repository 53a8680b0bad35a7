#include <gtest/gtest.h>

#include <cmath>

#include "bigmac/address.hpp"
#include "bigmac/error.hpp"

using namespace bigmac;

TEST(BigMac, RootAndExtend) {
  const auto r = BigMac::root(0x01);
  EXPECT_EQ(r.tier(), 1);
  EXPECT_EQ(r.to_string(), "01:00:00:00:00:00");
  const auto h = r.extend(2).extend(1);
  EXPECT_EQ(h.to_string(), "01:02:01:00:00:00");
  EXPECT_EQ(h.tier(), 3);
  EXPECT_EQ(h.prefix(2).to_string(), "01:02:00:00:00:00");
  EXPECT_TRUE(h.has_prefix(r));
}

TEST(BigMac, ExtendErrors) {
  auto a = BigMac::root(7);
  EXPECT_THROW(a.extend(0), Error);
  for (int i = 0; i < 5; ++i) a = a.extend(1);
  EXPECT_EQ(a.tier(), 6);
  try {
    a.extend(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::tier_overflow);
  }
}

TEST(BigMac, ExtendIsMonotone) {
  // Every extension keeps the old address as its prefix and grows the tier by one.
  for (int root = 1; root < 256; root += 37) {
    auto a = BigMac::root(static_cast<std::uint8_t>(root));
    for (int port = 1; port < 256 && a.tier() < kMaxTier; port += 53) {
      const auto b = a.extend(static_cast<std::uint8_t>(port));
      EXPECT_EQ(b.tier(), a.tier() + 1);
      EXPECT_TRUE(b.has_prefix(a));
      EXPECT_EQ(b.prefix(a.tier()), a);
      a = b;
    }
  }
}

TEST(BigMac, FromMacRequiresPadding) {
  EXPECT_TRUE(BigMac::from_mac(MacAddr::parse("01:02:00:00:00:00")));
  EXPECT_FALSE(BigMac::from_mac(MacAddr::parse("01:00:02:00:00:00")));
  EXPECT_FALSE(BigMac::from_mac(MacAddr()));
  EXPECT_FALSE(BigMac::from_mac(MacAddr::broadcast()));
  EXPECT_EQ(BigMac::parse("02:01:01:00:00:00").tier(), 3);
}

TEST(BigMac, CommonPrefix) {
  EXPECT_EQ(common_prefix_len(BigMac::parse("01:01:01:00:00:00"), BigMac::parse("01:02:01:00:00:00")), 1);
  EXPECT_EQ(common_prefix_len(BigMac::parse("01:01:01:00:00:00"), BigMac::parse("02:01:01:00:00:00")), 0);
  EXPECT_EQ(common_prefix_len(BigMac::parse("01:01:01:00:00:00"), BigMac::parse("01:01:00:00:00:00")), 2);
}

TEST(Delta, RoundTripsEveryValidPair) {
  for (int k = 0; k < kDeltaMaxUplinks; ++k) {
    for (int p = 1; p <= kDeltaMaxPort; ++p) {
      const auto b = pack_delta(static_cast<std::uint8_t>(k), static_cast<std::uint8_t>(p));
      const auto d = unpack_delta(b);
      EXPECT_EQ(d.uplink_index, k);
      EXPECT_EQ(d.downlink_port, p);
      EXPECT_EQ(port_of_byte(b, AddressEncoding::delta), p);
    }
  }
}

TEST(Delta, Examples) {
  EXPECT_EQ(pack_delta(2, 5), 0x45);
  EXPECT_EQ(port_of_byte(0x45, AddressEncoding::delta), 5);
  EXPECT_EQ(port_of_byte(0x45, AddressEncoding::plain), 0x45);
  EXPECT_THROW(pack_delta(0, 0), Error);
  EXPECT_THROW(pack_delta(0, 32), Error);
  EXPECT_THROW(pack_delta(8, 1), Error);
  EXPECT_THROW(unpack_delta(0x40), Error);
}

TEST(ExpectedAddresses, ReferenceFanouts) {
  // u=2, d=32 gives the fourth root of N.
  EXPECT_NEAR(expected_addresses({65536, 2, 32}), 16.0, 1e-9);
  EXPECT_NEAR(expected_addresses({1024, 2, 32}), std::pow(1024.0, 0.25), 1e-9);
  // u=2, d=8: exponent 1/2.
  EXPECT_NEAR(expected_addresses({512, 2, 8}), 22.627417, 1e-6);
  EXPECT_DOUBLE_EQ(expected_addresses({1000, 1, 8}), 1.0);
}

TEST(ExpectedAddresses, RejectsBadFanout) {
  EXPECT_THROW(expected_addresses({100, 4, 4}), Error);
  EXPECT_THROW(expected_addresses({100, 5, 4}), Error);
  EXPECT_THROW(expected_addresses({100, 0, 4}), Error);
  EXPECT_THROW(expected_addresses({0, 2, 4}), Error);
}

TEST(ExpectedAddresses, MonotoneInHostsAndUplinks) {
  for (int d = 4; d <= 64; d *= 2) {
    double prev = 0;
    for (double n = 2; n < 1e7; n *= 3) {
      const double v = expected_addresses({n, 2, d});
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
  for (double n : {100.0, 1e4, 1e6}) {
    EXPECT_LT(expected_addresses({n, 2, 32}), expected_addresses({n, 3, 32}));
    EXPECT_GT(expected_addresses({n, 2, 16}), expected_addresses({n, 2, 32}));
  }
}
