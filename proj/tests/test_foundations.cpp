#include <catch2/catch_amalgamated.hpp>

#include "bmiso/bigint.hpp"
#include "bmiso/rng.hpp"
#include "bmiso/ucode.hpp"

using namespace bmiso;

TEST_CASE("rng streams are reproducible and keyed") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    auto x = a.next_u64();
    REQUIRE(x == b.next_u64());
  }
  bool differs = false;
  RngStream a2(42, 7);
  for (int i = 0; i < 100; ++i)
    if (a2.next_u64() != c.next_u64()) differs = true;
  REQUIRE(differs);

  a.reset();
  RngStream fresh(42, 7);
  REQUIRE(a.next_u64() == fresh.next_u64());
}

TEST_CASE("rng below is in range and roughly uniform") {
  RngStream rng(1, 0);
  int counts[7] = {0};
  for (int i = 0; i < 70000; ++i) {
    auto x = rng.below(7);
    REQUIRE(x < 7);
    counts[x]++;
  }
  for (int k = 0; k < 7; ++k) {
    REQUIRE(counts[k] > 9000);
    REQUIRE(counts[k] < 11000);
  }
}

TEST_CASE("rng bits are roughly fair and gaussians have right moments") {
  RngStream rng(3, 1);
  long ones = 0;
  const long n = 200000;
  for (long i = 0; i < n; ++i) ones += rng.next_bit();
  double frac = double(ones) / double(n);
  REQUIRE(frac > 0.49);
  REQUIRE(frac < 0.51);

  double sum = 0, sum2 = 0;
  const int ng = 100000;
  for (int i = 0; i < ng; ++i) {
    double g = rng.gaussian();
    sum += g;
    sum2 += g * g;
  }
  REQUIRE(std::abs(sum / ng) < 0.02);
  REQUIRE(std::abs(sum2 / ng - 1.0) < 0.03);
}

TEST_CASE("big_below respects the bound and hits small values") {
  RngStream rng(5, 2);
  BigInt n = BigInt("123456789012345678901234567890");
  BigInt lo = n;
  for (int i = 0; i < 200; ++i) {
    BigInt x = big_below(rng, n);
    REQUIRE(x >= 0);
    REQUIRE(x < n);
    if (x < lo) lo = x;
  }
  REQUIRE(lo < n / 2);
  REQUIRE(big_below(rng, BigInt(1)) == 0);
}

TEST_CASE("bit_length matches binary length") {
  REQUIRE(bit_length(BigInt(0)) == 0);
  REQUIRE(bit_length(BigInt(1)) == 1);
  REQUIRE(bit_length(BigInt(2)) == 2);
  REQUIRE(bit_length(BigInt(255)) == 8);
  REQUIRE(bit_length(BigInt(256)) == 9);
}

TEST_CASE("ucode push, read, value, and integer forms agree") {
  UniformCode u;
  for (int b : {1, 0, 1, 1, 0, 0, 1}) u.push_bit(b);
  REQUIRE(u.size() == 7);
  REQUIRE(u.bit(0) == 1);
  REQUIRE(u.bit(1) == 0);
  REQUIRE(u.bit(6) == 1);
  // 0.1011001 in binary
  REQUIRE(u.value() == Catch::Approx(0.5 + 0.125 + 0.0625 + 1.0 / 128));
  REQUIRE(u.as_integer() == 0b1011001);
  REQUIRE(UniformCode::from_integer(u.as_integer(), 7) == u);

  UniformCode long_code;
  RngStream rng(9, 9);
  for (int i = 0; i < 300; ++i) long_code.push_bit(rng.next_bit());
  REQUIRE(UniformCode::from_integer(long_code.as_integer(), 300) == long_code);
}

TEST_CASE("ucode hex round trip") {
  RngStream rng(11, 0);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 64u, 65u, 200u}) {
    UniformCode u;
    for (std::size_t i = 0; i < n; ++i) u.push_bit(rng.next_bit());
    REQUIRE(UniformCode::from_hex(u.to_hex(), n) == u);
  }
  UniformCode u;
  u.push_bit(1);
  u.push_bit(0);
  u.push_bit(1);
  u.push_bit(1);
  REQUIRE(u.to_hex() == "b");
}

TEST_CASE("ucode append and subcode") {
  UniformCode a, b;
  for (int i = 0; i < 70; ++i) a.push_bit(i % 3 == 0);
  for (int i = 0; i < 5; ++i) b.push_bit(1);
  UniformCode c = a;
  c.append(b);
  REQUIRE(c.size() == 75);
  REQUIRE(c.subcode(0, 70) == a);
  REQUIRE(c.subcode(70, 5) == b);
}

TEST_CASE("merge and split are a bijection given lengths") {
  RngStream rng(13, 4);
  for (int rep = 0; rep < 50; ++rep) {
    std::size_t la = rng.below(40), lb = rng.below(40);
    UniformCode a, b;
    for (std::size_t i = 0; i < la; ++i) a.push_bit(rng.next_bit());
    for (std::size_t i = 0; i < lb; ++i) b.push_bit(rng.next_bit());
    auto m = merge_bits(a, b);
    REQUIRE(m.size() == la + lb);
    auto [a2, b2] = split_bits(m, la, lb);
    REQUIRE(a2 == a);
    REQUIRE(b2 == b);
  }
  // Leading bits interleave: 0... with 1... gives 01...
  UniformCode x, y;
  x.push_bit(0);
  y.push_bit(1);
  auto m = merge_bits(x, y);
  REQUIRE(m.bit(0) == 0);
  REQUIRE(m.bit(1) == 1);
}

TEST_CASE("split rejects inconsistent lengths") {
  UniformCode m;
  m.push_bit(1);
  REQUIRE_THROWS_AS(split_bits(m, 1, 1), Error);
}
