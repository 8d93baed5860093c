#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <vector>

#include "bmiso/rng.hpp"

namespace bmiso {

using BigInt = boost::multiprecision::cpp_int;

// Number of bits needed to write x in binary; 0 for x = 0.
inline std::size_t bit_length(const BigInt& x) {
  if (x == 0) return 0;
  return boost::multiprecision::msb(x) + 1;
}

inline BigInt pow2(std::size_t n) { return BigInt(1) << n; }

inline BigInt ceil_div(const BigInt& a, const BigInt& b) {
  return (a + b - 1) / b;
}

// Uniform on {0, ..., n-1} by k-bit rejection.
inline BigInt big_below(RngStream& rng, const BigInt& n) {
  if (n <= 1) return 0;
  std::size_t k = bit_length(n);
  for (;;) {
    BigInt x = 0;
    std::size_t whole = k / 64, rest = k % 64;
    for (std::size_t i = 0; i < whole; ++i) {
      x <<= 64;
      x += rng.next_u64();
    }
    if (rest > 0) {
      x <<= rest;
      x += rng.next_u64() >> (64 - rest);
    }
    if (x < n) return x;
  }
}

inline std::vector<std::uint8_t> big_to_bytes(const BigInt& x) {
  std::vector<std::uint8_t> out;
  if (x != 0) boost::multiprecision::export_bits(x, std::back_inserter(out), 8);
  return out;
}

inline BigInt big_from_bytes(const std::vector<std::uint8_t>& bytes) {
  BigInt x = 0;
  if (!bytes.empty())
    boost::multiprecision::import_bits(x, bytes.begin(), bytes.end(), 8);
  return x;
}

}  // namespace bmiso
