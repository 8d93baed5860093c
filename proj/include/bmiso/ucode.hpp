#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmiso/bigint.hpp"
#include "bmiso/errors.hpp"

namespace bmiso {

// A finite bit string read as the binary expansion of a number in [0, 1):
// bit 0 is the most significant. Used for the uniform marks carried by
// point processes and for all codec payloads.
class UniformCode {
 public:
  UniformCode() = default;

  std::size_t size() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }

  int bit(std::size_t i) const {
    return static_cast<int>((words_[i >> 6] >> (i & 63u)) & 1u);
  }

  void push_bit(int b) {
    if ((nbits_ & 63u) == 0) words_.push_back(0);
    if (b) words_.back() |= std::uint64_t{1} << (nbits_ & 63u);
    ++nbits_;
  }

  void append(const UniformCode& other) {
    for (std::size_t i = 0; i < other.nbits_; ++i) push_bit(other.bit(i));
  }

  UniformCode subcode(std::size_t from, std::size_t len) const {
    UniformCode out;
    for (std::size_t i = 0; i < len; ++i) out.push_bit(bit(from + i));
    return out;
  }

  bool operator==(const UniformCode& other) const {
    if (nbits_ != other.nbits_) return false;
    for (std::size_t i = 0; i < nbits_; ++i)
      if (bit(i) != other.bit(i)) return false;
    return true;
  }
  bool operator!=(const UniformCode& other) const { return !(*this == other); }

  // Value of the expansion, truncated to the first 53 bits.
  double value() const {
    double v = 0.0, w = 0.5;
    std::size_t n = nbits_ < 53 ? nbits_ : 53;
    for (std::size_t i = 0; i < n; ++i, w *= 0.5)
      if (bit(i)) v += w;
    return v;
  }

  // The bit string as an integer with bit 0 most significant.
  BigInt as_integer() const {
    BigInt x = 0;
    for (std::size_t i = 0; i < nbits_; ++i) {
      x <<= 1;
      if (bit(i)) x += 1;
    }
    return x;
  }

  static UniformCode from_integer(const BigInt& x, std::size_t nbits) {
    UniformCode out;
    for (std::size_t i = 0; i < nbits; ++i)
      out.push_bit(boost::multiprecision::bit_test(x, unsigned(nbits - 1 - i))
                       ? 1
                       : 0);
    return out;
  }

  // Hex form, four bits per character, first bit as the leading nibble's
  // most significant bit. The bit count travels separately.
  std::string to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve((nbits_ + 3) / 4);
    for (std::size_t i = 0; i < nbits_; i += 4) {
      int nib = 0;
      for (std::size_t j = 0; j < 4; ++j) {
        nib <<= 1;
        if (i + j < nbits_ && bit(i + j)) nib |= 1;
      }
      out.push_back(digits[nib]);
    }
    return out;
  }

  static UniformCode from_hex(const std::string& hex, std::size_t nbits) {
    require(hex.size() == (nbits + 3) / 4, ErrorCode::LengthMismatch,
            "hex length does not match declared bit count");
    UniformCode out;
    for (std::size_t i = 0; i < nbits; ++i) {
      char c = hex[i / 4];
      int nib = c >= 'a' ? c - 'a' + 10 : (c >= 'A' ? c - 'A' + 10 : c - '0');
      require(nib >= 0 && nib < 16, ErrorCode::ConfigError, "bad hex digit");
      out.push_bit((nib >> (3 - i % 4)) & 1);
    }
    return out;
  }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t nbits_ = 0;
};

// Interleave two codes bit by bit, then append whatever remains of the
// longer one. Together with the two lengths this is a bijection.
inline UniformCode merge_bits(const UniformCode& a, const UniformCode& b) {
  UniformCode out;
  std::size_t common = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < common; ++i) {
    out.push_bit(a.bit(i));
    out.push_bit(b.bit(i));
  }
  for (std::size_t i = common; i < a.size(); ++i) out.push_bit(a.bit(i));
  for (std::size_t i = common; i < b.size(); ++i) out.push_bit(b.bit(i));
  return out;
}

inline std::pair<UniformCode, UniformCode> split_bits(const UniformCode& m,
                                                      std::size_t len_a,
                                                      std::size_t len_b) {
  require(m.size() == len_a + len_b, ErrorCode::LengthMismatch,
          "merged code length does not match the two parts");
  UniformCode a, b;
  std::size_t common = len_a < len_b ? len_a : len_b;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < common; ++i) {
    a.push_bit(m.bit(pos++));
    b.push_bit(m.bit(pos++));
  }
  while (a.size() < len_a) a.push_bit(m.bit(pos++));
  while (b.size() < len_b) b.push_bit(m.bit(pos++));
  return {a, b};
}

}  // namespace bmiso
