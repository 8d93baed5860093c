#pragma once

#include <cmath>
#include <cstdint>

namespace bmiso {

// Deterministic splitmix64 generator keyed by (seed, stream_id).
// Every consumer of randomness takes an explicit stream so that replicated
// experiments can be merged by stream index without draw-order coupling.
class RngStream {
 public:
  RngStream() { reset(); }
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    reset();
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  void reset() {
    state_ = mix(seed_ + 0x9e3779b97f4a7c15ull);
    state_ = mix(state_ ^ mix(stream_id_ + 0xbf58476d1ce4e5b9ull));
    bit_cache_ = 0;
    bits_left_ = 0;
    have_spare_ = false;
    spare_ = 0.0;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // One fair bit; refilled 64 at a time.
  int next_bit() {
    if (bits_left_ == 0) {
      bit_cache_ = next_u64();
      bits_left_ = 64;
    }
    int b = static_cast<int>(bit_cache_ & 1u);
    bit_cache_ >>= 1;
    --bits_left_;
    return b;
  }

  // Uniform on {0, ..., n-1}, unbiased by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    for (;;) {
      std::uint64_t x = next_u64();
      if (x <= limit) return x % n;
    }
  }

  // Uniform on [0, 1) with 53 random bits.
  double real53() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller, one spare cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = real53();
    double u2 = real53();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t state_ = 0;
  std::uint64_t bit_cache_ = 0;
  int bits_left_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bmiso
