#pragma once

#include <cstdint>
#include <vector>

#include "bmiso/bigint.hpp"
#include "bmiso/errors.hpp"
#include "bmiso/kernel.hpp"
#include "bmiso/rng.hpp"
#include "bmiso/ucode.hpp"

namespace bmiso {

// The canonical code of a stretch [lo, lo+len) of [0, D): the shortest, then
// leftmost, dyadic interval contained in it.  Bits are the binary digits of
// the dyadic's left endpoint, most significant first.
inline UniformCode canonical_code(const BigInt& lo, const BigInt& len,
                                  const BigInt& D) {
  require(len > 0 && lo >= 0 && lo + len <= D, ErrorCode::DomainError,
          "empty or out-of-range stretch");
  std::size_t rho = 0;
  std::size_t dl = bit_length(D), ll = bit_length(len);
  if (dl > ll + 1) rho = dl - ll - 1;
  for (;; ++rho) {
    BigInt c = ceil_div(lo << rho, D);
    if ((c + 1) * D <= (lo + len) << rho) {
      UniformCode code;
      for (std::size_t i = 0; i < rho; ++i)
        code.push_bit(static_cast<int>(bit_test(c, rho - 1 - i)));
      return code;
    }
  }
}

// Bit source: a stored code first, then (optionally) fresh coin flips that
// are appended to the code so the consumed stream stays on record.
struct CodeCursor {
  UniformCode code;
  std::size_t pos = 0;
  RngStream* pad = nullptr;

  bool read(int& bit) {
    if (pos < code.size()) {
      bit = code.bit(pos++);
      return true;
    }
    if (pad != nullptr) {
      bit = pad->next_bit();
      code.push_bit(bit);
      ++pos;
      return true;
    }
    return false;
  }

  std::size_t consumed() const { return pos; }
  std::size_t remaining() const { return code.size() - pos; }
};

// The dyadic interval [num/2^rho, (num+1)/2^rho) pinned down by the bits
// read so far; refine() halves it with the next bit.
struct DyadicCursor {
  CodeCursor* src = nullptr;
  BigInt num = 0;
  std::size_t rho = 0;

  void refine() {
    int bit = 0;
    require(src->read(bit), ErrorCode::DecodeError,
            "code ran out mid-decode");
    num <<= 1;
    num += bit;
    ++rho;
  }

  bool inside(const BigInt& lo, const BigInt& hi, const BigInt& D) const {
    if (lo >= hi) return false;
    return num * D >= (lo << rho) && (num + 1) * D <= (hi << rho);
  }
};

// Corridor path of a conditioned bridge: sites x_0 = start .. x_L = target.
using CorridorPath = std::vector<std::int64_t>;

inline void check_corridor_path(const ConditionedKernel& k,
                                const CorridorPath& path) {
  require(path.size() == static_cast<std::size_t>(k.L) + 1,
          ErrorCode::LengthMismatch, "path length differs from kernel");
  require(path.front() == k.start, ErrorCode::PathInfeasible,
          "path starts off the kernel start");
  require(k.is_target(path.back()), ErrorCode::PathInfeasible,
          "path ends off target");
}

// Walks the choice tree along the path, accumulating the exact stretch of
// [0, D) the path owns, and returns its canonical code.
inline UniformCode encode_filler(const ConditionedKernel& k,
                                 const CorridorPath& path) {
  check_corridor_path(k, path);
  BigInt lo = 0;
  std::size_t beta = 0;
  for (Tick t = 0; t < k.L; ++t) {
    Tick left = k.L - t;
    std::int64_t x = path[static_cast<std::size_t>(t)];
    std::int64_t nxt = path[static_cast<std::size_t>(t) + 1];
    require(!k.is_target(x), ErrorCode::PathInfeasible,
            "path passes through a target early");
    if (k.is_wall(x)) {
      require(nxt == k.wall_exit(x), ErrorCode::PathInfeasible,
              "illegal wall step");
      ++beta;
      continue;
    }
    require(nxt == x - 1 || nxt == x + 1, ErrorCode::PathInfeasible,
            "step is not a lattice move");
    const BigInt& down = k.weight(left - 1, x - 1);
    const BigInt& up = k.weight(left - 1, x + 1);
    if (nxt == x + 1) {
      require(up > 0, ErrorCode::PathInfeasible, "path enters a dead end");
      lo += down << beta;
    } else {
      require(down > 0, ErrorCode::PathInfeasible, "path enters a dead end");
    }
  }
  return canonical_code(lo, BigInt(1) << beta, k.D);
}

// Inverse walk: reads bits until the cursor's dyadic interval fits inside a
// child stretch, descending to the unique leaf the code selects.  Fed the
// output of encode_filler (plus any suffix) it consumes exactly the encoded
// bits; fed coin flips it lands on each leaf with its conditional weight.
inline CorridorPath decode_filler(const ConditionedKernel& k,
                                  CodeCursor& src) {
  DyadicCursor cur{&src};
  CorridorPath path{k.start};
  BigInt lo = 0;
  std::size_t beta = 0;
  std::int64_t x = k.start;
  for (Tick left = k.L; left >= 1; --left) {
    if (k.is_wall(x)) {
      x = k.wall_exit(x);
      ++beta;
      path.push_back(x);
      continue;
    }
    const BigInt& down = k.weight(left - 1, x - 1);
    const BigInt& up = k.weight(left - 1, x + 1);
    BigInt mid = lo + (down << beta);
    BigInt hi = mid + (up << beta);
    for (;;) {
      if (down > 0 && cur.inside(lo, mid, k.D)) {
        --x;
        break;
      }
      if (up > 0 && cur.inside(mid, hi, k.D)) {
        ++x;
        lo = mid;
        break;
      }
      cur.refine();
    }
    path.push_back(x);
  }
  return path;
}

// Fresh draw from the kernel's conditional law.
inline CorridorPath sample_filler(const ConditionedKernel& k, RngStream& rng) {
  BigInt v = big_below(rng, k.D);
  CorridorPath path{k.start};
  BigInt lo = 0;
  std::size_t beta = 0;
  std::int64_t x = k.start;
  for (Tick left = k.L; left >= 1; --left) {
    if (k.is_wall(x)) {
      x = k.wall_exit(x);
      ++beta;
      path.push_back(x);
      continue;
    }
    BigInt mid = lo + (k.weight(left - 1, x - 1) << beta);
    if (v < mid) {
      --x;
    } else {
      ++x;
      lo = mid;
    }
    path.push_back(x);
  }
  return path;
}

// Exact leaf stretch of a path (exposed for tests and audits).
struct LeafStretch {
  BigInt lo;
  BigInt len;
};

inline LeafStretch leaf_stretch(const ConditionedKernel& k,
                                const CorridorPath& path) {
  check_corridor_path(k, path);
  BigInt lo = 0;
  std::size_t beta = 0;
  for (Tick t = 0; t < k.L; ++t) {
    Tick left = k.L - t;
    std::int64_t x = path[static_cast<std::size_t>(t)];
    std::int64_t nxt = path[static_cast<std::size_t>(t) + 1];
    if (k.is_wall(x)) {
      ++beta;
      continue;
    }
    if (nxt == x + 1) lo += k.weight(left - 1, x - 1) << beta;
  }
  return {lo, BigInt(1) << beta};
}

}  // namespace bmiso
