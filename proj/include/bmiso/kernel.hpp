#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "bmiso/bigint.hpp"
#include "bmiso/binio.hpp"
#include "bmiso/errors.hpp"
#include "bmiso/lattice.hpp"

namespace bmiso {

// Inside one partition interval the walk is a bridge: it starts on a level,
// must reach a prescribed neighbour level for the first time after exactly L
// steps, and may not touch any other level on the way.  Four corridor shapes
// cover every case:
//   ReflectedUp    wall at 0 (forced step), absorb at m
//   ReflectedDown  wall at m, absorb at 0
//   CyclicSingle   absorb at 2m, site 0 excluded (the unchosen neighbour)
//   CyclicDouble   absorb at both 0 and 2m (two-band circle; the exit side
//                  is part of the path data)
// Weights F[k][x] count sign paths reaching a target in exactly k more steps
// doubled once per forced wall step, so every conditioned path owns an
// integer stretch of [0, D) of length 2^(wall visits), D = F[L][start].
enum class KernelKind : std::uint8_t {
  ReflectedUp = 0,
  ReflectedDown = 1,
  CyclicSingle = 2,
  CyclicDouble = 3
};

inline const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::ReflectedUp: return "reflected_up";
    case KernelKind::ReflectedDown: return "reflected_down";
    case KernelKind::CyclicSingle: return "cyclic_single";
    case KernelKind::CyclicDouble: return "cyclic_double";
  }
  return "?";
}

struct ConditionedKernel {
  KernelKind kind = KernelKind::ReflectedUp;
  std::uint32_t m = 2;
  Tick L = 0;
  std::int64_t width = 0;
  std::int64_t start = 0;
  std::vector<std::vector<BigInt>> F;  // F[k][x], k = 0..L, x = 0..width
  BigInt D;

  bool is_target(std::int64_t x) const {
    switch (kind) {
      case KernelKind::ReflectedUp: return x == width;
      case KernelKind::ReflectedDown: return x == 0;
      case KernelKind::CyclicSingle: return x == width;
      case KernelKind::CyclicDouble: return x == 0 || x == width;
    }
    return false;
  }

  bool is_wall(std::int64_t x) const {
    if (kind == KernelKind::ReflectedUp) return x == 0;
    if (kind == KernelKind::ReflectedDown) return x == width;
    return false;
  }

  // The one legal move from a wall site.
  std::int64_t wall_exit(std::int64_t x) const { return x == 0 ? 1 : x - 1; }

  const BigInt& weight(Tick k, std::int64_t x) const {
    if (x < 0 || x > width) {
      static const BigInt zero = 0;
      return zero;
    }
    return F[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)];
  }
};

inline ConditionedKernel build_kernel(KernelKind kind, std::uint32_t m,
                                      Tick L) {
  require(m >= 2, ErrorCode::DomainError, "need at least two value steps");
  require(L >= 1, ErrorCode::DomainError, "interval must last a step");
  ConditionedKernel k;
  k.kind = kind;
  k.m = m;
  k.L = L;
  bool reflected =
      kind == KernelKind::ReflectedUp || kind == KernelKind::ReflectedDown;
  k.width = reflected ? static_cast<std::int64_t>(m)
                      : 2 * static_cast<std::int64_t>(m);
  k.start = reflected
                ? (kind == KernelKind::ReflectedUp ? 0 : k.width)
                : static_cast<std::int64_t>(m);

  k.F.assign(static_cast<std::size_t>(L) + 1,
             std::vector<BigInt>(static_cast<std::size_t>(k.width) + 1, 0));
  for (std::int64_t x = 0; x <= k.width; ++x)
    if (k.is_target(x)) k.F[0][static_cast<std::size_t>(x)] = 1;
  for (Tick step = 1; step <= L; ++step) {
    auto& cur = k.F[static_cast<std::size_t>(step)];
    const auto& prev = k.F[static_cast<std::size_t>(step) - 1];
    for (std::int64_t x = 0; x <= k.width; ++x) {
      if (k.is_target(x)) continue;  // absorbed, no continuation
      if (k.is_wall(x)) {
        cur[static_cast<std::size_t>(x)] =
            2 * prev[static_cast<std::size_t>(k.wall_exit(x))];
      } else if (x > 0 && x < k.width) {
        cur[static_cast<std::size_t>(x)] =
            prev[static_cast<std::size_t>(x) - 1] +
            prev[static_cast<std::size_t>(x) + 1];
      }
      // Remaining edge sites (the excluded neighbour of CyclicSingle) stay 0.
    }
  }
  k.D = k.F[static_cast<std::size_t>(L)][static_cast<std::size_t>(k.start)];
  require(k.D > 0, ErrorCode::InfeasibleDuration,
          std::string(kernel_kind_name(kind)) + " has no path of length " +
              std::to_string(L));
  return k;
}

// Number of sign paths from a band seam of the two-band circle whose first
// return to a seam happens at exactly step L (no wall, so counts are plain).
inline BigInt cyclic_exit_count(std::uint32_t m, Tick L) {
  require(m >= 2 && L >= 1, ErrorCode::DomainError, "bad exit-count query");
  std::int64_t width = 2 * static_cast<std::int64_t>(m);
  std::vector<BigInt> prev(static_cast<std::size_t>(width) + 1, 0), cur;
  prev[0] = 1;
  prev[static_cast<std::size_t>(width)] = 1;
  for (Tick step = 1; step <= L; ++step) {
    cur.assign(prev.size(), 0);
    for (std::int64_t x = 1; x < width; ++x)
      cur[static_cast<std::size_t>(x)] = prev[static_cast<std::size_t>(x) - 1] +
                                         prev[static_cast<std::size_t>(x) + 1];
    prev.swap(cur);
  }
  return prev[static_cast<std::size_t>(m)];
}

inline void save_kernel(const ConditionedKernel& k, std::ostream& os) {
  binio::write_magic(os, "BMKC");
  binio::write_pod<std::uint32_t>(os, 1);
  binio::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(k.kind));
  binio::write_pod<std::uint32_t>(os, k.m);
  binio::write_pod<std::int64_t>(os, k.L);
  for (const auto& row : k.F)
    for (const auto& v : row) binio::write_bytes(os, big_to_bytes(v));
}

inline ConditionedKernel load_kernel(std::istream& is) {
  binio::expect_magic(is, "BMKC", "kernel file");
  auto version = binio::read_pod<std::uint32_t>(is);
  require(version == 1, ErrorCode::ConfigError, "unknown kernel version");
  auto kind = static_cast<KernelKind>(binio::read_pod<std::uint8_t>(is));
  auto m = binio::read_pod<std::uint32_t>(is);
  auto L = binio::read_pod<std::int64_t>(is);
  auto k = build_kernel(kind, m, L);  // geometry is cheap to rebuild
  for (auto& row : k.F)
    for (auto& v : row) {
      BigInt stored = big_from_bytes(binio::read_bytes(is));
      require(stored == v, ErrorCode::ConfigError,
              "kernel file disagrees with its own key");
      v = std::move(stored);
    }
  return k;
}

// Shared kernels keyed by shape; an optional directory persists them across
// runs, and unreadable or stale files are silently rebuilt and rewritten.
class KernelCache {
 public:
  explicit KernelCache(std::string dir = "") : dir_(std::move(dir)) {}

  std::shared_ptr<const ConditionedKernel> get(KernelKind kind,
                                               std::uint32_t m, Tick L) {
    auto key = std::make_tuple(kind, m, L);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = mem_.find(key);
      if (it != mem_.end()) return it->second;
    }

    std::shared_ptr<const ConditionedKernel> kern;
    std::string file = file_name(kind, m, L);
    if (!dir_.empty() && L <= keep_) {
      std::ifstream is(file, std::ios::binary);
      if (is) {
        try {
          kern = std::make_shared<ConditionedKernel>(load_kernel(is));
        } catch (const Error&) {
          kern.reset();
        }
      }
    }
    if (!kern) {
      kern = std::make_shared<ConditionedKernel>(build_kernel(kind, m, L));
      if (!dir_.empty() && L <= keep_) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        std::ofstream os(file, std::ios::binary);
        if (os) save_kernel(*kern, os);
      }
    }
    if (L <= keep_) {
      std::lock_guard<std::mutex> lock(mu_);
      mem_.emplace(key, kern);
    }
    return kern;
  }

  std::size_t in_memory() const {
    std::lock_guard<std::mutex> lock(mu_);
    return mem_.size();
  }

  void clear() {
    std::lock_guard<std::mutex> lock(mu_);
    mem_.clear();
  }

  // Tables grow quadratically with the duration, so deep tail gaps would pin
  // unbounded memory; kernels past the limit are rebuilt per use instead.
  void set_retention(Tick max_kept) { keep_ = max_kept; }

  std::string file_name(KernelKind kind, std::uint32_t m, Tick L) const {
    return dir_ + "/kernel_" + kernel_kind_name(kind) + "_m" +
           std::to_string(m) + "_L" + std::to_string(L) + ".bmkc";
  }

 private:
  mutable std::mutex mu_;
  Tick keep_ = std::numeric_limits<Tick>::max();
  std::map<std::tuple<KernelKind, std::uint32_t, Tick>,
           std::shared_ptr<const ConditionedKernel>>
      mem_;
  std::string dir_;
};

}  // namespace bmiso
