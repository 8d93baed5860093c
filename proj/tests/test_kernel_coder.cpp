#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <map>
#include <sstream>
#include <vector>

#include "bmiso/coder.hpp"
#include "bmiso/kernel.hpp"
#include "bmiso/stats.hpp"
#include "matchers.hpp"

using namespace bmiso;

namespace {

struct Leaf {
  CorridorPath path;
  std::size_t beta = 0;
};

// Plain enumeration of every conditioned path, in down-before-up order,
// using only corridor geometry (no weight table).
void enumerate_paths(const ConditionedKernel& k, CorridorPath& cur,
                     std::size_t beta, Tick left, std::vector<Leaf>& out) {
  std::int64_t x = cur.back();
  if (left == 0) {
    if (k.is_target(x)) out.push_back({cur, beta});
    return;
  }
  if (k.is_target(x)) return;  // absorbed too early
  if (!k.is_wall(x) && (x == 0 || x == k.width)) return;  // excluded edge
  if (k.is_wall(x)) {
    cur.push_back(k.wall_exit(x));
    enumerate_paths(k, cur, beta + 1, left - 1, out);
    cur.pop_back();
    return;
  }
  for (std::int64_t nxt : {x - 1, x + 1}) {
    if (nxt < 0 || nxt > k.width) continue;
    cur.push_back(nxt);
    enumerate_paths(k, cur, beta, left - 1, out);
    cur.pop_back();
  }
}

std::vector<Leaf> all_leaves(const ConditionedKernel& k) {
  std::vector<Leaf> out;
  CorridorPath cur{k.start};
  enumerate_paths(k, cur, 0, k.L, out);
  return out;
}

UniformCode random_suffix(RngStream& rng, std::size_t n) {
  UniformCode c;
  for (std::size_t i = 0; i < n; ++i) c.push_bit(rng.next_bit());
  return c;
}

}  // namespace

TEST_CASE("degenerate reflected kernels") {
  auto k2 = build_kernel(KernelKind::ReflectedUp, 2, 2);
  CHECK(k2.D == 2);
  CHECK(encode_filler(k2, {0, 1, 2}).size() == 0);

  auto k4 = build_kernel(KernelKind::ReflectedUp, 2, 4);
  CHECK(k4.D == 4);
  CHECK(encode_filler(k4, {0, 1, 0, 1, 2}).size() == 0);

  CHECK_THROWS_MATCHES(build_kernel(KernelKind::ReflectedUp, 2, 3), Error,
                       ErrorMatcher(ErrorCode::InfeasibleDuration));
  CHECK_THROWS_MATCHES(build_kernel(KernelKind::ReflectedUp, 2, 1), Error,
                       ErrorMatcher(ErrorCode::InfeasibleDuration));

  // Forced corridors decode without reading a single bit.
  CodeCursor src;
  CHECK(decode_filler(k4, src) == CorridorPath{0, 1, 0, 1, 2});
  CHECK(src.consumed() == 0);

  SECTION("two-step band has geometric passage mass") {
    for (Tick kk = 1; kk <= 8; ++kk)
      CHECK(build_kernel(KernelKind::ReflectedUp, 2, 2 * kk).D ==
            BigInt(1) << kk);
  }

  SECTION("down kernel mirrors up") {
    auto up = build_kernel(KernelKind::ReflectedUp, 3, 7);
    auto down = build_kernel(KernelKind::ReflectedDown, 3, 7);
    CHECK(up.D == down.D);
    // Mirroring swaps the child order, so leaves land at reflected spots.
    auto a = leaf_stretch(up, {0, 1, 0, 1, 2, 1, 2, 3});
    auto b = leaf_stretch(down, {3, 2, 3, 2, 1, 2, 1, 0});
    CHECK(b.len == a.len);
    CHECK(b.lo == up.D - a.lo - a.len);
  }
}

TEST_CASE("enumeration oracle fixes every leaf stretch") {
  RngStream rng(7, 100);
  struct Probe {
    KernelKind kind;
    std::uint32_t m;
    Tick L;
  };
  for (auto [kind, m, L] : std::vector<Probe>{
           {KernelKind::ReflectedUp, 4, 4},
           {KernelKind::ReflectedUp, 4, 8},
           {KernelKind::ReflectedUp, 4, 12},
           {KernelKind::ReflectedDown, 4, 10},
           {KernelKind::ReflectedUp, 3, 9},
           {KernelKind::CyclicSingle, 2, 6},
           {KernelKind::CyclicSingle, 3, 9},
           {KernelKind::CyclicDouble, 2, 6},
           {KernelKind::CyclicDouble, 3, 7},
       }) {
    INFO(kernel_kind_name(kind) << " m=" << m << " L=" << L);
    auto k = build_kernel(kind, m, L);
    auto leaves = all_leaves(k);
    REQUIRE_FALSE(leaves.empty());

    BigInt cum = 0;
    for (const auto& leaf : leaves) {
      auto st = leaf_stretch(k, leaf.path);
      CHECK(st.lo == cum);
      CHECK(st.len == BigInt(1) << leaf.beta);
      cum += st.len;

      auto code = encode_filler(k, leaf.path);
      CodeCursor strict{code};
      CHECK(decode_filler(k, strict) == leaf.path);
      CHECK(strict.consumed() == code.size());

      // Any continuation of the canonical bits decodes to the same leaf
      // and stops at exactly the canonical prefix.
      CodeCursor padded{code};
      padded.code.append(random_suffix(rng, 64));
      CHECK(decode_filler(k, padded) == leaf.path);
      CHECK(padded.consumed() == code.size());
    }
    CHECK(cum == k.D);
  }
}

TEST_CASE("canonical codes are shortest then leftmost") {
  auto k = build_kernel(KernelKind::ReflectedUp, 4, 8);
  auto leaves = all_leaves(k);
  for (const auto& leaf : leaves) {
    auto st = leaf_stretch(k, leaf.path);
    auto code = encode_filler(k, leaf.path);
    BigInt c = code.as_integer();
    std::size_t rho = code.size();
    // fits
    CHECK(c * k.D >= st.lo << rho);
    CHECK((c + 1) * k.D <= (st.lo + st.len) << rho);
    // no dyadic of any shorter length fits
    for (std::size_t r = 0; r < rho; ++r) {
      bool fits = false;
      for (BigInt cc = 0; cc < (BigInt(1) << r); ++cc)
        if (cc * k.D >= st.lo << r &&
            (cc + 1) * k.D <= (st.lo + st.len) << r) {
          fits = true;
          break;
        }
      CHECK_FALSE(fits);
    }
    // no smaller left endpoint fits at the same length
    if (c > 0) {
      bool left_fits = (c - 1) * k.D >= st.lo << rho &&
                       c * k.D <= (st.lo + st.len) << rho;
      CHECK_FALSE(left_fits);
    }
  }

  SECTION("hand values") {
    CHECK(canonical_code(0, 2, 2).size() == 0);
    CHECK(canonical_code(0, 1, 2) == UniformCode::from_integer(0, 1));
    CHECK(canonical_code(1, 1, 2) == UniformCode::from_integer(1, 1));
    CHECK(canonical_code(1, 2, 4) == UniformCode::from_integer(1, 2));
    CHECK_THROWS_MATCHES(canonical_code(1, 0, 4), Error,
                         ErrorMatcher(ErrorCode::DomainError));
    CHECK_THROWS_MATCHES(canonical_code(3, 2, 4), Error,
                         ErrorMatcher(ErrorCode::DomainError));
  }
}

TEST_CASE("truncated canonical codes never decode") {
  auto k = build_kernel(KernelKind::ReflectedUp, 4, 10);
  for (const auto& leaf : all_leaves(k)) {
    auto code = encode_filler(k, leaf.path);
    if (code.size() == 0) continue;
    CodeCursor cut{code.subcode(0, code.size() - 1)};
    CHECK_THROWS_MATCHES(decode_filler(k, cut), Error,
                         ErrorMatcher(ErrorCode::DecodeError));
  }
}

TEST_CASE("encoder rejects foreign paths") {
  auto k = build_kernel(KernelKind::ReflectedUp, 4, 6);
  CHECK_THROWS_MATCHES(encode_filler(k, {0, 1, 2, 3, 4}), Error,
                       ErrorMatcher(ErrorCode::LengthMismatch));
  CHECK_THROWS_MATCHES(encode_filler(k, {1, 2, 3, 2, 3, 4, 3}), Error,
                       ErrorMatcher(ErrorCode::PathInfeasible));
  CHECK_THROWS_MATCHES(encode_filler(k, {0, 1, 2, 3, 4, 3, 4}), Error,
                       ErrorMatcher(ErrorCode::PathInfeasible));
  // early absorption
  CHECK_THROWS_MATCHES(encode_filler(k, {0, 1, 2, 3, 4, 3, 2}), Error,
                       ErrorMatcher(ErrorCode::PathInfeasible));
  auto cs = build_kernel(KernelKind::CyclicSingle, 2, 6);
  CHECK_THROWS_MATCHES(encode_filler(cs, {2, 1, 0, 1, 2, 3, 4}), Error,
                       ErrorMatcher(ErrorCode::PathInfeasible));
}

TEST_CASE("sampler and pad decoding follow the leaf law") {
  auto k = build_kernel(KernelKind::ReflectedUp, 4, 8);
  auto leaves = all_leaves(k);
  std::map<CorridorPath, std::size_t> index;
  std::vector<double> expected;
  BigInt tot = 0;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    index[leaves[i].path] = i;
    tot += BigInt(1) << leaves[i].beta;
  }
  REQUIRE(tot == k.D);

  const int n = 20000;
  for (const auto& leaf : leaves)
    expected.push_back(
        n * std::ldexp(1.0, static_cast<int>(leaf.beta)) /
        static_cast<double>(k.D));

  RngStream rng(7, 101);
  SECTION("direct sampler") {
    std::vector<double> observed(leaves.size(), 0.0);
    for (int i = 0; i < n; ++i)
      observed[index.at(sample_filler(k, rng))] += 1.0;
    CHECK(chi_square_gof(observed, expected).pvalue > 0.001);
  }
  SECTION("decoding coin flips") {
    std::vector<double> observed(leaves.size(), 0.0);
    for (int i = 0; i < n; ++i) {
      CodeCursor src;
      src.pad = &rng;
      observed[index.at(decode_filler(k, src))] += 1.0;
    }
    CHECK(chi_square_gof(observed, expected).pvalue > 0.001);
  }
}

TEST_CASE("two-band circle kernels count gap paths") {
  auto k = build_kernel(KernelKind::CyclicDouble, 2, 2);
  CHECK(k.D == 2);
  CHECK(encode_filler(k, {2, 1, 0}) == UniformCode::from_integer(0, 1));
  CHECK(encode_filler(k, {2, 3, 4}) == UniformCode::from_integer(1, 1));

  for (std::uint32_t m : {2u, 3u, 5u}) {
    double mass = 0.0;
    double mean = 0.0;
    for (Tick L = 1; L <= 120; ++L) {
      BigInt c = cyclic_exit_count(m, L);
      if ((L - static_cast<Tick>(m)) % 2 != 0 || L < static_cast<Tick>(m)) {
        CHECK(c == 0);
        continue;
      }
      if (L <= 16)
        CHECK(c == build_kernel(KernelKind::CyclicDouble, m, L).D);
      double p = static_cast<double>(c) * std::ldexp(1.0, -int(L));
      mass += p;
      mean += p * static_cast<double>(L);
    }
    // Truncation at 120 steps leaves a tiny exponential tail for small m.
    if (m == 2) {
      CHECK(mass > 0.999999);
      CHECK(std::abs(mean - 4.0) < 0.001);
    }
    if (m == 3) CHECK(std::abs(mean - 9.0) < 0.01);
  }

  SECTION("geometric face of the two-site circle") {
    for (Tick kk = 1; kk <= 6; ++kk)
      CHECK(cyclic_exit_count(2, 2 * kk) == BigInt(1) << kk);
  }
}

TEST_CASE("kernel files and cache") {
  auto k = build_kernel(KernelKind::CyclicSingle, 3, 9);
  std::ostringstream os(std::ios::binary);
  save_kernel(k, os);
  std::istringstream is(os.str(), std::ios::binary);
  auto back = load_kernel(is);
  CHECK(back.D == k.D);
  CHECK(back.F == k.F);

  std::string data = os.str();
  data[data.size() / 2] ^= 0x40;
  std::istringstream bad(data, std::ios::binary);
  CHECK_THROWS_AS(load_kernel(bad), Error);

  auto dir = std::filesystem::temp_directory_path() / "bmiso_kernel_cache";
  std::filesystem::remove_all(dir);
  KernelCache cache(dir.string());
  auto a = cache.get(KernelKind::ReflectedUp, 4, 8);
  auto b = cache.get(KernelKind::ReflectedUp, 4, 8);
  CHECK(a.get() == b.get());
  CHECK(std::filesystem::exists(
      cache.file_name(KernelKind::ReflectedUp, 4, 8)));

  KernelCache reload(dir.string());
  auto c = cache.get(KernelKind::ReflectedUp, 4, 8);
  CHECK(c->D == a->D);

  // A corrupted cache file is rebuilt, not trusted.
  {
    std::ofstream trash(cache.file_name(KernelKind::ReflectedUp, 4, 8),
                        std::ios::binary);
    trash << "garbage";
  }
  KernelCache again(dir.string());
  auto d = again.get(KernelKind::ReflectedUp, 4, 8);
  CHECK(d->D == a->D);
  std::filesystem::remove_all(dir);
}
