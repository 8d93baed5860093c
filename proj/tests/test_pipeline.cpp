#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bmiso/pipeline.hpp"
#include "bmiso/stats.hpp"
#include "matchers.hpp"

using namespace bmiso;

namespace {

KernelCache& cache() {
  static KernelCache c;
  return c;
}

bool same_path(const PathSample& a, const PathSample& b) {
  return a.t0 == b.t0 && a.codomain == b.codomain && a.bands == b.bands &&
         a.par.m == b.par.m && a.sites == b.sites;
}

PathSample shifted(const PathSample& p, Tick s) {
  PathSample out = p;
  out.t0 += s;
  return out;
}

bool same_points(const MarkedPointProcess& a, const MarkedPointProcess& b,
                 Tick shift = 0) {
  if (a.size() != b.size() || a.colours != b.colours) return false;
  if (a.has_ucodes != b.has_ucodes) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.base.points[i] + shift != b.base.points[i]) return false;
    if (a.has_ucodes && !(a.ucodes[i] == b.ucodes[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("reflected paths and their marked processes are mutually exact") {
  RngStream rng(0x5eed0001, 1);
  int failures = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::uint32_t m = 2 + static_cast<std::uint32_t>(rng.below(5));
    LatticeParams par{0.5 * m, m, 1.0};
    std::size_t len = 30 + rng.below(400);
    Tick t0 = static_cast<Tick>(rng.below(100)) - 50;
    auto x = sample_stationary_reflected(par, len, rng, t0);
    APPState app;
    try {
      app = reflected_to_app(x, cache());
    } catch (const Error& e) {
      REQUIRE(e.code() == ErrorCode::InsufficientWindow);
      ++failures;
      continue;
    }
    REQUIRE(app.mpp.size() >= 2);
    REQUIRE(app.mpp.has_ucodes);
    REQUIRE(app.mpp.ucodes.back().empty());
    for (std::size_t i = 1; i < app.mpp.size(); ++i)
      REQUIRE(app.mpp.colours[i] != app.mpp.colours[i - 1]);
    auto back = app_to_reflected(app, cache());
    auto want = x.restrict(app.mpp.base.window.lo, app.mpp.base.window.hi);
    REQUIRE(same_path(back, want));
  }
  REQUIRE(failures < 40);
}

TEST_CASE("two band circle paths and their marked processes are mutually exact") {
  RngStream rng(0x5eed0002, 1);
  for (int trial = 0; trial < 250; ++trial) {
    std::uint32_t m = 2 + static_cast<std::uint32_t>(rng.below(4));
    LatticeParams par{0.5 * m, m, 1.0};
    std::size_t len = 40 + rng.below(400);
    Tick t0 = static_cast<Tick>(rng.below(60)) - 30;
    auto x = sample_stationary_periodic(par, 2, len, rng, t0);
    APPState app;
    try {
      app = periodic_to_app(x, cache());
    } catch (const Error& e) {
      REQUIRE(e.code() == ErrorCode::InsufficientWindow);
      continue;
    }
    auto back = app_to_periodic(app, cache());
    auto want = x.restrict(app.mpp.base.window.lo, app.mpp.base.window.hi);
    REQUIRE(same_path(back, want));
  }
}

TEST_CASE("extraction refuses paths without two certain passages") {
  LatticeParams par{1.0, 2, 1.0};
  PathSample flat;
  flat.par = par;
  flat.codomain = Codomain::Reflected;
  flat.sites = {1, 2, 1, 2, 1};
  REQUIRE_THROWS_MATCHES(reflected_to_app(flat, cache()), Error,
                         ErrorMatcher(ErrorCode::InsufficientWindow));
}

TEST_CASE("decoding rejects tampered marks") {
  RngStream rng(0x5eed0003, 1);
  LatticeParams par{1.5, 3, 1.0};
  auto x = sample_stationary_reflected(par, 300, rng, -40);
  auto app = reflected_to_app(x, cache());

  SECTION("a trailing bit on a mark") {
    std::size_t i = 0;
    app.mpp.ucodes[i].push_bit(true);
    REQUIRE_THROWS_MATCHES(app_to_reflected(app, cache()), Error,
                           ErrorMatcher(ErrorCode::DecodeError));
  }
  SECTION("a nonempty final mark") {
    app.mpp.ucodes.back().push_bit(false);
    REQUIRE_THROWS_MATCHES(app_to_reflected(app, cache()), Error,
                           ErrorMatcher(ErrorCode::DecodeError));
  }
  SECTION("missing marks entirely") {
    app.mpp.has_ucodes = false;
    app.mpp.ucodes.clear();
    REQUIRE_THROWS_MATCHES(app_to_reflected(app, cache()), Error,
                           ErrorMatcher(ErrorCode::MissingUcode));
  }
  SECTION("colours that do not alternate") {
    app.mpp.colours[1] = app.mpp.colours[0];
    REQUIRE_THROWS_MATCHES(app_to_reflected(app, cache()), Error,
                           ErrorMatcher(ErrorCode::IllegalTransition));
  }
  SECTION("wrong codomain") {
    PathSample circle;
    circle.par = par;
    circle.codomain = Codomain::Periodic;
    circle.bands = 2;
    circle.sites = {0, 1, 2};
    REQUIRE_THROWS_MATCHES(reflected_to_app(circle, cache()), Error,
                           ErrorMatcher(ErrorCode::DomainError));
  }
}

TEST_CASE("gap means match the squared band width") {
  RngStream rng(0x5eed0005, 1);
  LatticeParams par{2.0, 4, 1.0};
  double sum = 0;
  std::int64_t n = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto x = sample_stationary_reflected(par, 600, rng, 0);
    APPState app;
    try {
      app = reflected_to_app(x, cache());
    } catch (const Error&) {
      continue;
    }
    for (std::size_t i = 0; i + 1 < app.mpp.size(); ++i) {
      sum += static_cast<double>(app.mpp.base.points[i + 1] -
                                 app.mpp.base.points[i]);
      ++n;
    }
  }
  double mean = sum / static_cast<double>(n);
  double var = (2.0 * 256 - 2.0 * 16) / 3.0;
  double err = std::sqrt(var / static_cast<double>(n));
  REQUIRE(std::abs(mean - 16.0) < 4.0 * err);
}

TEST_CASE("unfolding a reflected path then folding it back is exact") {
  RngStream rng(0x5eed0006, 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::uint32_t m = 2 + static_cast<std::uint32_t>(rng.below(4));
    LatticeParams par{0.5 * m, m, 1.0};
    std::size_t len = 20 + rng.below(380);
    Tick t0 = static_cast<Tick>(rng.below(80)) - 40;
    auto x = sample_stationary_reflected(par, len, rng, t0);
    std::uint64_t pad = rng.next_u64();
    auto y = unfold_reflected(x, pad);
    REQUIRE(y.codomain == Codomain::Periodic);
    REQUIRE(y.bands == 2);
    REQUIRE(y.t0 == x.t0);
    REQUIRE(y.end() == x.end());
    for (Tick t = y.t0; t < y.end(); ++t)
      REQUIRE(fold_site(y.at(t), par.m) == x.at(t));
    REQUIRE(same_path(unfold_reflected(x, pad), y));
    auto back = fold_periodic(y);
    REQUIRE(same_path(back, x));
  }
}

TEST_CASE("folding a circle path commutes with any later unfolding") {
  RngStream rng(0x5eed0007, 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::uint32_t m = 2 + static_cast<std::uint32_t>(rng.below(4));
    LatticeParams par{0.5 * m, m, 1.0};
    std::size_t len = 20 + rng.below(380);
    Tick t0 = static_cast<Tick>(rng.below(80)) - 40;
    auto y = sample_stationary_periodic(par, 2, len, rng, t0);
    auto x = fold_periodic(y);
    REQUIRE(x.codomain == Codomain::Reflected);
    REQUIRE(x.t0 == y.t0);
    REQUIRE(x.end() == y.end());
    for (Tick t = y.t0; t < y.end(); ++t)
      REQUIRE(fold_site(y.at(t), par.m) == x.at(t));
    // Fresh pads pick their own lift, but every lift folds back onto x.
    auto y2 = unfold_reflected(x, rng.next_u64());
    REQUIRE(same_path(fold_periodic(y2), x));
  }
}

TEST_CASE("unfolded sites spread evenly over the circle") {
  RngStream rng(0x5eed0008, 1);
  std::uint32_t m = 3;
  LatticeParams par{1.5, m, 1.0};
  std::vector<double> counts(2 * m, 0.0);
  int n = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    auto x = sample_stationary_reflected(par, 40, rng, 0);
    auto y = unfold_reflected(x, rng.next_u64());
    counts[static_cast<std::size_t>(y.at(0))] += 1.0;
    ++n;
  }
  std::vector<double> expected(2 * m, static_cast<double>(n) / (2.0 * m));
  REQUIRE(chi_square_gof(counts, expected).pvalue > 0.001);
}

TEST_CASE("single site paths cannot be unfolded") {
  LatticeParams par{1.0, 2, 1.0};
  PathSample x;
  x.par = par;
  x.codomain = Codomain::Reflected;
  x.sites = {1};
  REQUIRE_THROWS_MATCHES(unfold_reflected(x, 1), Error,
                         ErrorMatcher(ErrorCode::InsufficientWindow));
}

TEST_CASE("four and six band circles survive the marked round trip") {
  RngStream rng(0x5eed0009, 1);
  for (std::uint32_t bands : {4u, 6u}) {
    int skipped = 0;
    for (int trial = 0; trial < 150; ++trial) {
      std::uint32_t m = 2 + static_cast<std::uint32_t>(rng.below(2));
      LatticeParams par{0.5 * m, m, 1.0};
      std::size_t len = 250 + rng.below(500);
      Tick t0 = static_cast<Tick>(rng.below(60)) - 30;
      auto x = sample_stationary_periodic(par, bands, len, rng, t0);
      MarkedPointProcess out;
      try {
        out = periodic_to_marked_app(x, cache());
      } catch (const Error& e) {
        REQUIRE((e.code() == ErrorCode::InsufficientWindow ||
                 e.code() == ErrorCode::NoMarkerInWindow));
        ++skipped;
        continue;
      }
      REQUIRE(out.n_colours == 2);
      REQUIRE(out.colours.front() == 0);
      for (std::size_t i = 0; i < out.size(); ++i) {
        REQUIRE(out.colours[i] == static_cast<int>(i % 2));
        if (i % 2 == 1) REQUIRE(out.ucodes[i].empty());
      }
      auto back = marked_app_to_periodic(out, par, bands, cache());
      auto want = x.restrict(out.base.window.lo, out.base.window.hi);
      REQUIRE(same_path(back, want));
    }
    REQUIRE(skipped < 15);
  }
}

TEST_CASE("marked decoding rejects malformed processes") {
  RngStream rng(0x5eed000a, 1);
  LatticeParams par{1.0, 2, 1.0};
  PathSample x;
  MarkedPointProcess out;
  for (;;) {
    x = sample_stationary_periodic(par, 4, 600, rng, -50);
    try {
      out = periodic_to_marked_app(x, cache());
      break;
    } catch (const Error&) {
    }
  }

  SECTION("odd band counts are refused") {
    REQUIRE_THROWS_MATCHES(periodic_to_marked_app(
                               sample_stationary_periodic(par, 2, 100, rng, 0),
                               cache()),
                           Error, ErrorMatcher(ErrorCode::DomainError));
  }
  SECTION("a mark off the even seam") {
    auto bad = out;
    bad.ucodes[1].push_bit(true);
    REQUIRE_THROWS_MATCHES(marked_app_to_periodic(bad, par, 4, cache()), Error,
                           ErrorMatcher(ErrorCode::DecodeError));
  }
  SECTION("colours that do not alternate from red") {
    auto bad = out;
    for (auto& c : bad.colours) c = 1 - c;
    REQUIRE_THROWS_MATCHES(marked_app_to_periodic(bad, par, 4, cache()), Error,
                           ErrorMatcher(ErrorCode::DomainError));
  }
  SECTION("a truncated first mark") {
    auto bad = out;
    auto& u = bad.ucodes.front();
    UniformCode cut;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) cut.push_bit(u.bit(i));
    u = cut;
    REQUIRE_THROWS(marked_app_to_periodic(bad, par, 4, cache()));
  }
  SECTION("marks stripped") {
    auto bad = out;
    bad.has_ucodes = false;
    bad.ucodes.clear();
    REQUIRE_THROWS_MATCHES(marked_app_to_periodic(bad, par, 4, cache()), Error,
                           ErrorMatcher(ErrorCode::MissingUcode));
  }
}

TEST_CASE("sheet lifts fold back exactly at every count") {
  RngStream rng(0x5eed000b, 1);
  for (std::uint32_t k : {1u, 2u, 3u, 4u, 6u}) {
    for (int trial = 0; trial < 60; ++trial) {
      std::uint32_t m = 2 + static_cast<std::uint32_t>(rng.below(4));
      LatticeParams par{0.5 * m, m, 1.0};
      std::size_t len = 40 + rng.below(360);
      Tick t0 = static_cast<Tick>(rng.below(80)) - 40;
      auto x = sample_stationary_reflected(par, len, rng, t0);
      std::uint64_t pad = rng.next_u64();
      auto u = crease_unfold(x, k, pad);
      REQUIRE(u.codomain == Codomain::Reflected);
      REQUIRE(u.par.m == k * m);
      REQUIRE(u.par.h == Catch::Approx(k * par.h));
      REQUIRE(u.t0 == x.t0);
      REQUIRE(u.end() == x.end());
      for (Tick t = u.t0; t < u.end(); ++t)
        REQUIRE(fold_site(u.at(t), m) == x.at(t));
      REQUIRE(same_path(crease_unfold(x, k, pad), u));
      REQUIRE(same_path(crease_fold(u, k), x));
    }
  }
}

TEST_CASE("packed sheet folds carry their tail and invert") {
  RngStream rng(0x5eed000c, 1);
  for (std::uint32_t k : {2u, 3u, 4u}) {
    for (int trial = 0; trial < 60; ++trial) {
      std::uint32_t tall = k * (2 + static_cast<std::uint32_t>(rng.below(3)));
      LatticeParams par{0.25 * tall, tall, 1.0};
      std::size_t len = 40 + rng.below(360);
      Tick t0 = static_cast<Tick>(rng.below(80)) - 40;
      auto u = sample_stationary_reflected(par, len, rng, t0);
      auto y = crease_fold_packed(u, k);
      REQUIRE(y.par.m == tall / k);
      REQUIRE(y.t0 == u.t0);
      REQUIRE(y.site_count() > u.site_count());
      for (Tick t = u.t0; t < u.end(); ++t)
        REQUIRE(y.at(t) == fold_site(u.at(t), tall / k));
      auto back = crease_unfold_packed(y, k);
      REQUIRE(same_path(back, u));
    }
  }
}

TEST_CASE("packed folds reject truncated tails") {
  RngStream rng(0x5eed000d, 1);
  LatticeParams par{2.0, 8, 1.0};
  auto u = sample_stationary_reflected(par, 400, rng, 0);
  auto y = crease_fold_packed(u, 2);
  // Dropping the whole tail, or even its last step, leaves nothing
  // coherent to parse.
  auto core = y.restrict(u.t0, u.end() - 1);
  REQUIRE_THROWS_AS(crease_unfold_packed(core, 2), Error);
  auto clipped = y.restrict(y.t0, y.end() - 2);
  REQUIRE_THROWS_AS(crease_unfold_packed(clipped, 2), Error);
}

TEST_CASE("band rescaling round trips over the whole input window") {
  RngStream rng(0x5eed000e, 1);
  struct Ratio {
    std::uint32_t a, b;
  };
  for (auto [a, b] : {Ratio{4, 2}, Ratio{2, 4}, Ratio{6, 4}, Ratio{4, 6}}) {
    for (int trial = 0; trial < 60; ++trial) {
      std::uint32_t mg = 2 + static_cast<std::uint32_t>(rng.below(2));
      std::uint32_t m = a * mg;
      LatticeParams par{0.25 * m, m, 1.0};
      std::size_t len = 400 + rng.below(600);
      Tick t0 = static_cast<Tick>(rng.below(60)) - 30;
      auto x = sample_stationary_reflected(par, len, rng, t0);
      TimeWindow covered{};
      auto y = scale_reflected(x, a, b, rng.next_u64(), 0, &covered);
      REQUIRE(y.codomain == Codomain::Reflected);
      REQUIRE(y.par.m == b * mg);
      REQUIRE(y.par.h == Catch::Approx(par.h * b / a));
      REQUIRE(covered.lo == x.t0);
      REQUIRE(covered.hi == x.end() - 1);
      auto back = scale_reflected_back(y, a, b);
      REQUIRE(same_path(back, x));
    }
  }
}

TEST_CASE("rescaling by one keeps the core sites verbatim") {
  RngStream rng(0x5eed000f, 1);
  LatticeParams par{1.0, 4, 1.0};
  for (int trial = 0; trial < 40; ++trial) {
    auto x = sample_stationary_reflected(par, 200, rng, -50);
    auto y = scale_reflected(x, 2, 2, rng.next_u64());
    REQUIRE(y.par.m == x.par.m);
    REQUIRE(y.par.h == Catch::Approx(x.par.h));
    REQUIRE(same_path(y.restrict(x.t0, x.end() - 1), x));
    REQUIRE(same_path(scale_reflected_back(y, 2, 2), x));
  }
}

TEST_CASE("band rescaling rejects unusable ratios and grids") {
  RngStream rng(0x5eed0014, 1);
  LatticeParams par{2.0, 8, 1.0};
  auto x = sample_stationary_reflected(par, 800, rng, 0);
  REQUIRE_THROWS_MATCHES(scale_reflected(x, 3, 2, 1), Error,
                         ErrorMatcher(ErrorCode::NonRationalScale));
  REQUIRE_THROWS_MATCHES(scale_reflected(x, 6, 4, 1), Error,
                         ErrorMatcher(ErrorCode::GridIncompatible));
  LatticeParams odd{1.25, 5, 1.0};
  auto xo = sample_stationary_reflected(odd, 800, rng, 0);
  REQUIRE_THROWS_MATCHES(scale_reflected(xo, 4, 2, 1), Error,
                         ErrorMatcher(ErrorCode::GridIncompatible));
  LatticeParams thin{1.0, 4, 1.0};
  auto xt = sample_stationary_reflected(thin, 800, rng, 0);
  REQUIRE_THROWS_MATCHES(scale_reflected(xt, 8, 2, 1), Error,
                         ErrorMatcher(ErrorCode::GridIncompatible));
}

TEST_CASE("every map commutes with grid shifts") {
  RngStream rng(0x5eed0010, 1);
  LatticeParams par{2.0, 4, 1.0};
  LatticeParams par8{2.0, 8, 1.0};
  for (int trial = 0; trial < 60; ++trial) {
    Tick s = static_cast<Tick>(rng.below(100)) - 50;
    std::uint64_t pad = rng.next_u64();

    auto xr = sample_stationary_reflected(par, 400, rng, -60);
    auto app0 = reflected_to_app(xr, cache());
    auto app1 = reflected_to_app(shifted(xr, s), cache());
    REQUIRE(same_points(app0.mpp, app1.mpp, s));
    REQUIRE(app0.mpp.base.window.lo + s == app1.mpp.base.window.lo);

    // Pad-reading maps shift with the input once the pad origin moves along.
    auto y0 = unfold_reflected(xr, pad, 0);
    auto y1 = unfold_reflected(shifted(xr, s), pad, s);
    REQUIRE(same_path(shifted(y0, s), y1));

    auto xp = sample_stationary_periodic(par, 2, 400, rng, -60);
    auto f0 = fold_periodic(xp);
    auto f1 = fold_periodic(shifted(xp, s));
    REQUIRE(same_path(shifted(f0, s), f1));
    auto p0 = periodic_to_app(xp, cache());
    auto p1 = periodic_to_app(shifted(xp, s), cache());
    REQUIRE(same_points(p0.mpp, p1.mpp, s));

    auto x4 = sample_stationary_periodic(par, 4, 700, rng, -60);
    try {
      auto m0 = periodic_to_marked_app(x4, cache());
      auto m1 = periodic_to_marked_app(shifted(x4, s), cache());
      REQUIRE(same_points(m0, m1, s));
    } catch (const Error&) {
    }

    auto xw = sample_stationary_reflected(par8, 700, rng, -60);
    TimeWindow c0{}, c1{};
    auto s0 = scale_reflected(xw, 4, 2, pad, 0, &c0);
    auto s1 = scale_reflected(shifted(xw, s), 4, 2, pad, s, &c1);
    REQUIRE(same_path(shifted(s0, s), s1));
    REQUIRE(c0.lo + s == c1.lo);
    REQUIRE(c0.hi + s == c1.hi);

    auto pts0 = poisson_factor(xr, 1.0);
    auto pts1 = poisson_factor(shifted(xr, s), 1.0);
    REQUIRE(pts0.points.size() == pts1.points.size());
    for (std::size_t i = 0; i < pts0.points.size(); ++i)
      REQUIRE(pts0.points[i] + s * detail::kSubTicks == pts1.points[i]);
  }
}

TEST_CASE("sigma rescaling preserves the tick size") {
  LatticeParams par{1.0, 8, 1.0};
  auto two = sigma_variant(par, 2.0);
  REQUIRE(two.sigma == 2.0);
  REQUIRE(two.m == 8);
  REQUIRE(two.h == 2.0);
  REQUIRE(two.dt() == par.dt());
  auto back = sigma_variant(two, 1.0);
  REQUIRE(back.h == par.h);
}

TEST_CASE("the point factor is deterministic and has the right density") {
  RngStream rng(0x5eed0011, 1);
  // The factor reads its randomness off the path content, so two intervals
  // with identical shapes place identical points.  Statistics need a band
  // wide enough that shape collisions are rare.
  LatticeParams par{1.0, 8, 1.0};

  auto x = sample_stationary_reflected(par, 4000, rng, -100);
  auto once = poisson_factor(x, 1.5);
  auto again = poisson_factor(x, 1.5);
  REQUIRE(once.points == again.points);
  REQUIRE(once.window.lo == again.window.lo);
  once.validate();

  REQUIRE(poisson_factor(x, 0.0).points.empty());
  REQUIRE_THROWS_MATCHES(poisson_factor(x, -1.0), Error,
                         ErrorMatcher(ErrorCode::DomainError));

  // Density over many independent paths.
  double rate = 1.0;
  double total_time = 0;
  std::int64_t total_points = 0;
  for (int trial = 0; trial < 150; ++trial) {
    auto p = sample_stationary_reflected(par, 1500, rng, 0);
    auto pts = poisson_factor(p, rate);
    total_time += static_cast<double>(pts.window.length()) * pts.tick_size;
    total_points += static_cast<std::int64_t>(pts.points.size());
  }
  double expect = rate * total_time;
  double err = std::sqrt(expect);
  REQUIRE(std::abs(static_cast<double>(total_points) - expect) < 4.0 * err);
}

TEST_CASE("factor spacings look exponential inside one long path") {
  RngStream rng(0x5eed0012, 1);
  LatticeParams par{1.0, 8, 1.0};
  auto x = sample_stationary_reflected(par, 30000, rng, 0);
  auto pts = poisson_factor(x, 2.0);
  double dt = pts.tick_size;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < pts.points.size(); ++i)
    gaps.push_back(static_cast<double>(pts.points[i] - pts.points[i - 1]) *
                   dt);
  REQUIRE(gaps.size() > 500);
  auto cdf = [](double g) { return 1.0 - std::exp(-2.0 * g); };
  REQUIRE(ks_test(gaps, cdf).pvalue > 0.001);
}

TEST_CASE("coding windows are finite and minimal") {
  RngStream rng(0x5eed0013, 1);
  LatticeParams par{1.5, 3, 1.0};
  auto x = sample_stationary_reflected(par, 801, rng, -400);

  auto run = [&](const PathSample& p) {
    auto app = reflected_to_app(p, cache());
    return digest_points(app.mpp, -5, 5);
  };
  Tick r = measure_coding_window(run, x, 5);
  REQUIRE(r >= 5);
  REQUIRE(r <= 400);
  std::string full = run(x.restrict(-400, 400));
  REQUIRE(run(x.restrict(-r, r)) == full);
  if (r > 5) {
    bool differs;
    try {
      differs = run(x.restrict(-(r - 1), r - 1)) != full;
    } catch (const Error&) {
      differs = true;
    }
    REQUIRE(differs);
  }

  auto run_fold = [&](const PathSample& p) {
    return digest_path(unfold_reflected(p, 0x0fade5eed, 0), -5, 5);
  };
  Tick rf = measure_coding_window(run_fold, x, 5);
  REQUIRE(rf >= 5);
  REQUIRE(rf <= 400);
  std::string fullf = run_fold(x.restrict(-400, 400));
  REQUIRE(run_fold(x.restrict(-rf, rf)) == fullf);
  if (rf > 5) {
    bool differs;
    try {
      differs = run_fold(x.restrict(-(rf - 1), rf - 1)) != fullf;
    } catch (const Error&) {
      differs = true;
    }
    REQUIRE(differs);
  }

  LatticeParams wide{2.0, 8, 1.0};
  auto xw = sample_stationary_reflected(wide, 1601, rng, -800);
  auto run_scale = [&](const PathSample& p) {
    return digest_path(scale_reflected(p, 4, 2, 0x0fade5eed, 0), -5, 5);
  };
  Tick rs = measure_coding_window(run_scale, xw, 5);
  REQUIRE(rs >= 5);
  REQUIRE(rs <= 800);
  REQUIRE(run_scale(xw.restrict(-rs, rs)) ==
          run_scale(xw.restrict(-800, 800)));

  REQUIRE_THROWS_MATCHES(measure_coding_window(run, x.restrict(0, 400), 5),
                         Error, ErrorMatcher(ErrorCode::InsufficientWindow));
}

TEST_CASE("map stamps carry the lattice and ratio") {
  MapDescriptor d;
  d.name = "widen";
  d.par = LatticeParams{1.0, 8, 1.0};
  d.bands = 2;
  d.num = 6;
  d.den = 4;
  auto s = d.stamp();
  REQUIRE(s.find("map=widen") != std::string::npos);
  REQUIRE(s.find("ratio=6/4") != std::string::npos);
  REQUIRE(s.find("codec=1") != std::string::npos);
  REQUIRE(s.rfind("# ", 0) == 0);
}
