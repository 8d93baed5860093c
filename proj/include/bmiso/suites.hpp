#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "bmiso/config.hpp"
#include "bmiso/excursion.hpp"
#include "bmiso/pipeline.hpp"
#include "bmiso/report.hpp"
#include "bmiso/stats.hpp"

namespace bmiso {

// ---------------------------------------------------------------------------
// Estimators shared by the suites.

inline double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// Sample mean of e^{-s gap}; the transform the gap law is checked against.
inline MeanResult estimate_laplace(const std::vector<double>& gaps,
                                   double s) {
  require(s > 0.0, ErrorCode::DomainError, "transform argument must be > 0");
  require(!gaps.empty(), ErrorCode::EmptySample, "no gaps to transform");
  std::vector<double> xs;
  xs.reserve(gaps.size());
  for (double g : gaps) xs.push_back(std::exp(-s * g));
  return sample_mean(xs);
}

struct VarianceResult {
  double var = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Unbiased sample variance with the moment-based standard error
// sqrt((m4 - s^4 (n-3)/(n-1)) / n).
inline VarianceResult sample_variance(const std::vector<double>& xs) {
  require(xs.size() >= 4, ErrorCode::TooFewSamples,
          "variance error needs four samples");
  double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double s2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    double d = x - mean;
    s2 += d * d;
    m4 += d * d * d * d;
  }
  s2 /= (n - 1.0);
  m4 /= n;
  double inner = m4 - s2 * s2 * (n - 3.0) / (n - 1.0);
  double se = inner > 0.0 ? std::sqrt(inner / n) : 0.0;
  return {s2, se, xs.size()};
}

// Pearson correlation over explicit pairs, z = r sqrt(n) under the null.
inline SerialCorrResult pair_correlation(
    const std::vector<std::pair<double, double>>& ps) {
  require(ps.size() >= 31, ErrorCode::TooFewSamples, "need 31+ pairs");
  double n = static_cast<double>(ps.size());
  double mx = 0, my = 0;
  for (const auto& [a, b] : ps) {
    mx += a;
    my += b;
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (const auto& [a, b] : ps) {
    sxy += (a - mx) * (b - my);
    sxx += (a - mx) * (a - mx);
    syy += (b - my) * (b - my);
  }
  require(sxx > 0 && syy > 0, ErrorCode::DomainError,
          "degenerate series in correlation");
  double r = sxy / std::sqrt(sxx * syy);
  return {r, r * std::sqrt(n), ps.size()};
}

inline std::vector<double> quantiles_of(std::vector<double> xs,
                                        const std::vector<double>& probs) {
  require(!xs.empty(), ErrorCode::EmptySample, "no samples for quantiles");
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (double p : probs) {
    double idx = p * (static_cast<double>(xs.size()) - 1.0);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, xs.size() - 1);
    double w = idx - static_cast<double>(lo);
    out.push_back(xs[lo] * (1.0 - w) + xs[hi] * w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replica runner.  Each replica derives its own stream from (seed, index),
// and results merge in index order, so the outcome does not depend on the
// thread count.

template <class T, class F>
std::vector<T> run_replicas(std::size_t count, unsigned threads, F&& f) {
  std::vector<T> out(count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      out[i] = f(i);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

namespace detail {

inline constexpr double kLaplaceGrid[4] = {0.25, 0.5, 1.0, 2.0};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Gap study: streamed first-passage gaps of the stationary reflected walk,
// shared by the transform and mean criteria.

struct GapStudy {
  LatticeParams par;
  std::vector<Tick> gaps;
  double seconds = 0.0;

  std::vector<double> gap_seconds() const {
    std::vector<double> out;
    out.reserve(gaps.size());
    for (Tick g : gaps) out.push_back(static_cast<double>(g) * par.dt());
    return out;
  }
};

inline GapStudy collect_gap_study(const LatticeParams& par, std::size_t count,
                                  std::uint64_t seed) {
  detail::Stopwatch clock;
  GapStudy study;
  study.par = par;
  study.gaps.reserve(count);
  RngStream rng(seed, 0x676170ull);
  std::int64_t start = stationary_reflected_site(par, rng);
  while (study.gaps.size() < count) {
    std::size_t missing = count - study.gaps.size();
    std::uint64_t steps =
        (missing + 4) * static_cast<std::uint64_t>(par.m) * par.m * 6 / 5;
    stream_reflected_gaps(par, start, steps, rng, [&](int, Tick g) {
      if (study.gaps.size() < count) study.gaps.push_back(g);
    });
    start = stationary_reflected_site(par, rng);
  }
  study.seconds = clock.seconds();
  return study;
}

// Criterion: the empirical transform of extracted gaps matches the closed
// form 1/cosh((h/sigma) sqrt(2s)) within max(3 se, 0.01) on the pinned grid,
// in under two minutes of single-threaded work.
inline StatReport criterion_gap_transform(const GapStudy& study) {
  detail::Stopwatch clock;
  StatReport rep;
  rep.suite = "gap-transform";
  auto secs = study.gap_seconds();
  for (double s : detail::kLaplaceGrid) {
    auto est = estimate_laplace(secs, s);
    double target = laplace_gap(s, study.par.h, study.par.sigma);
    double tol = std::max(3.0 * est.stderr_mean, 0.01);
    rep.lines.push_back(target_line("transform at s=" + std::to_string(s),
                                    est.mean, est.stderr_mean, target,
                                    TargetOrigin::ClosedForm, tol));
  }
  rep.lines.push_back(check_line(
      "gap collection under two minutes", study.seconds < 120.0,
      std::to_string(study.seconds) + " s for " +
          std::to_string(study.gaps.size()) + " gaps"));

  PlotSeries curve;
  curve.name = "transform_curve";
  curve.columns = {"s", "estimate", "closed_form"};
  for (int i = 1; i <= 40; ++i) {
    double s = 0.075 * i;
    auto est = estimate_laplace(secs, s);
    curve.rows.push_back({s, est.mean,
                          laplace_gap(s, study.par.h, study.par.sigma)});
  }
  rep.plots.push_back(std::move(curve));
  rep.runtime_seconds = study.seconds + clock.seconds();
  return rep;
}

// Criterion: the mean gap equals h^2 (in squared-height units) within 3 se.
inline StatReport criterion_mean_gap(const GapStudy& study) {
  detail::Stopwatch clock;
  StatReport rep;
  rep.suite = "mean-gap";
  auto est = sample_mean(study.gap_seconds());
  double target = (study.par.h / study.par.sigma) * (study.par.h /
                                                     study.par.sigma);
  rep.lines.push_back(target_line("mean gap", est.mean, est.stderr_mean,
                                  target, TargetOrigin::ClosedForm,
                                  3.0 * est.stderr_mean,
                                  "stopped quadratic of the passage"));
  rep.runtime_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Skeleton criterion: the level sequence of a circle walk is the fair
// neighbour walk on the cycle; non-neighbour transitions never occur.

inline StatReport criterion_skeleton(const LatticeParams& par,
                                     std::uint32_t bands,
                                     std::size_t transitions,
                                     std::uint64_t seed) {
  detail::Stopwatch clock;
  StatReport rep;
  rep.suite = "skeleton";
  int n = static_cast<int>(bands);
  RngStream rng(seed, 0x736b656cull);

  std::vector<int> levels;
  levels.reserve(transitions + 1);
  std::int64_t M = static_cast<std::int64_t>(par.m) * bands;
  std::int64_t site = stationary_periodic_site(par, bands, rng);
  std::int64_t span = static_cast<std::int64_t>(par.m);
  // Walk to the first seam, then record each passage to a neighbour seam.
  while (site % span != 0) site = wrap_site(site + (rng.next_bit() ? 1 : -1), M);
  int level = static_cast<int>((site / span) % bands);
  levels.push_back(level);
  std::int64_t d = 0;
  bool structural_ok = true;
  while (levels.size() <= transitions) {
    d += rng.next_bit() ? 1 : -1;
    if (d == span || d == -span) {
      int next = (level + (d == span ? 1 : n - 1)) % n;
      int diff = (next - level + n) % n;
      if (diff != 1 && diff != n - 1) structural_ok = false;
      level = next;
      levels.push_back(level);
      d = 0;
    }
  }

  auto est = estimate_transition_matrix(levels, n);
  double worst = 0.0;
  bool zeros_ok = true;
  PlotSeries heat;
  heat.name = "transition_matrix";
  heat.columns = {"from", "to", "probability"};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      heat.rows.push_back({double(i), double(j), est.prob[i][j]});
      int diff = (j - i + n) % n;
      if (diff == 1 || diff == n - 1)
        worst = std::max(worst, std::abs(est.prob[i][j] - 0.5));
      else if (est.count[i][j] != 0)
        zeros_ok = false;
    }
  rep.lines.push_back(target_line("worst neighbour deviation from one half",
                                  worst, 0.0, 0.0, TargetOrigin::ClosedForm,
                                  0.01,
                                  std::to_string(est.transitions) +
                                      " transitions"));
  rep.lines.push_back(check_line("non-neighbour transitions never occur",
                                 zeros_ok && structural_ok));
  rep.plots.push_back(std::move(heat));
  rep.runtime_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Kernel exactness criterion: exhaustive audits of every conditioned kernel
// in a pinned family, plus sampler frequency tests.

namespace detail {

struct KernelAudit {
  std::size_t paths = 0;
  bool exact = true;
  std::vector<CorridorPath> leaves;       // filled only when keep_paths
  std::vector<double> leaf_weights;
};

// Walks the conditioned choice tree in stretch order (down before up),
// checking that each leaf owns exactly the stretch its weight promises.
inline void audit_kernel_paths(const ConditionedKernel& k, CorridorPath& cur,
                               std::size_t beta, Tick t, BigInt& cursor,
                               std::size_t cap, KernelAudit& audit,
                               bool keep_paths) {
  if (audit.paths > cap) return;
  std::int64_t x = cur.back();
  if (t == k.L) {
    if (!k.is_target(x)) return;
    ++audit.paths;
    if (audit.paths > cap) return;
    BigInt width = BigInt(1) << beta;
    auto stretch = leaf_stretch(k, cur);
    if (stretch.lo != cursor || stretch.len != width) audit.exact = false;
    auto code = encode_filler(k, cur);
    CodeCursor replay{code, 0, nullptr};
    if (decode_filler(k, replay) != cur || replay.remaining() != 0)
      audit.exact = false;
    cursor += width;
    if (keep_paths) {
      audit.leaves.push_back(cur);
      audit.leaf_weights.push_back(static_cast<double>(width));
    }
    return;
  }
  // F[k][target] is 1 at k = 0 and 0 after, so one weight lookup prunes
  // dead branches and early absorption alike.
  Tick left = k.L - t;
  if (k.is_wall(x)) {
    std::int64_t nxt = k.wall_exit(x);
    if (k.weight(left - 1, nxt) > 0) {
      cur.push_back(nxt);
      audit_kernel_paths(k, cur, beta + 1, t + 1, cursor, cap, audit,
                         keep_paths);
      cur.pop_back();
    }
    return;
  }
  for (std::int64_t nxt : {x - 1, x + 1}) {
    if (nxt < 0 || nxt > k.width) continue;
    if (k.weight(left - 1, nxt) == 0) continue;
    cur.push_back(nxt);
    audit_kernel_paths(k, cur, beta, t + 1, cursor, cap, audit, keep_paths);
    cur.pop_back();
  }
}

inline KernelAudit audit_kernel(const ConditionedKernel& k, std::size_t cap,
                                bool keep_paths) {
  KernelAudit audit;
  CorridorPath cur{k.start};
  BigInt cursor = 0;
  audit_kernel_paths(k, cur, 0, 0, cursor, cap, audit, keep_paths);
  if (audit.paths <= cap && cursor != k.D) audit.exact = false;
  return audit;
}

}  // namespace detail

inline StatReport criterion_kernel_exactness(KernelCache& cache,
                                             std::uint64_t seed,
                                             std::size_t path_cap = 10000,
                                             std::size_t draws = 100000) {
  detail::Stopwatch clock;
  StatReport rep;
  rep.suite = "kernel-exactness";

  struct FamilyRow {
    KernelKind kind;
    std::vector<std::uint32_t> ms;
  };
  const std::vector<FamilyRow> family = {
      {KernelKind::ReflectedUp, {2, 3, 4, 5, 6, 8, 12}},
      {KernelKind::ReflectedDown, {2, 3, 4, 5, 6, 8, 12}},
      {KernelKind::CyclicSingle, {2, 3, 4}},
      {KernelKind::CyclicDouble, {2, 3, 4}},
  };

  std::size_t kernels_audited = 0, paths_audited = 0;
  bool all_exact = true;
  std::map<KernelKind, std::tuple<std::uint32_t, Tick, std::size_t>> pick;
  // Narrow corridors stay under the path cap at every length (m = 2 bounces
  // through a single path family), so the sweep needs its own length bound.
  const Tick max_len = 64;
  for (const auto& row : family) {
    for (std::uint32_t m : row.ms) {
      for (Tick L = m; L <= max_len; L += 2) {
        auto kern = cache.get(row.kind, m, L);
        auto audit = detail::audit_kernel(*kern, path_cap, false);
        if (audit.paths > path_cap) break;
        ++kernels_audited;
        paths_audited += audit.paths;
        if (!audit.exact) all_exact = false;
        if (audit.paths >= 40 && audit.paths <= 2500)
          pick[row.kind] = {m, L, audit.paths};
      }
    }
  }
  rep.lines.push_back(check_line(
      "leaf stretches tile the weight mass exactly", all_exact,
      std::to_string(paths_audited) + " paths across " +
          std::to_string(kernels_audited) + " kernels"));

  for (const auto& [kind, chosen] : pick) {
    auto [m, L, count] = chosen;
    auto kern = cache.get(kind, m, L);
    auto audit = detail::audit_kernel(*kern, path_cap, true);
    std::map<CorridorPath, std::size_t> index;
    for (std::size_t i = 0; i < audit.leaves.size(); ++i)
      index[audit.leaves[i]] = i;
    double total_weight = 0.0;
    for (double w : audit.leaf_weights) total_weight += w;
    RngStream rng(seed, 0x6472617700ull + static_cast<std::uint64_t>(kind));
    std::vector<double> observed(audit.leaves.size(), 0.0);
    bool draws_known = true;
    for (std::size_t i = 0; i < draws; ++i) {
      auto path = sample_filler(*kern, rng);
      auto it = index.find(path);
      if (it == index.end()) {
        draws_known = false;
        break;
      }
      observed[it->second] += 1.0;
    }
    std::string label = std::string(kernel_kind_name(kind)) + " m=" +
                        std::to_string(m) + " L=" + std::to_string(L);
    if (!draws_known) {
      rep.lines.push_back(check_line("sampler stays on the corridor " + label,
                                     false));
      continue;
    }
    std::vector<double> expected;
    for (double w : audit.leaf_weights)
      expected.push_back(w / total_weight * static_cast<double>(draws));
    auto chi = chi_square_gof(observed, expected);
    rep.lines.push_back(pvalue_line(
        "sampler frequencies " + label, chi.pvalue, 0.01,
        TargetOrigin::ExactEnumeration,
        std::to_string(count) + " leaves, " + std::to_string(draws) +
            " draws"));
  }
  rep.runtime_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// The coding maps under test, with samplers and exactness predicates.

namespace detail {

enum class TripVerdict { Starved, Exact, Mismatch };

struct MapCase {
  std::string name;
  Tick rmax = 512;           // half window for coding-window measurement
  std::size_t trip_len = 512;  // window length for round trips
  std::function<PathSample(RngStream&, Tick, std::size_t)> sample;
  // Pad-reading maps take the replica's pad seed; the rest ignore it.  The
  // digest also takes the pad origin, which tracks the input under shifts.
  std::function<TripVerdict(const PathSample&, std::uint64_t, KernelCache&)>
      round_trip;
  std::function<std::string(const PathSample&, Tick, std::uint64_t, Tick,
                            KernelCache&)>
      digest;
};

inline bool paths_match(const PathSample& a, const PathSample& b, Tick shift) {
  return a.t0 + shift == b.t0 && a.sites == b.sites &&
         a.codomain == b.codomain && a.bands == b.bands;
}

inline bool points_match(const MarkedPointProcess& a,
                         const MarkedPointProcess& b, Tick shift) {
  if (a.size() != b.size() || a.colours != b.colours ||
      a.has_ucodes != b.has_ucodes)
    return false;
  if (a.base.window.lo + shift != b.base.window.lo ||
      a.base.window.hi + shift != b.base.window.hi)
    return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.base.points[i] + shift != b.base.points[i]) return false;
    if (a.has_ucodes && !(a.ucodes[i] == b.ucodes[i])) return false;
  }
  return true;
}

inline bool starvation(const Error& e) {
  return e.code() == ErrorCode::InsufficientWindow ||
         e.code() == ErrorCode::NoMarkerInWindow;
}

inline std::vector<MapCase> map_cases() {
  std::vector<MapCase> cases;

  auto reflected_sampler = [](std::uint32_t m) {
    return [m](RngStream& rng, Tick t0, std::size_t len) {
      return sample_stationary_reflected(LatticeParams{1.0, m, 1.0}, len, rng,
                                         t0);
    };
  };
  auto periodic_sampler = [](std::uint32_t m, std::uint32_t bands) {
    return [m, bands](RngStream& rng, Tick t0, std::size_t len) {
      return sample_stationary_periodic(LatticeParams{1.0, m, 1.0}, bands,
                                        len, rng, t0);
    };
  };

  {
    MapCase c;
    c.name = "band-to-points";
    c.rmax = 512;
    c.trip_len = 384;
    c.sample = reflected_sampler(4);
    c.round_trip = [](const PathSample& x, std::uint64_t,
                      KernelCache& cache) {
      try {
        auto app = reflected_to_app(x, cache);
        auto back = app_to_reflected(app, cache);
        auto want =
            x.restrict(app.mpp.base.window.lo, app.mpp.base.window.hi);
        return paths_match(want, back, 0) ? TripVerdict::Exact
                                          : TripVerdict::Mismatch;
      } catch (const Error& e) {
        if (starvation(e)) return TripVerdict::Starved;
        throw;
      }
    };
    c.digest = [](const PathSample& x, Tick q, std::uint64_t, Tick,
                  KernelCache& cache) {
      return digest_points(reflected_to_app(x, cache).mpp, -q, q);
    };
    cases.push_back(std::move(c));
  }
  {
    MapCase c;
    c.name = "circle-to-points";
    c.rmax = 512;
    c.trip_len = 384;
    c.sample = periodic_sampler(4, 2);
    c.round_trip = [](const PathSample& x, std::uint64_t,
                      KernelCache& cache) {
      try {
        auto app = periodic_to_app(x, cache);
        auto back = app_to_periodic(app, cache);
        auto want =
            x.restrict(app.mpp.base.window.lo, app.mpp.base.window.hi);
        return paths_match(want, back, 0) ? TripVerdict::Exact
                                          : TripVerdict::Mismatch;
      } catch (const Error& e) {
        if (starvation(e)) return TripVerdict::Starved;
        throw;
      }
    };
    c.digest = [](const PathSample& x, Tick q, std::uint64_t, Tick,
                  KernelCache& cache) {
      return digest_points(periodic_to_app(x, cache).mpp, -q, q);
    };
    cases.push_back(std::move(c));
  }
  {
    MapCase c;
    c.name = "unfold";
    c.rmax = 512;
    c.trip_len = 384;
    c.sample = reflected_sampler(4);
    c.round_trip = [](const PathSample& x, std::uint64_t pad, KernelCache&) {
      try {
        auto y = unfold_reflected(x, pad);
        auto back = fold_periodic(y);
        return paths_match(x, back, 0) ? TripVerdict::Exact
                                       : TripVerdict::Mismatch;
      } catch (const Error& e) {
        if (starvation(e)) return TripVerdict::Starved;
        throw;
      }
    };
    c.digest = [](const PathSample& x, Tick q, std::uint64_t pad,
                  Tick origin, KernelCache&) {
      return digest_path(unfold_reflected(x, pad, origin), -q, q);
    };
    cases.push_back(std::move(c));
  }
  for (std::uint32_t bands : {4u, 6u}) {
    MapCase c;
    c.name = "marked-circle-" + std::to_string(bands);
    c.rmax = 1024;
    c.trip_len = bands == 4 ? 768 : 1024;
    c.sample = periodic_sampler(3, bands);
    c.round_trip = [bands](const PathSample& x, std::uint64_t,
                           KernelCache& cache) {
      try {
        auto out = periodic_to_marked_app(x, cache);
        auto back = marked_app_to_periodic(out, x.par, bands, cache);
        auto want = x.restrict(out.base.window.lo, out.base.window.hi);
        return paths_match(want, back, 0) ? TripVerdict::Exact
                                          : TripVerdict::Mismatch;
      } catch (const Error& e) {
        if (starvation(e)) return TripVerdict::Starved;
        throw;
      }
    };
    c.digest = [](const PathSample& x, Tick q, std::uint64_t, Tick,
                  KernelCache& cache) {
      return digest_points(periodic_to_marked_app(x, cache), -q, q);
    };
    cases.push_back(std::move(c));
  }
  struct Ratio {
    std::uint32_t a, b, m;
    Tick rmax;
    std::size_t len;
  };
  for (auto [a, b, m, rmax, len] : {Ratio{4, 2, 8, 2048, 1536},
                                    Ratio{2, 4, 4, 4096, 1024},
                                    Ratio{6, 4, 6, 8192, 2048}}) {
    MapCase c;
    c.name = "rescale-" + std::to_string(a) + "-" + std::to_string(b);
    c.rmax = rmax;
    c.trip_len = len;
    c.sample = reflected_sampler(m);
    c.round_trip = [a = a, b = b](const PathSample& x, std::uint64_t pad,
                                  KernelCache&) {
      try {
        TimeWindow covered{};
        auto y = scale_reflected(x, a, b, pad, 0, &covered);
        auto back = scale_reflected_back(y, a, b);
        if (back.t0 > covered.lo || back.end() - 1 < covered.hi)
          return TripVerdict::Mismatch;
        auto got = back.restrict(covered.lo, covered.hi);
        auto want = x.restrict(covered.lo, covered.hi);
        return paths_match(want, got, 0) ? TripVerdict::Exact
                                         : TripVerdict::Mismatch;
      } catch (const Error& e) {
        if (starvation(e)) return TripVerdict::Starved;
        throw;
      }
    };
    c.digest = [a = a, b = b](const PathSample& x, Tick q, std::uint64_t pad,
                              Tick origin, KernelCache&) {
      return digest_path(scale_reflected(x, a, b, pad, origin), -q, q);
    };
    cases.push_back(std::move(c));
  }
  return cases;
}

}  // namespace detail

// Round-trip criterion: inverse(map(x)) reproduces x bit for bit on the
// window the map certifies, across fresh stationary inputs.
inline StatReport criterion_round_trip(KernelCache& cache, std::uint64_t seed,
                                       std::size_t trips = 1000,
                                       unsigned threads = 1) {
  detail::Stopwatch clock;
  StatReport rep;
  rep.suite = "round-trip";
  std::uint64_t salt = 0;
  for (const auto& mc : detail::map_cases()) {
    ++salt;
    struct Tally {
      int exact = 0, mismatch = 0, starved = 0;
    };
    auto tallies = run_replicas<Tally>(
        trips, threads, [&, salt](std::size_t i) {
          RngStream rng(seed ^ (0x7472697073ull + salt), i);
          Tally t;
          for (int attempt = 0; attempt < 64; ++attempt) {
            Tick t0 = static_cast<Tick>(rng.below(4096)) - 2048;
            auto x = mc.sample(rng, t0, mc.trip_len);
            auto v = mc.round_trip(x, rng.next_u64(), cache);
            if (v == detail::TripVerdict::Starved) {
              ++t.starved;
              continue;
            }
            (v == detail::TripVerdict::Exact ? t.exact : t.mismatch) += 1;
            return t;
          }
          ++t.mismatch;  // could not certify a window in 64 attempts
          return t;
        });
    Tally total;
    for (const auto& t : tallies) {
      total.exact += t.exact;
      total.mismatch += t.mismatch;
      total.starved += t.starved;
    }
    rep.lines.push_back(check_line(
        mc.name + " inverse is bit exact",
        total.mismatch == 0 && total.exact == static_cast<int>(trips),
        std::to_string(total.exact) + "/" + std::to_string(trips) +
            " exact, " + std::to_string(total.starved) +
            " windows resampled"));
  }
  rep.runtime_seconds = clock.seconds();
  return rep;
}

// Equivariance criterion: mapping a shifted input equals shifting the mapped
// output, exactly, for random grid shifts.
inline StatReport criterion_equivariance(KernelCache& cache,
                                         std::uint64_t seed,
                                         std::size_t shifts = 100,
                                         unsigned threads = 1) {
  detail::Stopwatch clock;
  StatReport rep;
  rep.suite = "equivariance";
  std::uint64_t salt = 0;
  for (const auto& mc : detail::map_cases()) {
    ++salt;
    auto outcomes = run_replicas<int>(
        shifts, threads, [&, salt](std::size_t i) -> int {
          RngStream rng(seed ^ (0x7368696674ull + salt), i);
          for (int attempt = 0; attempt < 64; ++attempt) {
            Tick t0 = static_cast<Tick>(rng.below(2048)) - 1024;
            Tick s = static_cast<Tick>(rng.below(800)) - 400;
            if (s == 0) s = 401;
            auto x = mc.sample(rng, t0, mc.trip_len);
            std::uint64_t pad = rng.next_u64();
            PathSample xs = x;
            xs.t0 += s;
            const Tick wide = Tick(1) << 30;  // covers any output in full
            std::string base, moved;
            try {
              base = mc.digest(x, wide, pad, 0, cache);
              moved = mc.digest(xs, wide, pad, s, cache);
            } catch (const Error& e) {
              if (detail::starvation(e)) continue;
              throw;
            }
            // The digests cover everything each output says; shifting every
            // time stamp in the base digest must give the moved one.
            std::string expect;
            std::istringstream in(base);
            std::string item;
            while (std::getline(in, item, ';')) {
              if (item.empty()) continue;
              auto colon = item.find(':');
              Tick t = std::stoll(item.substr(0, colon));
              expect += std::to_string(t + s) + item.substr(colon) + ";";
            }
            return expect == moved ? 1 : 0;
          }
          return -1;
        });
    int ok = 0, bad = 0, dry = 0;
    for (int o : outcomes) (o == 1 ? ok : o == 0 ? bad : dry) += 1;
    rep.lines.push_back(check_line(
        mc.name + " commutes with shifts", bad == 0 && dry == 0,
        std::to_string(ok) + "/" + std::to_string(shifts) + " exact"));
  }
  rep.runtime_seconds = clock.seconds();
  return rep;
}

// Finitariness criterion: the coding window around the origin is finite on
// every sample, with its quantiles reported.
inline StatReport criterion_coding_window(KernelCache& cache,
                                          std::uint64_t seed,
                                          std::size_t samples = 1000,
                                          unsigned threads = 1) {
  detail::Stopwatch clock;
  StatReport rep;
  rep.suite = "coding-window";
  const Tick query = 4;
  std::uint64_t salt = 0;
  for (const auto& mc : detail::map_cases()) {
    ++salt;
    auto radii = run_replicas<Tick>(
        samples, threads, [&, salt](std::size_t i) -> Tick {
          RngStream rng(seed ^ (0x77696e646f77ull + salt), i);
          for (int attempt = 0; attempt < 64; ++attempt) {
            auto x = mc.sample(rng, -mc.rmax,
                               static_cast<std::size_t>(2 * mc.rmax) + 1);
            std::uint64_t pad = rng.next_u64();
            auto run = [&](const PathSample& p) {
              return mc.digest(p, query, pad, 0, cache);
            };
            try {
              return measure_coding_window(run, x, query);
            } catch (const Error& e) {
              if (detail::starvation(e)) continue;
              throw;
            }
          }
          return -1;
        });
    bool all_finite = true;
    std::vector<double> xs;
    for (Tick r : radii) {
      if (r < 0 || r >= mc.rmax) all_finite = false;
      xs.push_back(static_cast<double>(r));
    }
    auto qs = quantiles_of(xs, {0.5, 0.9, 0.99, 1.0});
    rep.lines.push_back(check_line(
        mc.name + " window finite on every sample", all_finite,
        "median " + std::to_string(qs[0]) + " ticks, max " +
            std::to_string(qs[3])));
    rep.quantiles.push_back(
        {mc.name, {0.5, 0.9, 0.99, 1.0}, qs});
  }
  rep.runtime_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Distribution battery: mapped outputs must look like the stationary law
// they claim, jointly at Bonferroni-corrected level alpha.

namespace detail {

struct BatterySample {
  std::vector<double> gaps;             // seconds
  std::vector<double> codes;            // uniform values, wide codes only
  std::vector<std::pair<double, double>> pairs;
  std::optional<double> marginal;       // smeared value in [0, span)
  bool structure_ok = true;
  std::size_t transitions = 0;
  bool used = false;
};

struct BatteryCase {
  std::string name;
  LatticeParams gap_par;       // lattice whose passage law the gaps follow
  double marginal_span = 0.0;  // 0 when the output carries no band marginal
  bool has_codes = false;
  std::function<BatterySample(RngStream&, KernelCache&)> replica;
};

constexpr std::size_t kMinCodeBits = 10;
constexpr std::size_t kMinMarkBits = 12;

inline void battery_collect_app(const MarkedPointProcess& mpp, double dt,
                                BatterySample& out) {
  double prev = -1.0;
  bool prev_set = false;
  for (std::size_t i = 0; i < mpp.size(); ++i) {
    if (i + 1 < mpp.size()) {
      out.gaps.push_back(
          static_cast<double>(mpp.base.points[i + 1] - mpp.base.points[i]) *
          dt);
      if (mpp.colours[i + 1] == mpp.colours[i]) out.structure_ok = false;
      ++out.transitions;
      const auto& u = mpp.ucodes[i];
      if (u.size() >= kMinCodeBits) {
        double v = u.value();
        out.codes.push_back(v);
        if (prev_set) out.pairs.emplace_back(prev, v);
        prev = v;
        prev_set = true;
      } else {
        prev_set = false;
      }
    }
  }
}

inline std::vector<BatteryCase> battery_cases(std::size_t ticks) {
  const LatticeParams par{1.0, 16, 1.0};
  std::vector<BatteryCase> cases;

  cases.push_back(
      {"band-to-points", par, 0.0, true,
       [par, ticks](RngStream& rng, KernelCache& cache) {
         BatterySample out;
         auto x = sample_stationary_reflected(
             par, ticks, rng, -static_cast<Tick>(ticks) / 2);
         try {
           auto app = reflected_to_app(x, cache);
           battery_collect_app(app.mpp, par.dt(), out);
           out.used = true;
         } catch (const Error& e) {
           if (!starvation(e)) throw;
         }
         return out;
       }});

  cases.push_back(
      {"circle-to-points", par, 0.0, true,
       [par, ticks](RngStream& rng, KernelCache& cache) {
         BatterySample out;
         auto x = sample_stationary_periodic(
             par, 2, ticks, rng, -static_cast<Tick>(ticks) / 2);
         try {
           auto app = periodic_to_app(x, cache);
           battery_collect_app(app.mpp, par.dt(), out);
           out.used = true;
         } catch (const Error& e) {
           if (!starvation(e)) throw;
         }
         return out;
       }});

  cases.push_back(
      {"unfold", par, 2.0 * par.h, false,
       [par, ticks](RngStream& rng, KernelCache&) {
         BatterySample out;
         auto x = sample_stationary_reflected(
             par, ticks, rng, -static_cast<Tick>(ticks) / 2);
         try {
           auto y = unfold_reflected(x, rng.next_u64());
           if (y.t0 <= 0 && y.end() > 0)
             out.marginal = smear_periodic(y.at(0), par, rng);
           auto part = extract_partition(y);
           for (std::size_t i = 0; i + 1 < part.size(); ++i) {
             out.gaps.push_back(
                 static_cast<double>(part.points[i + 1].t -
                                     part.points[i].t) *
                 par.dt());
             if (part.points[i + 1].level == part.points[i].level)
               out.structure_ok = false;
             ++out.transitions;
           }
           out.used = true;
         } catch (const Error& e) {
           if (!starvation(e)) throw;
         }
         return out;
       }});

  cases.push_back(
      {"fold", par, par.h, false,
       [par, ticks](RngStream& rng, KernelCache&) {
         BatterySample out;
         auto y = sample_stationary_periodic(
             par, 2, ticks, rng, -static_cast<Tick>(ticks) / 2);
         try {
           auto x = fold_periodic(y);
           if (x.t0 <= 0 && x.end() > 0)
             out.marginal = smear_reflected(x.at(0), par, rng);
           auto part = extract_partition(x);
           for (std::size_t i = 0; i + 1 < part.size(); ++i) {
             out.gaps.push_back(
                 static_cast<double>(part.points[i + 1].t -
                                     part.points[i].t) *
                 par.dt());
             if (part.points[i + 1].level == part.points[i].level)
               out.structure_ok = false;
             ++out.transitions;
           }
           out.used = true;
         } catch (const Error& e) {
           if (!starvation(e)) throw;
         }
         return out;
       }});

  cases.push_back(
      {"marked-circle", par, 0.0, true,
       [par, ticks](RngStream& rng, KernelCache& cache) {
         BatterySample out;
         auto x = sample_stationary_periodic(
             par, 4, 2 * ticks, rng, -static_cast<Tick>(ticks));
         try {
           auto mpp = periodic_to_marked_app(x, cache);
           double prev = -1.0;
           bool prev_set = false;
           for (std::size_t i = 0; i < mpp.size(); ++i) {
             if (i + 1 < mpp.size()) {
               out.gaps.push_back(static_cast<double>(
                                      mpp.base.points[i + 1] -
                                      mpp.base.points[i]) *
                                  par.dt());
               ++out.transitions;
             }
             if (mpp.colours[i] != static_cast<int>(i % 2))
               out.structure_ok = false;
             if (i % 2 == 1 && !mpp.ucodes[i].empty())
               out.structure_ok = false;
             const auto& u = mpp.ucodes[i];
             if (i % 2 == 0 && u.size() >= 2 + kMinMarkBits) {
               double v = u.subcode(2, u.size() - 2).value();
               out.codes.push_back(v);
               if (prev_set) out.pairs.emplace_back(prev, v);
               prev = v;
               prev_set = true;
             }
           }
           out.used = true;
         } catch (const Error& e) {
           if (!starvation(e)) throw;
         }
         return out;
       }});

  cases.push_back(
      {"rescale-4-2", LatticeParams{0.5, 8, 1.0}, 0.5, false,
       [par, ticks](RngStream& rng, KernelCache&) {
         BatterySample out;
         auto x = sample_stationary_reflected(
             par, ticks, rng, -static_cast<Tick>(ticks) / 2);
         try {
           TimeWindow covered{};
           auto y = scale_reflected(x, 4, 2, rng.next_u64(), 0, &covered);
           if (covered.lo <= 0 && covered.hi >= 0)
             out.marginal = smear_reflected(y.at(0), y.par, rng);
           auto part = extract_partition(
               y.restrict(covered.lo, covered.hi));
           for (std::size_t i = 0; i + 1 < part.size(); ++i) {
             out.gaps.push_back(
                 static_cast<double>(part.points[i + 1].t -
                                     part.points[i].t) *
                 y.par.dt());
             if (part.points[i + 1].level == part.points[i].level)
               out.structure_ok = false;
             ++out.transitions;
           }
           out.used = true;
         } catch (const Error& e) {
           if (!starvation(e)) throw;
         }
         return out;
       }});

  return cases;
}

struct PendingP {
  std::string name;
  double p = 1.0;
  std::string note;
};

}  // namespace detail

inline StatReport criterion_battery(KernelCache& cache, std::uint64_t seed,
                                    std::size_t replicas = 400,
                                    std::size_t ticks = 8192,
                                    double alpha = 0.01,
                                    unsigned threads = 1) {
  detail::Stopwatch clock;
  StatReport rep;
  rep.suite = "battery";
  std::vector<detail::PendingP> pending;
  std::vector<StatLine> structural;

  std::uint64_t salt = 0;
  for (const auto& bc : detail::battery_cases(ticks)) {
    ++salt;
    auto samples = run_replicas<detail::BatterySample>(
        replicas, threads, [&, salt](std::size_t i) {
          RngStream rng(seed ^ (0x62617474ull + salt), i);
          return bc.replica(rng, cache);
        });
    std::vector<double> gaps, codes, marginals;
    std::vector<std::pair<double, double>> pairs;
    bool structure_ok = true;
    std::size_t transitions = 0, used = 0;
    for (const auto& s : samples) {
      if (!s.used) continue;
      ++used;
      gaps.insert(gaps.end(), s.gaps.begin(), s.gaps.end());
      codes.insert(codes.end(), s.codes.begin(), s.codes.end());
      pairs.insert(pairs.end(), s.pairs.begin(), s.pairs.end());
      if (s.marginal) marginals.push_back(*s.marginal);
      structure_ok = structure_ok && s.structure_ok;
      transitions += s.transitions;
    }
    structural.push_back(check_line(
        bc.name + " colours alternate", structure_ok && used == replicas,
        std::to_string(transitions) + " transitions in " +
            std::to_string(used) + " replicas"));

    for (double s : detail::kLaplaceGrid) {
      auto est = estimate_laplace(gaps, s);
      double target = lattice_gap_laplace(s, bc.gap_par);
      double z = (est.mean - target) / est.stderr_mean;
      pending.push_back({bc.name + " gap transform s=" + std::to_string(s),
                         normal_two_sided_p(z),
                         "z=" + std::to_string(z) + ", n=" +
                             std::to_string(est.n)});
    }
    if (bc.has_codes) {
      auto ks = ks_uniform_test(codes);
      pending.push_back({bc.name + " mark values uniform", ks.pvalue,
                         "n=" + std::to_string(ks.n)});
      auto corr = pair_correlation(pairs);
      pending.push_back({bc.name + " mark serial independence",
                         normal_two_sided_p(corr.zscore),
                         "r=" + std::to_string(corr.corr) + ", n=" +
                             std::to_string(corr.n)});
    }
    if (bc.marginal_span > 0.0) {
      std::vector<double> unit;
      for (double v : marginals) unit.push_back(v / bc.marginal_span);
      auto ks = ks_uniform_test(unit);
      pending.push_back({bc.name + " band marginal uniform", ks.pvalue,
                         "n=" + std::to_string(ks.n)});
    }
  }

  double level = alpha / static_cast<double>(pending.size());
  for (const auto& p : pending)
    rep.lines.push_back(pvalue_line(
        p.name, p.p, level, TargetOrigin::ClosedForm,
        p.note + ", family level " + std::to_string(alpha)));
  for (auto& l : structural) rep.lines.push_back(std::move(l));
  rep.runtime_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Factor criterion: the deterministic point factor produces a Poisson
// process of the requested rate.

inline StatReport criterion_factor(std::uint64_t seed, double rate = 1.0,
                                   std::size_t paths = 400,
                                   std::size_t ticks = 61440,
                                   unsigned threads = 1) {
  detail::Stopwatch clock;
  StatReport rep;
  rep.suite = "factor";
  const LatticeParams par{1.0, 16, 1.0};
  const Tick t0 = -2048;
  const Tick half = 25600;  // 100 seconds at dt = 1/256
  const Tick sub = detail::kSubTicks;
  const double window_seconds =
      2.0 * static_cast<double>(half) * par.dt();

  struct PathStats {
    std::vector<double> gaps;
    double count_a = -1.0, count_b = -1.0;
  };
  auto stats = run_replicas<PathStats>(
      paths, threads, [&](std::size_t i) {
        RngStream rng(seed ^ 0x666163746full, i);
        PathStats st;
        auto x = sample_stationary_reflected(par, ticks, rng, t0);
        auto pts = poisson_factor(x, rate);
        if (pts.window.lo > 0 || pts.window.hi < 2 * half * sub) return st;
        double a = 0, b = 0;
        for (std::size_t k = 0; k < pts.points.size(); ++k) {
          Tick t = pts.points[k];
          if (t >= 0 && t < half * sub) a += 1.0;
          if (t >= half * sub && t < 2 * half * sub) b += 1.0;
          if (k > 0)
            st.gaps.push_back(
                static_cast<double>(t - pts.points[k - 1]) * pts.tick_size);
        }
        st.count_a = a;
        st.count_b = b;
        return st;
      });

  std::vector<double> gaps, counts;
  std::vector<std::vector<double>> table(2, std::vector<double>(2, 0.0));
  std::size_t used = 0;
  for (const auto& st : stats) {
    if (st.count_a < 0) continue;
    ++used;
    gaps.insert(gaps.end(), st.gaps.begin(), st.gaps.end());
    counts.push_back(st.count_a + st.count_b);
    double median = rate * static_cast<double>(half) * par.dt();
    table[st.count_a < median ? 0 : 1][st.count_b < median ? 0 : 1] += 1.0;
  }
  double target = rate * window_seconds;

  auto ks = ks_exponential_test(gaps, rate);
  rep.lines.push_back(pvalue_line("spacings exponential", ks.pvalue, 0.01,
                                  TargetOrigin::ClosedForm,
                                  "n=" + std::to_string(ks.n)));
  auto mean = sample_mean(counts);
  rep.lines.push_back(target_line("count mean", mean.mean, mean.stderr_mean,
                                  target, TargetOrigin::ClosedForm,
                                  3.0 * mean.stderr_mean,
                                  std::to_string(used) + " windows of " +
                                      std::to_string(window_seconds) + " s"));
  auto var = sample_variance(counts);
  rep.lines.push_back(target_line("count variance", var.var, var.se, target,
                                  TargetOrigin::ClosedForm, 3.0 * var.se));
  auto ind = chi_square_independence(table);
  rep.lines.push_back(pvalue_line("disjoint windows independent", ind.pvalue,
                                  0.01, TargetOrigin::Literature,
                                  "2x2 split at the half-window median"));

  PlotSeries qq;
  qq.name = "spacing_quantiles";
  qq.columns = {"p", "observed", "exponential"};
  std::vector<double> probs;
  for (int i = 1; i < 100; ++i) probs.push_back(0.01 * i);
  auto obs = quantiles_of(gaps, probs);
  for (std::size_t i = 0; i < probs.size(); ++i)
    qq.rows.push_back(
        {probs[i], obs[i], -std::log(1.0 - probs[i]) / rate});
  rep.plots.push_back(std::move(qq));
  rep.runtime_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Family criterion: gap laws for (h, sigma) and (2h, 2sigma) agree; the
// ratio h/sigma is all the law can see.

inline StatReport criterion_family(std::uint64_t seed,
                                   std::size_t gaps_each = 20000) {
  detail::Stopwatch clock;
  StatReport rep;
  rep.suite = "family";
  LatticeParams base{1.0, 16, 1.0};
  LatticeParams doubled = sigma_variant(base, 2.0);

  auto study_a = collect_gap_study(base, gaps_each, seed ^ 0x66616d41ull);
  auto study_b = collect_gap_study(doubled, gaps_each, seed ^ 0x66616d42ull);
  rep.lines.push_back(check_line("tick sizes agree",
                                 base.dt() == doubled.dt(),
                                 "dt=" + std::to_string(base.dt())));
  auto ks = ks_two_sample(study_a.gap_seconds(), study_b.gap_seconds());
  rep.lines.push_back(pvalue_line("gap laws indistinguishable", ks.pvalue,
                                  0.01, TargetOrigin::ClosedForm,
                                  "two-sample, n=" +
                                      std::to_string(gaps_each) + " each"));
  auto la = estimate_laplace(study_a.gap_seconds(), 1.0);
  auto lb = estimate_laplace(study_b.gap_seconds(), 1.0);
  rep.lines.push_back(measured_line("transform at s=1, base family", la.mean,
                                    la.stderr_mean));
  rep.lines.push_back(measured_line("transform at s=1, doubled family",
                                    lb.mean, lb.stderr_mean));
  rep.runtime_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// The acceptance set: every criterion at its pinned size, in a fixed order.
// Sizes and tolerances here are the contract; the runner below can scale
// them for exploratory runs, this list cannot.

struct CriterionResult {
  int number = 0;
  std::string title;
  StatReport report;
};

inline std::vector<CriterionResult> run_acceptance(KernelCache& cache,
                                                   std::uint64_t seed,
                                                   unsigned threads = 1) {
  cache.set_retention(384);
  std::vector<CriterionResult> out;

  auto study = collect_gap_study(LatticeParams{1.0, 50, 1.0}, 100000, seed);
  out.push_back({1, "gap transform matches the closed form",
                 criterion_gap_transform(study)});
  out.push_back({2, "mean gap equals the squared height",
                 criterion_mean_gap(study)});
  out.push_back({3, "four level skeleton is the lazy neighbour walk",
                 criterion_skeleton(LatticeParams{1.0, 16, 1.0}, 4, 100000,
                                    seed)});
  out.push_back({4, "conditioned kernels code exactly",
                 criterion_kernel_exactness(cache, seed, 10000, 100000)});
  out.push_back({5, "round trips are bit exact",
                 criterion_round_trip(cache, seed, 1000, threads)});
  out.push_back({6, "maps commute with shifts",
                 criterion_equivariance(cache, seed, 100, threads)});
  out.push_back({7, "coding windows are finite",
                 criterion_coding_window(cache, seed, 1000, threads)});
  out.push_back({8, "mapped outputs pass the distribution battery",
                 criterion_battery(cache, seed, 400, 8192, 0.01, threads)});
  out.push_back({9, "the point factor is Poisson",
                 criterion_factor(seed, 1.0, 400, 67584, threads)});
  out.push_back({10, "height and diffusivity families match",
                 criterion_family(seed, 20000)});
  return out;
}

// ---------------------------------------------------------------------------
// Suite dispatch for the runner.

inline StatReport run_suite(const ExperimentConfig& cfg, KernelCache& cache) {
  cfg.validate();
  StatReport rep;
  if (cfg.task == "gaplaw") {
    auto study = collect_gap_study(cfg.lattice(), cfg.samples, cfg.seed);
    auto a = criterion_gap_transform(study);
    auto b = criterion_mean_gap(study);
    rep = std::move(a);
    rep.suite = "gaplaw";
    for (auto& l : b.lines) rep.lines.push_back(std::move(l));
    rep.runtime_seconds += b.runtime_seconds;
  } else if (cfg.task == "skeleton") {
    rep = criterion_skeleton(cfg.lattice(), std::max(cfg.bands, 4u),
                             cfg.samples, cfg.seed);
  } else if (cfg.task == "kernels") {
    rep = criterion_kernel_exactness(cache, cfg.seed, 10000, cfg.samples);
  } else if (cfg.task == "roundtrip") {
    rep = criterion_round_trip(cache, cfg.seed, cfg.paths, cfg.threads);
  } else if (cfg.task == "equivariance") {
    rep = criterion_equivariance(cache, cfg.seed, cfg.paths, cfg.threads);
  } else if (cfg.task == "window") {
    rep = criterion_coding_window(cache, cfg.seed, cfg.paths, cfg.threads);
  } else if (cfg.task == "battery") {
    rep = criterion_battery(cache, cfg.seed, cfg.paths, cfg.ticks, cfg.alpha,
                            cfg.threads);
  } else if (cfg.task == "factor") {
    rep = criterion_factor(cfg.seed, cfg.rate, cfg.paths, cfg.ticks,
                           cfg.threads);
  } else if (cfg.task == "family") {
    rep = criterion_family(cfg.seed, cfg.samples);
  } else {
    require(false, ErrorCode::ConfigError, "unknown suite " + cfg.task);
  }
  rep.config_text = cfg.to_text();
  return rep;
}

}  // namespace bmiso
