#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bmiso/errors.hpp"
#include "bmiso/lattice.hpp"
#include "bmiso/point_process.hpp"

namespace bmiso {

// The alternating first-passage partition of a band path.  Level sites are
// the multiples of m: a reflected path has levels at both walls, a periodic
// path one per band seam.  Partition points sit on level sites, consecutive
// points on adjacent levels, and between two points the path revisits only
// the level it started from.
struct LevelSystem {
  Codomain codomain = Codomain::Reflected;
  std::uint32_t m = 2;
  std::uint32_t n_levels = 2;

  std::int64_t site_of(int level) const {
    return static_cast<std::int64_t>(level) * m;
  }

  // -1 when the site is not a level site.
  int level_of(std::int64_t site) const {
    if (site % m != 0) return -1;
    return static_cast<int>(site / m);
  }

  bool on_level(std::int64_t site) const { return site % m == 0; }

  // Adjacent levels; a two-level cycle has a single distinct neighbour.
  std::vector<int> neighbours(int level) const {
    if (codomain == Codomain::Reflected) return {1 - level};
    int n = static_cast<int>(n_levels);
    int up = (level + 1) % n, down = (level + n - 1) % n;
    if (up == down) return {up};
    return {down, up};
  }

  bool neighbour_site(int level, std::int64_t site) const {
    for (int nb : neighbours(level))
      if (site_of(nb) == site) return true;
    return false;
  }
};

inline LevelSystem level_system(const PathSample& path) {
  path.par.validate();
  require(path.codomain != Codomain::Free, ErrorCode::DomainError,
          "free paths carry no level partition");
  LevelSystem sys;
  sys.codomain = path.codomain;
  sys.m = path.par.m;
  if (path.codomain == Codomain::Reflected) {
    sys.n_levels = 2;
  } else {
    require(path.bands >= 2, ErrorCode::DomainError,
            "periodic partition needs at least two bands");
    sys.n_levels = path.bands;
  }
  return sys;
}

struct PartitionPoint {
  Tick t = 0;
  int level = 0;

  bool operator==(const PartitionPoint& o) const {
    return t == o.t && level == o.level;
  }
};

struct LevelPartition {
  std::vector<PartitionPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct IntervalLabel {
  int from = 0, to = 0;

  bool upward() const { return to > from; }
  bool downward() const { return to < from; }
};

inline IntervalLabel interval_label(const LevelPartition& part,
                                    std::size_t i) {
  require(i + 1 < part.size(), ErrorCode::IntervalOutsideWindow,
          "interval index past partition end");
  return {part.points[i].level, part.points[i + 1].level};
}

inline std::vector<Tick> partition_gaps(const LevelPartition& part) {
  std::vector<Tick> gaps;
  for (std::size_t i = 1; i < part.size(); ++i)
    gaps.push_back(part.points[i].t - part.points[i - 1].t);
  return gaps;
}

namespace detail {

// First tick strictly after `from` whose site satisfies pred, else nullopt.
template <class Pred>
std::optional<Tick> scan_forward(const PathSample& p, Tick from, Pred pred) {
  for (Tick t = from + 1; t < p.end(); ++t)
    if (pred(p.sites[static_cast<std::size_t>(t - p.t0)])) return t;
  return std::nullopt;
}

// Last tick strictly before `from` whose site satisfies pred, else nullopt.
template <class Pred>
std::optional<Tick> scan_backward(const PathSample& p, Tick from, Pred pred) {
  for (Tick t = from - 1; t >= p.t0; --t)
    if (pred(p.sites[static_cast<std::size_t>(t - p.t0)])) return t;
  return std::nullopt;
}

inline std::optional<Tick> next_neighbour_visit(const PathSample& p,
                                                const LevelSystem& sys,
                                                Tick from, int level) {
  return scan_forward(
      p, from, [&](std::int64_t s) { return sys.neighbour_site(level, s); });
}

inline std::optional<Tick> last_neighbour_visit(const PathSample& p,
                                                const LevelSystem& sys,
                                                Tick from, int level) {
  return scan_backward(
      p, from, [&](std::int64_t s) { return sys.neighbour_site(level, s); });
}

}  // namespace detail

// Next partition point after pt: the first passage to a neighbouring level.
inline std::optional<PartitionPoint> next_point(const PathSample& path,
                                                const LevelSystem& sys,
                                                const PartitionPoint& pt) {
  auto t = detail::next_neighbour_visit(path, sys, pt.t, pt.level);
  if (!t) return std::nullopt;
  return PartitionPoint{*t, sys.level_of(path.at(*t))};
}

// Partition point preceding pt, recovered from the window alone.  Reading
// backwards: d is the last neighbour visit before pt (a revisit of the
// previous interval's level), d' the last visit before d to that level's own
// neighbours (inside the interval before), and the point is the first
// neighbour passage after d'.  Starvation of either backward scan means the
// window is too short to certify the point.
inline std::optional<PartitionPoint> try_previous_point(
    const PathSample& path, const LevelSystem& sys, const PartitionPoint& pt,
    std::string* starved = nullptr) {
  auto d = detail::last_neighbour_visit(path, sys, pt.t, pt.level);
  if (!d) {
    if (starved) *starved = "d";
    return std::nullopt;
  }
  int prev_level = sys.level_of(path.at(*d));
  auto dp = detail::last_neighbour_visit(path, sys, *d, prev_level);
  if (!dp) {
    if (starved) *starved = "d'";
    return std::nullopt;
  }
  int dp_level = sys.level_of(path.at(*dp));
  auto a = detail::next_neighbour_visit(path, sys, *dp, dp_level);
  require(a.has_value() && *a < pt.t, ErrorCode::DomainError,
          "backward rule lost its anchor");
  PartitionPoint prev{*a, sys.level_of(path.at(*a))};
  require(prev.level == prev_level, ErrorCode::DomainError,
          "backward rule recovered a mismatched level");
  return prev;
}

inline PartitionPoint previous_point(const PathSample& path,
                                     const LevelSystem& sys,
                                     const PartitionPoint& pt) {
  std::string starved;
  auto prev = try_previous_point(path, sys, pt, &starved);
  require(prev.has_value(), ErrorCode::InsufficientWindow,
          "backward scan " + starved + " ran out of window");
  return *prev;
}

// All partition points the window certifies going right: the first level
// visit c lies inside some interval whose level it revisits, so the first
// neighbour passage after c is a genuine point; chaining passages gives the
// rest.  The window edge joins in iff it sits on a level site whose passage
// completes in-window, which keeps re-extraction of decoded windows exact.
inline LevelPartition extract_partition(const PathSample& path) {
  auto sys = level_system(path);
  LevelPartition part;
  if (path.sites.empty()) return part;

  std::optional<Tick> c = detail::scan_forward(
      path, path.t0 - 1, [&](std::int64_t s) { return sys.on_level(s); });
  if (!c) return part;
  int c_level = sys.level_of(path.at(*c));
  auto seed = detail::next_neighbour_visit(path, sys, *c, c_level);
  if (!seed) return part;

  if (*c == path.t0) part.points.push_back({path.t0, c_level});
  PartitionPoint cur{*seed, sys.level_of(path.at(*seed))};
  part.points.push_back(cur);
  while (auto nxt = next_point(path, sys, cur)) {
    part.points.push_back(*nxt);
    cur = *nxt;
  }
  return part;
}

// Interior gaps with certain endpoints: when the window edge was adopted as
// a point its gap is dropped, since the edge may be a mid-interval revisit.
inline std::vector<Tick> certain_gaps(const PathSample& path,
                                      const LevelPartition& part) {
  auto gaps = partition_gaps(part);
  if (!part.empty() && part.points.front().t == path.t0 && !gaps.empty())
    gaps.erase(gaps.begin());
  return gaps;
}

// Locating the interval that covers the origin.  c is the last level visit
// at or left of the origin, b the first passage afterwards (the interval's
// right endpoint), and the backward rule applied at b yields the left
// endpoint a.  Each scan that runs out of path reports its own tag.
struct OriginTrace {
  Tick c = 0, b = 0, d = 0, dprime = 0, a = 0;
  int level_a = 0, level_b = 0;
};

struct FirstInterval {
  PartitionPoint p0, p1;
  OriginTrace trace;
};

inline FirstInterval first_interval(const PathSample& path, Tick origin = 0) {
  auto sys = level_system(path);
  require(origin >= path.t0 && origin < path.end(), ErrorCode::DomainError,
          "origin outside the path window");

  auto c = detail::scan_backward(
      path, origin + 1, [&](std::int64_t s) { return sys.on_level(s); });
  require(c.has_value(), ErrorCode::InsufficientWindow,
          "scan c found no level visit left of the origin");
  int c_level = sys.level_of(path.at(*c));

  auto b = detail::next_neighbour_visit(path, sys, *c, c_level);
  require(b.has_value(), ErrorCode::InsufficientWindow,
          "scan b found no passage right of the origin");
  int b_level = sys.level_of(path.at(*b));

  auto d = detail::last_neighbour_visit(path, sys, *b, b_level);
  require(d.has_value(), ErrorCode::InsufficientWindow,
          "scan d ran out of window");
  int d_level = sys.level_of(path.at(*d));
  require(d_level == c_level, ErrorCode::DomainError,
          "origin interval level drifted");

  auto dp = detail::last_neighbour_visit(path, sys, *d, d_level);
  require(dp.has_value(), ErrorCode::InsufficientWindow,
          "scan d' ran out of window");
  int dp_level = sys.level_of(path.at(*dp));

  auto a = detail::next_neighbour_visit(path, sys, *dp, dp_level);
  require(a.has_value() && *a <= *c && *a <= origin, ErrorCode::DomainError,
          "origin interval left endpoint out of place");
  require(sys.level_of(path.at(*a)) == c_level, ErrorCode::DomainError,
          "origin interval left endpoint level mismatch");

  FirstInterval fi;
  fi.p0 = {*a, c_level};
  fi.p1 = {*b, b_level};
  fi.trace = {*c, *b, *d, *dp, *a, c_level, b_level};
  return fi;
}

// The full two-sided partition the window certifies around the origin,
// plus the index of the covering interval's left endpoint.
struct OriginPartition {
  LevelPartition part;
  std::size_t i0 = 0;
  OriginTrace trace;
};

inline OriginPartition partition_around_origin(const PathSample& path,
                                               Tick origin = 0) {
  auto sys = level_system(path);
  auto fi = first_interval(path, origin);

  std::vector<PartitionPoint> back;
  PartitionPoint cur = fi.p0;
  while (auto prev = try_previous_point(path, sys, cur)) {
    back.push_back(*prev);
    cur = *prev;
  }

  OriginPartition out;
  out.trace = fi.trace;
  for (auto it = back.rbegin(); it != back.rend(); ++it)
    out.part.points.push_back(*it);
  out.i0 = out.part.points.size();
  out.part.points.push_back(fi.p0);
  out.part.points.push_back(fi.p1);
  cur = fi.p1;
  while (auto nxt = next_point(path, sys, cur)) {
    out.part.points.push_back(*nxt);
    cur = *nxt;
  }
  return out;
}

// The closed window the origin procedure actually reads is [d', b]: one tick
// less on either side starves the matching scan.
inline TimeWindow origin_window(const FirstInterval& fi) {
  return {fi.trace.dprime, fi.trace.b};
}

// Structural invariants: points strictly increase, sit on adjacent levels,
// each is the first neighbour passage from its predecessor, and the open
// interval between two points revisits no level but its own start.
inline void validate_partition(const PathSample& path,
                               const LevelPartition& part) {
  auto sys = level_system(path);
  for (std::size_t i = 0; i < part.size(); ++i) {
    const auto& pt = part.points[i];
    require(pt.t >= path.t0 && pt.t < path.end(), ErrorCode::DomainError,
            "partition point outside window");
    require(sys.level_of(path.at(pt.t)) == pt.level, ErrorCode::DomainError,
            "partition point off its level");
    if (i == 0) continue;
    const auto& pr = part.points[i - 1];
    require(pt.t > pr.t, ErrorCode::DomainError,
            "partition points out of order");
    require(sys.neighbour_site(pr.level, sys.site_of(pt.level)),
            ErrorCode::DomainError, "consecutive levels not adjacent");
    for (Tick t = pr.t + 1; t < pt.t; ++t) {
      std::int64_t s = path.at(t);
      if (sys.on_level(s))
        require(sys.level_of(s) == pr.level, ErrorCode::DomainError,
                "foreign level visited inside an interval");
    }
  }
}

inline MarkedPointProcess partition_to_mpp(const PathSample& path,
                                           const LevelPartition& part) {
  auto sys = level_system(path);
  MarkedPointProcess mpp;
  mpp.base.window = {path.t0, path.end() - 1};
  mpp.base.tick_size = path.par.dt();
  mpp.n_colours = static_cast<int>(sys.n_levels);
  for (const auto& pt : part.points) {
    mpp.base.points.push_back(pt.t);
    mpp.colours.push_back(pt.level);
  }
  mpp.validate();
  return mpp;
}

// Streaming gap extraction in constant memory.  The first wall hit may be a
// mid-interval revisit, so gaps count only from the first passage to the
// opposite wall onwards.  Calls on_gap(level_reached, gap_ticks).
template <class F>
void stream_reflected_gaps(const LatticeParams& par, std::int64_t start,
                           std::uint64_t steps, RngStream& rng, F&& on_gap) {
  par.validate();
  std::int64_t top = par.m;
  require(start >= 0 && start <= top, ErrorCode::DomainError,
          "start site outside band");
  std::int64_t site = start;
  int phase = 0;  // 0: before first wall, 1: before first passage, 2: stream
  std::int64_t target = -1;
  Tick last = 0;
  if (site == 0 || site == top) {
    phase = 1;
    target = (site == 0) ? top : 0;
  }
  for (std::uint64_t i = 1; i <= steps; ++i) {
    site = step_reflected(site, par.m, rng);
    if (phase == 0) {
      if (site == 0 || site == top) {
        phase = 1;
        target = (site == 0) ? top : 0;
      }
    } else if (site == target) {
      if (phase == 2)
        on_gap(target == top ? 1 : 0, static_cast<Tick>(i) - last);
      else
        phase = 2;
      last = static_cast<Tick>(i);
      target = (target == 0) ? top : 0;
    }
  }
}

}  // namespace bmiso
