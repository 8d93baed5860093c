#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bmiso/coder.hpp"
#include "bmiso/errors.hpp"
#include "bmiso/excursion.hpp"
#include "bmiso/kernel.hpp"
#include "bmiso/lattice.hpp"
#include "bmiso/markov.hpp"
#include "bmiso/point_process.hpp"
#include "bmiso/rng.hpp"
#include "bmiso/skeleton.hpp"
#include "bmiso/ucode.hpp"

namespace bmiso {

// An alternating marked point process cut from a band path: the passage
// points, their level colouring, and one filler code per complete interval,
// attached to the interval's left endpoint.  The last point carries an empty
// code; the first point's colour is the phase.
struct APPState {
  LatticeParams par;
  MarkedPointProcess mpp;

  int phase() const {
    require(!mpp.colours.empty(), ErrorCode::DomainError,
            "empty process has no phase");
    return mpp.colours.front();
  }
};

// Text stamp identifying which map produced an output, written at the head
// of anything serialized.  `num/den` is the band ratio where one applies.
struct MapDescriptor {
  std::string name;
  LatticeParams par;
  std::uint32_t bands = 2;
  std::uint32_t num = 0;
  std::uint32_t den = 0;
  double rate = 0.0;

  std::string stamp() const {
    std::string s = "# map=" + name + " h=" + std::to_string(par.h) +
                    " m=" + std::to_string(par.m) +
                    " sigma=" + std::to_string(par.sigma) +
                    " bands=" + std::to_string(bands);
    if (den != 0)
      s += " ratio=" + std::to_string(num) + "/" + std::to_string(den);
    if (rate != 0.0) s += " rate=" + std::to_string(rate);
    s += " codec=1";
    return s;
  }
};

namespace detail {

// Certified partition for coding.  A point adopted at the window edge may be
// a mid-interval revisit on raw input, so forward maps drop it; inverses
// re-extract windows that start on a genuine point and keep it.
inline LevelPartition pipeline_partition(const PathSample& path,
                                         bool keep_edge) {
  auto part = extract_partition(path);
  if (!keep_edge && !part.empty() && part.points.front().t == path.t0)
    part.points.erase(part.points.begin());
  require(part.size() >= 2, ErrorCode::InsufficientWindow,
          "window certifies no complete interval");
  return part;
}

inline KernelKind interval_kind(const LevelSystem& sys, int from, int to) {
  require(sys.neighbour_site(from, sys.site_of(to)), ErrorCode::DomainError,
          "interval endpoints not on adjacent levels");
  if (sys.codomain == Codomain::Reflected)
    return to > from ? KernelKind::ReflectedUp : KernelKind::ReflectedDown;
  return sys.n_levels == 2 ? KernelKind::CyclicDouble
                           : KernelKind::CyclicSingle;
}

// +1 when the interval crosses its seam upward.  Two-band circles give both
// exits to the same neighbour, so orientation is fixed there.
inline int interval_orient(const LevelSystem& sys, int from, int to) {
  if (sys.codomain == Codomain::Reflected || sys.n_levels == 2) return 1;
  int n = static_cast<int>(sys.n_levels);
  return (from + 1) % n == to ? 1 : -1;
}

inline int circle_step(std::int64_t prev, std::int64_t next, std::int64_t M) {
  return (next - prev + M) % M == 1 ? 1 : -1;
}

// Kernel coordinates of one interval: reflected intervals are their own
// corridor, circle intervals run in winding displacement from the start
// seam, mirrored so the target sits at the top.
inline CorridorPath interval_corridor(const PathSample& path,
                                      const LevelSystem& sys,
                                      const PartitionPoint& from,
                                      const PartitionPoint& to) {
  Tick L = to.t - from.t;
  CorridorPath x;
  x.reserve(static_cast<std::size_t>(L) + 1);
  if (sys.codomain == Codomain::Reflected) {
    for (Tick t = from.t; t <= to.t; ++t) x.push_back(path.at(t));
    return x;
  }
  std::int64_t M = path.site_count();
  std::int64_t m = sys.m;
  int orient = interval_orient(sys, from.level, to.level);
  std::int64_t d = 0;
  x.push_back(m);
  for (Tick t = from.t; t < to.t; ++t) {
    d += orient * circle_step(path.at(t), path.at(t + 1), M);
    x.push_back(m + d);
  }
  return x;
}

// Absolute sites of a decoded corridor, skipping the shared endpoint when
// the interval continues an existing path.
inline void append_corridor_sites(std::vector<std::int64_t>& sites,
                                  const LevelSystem& sys, int from_level,
                                  int orient, const CorridorPath& x,
                                  bool include_first) {
  std::size_t i0 = include_first ? 0 : 1;
  if (sys.codomain == Codomain::Reflected) {
    for (std::size_t i = i0; i < x.size(); ++i) sites.push_back(x[i]);
    return;
  }
  std::int64_t M =
      static_cast<std::int64_t>(sys.m) * static_cast<std::int64_t>(sys.n_levels);
  std::int64_t base = sys.site_of(from_level);
  std::int64_t m = sys.m;
  for (std::size_t i = i0; i < x.size(); ++i) {
    std::int64_t d = orient * (x[i] - m);
    sites.push_back(((base + d) % M + M) % M);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Band path <-> alternating marked point process.  Forward cuts the path at
// its passage points and encodes each complete interval against its exact
// bridge kernel; back decodes the codes into the unique corridor they name.

inline APPState reflected_to_app(const PathSample& path, KernelCache& cache) {
  validate_path(path);
  require(path.codomain == Codomain::Reflected, ErrorCode::DomainError,
          "expected a reflected band path");
  auto sys = level_system(path);
  auto part = detail::pipeline_partition(path, false);

  APPState app;
  app.par = path.par;
  app.mpp.base.window = {part.points.front().t, part.points.back().t};
  app.mpp.base.tick_size = path.par.dt();
  app.mpp.n_colours = 2;
  app.mpp.has_ucodes = true;
  for (std::size_t k = 0; k < part.size(); ++k) {
    app.mpp.base.points.push_back(part.points[k].t);
    app.mpp.colours.push_back(part.points[k].level);
    if (k + 1 < part.size()) {
      auto kind = detail::interval_kind(sys, part.points[k].level,
                                        part.points[k + 1].level);
      Tick L = part.points[k + 1].t - part.points[k].t;
      auto kern = cache.get(kind, path.par.m, L);
      auto corridor =
          detail::interval_corridor(path, sys, part.points[k],
                                    part.points[k + 1]);
      app.mpp.ucodes.push_back(encode_filler(*kern, corridor));
    } else {
      app.mpp.ucodes.emplace_back();
    }
  }
  app.mpp.validate();
  return app;
}

inline PathSample app_to_reflected(const APPState& app, KernelCache& cache) {
  app.mpp.validate();
  require(app.mpp.has_ucodes, ErrorCode::MissingUcode,
          "process carries no codes to decode");
  require(app.mpp.n_colours == 2, ErrorCode::DomainError,
          "band process needs two colours");
  require(app.mpp.size() >= 2, ErrorCode::InsufficientWindow,
          "need at least one complete interval");
  LevelSystem sys;
  sys.codomain = Codomain::Reflected;
  sys.m = app.par.m;
  sys.n_levels = 2;

  PathSample out;
  out.t0 = app.mpp.base.points.front();
  out.par = app.par;
  out.codomain = Codomain::Reflected;
  out.bands = 1;
  for (std::size_t k = 0; k + 1 < app.mpp.size(); ++k) {
    int from = app.mpp.colours[k], to = app.mpp.colours[k + 1];
    require(to == 1 - from, ErrorCode::IllegalTransition,
            "colours must alternate between the walls");
    auto kind = detail::interval_kind(sys, from, to);
    Tick L = app.mpp.base.points[k + 1] - app.mpp.base.points[k];
    auto kern = cache.get(kind, app.par.m, L);
    CodeCursor src{app.mpp.ucodes[k], 0, nullptr};
    auto corridor = decode_filler(*kern, src);
    require(src.remaining() == 0, ErrorCode::DecodeError,
            "filler code carries trailing bits");
    detail::append_corridor_sites(out.sites, sys, from, 1, corridor, k == 0);
  }
  require(app.mpp.ucodes.back().empty(), ErrorCode::DecodeError,
          "last point must carry an empty code");
  validate_path(out);
  return out;
}

inline APPState periodic_to_app(const PathSample& path, KernelCache& cache) {
  validate_path(path);
  require(path.codomain == Codomain::Periodic && path.bands == 2,
          ErrorCode::DomainError, "expected a two-band circle path");
  auto sys = level_system(path);
  auto part = detail::pipeline_partition(path, false);

  APPState app;
  app.par = path.par;
  app.mpp.base.window = {part.points.front().t, part.points.back().t};
  app.mpp.base.tick_size = path.par.dt();
  app.mpp.n_colours = 2;
  app.mpp.has_ucodes = true;
  for (std::size_t k = 0; k < part.size(); ++k) {
    app.mpp.base.points.push_back(part.points[k].t);
    app.mpp.colours.push_back(part.points[k].level);
    if (k + 1 < part.size()) {
      Tick L = part.points[k + 1].t - part.points[k].t;
      auto kern = cache.get(KernelKind::CyclicDouble, path.par.m, L);
      auto corridor =
          detail::interval_corridor(path, sys, part.points[k],
                                    part.points[k + 1]);
      app.mpp.ucodes.push_back(encode_filler(*kern, corridor));
    } else {
      app.mpp.ucodes.emplace_back();
    }
  }
  app.mpp.validate();
  return app;
}

inline PathSample app_to_periodic(const APPState& app, KernelCache& cache) {
  app.mpp.validate();
  require(app.mpp.has_ucodes, ErrorCode::MissingUcode,
          "process carries no codes to decode");
  require(app.mpp.n_colours == 2, ErrorCode::DomainError,
          "circle process needs two colours");
  require(app.mpp.size() >= 2, ErrorCode::InsufficientWindow,
          "need at least one complete interval");
  LevelSystem sys;
  sys.codomain = Codomain::Periodic;
  sys.m = app.par.m;
  sys.n_levels = 2;

  PathSample out;
  out.t0 = app.mpp.base.points.front();
  out.par = app.par;
  out.codomain = Codomain::Periodic;
  out.bands = 2;
  for (std::size_t k = 0; k + 1 < app.mpp.size(); ++k) {
    int from = app.mpp.colours[k], to = app.mpp.colours[k + 1];
    require(to == 1 - from, ErrorCode::IllegalTransition,
            "colours must alternate between the seams");
    Tick L = app.mpp.base.points[k + 1] - app.mpp.base.points[k];
    auto kern = cache.get(KernelKind::CyclicDouble, app.par.m, L);
    CodeCursor src{app.mpp.ucodes[k], 0, nullptr};
    auto corridor = decode_filler(*kern, src);
    require(src.remaining() == 0, ErrorCode::DecodeError,
            "filler code carries trailing bits");
    detail::append_corridor_sites(out.sites, sys, from, 1, corridor, k == 0);
  }
  require(app.mpp.ucodes.back().empty(), ErrorCode::DecodeError,
          "last point must carry an empty code");
  validate_path(out);
  return out;
}

// ---------------------------------------------------------------------------
// Reflected band <-> two-band circle, by folding.  Folding is pointwise:
// each circle site collapses onto the band and the window does not move.
// Unfolding re-creates the branch choices the fold shed, reading them from a
// pad field: a deterministic function of (seed, tick) consulted at the start
// tick and at each wall departure.  Because the field is addressed by tick
// rather than consumed as a stream, unfolding a truncation of the same input
// re-reads the same choices, and the output near the origin settles as soon
// as the window reaches back past a wall visit.

namespace detail {

// Pseudorandom bits addressed by tick.  `origin` moves with the input under
// grid shifts, so a shifted input reads a shifted field.
struct PadField {
  std::uint64_t seed = 0;
  Tick origin = 0;

  bool bit(Tick t) const {
    RngStream s(seed ^ 0x0070616462697473ull,
                static_cast<std::uint64_t>(t - origin));
    return s.next_bit() != 0;
  }

  std::uint32_t pick(Tick t, std::uint32_t n) const {
    RngStream s(seed ^ 0x007061647069636bull,
                static_cast<std::uint64_t>(t - origin));
    return static_cast<std::uint32_t>(s.below(n));
  }
};

}  // namespace detail

// Lifts a reflected path to a two-band circle that folds back onto it.  The
// sheet at the start tick and the branch taken at each wall departure come
// from the pad field; between wall visits the sheet is pinned and the circle
// tracks the band.  Fair pads carry the stationary band law to the
// stationary circle law, and fold_periodic inverts the lift exactly on the
// full window.
inline PathSample unfold_reflected(const PathSample& path,
                                   std::uint64_t pad_seed,
                                   Tick pad_origin = 0) {
  validate_path(path);
  require(path.codomain == Codomain::Reflected, ErrorCode::DomainError,
          "unfolding starts from a reflected path");
  require(path.length() >= 2, ErrorCode::InsufficientWindow,
          "path too short to unfold");
  detail::PadField pad{pad_seed, pad_origin};
  std::int64_t m = path.par.m, M = 2 * m;

  PathSample out;
  out.t0 = path.t0;
  out.par = path.par;
  out.codomain = Codomain::Periodic;
  out.bands = 2;
  out.sites.reserve(path.sites.size());
  std::int64_t y0 = path.at(path.t0);
  std::int64_t z = y0 == 0 || y0 == m
                       ? y0
                       : (pad.pick(path.t0, 2) != 0 ? M - y0 : y0);
  out.sites.push_back(z);
  for (Tick t = path.t0; t + 1 < path.end(); ++t) {
    std::int64_t yn = path.at(t + 1), zn;
    if (z == 0)
      zn = pad.bit(t) ? 1 : M - 1;
    else if (z == m)
      zn = pad.bit(t) ? m + 1 : m - 1;
    else if (z < m)
      zn = yn;
    else
      zn = (M - yn) % M;
    require(fold_site(zn, m) == yn, ErrorCode::DomainError,
            "unfolding lost the path");
    z = zn;
    out.sites.push_back(z);
  }
  validate_path(out);
  return out;
}

// Pointwise fold of a two-band circle onto its band, on the full window.
// Inverse of unfold_reflected for any pad seed.
inline PathSample fold_periodic(const PathSample& path) {
  validate_path(path);
  require(path.codomain == Codomain::Periodic && path.bands == 2,
          ErrorCode::DomainError, "folding starts from a two-band circle");
  require(!path.sites.empty(), ErrorCode::InsufficientWindow, "empty path");
  PathSample out;
  out.t0 = path.t0;
  out.par = path.par;
  out.codomain = Codomain::Reflected;
  out.bands = 1;
  out.sites.reserve(path.sites.size());
  for (std::int64_t z : path.sites)
    out.sites.push_back(fold_site(z, path.par.m));
  validate_path(out);
  return out;
}

// ---------------------------------------------------------------------------
// n-band circle <-> marked alternating process, n even.  The level sequence
// splits into a walk on the half cycle plus one route bit per ambiguous odd
// point; each even point's code bundles its route bit and the two adjoining
// fillers, and block coding over the half-cycle walk turns the bundle stream
// into iid marks sitting on the even points.

inline MarkovSpec lazy_cycle_chain(int half) {
  require(half >= 2, ErrorCode::DomainError, "half cycle needs two states");
  MarkovSpec s;
  s.n_states = half;
  s.pi_den = half;
  s.pi_num.assign(static_cast<std::size_t>(half), 1);
  s.row_den.assign(static_cast<std::size_t>(half), 4);
  s.p_num.assign(static_cast<std::size_t>(half),
                 std::vector<std::int64_t>(static_cast<std::size_t>(half), 0));
  for (int i = 0; i < half; ++i) {
    s.p_num[i][i] += 2;
    s.p_num[i][(i + 1) % half] += 1;
    s.p_num[i][(i + half - 1) % half] += 1;
  }
  s.validate();
  return s;
}

namespace detail {

// Route bits are banked where the odd colour is not forced by its flanks:
// everywhere on the four-cycle, at stays and window edges otherwise.
inline bool route_banked(int n, std::size_t i, std::size_t count,
                         const std::vector<int>& quotient) {
  if (i + 1 >= count) return true;
  return n == 4 || quotient[(i - 1) / 2] == quotient[(i + 1) / 2];
}

}  // namespace detail

inline MarkedPointProcess periodic_to_marked_app(const PathSample& path,
                                                 KernelCache& cache) {
  validate_path(path);
  require(path.codomain == Codomain::Periodic, ErrorCode::DomainError,
          "expected a circle path");
  require(path.bands >= 4 && path.bands % 2 == 0, ErrorCode::DomainError,
          "level cycle must be even with at least four bands");
  auto sys = level_system(path);
  int n = static_cast<int>(path.bands);
  auto part = detail::pipeline_partition(path, false);

  std::size_t e0 = 0;
  while (e0 < part.size() && part.points[e0].level % 2 != 0) ++e0;
  require(e0 + 1 < part.size(), ErrorCode::InsufficientWindow,
          "window shows no complete interval from an even seam");
  std::vector<PartitionPoint> pts(part.points.begin() + e0,
                                  part.points.end());
  std::size_t N = pts.size();

  std::vector<UniformCode> fillers(N - 1);
  std::vector<int> colours(N);
  for (std::size_t k = 0; k < N; ++k) colours[k] = pts[k].level;
  for (std::size_t k = 0; k + 1 < N; ++k) {
    Tick L = pts[k + 1].t - pts[k].t;
    auto kern = cache.get(KernelKind::CyclicSingle, path.par.m, L);
    auto corridor = detail::interval_corridor(path, sys, pts[k], pts[k + 1]);
    fillers[k] = encode_filler(*kern, corridor);
  }

  auto decomp = decompose_even_cycle(colours, n);
  std::size_t E = (N + 1) / 2;
  std::vector<UniformCode> bundle(E);
  std::size_t rpos = 0;
  for (std::size_t j = 0; j < E; ++j) {
    std::size_t i = 2 * j + 1;
    if (i < N && detail::route_banked(n, i, N, decomp.quotient)) {
      require(rpos < decomp.residual.size(), ErrorCode::LengthMismatch,
              "route bits ran out");
      bundle[j].push_bit(decomp.residual.bit(rpos++));
    }
    if (2 * j + 1 < N) bundle[j].append(fillers[2 * j]);
    if (2 * j + 2 < N) bundle[j].append(fillers[2 * j + 1]);
  }
  require(rpos == decomp.residual.size(), ErrorCode::LengthMismatch,
          "route bits left over");

  std::size_t jstar = 0;
  while (jstar < E && !opens_marker(bundle[jstar])) ++jstar;
  require(jstar < E, ErrorCode::NoMarkerInWindow,
          "no bundle in the window opens a marker");

  MarkedPointProcess inter;
  inter.base.window = {pts[2 * jstar].t, pts[N - 1].t};
  inter.base.tick_size = path.par.dt();
  inter.n_colours = n / 2;
  inter.has_ucodes = true;
  for (std::size_t j = jstar; j < E; ++j) {
    inter.base.points.push_back(pts[2 * j].t);
    inter.colours.push_back(decomp.quotient[j]);
    inter.ucodes.push_back(bundle[j]);
  }
  inter.validate();
  auto iid = markov_to_iid(inter, lazy_cycle_chain(n / 2));

  MarkedPointProcess out;
  out.base.window = {pts[2 * jstar].t, pts[N - 1].t};
  out.base.tick_size = path.par.dt();
  out.n_colours = 2;
  out.has_ucodes = true;
  for (std::size_t k = 2 * jstar; k < N; ++k) {
    out.base.points.push_back(pts[k].t);
    out.colours.push_back(static_cast<int>((k - 2 * jstar) % 2));
    if (k % 2 == 0)
      out.ucodes.push_back(iid.ucodes[(k - 2 * jstar) / 2]);
    else
      out.ucodes.emplace_back();
  }
  out.validate();
  return out;
}

inline PathSample marked_app_to_periodic(const MarkedPointProcess& in,
                                         const LatticeParams& par,
                                         std::uint32_t bands,
                                         KernelCache& cache) {
  in.validate();
  require(bands >= 4 && bands % 2 == 0, ErrorCode::DomainError,
          "level cycle must be even with at least four bands");
  require(in.has_ucodes, ErrorCode::MissingUcode,
          "process carries no marks to decode");
  require(in.n_colours == 2, ErrorCode::DomainError,
          "marked process must be two-coloured");
  std::size_t N = in.size();
  require(N >= 2, ErrorCode::InsufficientWindow,
          "need at least one complete interval");
  for (std::size_t k = 0; k < N; ++k) {
    require(in.colours[k] == static_cast<int>(k % 2),
            ErrorCode::DomainError, "colours must alternate from red");
    if (k % 2 == 1)
      require(in.ucodes[k].empty(), ErrorCode::DecodeError,
              "mark sits off the even seam");
  }
  int n = static_cast<int>(bands);
  int half = n / 2;
  std::size_t E = (N + 1) / 2;

  MarkedPointProcess inter;
  inter.base.window = in.base.window;
  inter.base.tick_size = in.base.tick_size;
  inter.n_colours = 1;
  inter.has_ucodes = true;
  for (std::size_t j = 0; j < E; ++j) {
    inter.base.points.push_back(in.base.points[2 * j]);
    inter.colours.push_back(0);
    inter.ucodes.push_back(in.ucodes[2 * j]);
  }
  inter.validate();
  auto blocks = iid_to_markov(inter, lazy_cycle_chain(half));

  std::vector<int> quotient;
  for (const auto& b : blocks)
    quotient.insert(quotient.end(), b.symbols.begin(), b.symbols.end());
  require(quotient.size() == E, ErrorCode::LengthMismatch,
          "half-cycle walk does not cover the window");

  UniformCode residual;
  std::vector<CorridorPath> corridors(N - 1);
  std::size_t j = 0;
  for (const auto& b : blocks) {
    UniformCode stream;
    stream.push_bit(1);
    stream.push_bit(1);
    stream.append(b.rest);
    CodeCursor src{stream, 0, nullptr};
    std::size_t members = b.symbols.size();
    for (std::size_t c = 0; c < members; ++c, ++j) {
      std::size_t i = 2 * j + 1;
      if (i >= N) continue;
      if (detail::route_banked(n, i, N, quotient)) {
        int bit = 0;
        require(src.read(bit), ErrorCode::DecodeError,
                "mark ran out before its route bit");
        residual.push_bit(bit);
      }
      Tick L = in.base.points[i] - in.base.points[i - 1];
      corridors[i - 1] = decode_filler(*cache.get(KernelKind::CyclicSingle,
                                                  par.m, L),
                                       src);
      if (i + 1 < N) {
        Tick L2 = in.base.points[i + 1] - in.base.points[i];
        corridors[i] = decode_filler(*cache.get(KernelKind::CyclicSingle,
                                                par.m, L2),
                                     src);
      }
    }
    require(src.remaining() == 0, ErrorCode::DecodeError,
            "mark carries trailing bits");
  }

  CycleDecomposition d;
  d.n = n;
  d.phase = 0;
  d.quotient = quotient;
  d.residual = residual;
  auto colours = recompose_even_cycle(d, N);

  LevelSystem sys;
  sys.codomain = Codomain::Periodic;
  sys.m = par.m;
  sys.n_levels = bands;
  PathSample out;
  out.t0 = in.base.points.front();
  out.par = par;
  out.codomain = Codomain::Periodic;
  out.bands = bands;
  for (std::size_t k = 0; k + 1 < N; ++k) {
    int orient = detail::interval_orient(sys, colours[k], colours[k + 1]);
    detail::append_corridor_sites(out.sites, sys, colours[k], orient,
                                  corridors[k], k == 0);
  }
  validate_path(out);
  return out;
}

// ---------------------------------------------------------------------------
// Reflected band rescale, through sheet folds.  A band of k-fold height
// folds onto its base band by collapsing the k sheets, exactly as the circle
// folds onto the band; the matching lift re-creates the sheet choices from
// the pad field, consulted at the start tick and at each interior crease
// departure.  scale_reflected lifts by the target count and folds by the
// source count, so heights scale by b/a while the tick size is untouched.
// The sheet bits shed by the fold are not discarded: they leave the window
// in a self-delimiting tail appended beyond the input's right edge, and the
// inverse reads the tail back to restore the tall path bit for bit.

namespace detail {

inline void check_even_pair(std::uint32_t a, std::uint32_t b) {
  require(a >= 2 && b >= 2 && a % 2 == 0 && b % 2 == 0,
          ErrorCode::NonRationalScale,
          "band ratio must be a ratio of even integers");
}

constexpr std::size_t kTailCountBits = 48;

inline std::size_t tail_init_width(std::int64_t tall) {
  std::size_t w = 0;
  while ((std::int64_t{1} << w) <= tall) ++w;
  return w;
}

// Emits bits as step directions of a reflected tail walk: interior sites
// step where the bit says, walls step where they must and carry nothing.
struct TailWriter {
  std::vector<std::int64_t>& sites;
  std::int64_t M;

  void push(int bit) {
    for (;;) {
      std::int64_t cur = sites.back();
      if (cur == 0) {
        sites.push_back(1);
      } else if (cur == M) {
        sites.push_back(M - 1);
      } else {
        sites.push_back(cur + (bit ? 1 : -1));
        return;
      }
    }
  }

  void push_value(std::uint64_t v, std::size_t width) {
    for (std::size_t i = width; i-- > 0;) push((v >> i) & 1u ? 1 : 0);
  }
};

}  // namespace detail

// Lifts a reflected path on [0, h] to one on [0, k h] that folds back onto
// it.  Interior creases sit at the multiples of the sheet height; departures
// there are free and read the pad field, the two boundary walls force their
// exits, and inside a sheet the tall path tracks the base path.  The start
// site is drawn from the stationary tall law conditioned on the observed
// start value, so fair pads carry the stationary base law to the stationary
// tall law.
inline PathSample crease_unfold(const PathSample& path, std::uint32_t k,
                                std::uint64_t pad_seed, Tick pad_origin = 0) {
  validate_path(path);
  require(path.codomain == Codomain::Reflected, ErrorCode::DomainError,
          "sheet lift starts from a reflected path");
  require(k >= 1, ErrorCode::DomainError, "sheet count must be positive");
  require(path.length() >= 2, ErrorCode::InsufficientWindow,
          "path too short to lift");
  detail::PadField pad{pad_seed, pad_origin};
  std::int64_t M = path.par.m;
  std::int64_t top = static_cast<std::int64_t>(k) * M;

  PathSample out;
  out.t0 = path.t0;
  out.par = path.par;
  out.par.m = static_cast<std::uint32_t>(top);
  out.par.h = path.par.h * static_cast<double>(k);
  out.codomain = Codomain::Reflected;
  out.bands = 1;
  out.sites.reserve(path.sites.size());

  std::int64_t y0 = path.at(path.t0), u;
  if (y0 != 0 && y0 != M) {
    // One interior candidate per sheet, all equally heavy.
    std::int64_t j = pad.pick(path.t0, k);
    u = j % 2 == 0 ? j * M + y0 : (j + 1) * M - y0;
  } else if (y0 == 0) {
    // One ticket per boundary crease, two per interior even crease,
    // matching the stationary weights.
    std::int64_t r = pad.pick(path.t0, k);
    if (r == 0)
      u = 0;
    else if (k % 2 == 0 && r == static_cast<std::int64_t>(k) - 1)
      u = top;
    else
      u = 2 * ((r + 1) / 2) * M;
  } else if (k % 2 == 0) {
    // Odd creases are all interior when k is even.
    u = (2 * static_cast<std::int64_t>(pad.pick(path.t0, k / 2)) + 1) * M;
  } else {
    std::int64_t r = pad.pick(path.t0, k);
    u = r == static_cast<std::int64_t>(k) - 1 ? top : (2 * (r / 2) + 1) * M;
  }
  out.sites.push_back(u);
  for (Tick t = path.t0; t + 1 < path.end(); ++t) {
    std::int64_t yn = path.at(t + 1), un;
    if (u == 0)
      un = 1;
    else if (u == top)
      un = top - 1;
    else if (u % M == 0)
      un = u + (pad.bit(t) ? 1 : -1);
    else {
      std::int64_t j = u / M;
      un = j % 2 == 0 ? j * M + yn : (j + 1) * M - yn;
    }
    require(fold_site(un, M) == yn, ErrorCode::DomainError,
            "sheet lift lost the path");
    u = un;
    out.sites.push_back(u);
  }
  validate_path(out);
  return out;
}

// Pointwise collapse of k sheets onto the base band, on the full window.
// Inverse of crease_unfold for any pad seed.
inline PathSample crease_fold(const PathSample& path, std::uint32_t k) {
  validate_path(path);
  require(path.codomain == Codomain::Reflected, ErrorCode::DomainError,
          "sheet fold starts from a reflected path");
  require(k >= 1, ErrorCode::DomainError, "sheet count must be positive");
  require(path.par.m % k == 0, ErrorCode::GridIncompatible,
          "band does not split into that many sheets");
  std::int64_t M = path.par.m / k;
  require(M >= 2, ErrorCode::GridIncompatible,
          "sheet fold leaves fewer than two steps");
  PathSample out;
  out.t0 = path.t0;
  out.par = path.par;
  out.par.m = static_cast<std::uint32_t>(M);
  out.par.h = path.par.h / static_cast<double>(k);
  out.codomain = Codomain::Reflected;
  out.bands = 1;
  out.sites.reserve(path.sites.size());
  for (std::int64_t u : path.sites) out.sites.push_back(fold_site(u, M));
  validate_path(out);
  return out;
}

// Sheet fold that keeps what it sheds.  The output carries the folded core
// on the input window, then a tail beyond the right edge encoding, as
// interior step directions: the crease departure bits in time order, the
// start site, and a fixed-width count of the departure bits.  The tail names
// the tall path exactly, so crease_unfold_packed inverts this on the core.
inline PathSample crease_fold_packed(const PathSample& path,
                                     std::uint32_t k) {
  validate_path(path);
  require(path.codomain == Codomain::Reflected, ErrorCode::DomainError,
          "sheet fold starts from a reflected path");
  require(k >= 1, ErrorCode::DomainError, "sheet count must be positive");
  require(path.par.m % k == 0, ErrorCode::GridIncompatible,
          "band does not split into that many sheets");
  require(path.length() >= 2, ErrorCode::InsufficientWindow,
          "path too short to fold");
  std::int64_t tall = path.par.m;
  std::int64_t M = tall / k;
  require(M >= 2, ErrorCode::GridIncompatible,
          "sheet fold leaves fewer than two steps");

  std::vector<int> side;
  for (Tick t = path.t0; t + 1 < path.end(); ++t) {
    std::int64_t u = path.at(t);
    if (u % M == 0 && u != 0 && u != tall)
      side.push_back(path.at(t + 1) > u ? 1 : 0);
  }

  PathSample out;
  out.t0 = path.t0;
  out.par = path.par;
  out.par.m = static_cast<std::uint32_t>(M);
  out.par.h = path.par.h / static_cast<double>(k);
  out.codomain = Codomain::Reflected;
  out.bands = 1;
  for (std::int64_t u : path.sites) out.sites.push_back(fold_site(u, M));

  detail::TailWriter tail{out.sites, M};
  for (int b : side) tail.push(b);
  tail.push_value(static_cast<std::uint64_t>(path.at(path.t0)),
                  detail::tail_init_width(tall));
  tail.push_value(side.size(), detail::kTailCountBits);
  validate_path(out);
  return out;
}

// Reads a packed fold back into the tall path it names.  The tail parses
// from the right: the trailing count gives the number of departure bits,
// the fields before it give the start site and the crease choices, and the
// core then replays the lift deterministically.
inline PathSample crease_unfold_packed(const PathSample& path,
                                       std::uint32_t k) {
  validate_path(path);
  require(path.codomain == Codomain::Reflected, ErrorCode::DomainError,
          "sheet lift starts from a reflected path");
  require(k >= 1, ErrorCode::DomainError, "sheet count must be positive");
  require(path.length() >= 2, ErrorCode::InsufficientWindow,
          "no tail to parse");
  std::int64_t M = path.par.m;
  std::int64_t tall = static_cast<std::int64_t>(k) * M;

  std::size_t i = path.length() - 1;
  auto pull = [&](std::size_t n) {
    std::vector<int> bits;  // last emitted first
    while (bits.size() < n) {
      require(i > 0, ErrorCode::InsufficientWindow,
              "tail truncated mid-parse");
      --i;
      std::int64_t s = path.sites[i];
      if (s == 0 || s == M) continue;
      bits.push_back(path.sites[i + 1] > s ? 1 : 0);
    }
    return bits;
  };
  auto as_value = [](const std::vector<int>& bits) {
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < bits.size(); ++b)
      if (bits[b]) v |= std::uint64_t{1} << b;
    return v;
  };

  std::uint64_t nside = as_value(pull(detail::kTailCountBits));
  require(nside <= path.length(), ErrorCode::DecodeError,
          "tail claims more departures than the window holds");
  auto u0 = static_cast<std::int64_t>(
      as_value(pull(detail::tail_init_width(tall))));
  auto side = pull(static_cast<std::size_t>(nside));
  std::reverse(side.begin(), side.end());

  // sites[0..i] is the core the tail describes.
  require(u0 <= tall, ErrorCode::DecodeError, "start site off the band");
  require(fold_site(u0, M) == path.sites[0], ErrorCode::DecodeError,
          "start site does not fold onto the core");
  PathSample out;
  out.t0 = path.t0;
  out.par = path.par;
  out.par.m = static_cast<std::uint32_t>(tall);
  out.par.h = path.par.h * static_cast<double>(k);
  out.codomain = Codomain::Reflected;
  out.bands = 1;
  out.sites.reserve(i + 1);
  std::int64_t u = u0;
  out.sites.push_back(u);
  std::size_t next_side = 0;
  for (std::size_t t = 0; t < i; ++t) {
    std::int64_t yn = path.sites[t + 1], un;
    if (u == 0)
      un = 1;
    else if (u == tall)
      un = tall - 1;
    else if (u % M == 0) {
      require(next_side < side.size(), ErrorCode::DecodeError,
              "tail ran out of departure bits");
      un = u + (side[next_side++] ? 1 : -1);
    } else {
      std::int64_t j = u / M;
      un = j % 2 == 0 ? j * M + yn : (j + 1) * M - yn;
    }
    require(fold_site(un, M) == yn, ErrorCode::DecodeError,
            "tail does not decode over the core");
    u = un;
    out.sites.push_back(u);
  }
  require(next_side == side.size(), ErrorCode::DecodeError,
          "tail carries departure bits left over");
  validate_path(out);
  return out;
}

// Rescales a reflected band by the even ratio b/a: height h maps to h b/a
// on the same tick grid.  The path lifts by b sheets with pad choices, then
// folds by a sheets with the shed bits packed into the output tail, so the
// output covers the input window plus the tail.  `covered` reports the input
// ticks the output certifies, which is the whole input window.
inline PathSample scale_reflected(const PathSample& in, std::uint32_t a,
                                  std::uint32_t b, std::uint64_t pad_seed,
                                  Tick pad_origin = 0,
                                  TimeWindow* covered = nullptr) {
  detail::check_even_pair(a, b);
  validate_path(in);
  require(in.codomain == Codomain::Reflected, ErrorCode::DomainError,
          "expected a reflected band path");
  std::uint64_t lifted = static_cast<std::uint64_t>(in.par.m) * b;
  require(lifted % a == 0 && lifted / a >= 2, ErrorCode::GridIncompatible,
          "band sites do not split at that ratio");
  auto tall = crease_unfold(in, b, pad_seed, pad_origin);
  auto out = crease_fold_packed(tall, a);
  if (covered != nullptr) *covered = {in.t0, in.end() - 1};
  return out;
}

// Exact inverse of scale_reflected with the same (a, b) on the covered
// window: the tail restores the tall path, whose base fold drops the pads.
inline PathSample scale_reflected_back(const PathSample& in, std::uint32_t a,
                                       std::uint32_t b) {
  detail::check_even_pair(a, b);
  validate_path(in);
  require(in.codomain == Codomain::Reflected, ErrorCode::DomainError,
          "expected a reflected band path");
  std::uint64_t lifted = static_cast<std::uint64_t>(in.par.m) * a;
  require(lifted % b == 0 && lifted / b >= 2, ErrorCode::GridIncompatible,
          "band sites do not split at that ratio");
  auto tall = crease_unfold_packed(in, a);
  return crease_fold(tall, b);
}

// ---------------------------------------------------------------------------
// Relabelling under diffusive scaling: (h, sigma) and (c h, c sigma) describe
// the same lattice objects, so a map for one band serves the other after this
// reparametrization.

inline LatticeParams sigma_variant(const LatticeParams& par, double sigma) {
  require(sigma > 0.0, ErrorCode::DomainError, "scale must be positive");
  LatticeParams out = par;
  out.h = par.h * (sigma / par.sigma);
  out.sigma = sigma;
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Poisson factor.  Each complete interval seeds a generator from its own
// shape (length, level pair, site sequence), which funds exponential
// spacings laid out on a subgrid of the tick; the interval boundaries cut
// the stream so that what each interval emits depends on that interval
// alone.  Two intervals with identical shapes necessarily emit identical
// points; shapes stop colliding once the band is reasonably fine.

namespace detail {

struct BitSupply {
  RngStream ext;

  explicit BitSupply(std::uint64_t seed) : ext(seed, 0x706f6973736f6eull) {}

  double uniform53() {
    std::uint64_t x = 0;
    for (int i = 0; i < 53; ++i) x = (x << 1) | std::uint64_t(ext.next_bit());
    return (static_cast<double>(x) + 0.5) * 0x1.0p-53;
  }
};

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t supply_seed(const PathSample& path, Tick from_t,
                                 Tick to_t, int from, int to) {
  std::uint64_t s =
      mix64(0x657874656e64ull ^ static_cast<std::uint64_t>(to_t - from_t));
  s = mix64(s ^ (static_cast<std::uint64_t>(from) << 32) ^
            static_cast<std::uint64_t>(static_cast<std::uint32_t>(to)));
  for (Tick t = from_t; t <= to_t; ++t)
    s = mix64(s ^ static_cast<std::uint64_t>(path.at(t)));
  return s;
}

constexpr Tick kSubTicks = Tick(1) << 20;

}  // namespace detail

inline PointMeasure poisson_factor(const PathSample& path, double rate) {
  validate_path(path);
  require(rate >= 0.0, ErrorCode::DomainError, "rate must be nonnegative");
  auto part = detail::pipeline_partition(path, false);

  PointMeasure out;
  out.tick_size = path.par.dt() / static_cast<double>(detail::kSubTicks);
  out.window = {part.points.front().t * detail::kSubTicks,
                part.points.back().t * detail::kSubTicks};
  if (rate == 0.0) return out;

  double dt = path.par.dt();
  for (std::size_t k = 0; k + 1 < part.size(); ++k) {
    const auto& pa = part.points[k];
    const auto& pb = part.points[k + 1];
    Tick L = pb.t - pa.t;
    detail::BitSupply supply(
        detail::supply_seed(path, pa.t, pb.t, pa.level, pb.level));

    Tick span = L * detail::kSubTicks;
    double pos = 0.0;
    for (;;) {
      pos += -std::log(supply.uniform53()) / rate / dt *
             static_cast<double>(detail::kSubTicks);
      if (pos >= static_cast<double>(span)) break;
      Tick tick = pa.t * detail::kSubTicks + static_cast<Tick>(pos);
      if (!out.points.empty() && tick <= out.points.back())
        tick = out.points.back() + 1;
      if (tick >= pb.t * detail::kSubTicks) break;
      out.points.push_back(tick);
    }
  }
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Coding window measurement.  `run` maps a path to a canonical digest of the
// output restricted to the query; the measured radius is the least symmetric
// truncation of the input that still reproduces the full-window digest, with
// the one-tick-smaller truncation checked to differ.

inline Tick measure_coding_window(
    const std::function<std::string(const PathSample&)>& run,
    const PathSample& input, Tick query_hi) {
  require(query_hi >= 0, ErrorCode::DomainError, "query ends before zero");
  require(input.t0 <= -query_hi && input.end() - 1 >= query_hi,
          ErrorCode::InsufficientWindow, "sample does not cover the query");
  Tick rmax = std::min(-input.t0, input.end() - 1);
  std::string full = run(input.restrict(-rmax, rmax));

  auto agrees = [&](Tick r) {
    try {
      return run(input.restrict(-r, r)) == full;
    } catch (const Error&) {
      return false;
    }
  };
  Tick lo = query_hi, hi = rmax;
  while (lo < hi) {
    Tick mid = lo + (hi - lo) / 2;
    if (agrees(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  while (lo > query_hi && agrees(lo - 1)) --lo;
  return lo;
}

inline std::string digest_path(const PathSample& p, Tick lo, Tick hi) {
  std::string s;
  for (Tick t = std::max(lo, p.t0); t <= std::min(hi, p.end() - 1); ++t)
    s += std::to_string(t) + ":" + std::to_string(p.at(t)) + ";";
  return s;
}

inline std::string digest_points(const MarkedPointProcess& mpp, Tick lo,
                                 Tick hi) {
  std::string s;
  for (std::size_t i = 0; i < mpp.size(); ++i) {
    Tick t = mpp.base.points[i];
    if (t < lo || t > hi) continue;
    s += std::to_string(t) + ":" + std::to_string(mpp.colours[i]);
    if (mpp.has_ucodes)
      s += ":" + std::to_string(mpp.ucodes[i].size()) + ":" +
           mpp.ucodes[i].to_hex();
    s += ";";
  }
  return s;
}

}  // namespace bmiso
