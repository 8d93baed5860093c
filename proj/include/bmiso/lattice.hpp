#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "bmiso/binio.hpp"
#include "bmiso/errors.hpp"
#include "bmiso/rng.hpp"

namespace bmiso {

using Tick = std::int64_t;

// Geometry of the +-delta walk: delta = h/m in value, dt = delta^2/sigma^2 in
// time, so the walk's variance per unit time is sigma^2 at every m.
struct LatticeParams {
  double h = 1.0;
  std::uint32_t m = 2;
  double sigma = 1.0;

  double delta() const { return h / static_cast<double>(m); }
  double dt() const {
    double d = delta();
    return d * d / (sigma * sigma);
  }

  void validate() const {
    require(h > 0.0, ErrorCode::DomainError, "band width must be positive");
    require(m >= 2, ErrorCode::DomainError, "need at least two value steps");
    require(sigma > 0.0, ErrorCode::DomainError, "sigma must be positive");
  }

  bool operator==(const LatticeParams& o) const {
    return h == o.h && m == o.m && sigma == o.sigma;
  }
};

enum class Codomain : std::uint8_t { Free = 0, Reflected = 1, Periodic = 2 };

// A lattice path: integer sites on the value grid, one per tick.
// Reflected paths live on sites 0..m over [0, h]; periodic paths on
// sites 0..bands*m-1 over the circle [0, bands*h); free paths on all of Z.
struct PathSample {
  Tick t0 = 0;
  LatticeParams par;
  Codomain codomain = Codomain::Free;
  std::uint32_t bands = 1;
  std::vector<std::int64_t> sites;

  std::size_t length() const { return sites.size(); }
  Tick end() const { return t0 + static_cast<Tick>(sites.size()); }

  std::int64_t site_count() const {
    switch (codomain) {
      case Codomain::Reflected: return static_cast<std::int64_t>(par.m) + 1;
      case Codomain::Periodic:
        return static_cast<std::int64_t>(par.m) * bands;
      default: return 0;
    }
  }

  double value(std::size_t i) const {
    return static_cast<double>(sites[i]) * par.delta();
  }
  double time(std::size_t i) const {
    return static_cast<double>(t0 + static_cast<Tick>(i)) * par.dt();
  }

  // Site at an absolute tick.
  std::int64_t at(Tick t) const {
    require(t >= t0 && t < end(), ErrorCode::IntervalOutsideWindow,
            "tick outside path window");
    return sites[static_cast<std::size_t>(t - t0)];
  }

  PathSample restrict(Tick lo, Tick hi_inclusive) const {
    require(lo >= t0 && hi_inclusive < end() && lo <= hi_inclusive,
            ErrorCode::IntervalOutsideWindow, "restriction outside window");
    PathSample out = *this;
    out.t0 = lo;
    out.sites.assign(sites.begin() + (lo - t0),
                     sites.begin() + (hi_inclusive - t0) + 1);
    return out;
  }
};

// Consecutive sites must differ by one step under the codomain's rule.
inline void validate_path(const PathSample& p) {
  p.par.validate();
  std::int64_t n_sites = p.site_count();
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    std::int64_t s = p.sites[i];
    if (p.codomain != Codomain::Free)
      require(s >= 0 && s < (p.codomain == Codomain::Reflected ? n_sites
                                                               : n_sites),
              ErrorCode::PathInfeasible, "site outside codomain");
    if (i == 0) continue;
    std::int64_t prev = p.sites[i - 1];
    switch (p.codomain) {
      case Codomain::Free:
        require(s == prev + 1 || s == prev - 1, ErrorCode::PathInfeasible,
                "free step must be +-1");
        break;
      case Codomain::Reflected: {
        std::int64_t mm = p.par.m;
        if (prev == 0)
          require(s == 1, ErrorCode::PathInfeasible, "leave 0 upward");
        else if (prev == mm)
          require(s == mm - 1, ErrorCode::PathInfeasible, "leave m downward");
        else
          require(s == prev + 1 || s == prev - 1, ErrorCode::PathInfeasible,
                  "reflected step must be +-1");
        break;
      }
      case Codomain::Periodic: {
        std::int64_t M = n_sites;
        require(s == (prev + 1) % M || s == (prev - 1 + M) % M,
                ErrorCode::PathInfeasible, "periodic step must be +-1 mod M");
        break;
      }
    }
  }
}

// Reflection [0, h] and wrap [0, h) of a real coordinate.
inline double fold_reflect(double w, double h) {
  double r = std::fmod(std::fabs(w), 2.0 * h);
  return r <= h ? r : 2.0 * h - r;
}

inline double wrap_periodic(double w, double h) {
  double r = std::fmod(w, h);
  if (r < 0) r += h;
  return r;
}

// Same maps on integer sites.
inline std::int64_t fold_site(std::int64_t z, std::int64_t m) {
  std::int64_t p = 2 * m;
  std::int64_t r = ((z % p) + p) % p;
  return r <= m ? r : p - r;
}

inline std::int64_t wrap_site(std::int64_t z, std::int64_t M) {
  return ((z % M) + M) % M;
}

inline PathSample fold_path(const PathSample& free_path) {
  require(free_path.codomain == Codomain::Free, ErrorCode::DomainError,
          "fold_path expects a free path");
  PathSample out = free_path;
  out.codomain = Codomain::Reflected;
  out.bands = 1;
  for (auto& s : out.sites) s = fold_site(s, free_path.par.m);
  return out;
}

inline PathSample wrap_path(const PathSample& free_path, std::uint32_t bands) {
  require(free_path.codomain == Codomain::Free, ErrorCode::DomainError,
          "wrap_path expects a free path");
  PathSample out = free_path;
  out.codomain = Codomain::Periodic;
  out.bands = bands;
  std::int64_t M = static_cast<std::int64_t>(free_path.par.m) * bands;
  for (auto& s : out.sites) s = wrap_site(s, M);
  return out;
}

// One step of each walk.
inline std::int64_t step_free(std::int64_t s, RngStream& rng) {
  return s + (rng.next_bit() ? 1 : -1);
}

inline std::int64_t step_reflected(std::int64_t s, std::int64_t m,
                                   RngStream& rng) {
  if (s == 0) return 1;
  if (s == m) return m - 1;
  return s + (rng.next_bit() ? 1 : -1);
}

inline std::int64_t step_periodic(std::int64_t s, std::int64_t M,
                                  RngStream& rng) {
  return wrap_site(s + (rng.next_bit() ? 1 : -1), M);
}

inline PathSample sample_free_walk(const LatticeParams& par, std::size_t len,
                                   std::int64_t start, RngStream& rng,
                                   Tick t0 = 0) {
  par.validate();
  require(len >= 1, ErrorCode::DomainError, "empty path");
  PathSample p;
  p.t0 = t0;
  p.par = par;
  p.codomain = Codomain::Free;
  p.sites.resize(len);
  p.sites[0] = start;
  for (std::size_t i = 1; i < len; ++i)
    p.sites[i] = step_free(p.sites[i - 1], rng);
  return p;
}

inline PathSample sample_reflected_walk(const LatticeParams& par,
                                        std::size_t len, std::int64_t start,
                                        RngStream& rng, Tick t0 = 0) {
  par.validate();
  require(len >= 1, ErrorCode::DomainError, "empty path");
  require(start >= 0 && start <= par.m, ErrorCode::DomainError,
          "start outside band");
  PathSample p;
  p.t0 = t0;
  p.par = par;
  p.codomain = Codomain::Reflected;
  p.sites.resize(len);
  p.sites[0] = start;
  for (std::size_t i = 1; i < len; ++i)
    p.sites[i] = step_reflected(p.sites[i - 1], par.m, rng);
  return p;
}

inline PathSample sample_periodic_walk(const LatticeParams& par,
                                       std::uint32_t bands, std::size_t len,
                                       std::int64_t start, RngStream& rng,
                                       Tick t0 = 0) {
  par.validate();
  require(len >= 1, ErrorCode::DomainError, "empty path");
  std::int64_t M = static_cast<std::int64_t>(par.m) * bands;
  require(start >= 0 && start < M, ErrorCode::DomainError,
          "start outside circle");
  PathSample p;
  p.t0 = t0;
  p.par = par;
  p.codomain = Codomain::Periodic;
  p.bands = bands;
  p.sites.resize(len);
  p.sites[0] = start;
  for (std::size_t i = 1; i < len; ++i)
    p.sites[i] = step_periodic(p.sites[i - 1], M, rng);
  return p;
}

// Stationary law of the folded chain: mass 1/(2m) at each boundary site and
// 1/m at each interior site (the trapezoid; pi P = pi by direct check).
inline std::int64_t stationary_reflected_site(const LatticeParams& par,
                                              RngStream& rng) {
  std::uint64_t u = rng.below(2ull * par.m);
  return static_cast<std::int64_t>((u + 1) / 2);
}

// The cyclic walk is doubly stochastic, so uniform is stationary.
inline std::int64_t stationary_periodic_site(const LatticeParams& par,
                                             std::uint32_t bands,
                                             RngStream& rng) {
  return static_cast<std::int64_t>(
      rng.below(static_cast<std::uint64_t>(par.m) * bands));
}

inline PathSample sample_stationary_reflected(const LatticeParams& par,
                                              std::size_t len, RngStream& rng,
                                              Tick t0 = 0) {
  return sample_reflected_walk(par, len, stationary_reflected_site(par, rng),
                               rng, t0);
}

inline PathSample sample_stationary_periodic(const LatticeParams& par,
                                             std::uint32_t bands,
                                             std::size_t len, RngStream& rng,
                                             Tick t0 = 0) {
  return sample_periodic_walk(
      par, bands, len, stationary_periodic_site(par, bands, rng), rng, t0);
}

// In-cell jitter that carries the lattice marginal onto the continuum band.
// Interior site j spreads over [j*delta - delta/2, j*delta + delta/2] and the
// two boundary sites over their half cells, so the trapezoid law maps to
// exactly uniform[0, h]; similarly each periodic site over its cell.
inline double smear_reflected(std::int64_t site, const LatticeParams& par,
                              RngStream& rng) {
  double d = par.delta();
  if (site == 0) return 0.5 * d * rng.real53();
  if (site == static_cast<std::int64_t>(par.m))
    return par.h - 0.5 * d * rng.real53();
  return (static_cast<double>(site) - 0.5 + rng.real53()) * d;
}

inline double smear_periodic(std::int64_t site, const LatticeParams& par,
                             RngStream& rng) {
  return (static_cast<double>(site) + rng.real53()) * par.delta();
}

// Steps until the free walk started at 0 first reaches +-m.
inline std::int64_t sample_hitting_steps(std::uint32_t m, RngStream& rng) {
  std::int64_t pos = 0, n = 0;
  std::int64_t mm = m;
  while (pos != mm && pos != -mm) {
    pos += rng.next_bit() ? 1 : -1;
    ++n;
  }
  return n;
}

// Duration of the first visit of the free walk to {-h, +h} from 0.
inline double sample_hitting_time(const LatticeParams& par, RngStream& rng) {
  par.validate();
  return static_cast<double>(sample_hitting_steps(par.m, rng)) * par.dt();
}

// Laplace transform of that hitting time in the continuum:
// E exp(-s H) = 1 / cosh((h / sigma) sqrt(2 s)).
inline double laplace_gap(double s, double h, double sigma = 1.0) {
  require(s > 0.0, ErrorCode::DomainError, "transform argument must be > 0");
  require(h > 0.0 && sigma > 0.0, ErrorCode::DomainError, "bad parameters");
  return 1.0 / std::cosh(h / sigma * std::sqrt(2.0 * s));
}

// Exact transform of the lattice hitting time (cosh martingale):
// E z^T = 1 / cosh(m acosh(1/z)) with z = exp(-s dt).
inline double lattice_gap_laplace(double s, const LatticeParams& par) {
  require(s > 0.0, ErrorCode::DomainError, "transform argument must be > 0");
  par.validate();
  double theta = std::acosh(std::exp(s * par.dt()));
  return 1.0 / std::cosh(static_cast<double>(par.m) * theta);
}

// Transition density of the reflected process via the image expansion
//   q_t(x, y) = sum_n [ p_t(x - y - 2nh) + p_t(x + y + 2nh) ],
// truncated symmetrically at |n| <= n_terms. Dropped terms have their
// gaussian argument at distance > (2 n_terms - 1) h - |x| + ..., so the
// truncation error is below 4 * n_tail * p_t(2 n_terms h - 2h); the default
// term count keeps that under 1e-14 of the value range.
inline double reflected_density(double t, double x, double y, double h,
                                double sigma = 1.0, int n_terms = -1) {
  require(t > 0.0 && h > 0.0 && sigma > 0.0, ErrorCode::DomainError,
          "bad density parameters");
  require(x >= 0.0 && x <= h && y >= 0.0 && y <= h, ErrorCode::DomainError,
          "density arguments outside band");
  double sd = sigma * std::sqrt(t);
  if (n_terms < 0)
    n_terms = static_cast<int>(std::ceil((8.0 * sd + 2.0 * h) / (2.0 * h)));
  double inv = 1.0 / (sd * std::sqrt(2.0 * std::acos(-1.0)));
  double sum = 0.0;
  for (int n = -n_terms; n <= n_terms; ++n) {
    double a = x - (y + 2.0 * n * h);
    double b = x + (y + 2.0 * n * h);
    sum += std::exp(-0.5 * a * a / (sd * sd));
    sum += std::exp(-0.5 * b * b / (sd * sd));
  }
  return inv * sum;
}

// Gaussian-increment simulation on the time grid; real-valued, used for
// convergence checks against the densities, never by the codecs.
inline std::vector<double> sample_gaussian_free(double dt, std::size_t len,
                                                double x0, double sigma,
                                                RngStream& rng) {
  require(dt > 0.0 && sigma > 0.0 && len >= 1, ErrorCode::DomainError,
          "bad gaussian walk parameters");
  std::vector<double> w(len);
  w[0] = x0;
  double sd = sigma * std::sqrt(dt);
  for (std::size_t i = 1; i < len; ++i) w[i] = w[i - 1] + sd * rng.gaussian();
  return w;
}

// Binary path format: magic, version, geometry, then one signed site per
// tick. CSV export carries both grid indices and real coordinates.
inline void save_path(const PathSample& p, const std::string& file) {
  std::ofstream os(file, std::ios::binary);
  require(bool(os), ErrorCode::ConfigError, "cannot open " + file);
  binio::write_magic(os, "BMPS");
  binio::write_pod<std::uint32_t>(os, 1);
  binio::write_pod<std::int64_t>(os, p.t0);
  binio::write_pod<double>(os, p.par.h);
  binio::write_pod<std::uint32_t>(os, p.par.m);
  binio::write_pod<double>(os, p.par.sigma);
  binio::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(p.codomain));
  binio::write_pod<std::uint32_t>(os, p.bands);
  binio::write_pod<std::uint64_t>(os, p.sites.size());
  for (auto s : p.sites) binio::write_pod<std::int64_t>(os, s);
}

inline PathSample load_path(const std::string& file) {
  std::ifstream is(file, std::ios::binary);
  require(bool(is), ErrorCode::ConfigError, "cannot open " + file);
  binio::expect_magic(is, "BMPS", file);
  auto version = binio::read_pod<std::uint32_t>(is);
  require(version == 1, ErrorCode::ConfigError, "unknown path version");
  PathSample p;
  p.t0 = binio::read_pod<std::int64_t>(is);
  p.par.h = binio::read_pod<double>(is);
  p.par.m = binio::read_pod<std::uint32_t>(is);
  p.par.sigma = binio::read_pod<double>(is);
  p.codomain = static_cast<Codomain>(binio::read_pod<std::uint8_t>(is));
  p.bands = binio::read_pod<std::uint32_t>(is);
  auto n = binio::read_pod<std::uint64_t>(is);
  p.sites.resize(n);
  for (auto& s : p.sites) s = binio::read_pod<std::int64_t>(is);
  return p;
}

inline void export_csv(const PathSample& p, const std::string& file) {
  std::ofstream os(file);
  require(bool(os), ErrorCode::ConfigError, "cannot open " + file);
  os << "tick,time,site,value\n";
  os.precision(17);
  for (std::size_t i = 0; i < p.sites.size(); ++i)
    os << (p.t0 + static_cast<Tick>(i)) << ',' << p.time(i) << ','
       << p.sites[i] << ',' << p.value(i) << '\n';
}

}  // namespace bmiso
