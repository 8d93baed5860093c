#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bmiso/errors.hpp"
#include "bmiso/lattice.hpp"
#include "bmiso/ucode.hpp"

namespace bmiso {

// Closed tick interval [lo, hi].
struct TimeWindow {
  Tick lo = 0;
  Tick hi = 0;

  Tick length() const { return hi - lo; }
  bool contains(Tick t) const { return t >= lo && t <= hi; }
  bool contains(const TimeWindow& o) const { return o.lo >= lo && o.hi <= hi; }
  bool operator==(const TimeWindow& o) const {
    return lo == o.lo && hi == o.hi;
  }
};

// A simple point measure on a window: strictly increasing isolated points,
// stored as integer ticks; tick_size carries the grid step in seconds.
struct PointMeasure {
  TimeWindow window;
  double tick_size = 1.0;
  std::vector<Tick> points;

  void validate() const {
    require(window.lo <= window.hi, ErrorCode::DomainError,
            "window ends before it starts");
    require(tick_size > 0.0, ErrorCode::DomainError,
            "tick size must be positive");
    for (std::size_t i = 0; i < points.size(); ++i) {
      require(window.contains(points[i]), ErrorCode::DomainError,
              "point outside window");
      if (i > 0)
        require(points[i] > points[i - 1], ErrorCode::DomainError,
                "points must be strictly increasing");
    }
  }

  double time(std::size_t i) const {
    return static_cast<double>(points[i]) * tick_size;
  }
};

inline PointMeasure shift(const PointMeasure& pm, Tick by) {
  PointMeasure out = pm;
  out.window.lo += by;
  out.window.hi += by;
  for (auto& p : out.points) p += by;
  return out;
}

inline PointMeasure restrict_points(const PointMeasure& pm, TimeWindow sub) {
  require(pm.window.contains(sub), ErrorCode::IntervalOutsideWindow,
          "restriction interval not inside window");
  PointMeasure out;
  out.window = sub;
  out.tick_size = pm.tick_size;
  for (Tick p : pm.points)
    if (sub.contains(p)) out.points.push_back(p);
  return out;
}

// Two-sided indexing: p0 is the closest point left of (or at) the origin,
// p1 the first strictly right of it.
struct IndexedPoints {
  const PointMeasure* pm = nullptr;
  std::ptrdiff_t i0 = -1;

  Tick point(std::ptrdiff_t k) const {
    std::ptrdiff_t i = i0 + k;
    require(i >= 0 && i < static_cast<std::ptrdiff_t>(pm->points.size()),
            ErrorCode::IntervalOutsideWindow, "indexed point outside window");
    return pm->points[static_cast<std::size_t>(i)];
  }
};

inline IndexedPoints index_points(const PointMeasure& pm, Tick origin = 0) {
  std::ptrdiff_t i0 = -1;
  for (std::size_t i = 0; i < pm.points.size(); ++i)
    if (pm.points[i] <= origin) i0 = static_cast<std::ptrdiff_t>(i);
  require(i0 >= 0, ErrorCode::NoPointLeftOfOrigin,
          "no point at or left of the origin");
  return {&pm, i0};
}

// Points with small-integer colours and optional uniform codes.
struct MarkedPointProcess {
  PointMeasure base;
  int n_colours = 2;
  std::vector<int> colours;
  bool has_ucodes = false;
  std::vector<UniformCode> ucodes;

  std::size_t size() const { return base.points.size(); }

  void validate() const {
    base.validate();
    require(n_colours >= 1, ErrorCode::DomainError, "need colours");
    require(colours.size() == base.points.size(), ErrorCode::LengthMismatch,
            "colour count != point count");
    for (int c : colours)
      require(c >= 0 && c < n_colours, ErrorCode::DomainError,
              "colour outside palette");
    if (has_ucodes)
      require(ucodes.size() == base.points.size(), ErrorCode::LengthMismatch,
              "ucode count != point count");
    else
      require(ucodes.empty(), ErrorCode::LengthMismatch,
              "ucodes present but not declared");
  }

  // Alternation check for two-colour processes.
  bool alternates() const {
    for (std::size_t i = 1; i < colours.size(); ++i)
      if (colours[i] == colours[i - 1]) return false;
    return true;
  }
};

inline MarkedPointProcess shift(const MarkedPointProcess& mpp, Tick by) {
  MarkedPointProcess out = mpp;
  out.base = shift(mpp.base, by);
  return out;
}

inline MarkedPointProcess restrict_points(const MarkedPointProcess& mpp,
                                          TimeWindow sub) {
  require(mpp.base.window.contains(sub), ErrorCode::IntervalOutsideWindow,
          "restriction interval not inside window");
  MarkedPointProcess out;
  out.base.window = sub;
  out.base.tick_size = mpp.base.tick_size;
  out.n_colours = mpp.n_colours;
  out.has_ucodes = mpp.has_ucodes;
  for (std::size_t i = 0; i < mpp.base.points.size(); ++i)
    if (sub.contains(mpp.base.points[i])) {
      out.base.points.push_back(mpp.base.points[i]);
      out.colours.push_back(mpp.colours[i]);
      if (mpp.has_ucodes) out.ucodes.push_back(mpp.ucodes[i]);
    }
  return out;
}

// Colour points red (0) / blue (1) alternately; phase 0 makes p0 red.
inline MarkedPointProcess alternate_colour(const PointMeasure& pm, int phase,
                                           Tick origin = 0) {
  auto idx = index_points(pm, origin);
  MarkedPointProcess out;
  out.base = pm;
  out.n_colours = 2;
  out.colours.resize(pm.points.size());
  for (std::size_t i = 0; i < pm.points.size(); ++i) {
    std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i) - idx.i0;
    out.colours[i] = static_cast<int>(((k % 2) + 2 + phase) % 2);
  }
  return out;
}

// Equality of the restrictions to a common interval (points, colours, codes).
inline bool agree_on(const MarkedPointProcess& a, const MarkedPointProcess& b,
                     TimeWindow interval) {
  require(a.base.window.contains(interval) && b.base.window.contains(interval),
          ErrorCode::IntervalOutsideWindow,
          "comparison interval outside a window");
  auto ra = restrict_points(a, interval), rb = restrict_points(b, interval);
  if (ra.base.points != rb.base.points) return false;
  if (ra.colours != rb.colours) return false;
  if (ra.has_ucodes != rb.has_ucodes) return false;
  if (ra.has_ucodes)
    for (std::size_t i = 0; i < ra.ucodes.size(); ++i)
      if (ra.ucodes[i] != rb.ucodes[i]) return false;
  return true;
}

// Bitwise interleave of two mark families over the same points.
inline MarkedPointProcess merge_ucode_marks(const MarkedPointProcess& a,
                                            const MarkedPointProcess& b) {
  require(a.size() == b.size(), ErrorCode::LengthMismatch,
          "mark families have different point counts");
  require(a.base.points == b.base.points, ErrorCode::LengthMismatch,
          "mark families live on different points");
  require(a.has_ucodes && b.has_ucodes, ErrorCode::MissingUcode,
          "both factors need ucodes");
  MarkedPointProcess out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    out.ucodes[i] = merge_bits(a.ucodes[i], b.ucodes[i]);
  return out;
}

// Text format: header with window and grid step, then one line per point:
// index, tick, colour, bitcount:hex (or - when the process carries no codes).
inline void save_mpp(const MarkedPointProcess& mpp, std::ostream& os) {
  mpp.validate();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", mpp.base.tick_size);
  os << "# mpp v1\n";
  os << "window " << mpp.base.window.lo << ' ' << mpp.base.window.hi << ' '
     << buf << '\n';
  os << "colours " << mpp.n_colours << '\n';
  os << "points " << mpp.size() << (mpp.has_ucodes ? " coded" : " plain")
     << '\n';
  for (std::size_t i = 0; i < mpp.size(); ++i) {
    os << i << ' ' << mpp.base.points[i] << ' ' << mpp.colours[i] << ' ';
    if (mpp.has_ucodes)
      os << mpp.ucodes[i].size() << ':' << mpp.ucodes[i].to_hex();
    else
      os << '-';
    os << '\n';
  }
}

inline void save_mpp(const MarkedPointProcess& mpp, const std::string& file) {
  std::ofstream os(file);
  require(bool(os), ErrorCode::ConfigError, "cannot open " + file);
  save_mpp(mpp, os);
}

inline MarkedPointProcess load_mpp(std::istream& is) {
  std::string line, word;
  std::getline(is, line);
  require(line == "# mpp v1", ErrorCode::ConfigError, "bad mpp header");
  MarkedPointProcess mpp;
  std::string tick_hex;
  {
    std::getline(is, line);
    std::istringstream ls(line);
    ls >> word >> mpp.base.window.lo >> mpp.base.window.hi >> tick_hex;
    require(word == "window" && bool(ls), ErrorCode::ConfigError,
            "bad window line");
    mpp.base.tick_size = std::strtod(tick_hex.c_str(), nullptr);
  }
  {
    std::getline(is, line);
    std::istringstream ls(line);
    ls >> word >> mpp.n_colours;
    require(word == "colours" && bool(ls), ErrorCode::ConfigError,
            "bad colours line");
  }
  std::size_t count = 0;
  std::string mode;
  {
    std::getline(is, line);
    std::istringstream ls(line);
    ls >> word >> count >> mode;
    require(word == "points" && bool(ls), ErrorCode::ConfigError,
            "bad points line");
    mpp.has_ucodes = (mode == "coded");
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::getline(is, line);
    std::istringstream ls(line);
    std::size_t idx;
    Tick t;
    int colour;
    std::string code;
    ls >> idx >> t >> colour >> code;
    require(bool(ls) && idx == i, ErrorCode::ConfigError, "bad point line");
    mpp.base.points.push_back(t);
    mpp.colours.push_back(colour);
    if (mpp.has_ucodes) {
      auto sep = code.find(':');
      require(sep != std::string::npos, ErrorCode::ConfigError,
              "missing ucode field");
      std::size_t nbits = std::stoull(code.substr(0, sep));
      mpp.ucodes.push_back(
          UniformCode::from_hex(code.substr(sep + 1), nbits));
    }
  }
  mpp.validate();
  return mpp;
}

inline MarkedPointProcess load_mpp(const std::string& file) {
  std::ifstream is(file);
  require(bool(is), ErrorCode::ConfigError, "cannot open " + file);
  return load_mpp(is);
}

}  // namespace bmiso
