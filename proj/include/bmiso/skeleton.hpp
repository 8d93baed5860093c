#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "bmiso/bigint.hpp"
#include "bmiso/errors.hpp"
#include "bmiso/markov.hpp"
#include "bmiso/point_process.hpp"
#include "bmiso/rng.hpp"
#include "bmiso/ucode.hpp"

namespace bmiso {

// A window of consecutive points whose colours trace a return path
// (base, r1, ..., rn, base). Endpoints are shared freely between adjacent
// occurrences; interiors never overlap because they avoid the base colour.
struct RhoInterval {
  std::size_t first = 0;
  Tick a = 0;
  Tick b = 0;
};

struct RhoAssignment {
  std::vector<RhoInterval> intervals;
  // Index of the interval each point reports to: the one with the largest
  // right endpoint at or before the point. -1 left of every interval.
  std::vector<std::ptrdiff_t> report;
};

inline RhoAssignment locate_rho_intervals(const MarkedPointProcess& mpp,
                                          const RhoPath& rho) {
  mpp.validate();
  RhoAssignment out;
  std::size_t span = rho.span();
  if (mpp.size() >= span) {
    for (std::size_t i = 0; i + span <= mpp.size(); ++i) {
      if (mpp.colours[i] != rho.base) continue;
      if (mpp.colours[i + span - 1] != rho.base) continue;
      bool match = true;
      for (std::size_t j = 0; j < rho.interior.size(); ++j)
        if (mpp.colours[i + 1 + j] != rho.interior[j]) {
          match = false;
          break;
        }
      if (match)
        out.intervals.push_back(RhoInterval{i, mpp.base.points[i],
                                            mpp.base.points[i + span - 1]});
    }
  }
  out.report.assign(mpp.size(), -1);
  std::ptrdiff_t current = -1;
  std::size_t next = 0;
  for (std::size_t k = 0; k < mpp.size(); ++k) {
    while (next < out.intervals.size() &&
           out.intervals[next].b <= mpp.base.points[k])
      current = std::ptrdiff_t(next++);
    out.report[k] = current;
  }
  return out;
}

// Moves a conditioned point to a fresh position with the same law and turns
// the displaced randomness into k uniform bit strings. weight[x] is the
// (unnormalized) mass of offset x; the map below is an involution on the
// underlying unit interval, so it is its own kind of inverse and leaks no
// bias. k = 0 keeps the point where it is: there is nowhere to bank the
// randomness that moving it would free.
struct RhoDraw {
  Tick offset = 0;
  std::vector<UniformCode> codes;
};

namespace detail {

inline BigInt weight_total(const std::vector<BigInt>& weight) {
  BigInt d = 0;
  for (const BigInt& w : weight) d += w;
  return d;
}

inline Tick weight_locate(const std::vector<BigInt>& weight, const BigInt& v,
                          BigInt& cum_out) {
  BigInt cum = 0;
  for (std::size_t x = 0; x < weight.size(); ++x) {
    if (v < cum + weight[x]) {
      cum_out = cum;
      return Tick(x);
    }
    cum += weight[x];
  }
  throw Error(ErrorCode::DomainError, "position draw beyond total mass");
}

inline std::size_t mark_length(std::size_t total_bits, std::size_t i,
                               std::size_t k) {
  return total_bits > i ? (total_bits - i + k - 1) / k : 0;
}

}  // namespace detail

inline RhoDraw rho_resample(const std::vector<BigInt>& weight, Tick offset,
                            std::size_t k, RngStream& rng) {
  require(!weight.empty(), ErrorCode::DomainError, "empty weight table");
  require(offset >= 0 && std::size_t(offset) < weight.size(),
          ErrorCode::SupportMismatch, "offset outside the weight table");
  require(weight[std::size_t(offset)] > 0, ErrorCode::SupportMismatch,
          "the point sits where the law carries no mass");
  if (k == 0) return RhoDraw{offset, {}};
  BigInt cum = 0;
  for (Tick x = 0; x < offset; ++x) cum += weight[std::size_t(x)];
  BigInt d = cum;
  for (std::size_t x = std::size_t(offset); x < weight.size(); ++x)
    d += weight[x];
  BigInt v = cum + big_below(rng, weight[std::size_t(offset)]);
  BigInt v2 = d - 1 - v;
  BigInt cum2 = 0;
  Tick x2 = detail::weight_locate(weight, v2, cum2);
  BigInt j2 = v2 - cum2;
  const BigInt& n2 = weight[std::size_t(x2)];
  std::size_t nbits = bit_length(n2) + 1;
  BigInt w = (j2 << nbits) / n2;
  RhoDraw out;
  out.offset = x2;
  out.codes.resize(k);
  for (std::size_t i = 0; i < nbits; ++i)
    out.codes[i % k].push_bit(
        boost::multiprecision::bit_test(w, unsigned(nbits - 1 - i)) ? 1 : 0);
  return out;
}

inline Tick rho_resample_inverse(const std::vector<BigInt>& weight,
                                 Tick offset_new,
                                 const std::vector<UniformCode>& codes) {
  require(!weight.empty(), ErrorCode::DomainError, "empty weight table");
  require(offset_new >= 0 && std::size_t(offset_new) < weight.size(),
          ErrorCode::SupportMismatch, "offset outside the weight table");
  const BigInt& n2 = weight[std::size_t(offset_new)];
  require(n2 > 0, ErrorCode::SupportMismatch,
          "the point sits where the law carries no mass");
  if (codes.empty()) return offset_new;
  std::size_t nbits = 0;
  for (const UniformCode& c : codes) nbits += c.size();
  require(nbits == bit_length(n2) + 1, ErrorCode::DecodeError,
          "marks carry the wrong number of bits for this position");
  for (std::size_t i = 0; i < codes.size(); ++i)
    require(codes[i].size() == detail::mark_length(nbits, i, codes.size()),
            ErrorCode::DecodeError, "mark lengths are inconsistent");
  BigInt w = 0;
  for (std::size_t i = 0; i < nbits; ++i) {
    w <<= 1;
    if (codes[i % codes.size()].bit(i / codes.size())) w += 1;
  }
  BigInt j2 = ceil_div(w * n2, pow2(nbits));
  require(j2 < n2 && (j2 << nbits) / n2 == w, ErrorCode::DecodeError,
          "marks do not encode a position draw");
  BigInt cum2 = 0;
  for (Tick x = 0; x < offset_new; ++x) cum2 += weight[std::size_t(x)];
  BigInt d = detail::weight_total(weight);
  BigInt v = d - 1 - (cum2 + j2);
  BigInt cum = 0;
  return detail::weight_locate(weight, v, cum);
}

// Gap weight supplier: mass of a single conditioned passage of the given
// duration, in the same (unnormalized) units on both sides of the moved
// point.
using GapWeightFn = std::function<BigInt(Tick)>;

namespace detail {

inline std::vector<BigInt> interval_weights(Tick length,
                                            const GapWeightFn& wfn) {
  require(length >= 2, ErrorCode::DomainError,
          "interval too short to hold an interior point");
  std::vector<BigInt> weight(std::size_t(length) + 1);
  for (Tick x = 1; x < length; ++x)
    weight[std::size_t(x)] = wfn(x) * wfn(length - x);
  return weight;
}

inline std::vector<std::vector<std::size_t>> reporters_by_interval(
    const RhoAssignment& where, std::size_t n_intervals) {
  std::vector<std::vector<std::size_t>> out(n_intervals);
  for (std::size_t k = 0; k < where.report.size(); ++k)
    if (where.report[k] >= 0)
      out[std::size_t(where.report[k])].push_back(k);
  return out;
}

}  // namespace detail

// Re-draws the interior point of every rho-interval and hands the displaced
// randomness out as one uniform mark per reporting point. Points left of the
// first interval keep an empty mark; colours are untouched.
inline MarkedPointProcess attach_uniform_marks(const MarkedPointProcess& in,
                                               const RhoPath& rho,
                                               const GapWeightFn& wfn,
                                               RngStream& rng) {
  in.validate();
  require(!in.has_ucodes, ErrorCode::DomainError,
          "marks would collide with codes already present");
  require(rho.interior.size() == 1, ErrorCode::DomainError,
          "resampling needs a single-interior return path");
  RhoAssignment where = locate_rho_intervals(in, rho);
  require(!where.intervals.empty(), ErrorCode::NoRhoIntervalInWindow,
          "no return-path occurrence in the window");
  auto reporters = detail::reporters_by_interval(where, where.intervals.size());
  MarkedPointProcess out = in;
  out.has_ucodes = true;
  out.ucodes.assign(in.size(), UniformCode{});
  for (std::size_t v = 0; v < where.intervals.size(); ++v) {
    const RhoInterval& iv = where.intervals[v];
    std::size_t mid = iv.first + 1;
    std::vector<BigInt> weight = detail::interval_weights(iv.b - iv.a, wfn);
    Tick offset = in.base.points[mid] - iv.a;
    RhoDraw draw = rho_resample(weight, offset, reporters[v].size(), rng);
    out.base.points[mid] = iv.a + draw.offset;
    for (std::size_t i = 0; i < reporters[v].size(); ++i)
      out.ucodes[reporters[v][i]] = std::move(draw.codes[i]);
  }
  out.validate();
  return out;
}

inline MarkedPointProcess detach_uniform_marks(const MarkedPointProcess& in,
                                               const RhoPath& rho,
                                               const GapWeightFn& wfn) {
  in.validate();
  require(in.has_ucodes, ErrorCode::MissingUcode,
          "nothing to detach: the points carry no marks");
  require(rho.interior.size() == 1, ErrorCode::DomainError,
          "resampling needs a single-interior return path");
  RhoAssignment where = locate_rho_intervals(in, rho);
  require(!where.intervals.empty(), ErrorCode::NoRhoIntervalInWindow,
          "no return-path occurrence in the window");
  auto reporters = detail::reporters_by_interval(where, where.intervals.size());
  for (std::size_t k = 0; k < in.size(); ++k)
    require(where.report[k] >= 0 || in.ucodes[k].empty(),
            ErrorCode::DecodeError, "stray mark left of every interval");
  MarkedPointProcess out = in;
  out.has_ucodes = false;
  out.ucodes.clear();
  for (std::size_t v = 0; v < where.intervals.size(); ++v) {
    const RhoInterval& iv = where.intervals[v];
    std::size_t mid = iv.first + 1;
    std::vector<BigInt> weight = detail::interval_weights(iv.b - iv.a, wfn);
    std::vector<UniformCode> codes;
    codes.reserve(reporters[v].size());
    for (std::size_t k : reporters[v]) codes.push_back(in.ucodes[k]);
    Tick offset_new = in.base.points[mid] - iv.a;
    out.base.points[mid] = iv.a + rho_resample_inverse(weight, offset_new,
                                                       codes);
  }
  out.validate();
  return out;
}

// A walk on the even cycle Z_n alternates parity every step. The even-parity
// colours halve to a lazy walk on Z_{n/2}; each odd-parity colour is either
// forced by its two even flanks or leaves one route bit. The bit convention:
// 1 means the colour clockwise of the flank (2q + 1 mod n), 0 the other.
struct CycleDecomposition {
  int n = 0;
  int phase = 0;
  std::vector<int> quotient;
  UniformCode residual;
};

namespace detail {

inline void check_cycle_step(int from, int to, int n) {
  int up = (from + 1) % n, down = (from + n - 1) % n;
  require(to == up || to == down, ErrorCode::IllegalTransition,
          "colours are not a neighbour walk on the cycle");
}

inline bool odd_colour_ambiguous(int n, int q_left, int q_right) {
  return n == 4 || q_left == q_right;
}

inline int odd_colour_from_flanks(int n, int q_left, int q_right) {
  int half = n / 2;
  if (q_right == (q_left + 1) % half) return (2 * q_left + 1) % n;
  return (2 * q_left + n - 1) % n;
}

}  // namespace detail

inline CycleDecomposition decompose_even_cycle(const std::vector<int>& colours,
                                               int n) {
  require(n >= 4 && n % 2 == 0, ErrorCode::DomainError,
          "cycle order must be even and at least four");
  require(!colours.empty(), ErrorCode::DomainError, "no colours to decompose");
  for (int c : colours)
    require(c >= 0 && c < n, ErrorCode::DomainError, "colour off the cycle");
  for (std::size_t i = 0; i + 1 < colours.size(); ++i)
    detail::check_cycle_step(colours[i], colours[i + 1], n);
  CycleDecomposition out;
  out.n = n;
  out.phase = colours[0] & 1;
  require(colours.size() > 1 || out.phase == 0, ErrorCode::DomainError,
          "window has no even-parity point to anchor the quotient");
  for (std::size_t i = (out.phase ? 1 : 0); i < colours.size(); i += 2)
    out.quotient.push_back(colours[i] / 2);
  for (std::size_t i = (out.phase ? 0 : 1); i < colours.size(); i += 2) {
    int c = colours[i];
    if (i == 0)
      out.residual.push_bit(c == (2 * (colours[1] / 2) + 1) % n ? 1 : 0);
    else if (i + 1 == colours.size())
      out.residual.push_bit(c == (2 * (colours[i - 1] / 2) + 1) % n ? 1 : 0);
    else {
      int ql = colours[i - 1] / 2, qr = colours[i + 1] / 2;
      if (detail::odd_colour_ambiguous(n, ql, qr))
        out.residual.push_bit(c == (2 * ql + 1) % n ? 1 : 0);
    }
  }
  return out;
}

inline std::vector<int> recompose_even_cycle(const CycleDecomposition& d,
                                             std::size_t count) {
  require(d.n >= 4 && d.n % 2 == 0, ErrorCode::DomainError,
          "cycle order must be even and at least four");
  require(count >= 1, ErrorCode::DomainError, "no colours to rebuild");
  int half = d.n / 2;
  std::size_t evens = d.phase ? count / 2 : (count + 1) / 2;
  require(d.quotient.size() == evens, ErrorCode::LengthMismatch,
          "quotient length does not match the window");
  require(evens >= 1, ErrorCode::DomainError,
          "window has no even-parity point to anchor the quotient");
  for (std::size_t j = 0; j + 1 < d.quotient.size(); ++j) {
    int step = (d.quotient[j + 1] - d.quotient[j] + half) % half;
    require(step == 0 || step == 1 || step == half - 1,
            ErrorCode::IllegalTransition, "quotient is not a lazy walk");
  }
  for (int q : d.quotient)
    require(q >= 0 && q < half, ErrorCode::DomainError,
            "quotient state off the half cycle");
  std::vector<int> colours(count, -1);
  for (std::size_t j = 0; j < d.quotient.size(); ++j)
    colours[(d.phase ? 1 : 0) + 2 * j] = 2 * d.quotient[j];
  std::size_t used = 0;
  auto take_bit = [&]() {
    require(used < d.residual.size(), ErrorCode::LengthMismatch,
            "residual bits ran out");
    return d.residual.bit(used++);
  };
  for (std::size_t i = (d.phase ? 0 : 1); i < count; i += 2) {
    if (i == 0) {
      int q = colours[1] / 2;
      colours[0] = take_bit() ? (2 * q + 1) % d.n : (2 * q + d.n - 1) % d.n;
    } else if (i + 1 == count) {
      int q = colours[i - 1] / 2;
      colours[i] = take_bit() ? (2 * q + 1) % d.n : (2 * q + d.n - 1) % d.n;
    } else {
      int ql = colours[i - 1] / 2, qr = colours[i + 1] / 2;
      if (detail::odd_colour_ambiguous(d.n, ql, qr))
        colours[i] =
            take_bit() ? (2 * ql + 1) % d.n : (2 * ql + d.n - 1) % d.n;
      else
        colours[i] = detail::odd_colour_from_flanks(d.n, ql, qr);
    }
  }
  require(used == d.residual.size(), ErrorCode::LengthMismatch,
          "residual bits left over");
  return colours;
}

// Marker blocks: a point is a marker when its mark opens with two one bits.
// Each block runs from a marker to the next. The block's colour word is
// coded against the exact chain law and folded together with the block's
// leftover mark bits into a single mark on the marker; every other point
// leaves with an empty mark and all colours erased.
inline bool opens_marker(const UniformCode& u) {
  return u.size() >= 2 && u.bit(0) == 1 && u.bit(1) == 1;
}

struct MarkovBlock {
  std::size_t first = 0;
  std::vector<int> symbols;
  UniformCode rest;
};

namespace detail {

inline void require_mixing(const MarkovSpec& spec) {
  spec.validate();
  require(spec.irreducible(), ErrorCode::NotIrreducible,
          "chain is not irreducible");
  require(spec.aperiodic(), ErrorCode::DomainError,
          "chain must mix for block coding");
}

// One step of the exact word law: extends the dyadic-free interval
// [lo/d, (lo+len)/d) by the conditional weight of the next symbol.
struct WordLeaf {
  BigInt lo = 0, len = 1, d = 1;

  void extend(const MarkovSpec& spec, int prev, int next) {
    std::int64_t den = prev < 0 ? spec.pi_den : spec.row_den[prev];
    const std::vector<std::int64_t>& nums =
        prev < 0 ? spec.pi_num : spec.p_num[prev];
    BigInt cum = 0;
    for (int s = 0; s < next; ++s) cum += nums[s];
    lo = lo * den + len * cum;
    len = len * nums[next];
    d = d * den;
  }
};

}  // namespace detail

inline MarkedPointProcess markov_to_iid(const MarkedPointProcess& in,
                                        const MarkovSpec& spec) {
  in.validate();
  detail::require_mixing(spec);
  require(in.has_ucodes, ErrorCode::MissingUcode,
          "block coding needs marks to locate markers");
  require(in.n_colours == spec.n_states, ErrorCode::DomainError,
          "colour count must match the chain");
  std::vector<std::size_t> markers;
  for (std::size_t k = 0; k < in.size(); ++k)
    if (opens_marker(in.ucodes[k])) markers.push_back(k);
  require(!markers.empty(), ErrorCode::NoMarkerInWindow,
          "no mark opens a marker in the window");
  require(markers.front() == 0, ErrorCode::DomainError,
          "window must start at a marker; trim to the first one");
  MarkedPointProcess out = in;
  out.n_colours = 1;
  out.colours.assign(in.size(), 0);
  out.ucodes.assign(in.size(), UniformCode{});
  for (std::size_t bi = 0; bi < markers.size(); ++bi) {
    std::size_t from = markers[bi];
    std::size_t to = bi + 1 < markers.size() ? markers[bi + 1] : in.size();
    UniformCode rest = in.ucodes[from].subcode(2, in.ucodes[from].size() - 2);
    for (std::size_t k = from + 1; k < to; ++k) rest.append(in.ucodes[k]);
    detail::WordLeaf leaf;
    for (std::size_t k = from; k < to; ++k) {
      leaf.extend(spec, k == from ? -1 : in.colours[k - 1], in.colours[k]);
      require(leaf.len > 0, ErrorCode::IllegalTransition,
              "colour word has no probability under the chain");
    }
    std::size_t rho = rest.size();
    std::size_t nbits = rho + bit_length(leaf.d) + 1;
    BigInt w = ceil_div(((leaf.lo << rho) + leaf.len * rest.as_integer())
                            << (nbits - rho),
                        leaf.d);
    UniformCode mark;
    mark.push_bit(1);
    mark.push_bit(1);
    mark.append(UniformCode::from_integer(w, nbits));
    out.ucodes[from] = std::move(mark);
  }
  return out;
}

inline std::vector<MarkovBlock> iid_to_markov(const MarkedPointProcess& in,
                                              const MarkovSpec& spec) {
  in.validate();
  detail::require_mixing(spec);
  require(in.has_ucodes, ErrorCode::MissingUcode,
          "block decoding needs the folded marks");
  std::vector<std::size_t> markers;
  for (std::size_t k = 0; k < in.size(); ++k)
    if (!in.ucodes[k].empty()) markers.push_back(k);
  require(!markers.empty(), ErrorCode::NoMarkerInWindow,
          "no folded marks in the window");
  require(markers.front() == 0, ErrorCode::DecodeError,
          "points precede the first marker");
  std::vector<MarkovBlock> out;
  for (std::size_t bi = 0; bi < markers.size(); ++bi) {
    std::size_t from = markers[bi];
    std::size_t to = bi + 1 < markers.size() ? markers[bi + 1] : in.size();
    const UniformCode& mark = in.ucodes[from];
    require(mark.size() >= 3 && mark.bit(0) == 1 && mark.bit(1) == 1,
            ErrorCode::DecodeError, "folded mark does not open a marker");
    std::size_t nbits = mark.size() - 2;
    BigInt w = mark.subcode(2, nbits).as_integer();
    detail::WordLeaf leaf;
    MarkovBlock block;
    block.first = from;
    for (std::size_t k = from; k < to; ++k) {
      int prev = k == from ? -1 : block.symbols.back();
      bool found = false;
      for (int s = 0; s < spec.n_states; ++s) {
        detail::WordLeaf next = leaf;
        next.extend(spec, prev, s);
        if (next.len <= 0) continue;
        if (w * next.d >= next.lo << nbits &&
            w * next.d < (next.lo + next.len) << nbits) {
          leaf = next;
          block.symbols.push_back(s);
          found = true;
          break;
        }
      }
      require(found, ErrorCode::DecodeError,
              "folded mark does not match the chain law");
    }
    std::size_t dl = bit_length(leaf.d) + 1;
    require(nbits >= dl, ErrorCode::DecodeError,
            "folded mark too short for its block");
    std::size_t rho = nbits - dl;
    BigInt over = w * leaf.d - (leaf.lo << nbits);
    BigInt r = over / (leaf.len << (nbits - rho));
    require(r < pow2(rho), ErrorCode::DecodeError,
            "folded mark carries too much rest");
    require(ceil_div(((leaf.lo << rho) + leaf.len * r) << (nbits - rho),
                     leaf.d) == w,
            ErrorCode::DecodeError, "folded mark does not round trip");
    block.rest = UniformCode::from_integer(r, rho);
    out.push_back(std::move(block));
  }
  return out;
}

}  // namespace bmiso
