#pragma once

#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bmiso/bigint.hpp"
#include "bmiso/errors.hpp"

namespace bmiso {

// Finite-state chain with exact rational transition rows and stationary
// vector. Entry (i, j) is p_num[i][j] / row_den[i]; the stationary weight of
// state i is pi_num[i] / pi_den. Doubles are derived views, never inputs.
struct MarkovSpec {
  int n_states = 0;
  std::int64_t pi_den = 1;
  std::vector<std::int64_t> pi_num;
  std::vector<std::int64_t> row_den;
  std::vector<std::vector<std::int64_t>> p_num;

  double pi(int i) const {
    return double(pi_num[i]) / double(pi_den);
  }
  double p(int i, int j) const {
    return double(p_num[i][j]) / double(row_den[i]);
  }

  void validate() const {
    require(n_states >= 1, ErrorCode::DomainError, "chain needs a state");
    require(int(pi_num.size()) == n_states &&
                int(row_den.size()) == n_states &&
                int(p_num.size()) == n_states,
            ErrorCode::LengthMismatch, "chain tables disagree on state count");
    require(pi_den >= 1, ErrorCode::DomainError, "stationary denominator");
    std::int64_t pi_sum = 0;
    for (int i = 0; i < n_states; ++i) {
      require(pi_num[i] >= 0, ErrorCode::DomainError, "negative weight");
      pi_sum += pi_num[i];
      require(row_den[i] >= 1, ErrorCode::DomainError, "row denominator");
      require(int(p_num[i].size()) == n_states, ErrorCode::LengthMismatch,
              "ragged transition row");
      std::int64_t row_sum = 0;
      for (int j = 0; j < n_states; ++j) {
        require(p_num[i][j] >= 0, ErrorCode::DomainError, "negative weight");
        row_sum += p_num[i][j];
      }
      require(row_sum == row_den[i], ErrorCode::DomainError,
              "transition row does not sum to one");
    }
    require(pi_sum == pi_den, ErrorCode::DomainError,
            "stationary vector does not sum to one");
    // pi P = pi, cross-multiplied over the row denominators.
    BigInt m = 1;
    for (int i = 0; i < n_states; ++i) m *= row_den[i];
    for (int j = 0; j < n_states; ++j) {
      BigInt lhs = 0;
      for (int i = 0; i < n_states; ++i)
        lhs += BigInt(pi_num[i]) * p_num[i][j] * (m / row_den[i]);
      require(lhs == BigInt(pi_num[j]) * m, ErrorCode::DomainError,
              "vector is not stationary for the rows");
    }
  }

  bool irreducible() const {
    for (int s = 0; s < n_states; ++s) {
      std::vector<char> seen(n_states, 0);
      std::vector<int> queue{s};
      seen[s] = 1;
      for (std::size_t q = 0; q < queue.size(); ++q)
        for (int j = 0; j < n_states; ++j)
          if (!seen[j] && p_num[queue[q]][j] > 0) {
            seen[j] = 1;
            queue.push_back(j);
          }
      for (char c : seen)
        if (!c) return false;
    }
    return true;
  }

  // Period of the chain (gcd of cycle lengths through state 0); only
  // meaningful on irreducible chains.
  int period() const {
    std::vector<int> depth(n_states, -1);
    std::vector<int> queue{0};
    depth[0] = 0;
    int g = 0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      int u = queue[q];
      for (int j = 0; j < n_states; ++j) {
        if (p_num[u][j] <= 0) continue;
        if (depth[j] < 0) {
          depth[j] = depth[u] + 1;
          queue.push_back(j);
        } else {
          g = std::gcd(g, depth[u] + 1 - depth[j]);
        }
      }
    }
    return g == 0 ? 1 : (g < 0 ? -g : g);
  }

  bool aperiodic() const { return period() == 1; }
  bool mixing() const { return irreducible() && aperiodic(); }
};

namespace detail {

inline void parse_rational(const std::string& tok, std::int64_t& num,
                           std::int64_t& den) {
  auto slash = tok.find('/');
  try {
    if (slash == std::string::npos) {
      num = std::stoll(tok);
      den = 1;
    } else {
      num = std::stoll(tok.substr(0, slash));
      den = std::stoll(tok.substr(slash + 1));
    }
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad rational '" + tok + "'");
  }
  require(den >= 1, ErrorCode::ConfigError, "rational needs a positive base");
}

// Scale a line of reduced rationals onto their least common denominator.
inline std::int64_t common_scale(const std::vector<std::int64_t>& nums,
                                 const std::vector<std::int64_t>& dens,
                                 std::vector<std::int64_t>& out) {
  std::int64_t l = 1;
  for (std::int64_t d : dens) l = std::lcm(l, d);
  out.resize(nums.size());
  for (std::size_t i = 0; i < nums.size(); ++i)
    out[i] = nums[i] * (l / dens[i]);
  return l;
}

inline void parse_rational_line(std::istream& is, int count,
                                std::vector<std::int64_t>& nums_out,
                                std::int64_t& den_out) {
  std::vector<std::int64_t> nums(count), dens(count);
  for (int i = 0; i < count; ++i) {
    std::string tok;
    require(bool(is >> tok), ErrorCode::ConfigError, "chain table truncated");
    parse_rational(tok, nums[i], dens[i]);
  }
  den_out = common_scale(nums, dens, nums_out);
}

}  // namespace detail

// Text table: "# markov v1", a state count, the stationary line, then one
// line per row, every entry an exact rational like 1/4 or 0.
inline void save_markov(std::ostream& os, const MarkovSpec& spec) {
  os << "# markov v1\n";
  os << "states " << spec.n_states << '\n';
  os << "pi";
  for (int i = 0; i < spec.n_states; ++i)
    os << ' ' << spec.pi_num[i] << '/' << spec.pi_den;
  os << '\n';
  for (int i = 0; i < spec.n_states; ++i) {
    os << "row";
    for (int j = 0; j < spec.n_states; ++j)
      os << ' ' << spec.p_num[i][j] << '/' << spec.row_den[i];
    os << '\n';
  }
}

inline MarkovSpec load_markov(std::istream& is) {
  std::string line;
  require(bool(std::getline(is, line)) && line == "# markov v1",
          ErrorCode::ConfigError, "not a chain table");
  MarkovSpec spec;
  std::string word;
  require(bool(is >> word) && word == "states" && bool(is >> spec.n_states) &&
              spec.n_states >= 1,
          ErrorCode::ConfigError, "chain table needs a state count");
  require(bool(is >> word) && word == "pi", ErrorCode::ConfigError,
          "chain table needs a stationary line");
  detail::parse_rational_line(is, spec.n_states, spec.pi_num, spec.pi_den);
  spec.row_den.resize(spec.n_states);
  spec.p_num.resize(spec.n_states);
  for (int i = 0; i < spec.n_states; ++i) {
    require(bool(is >> word) && word == "row", ErrorCode::ConfigError,
            "chain table is missing a row");
    detail::parse_rational_line(is, spec.n_states, spec.p_num[i],
                                spec.row_den[i]);
  }
  spec.validate();
  return spec;
}

// Shortest positive-probability return path r -> r1 -> ... -> rn -> r whose
// interior avoids r; ties broken by the lexicographically least interior.
struct RhoPath {
  int base = 0;
  std::vector<int> interior;

  std::size_t span() const { return interior.size() + 2; }
};

inline RhoPath find_rho(const MarkovSpec& spec, int base) {
  require(base >= 0 && base < spec.n_states, ErrorCode::DomainError,
          "base state out of range");
  require(spec.irreducible(), ErrorCode::NotIrreducible,
          "chain is not irreducible");
  // Fewest steps from each state to the base without passing through it.
  std::vector<int> dist(spec.n_states, -1);
  dist[base] = 0;
  std::vector<int> queue{base};
  for (std::size_t q = 0; q < queue.size(); ++q)
    for (int s = 0; s < spec.n_states; ++s) {
      if (s == base || dist[s] >= 0 || spec.p_num[s][queue[q]] <= 0) continue;
      dist[s] = dist[queue[q]] + 1;
      queue.push_back(s);
    }
  for (std::size_t n = 1; n <= std::size_t(spec.n_states); ++n) {
    // Depth-first in ascending state order: the first completion is the
    // lexicographically least interior of length n.
    std::vector<int> interior;
    auto walk = [&](auto&& self, int at, std::size_t left) -> bool {
      if (left == 0) return spec.p_num[at][base] > 0;
      for (int s = 0; s < spec.n_states; ++s) {
        if (s == base || spec.p_num[at][s] <= 0) continue;
        if (dist[s] < 0 || std::size_t(dist[s]) > left) continue;
        interior.push_back(s);
        if (self(self, s, left - 1)) return true;
        interior.pop_back();
      }
      return false;
    };
    if (walk(walk, base, n)) return RhoPath{base, interior};
  }
  throw Error(ErrorCode::NotIrreducible,
              "no return path to the base state");
}

}  // namespace bmiso
