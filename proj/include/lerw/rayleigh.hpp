#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lerw/rng.hpp"

namespace lerw {

// A realization of the unit-intensity Poisson process on
// [0, horizon_t) x [0, horizon_x), points sorted by time coordinate.
struct PoissonField {
  double horizon_t = 0.0;
  double horizon_x = 0.0;
  std::vector<std::pair<double, double>> points;  // (s, x)
};

// Sampled by exponential gaps along s (rate horizon_x) with uniform heights,
// so the count is Poisson(area) and positions are i.i.d. uniform.
template <class Rng>
PoissonField sample_poisson_field(double horizon_t, double horizon_x, Rng& rng) {
  if (!(horizon_t > 0.0) || !(horizon_x > 0.0))
    throw std::invalid_argument("poisson field horizons must be positive");
  PoissonField field;
  field.horizon_t = horizon_t;
  field.horizon_x = horizon_x;
  double s = 0.0;
  for (;;) {
    s += exponential(rng) / horizon_x;
    if (s >= horizon_t) break;
    field.points.emplace_back(s, uniform01(rng) * horizon_x);
  }
  return field;
}

// Right-continuous path with a fixed slope between breakpoints and a drop at
// each breakpoint. The Rayleigh process uses slope 1.
struct StepPath {
  double origin = 0.0;  // value at time 0
  double slope = 1.0;
  std::vector<std::pair<double, double>> breakpoints;  // (time, value after)

  double value_at(double t) const {
    auto it = std::upper_bound(
        breakpoints.begin(), breakpoints.end(), t,
        [](double lhs, const std::pair<double, double>& bp) { return lhs < bp.first; });
    if (it == breakpoints.begin()) return origin + slope * t;
    --it;
    return it->second + slope * (t - it->first);
  }

  // Left limit at t.
  double value_before(double t) const {
    auto it = std::lower_bound(
        breakpoints.begin(), breakpoints.end(), t,
        [](const std::pair<double, double>& bp, double rhs) { return bp.first < rhs; });
    if (it == breakpoints.begin()) return origin + slope * t;
    --it;
    return it->second + slope * (t - it->first);
  }
};

// R(t) = (y + t) ∧ inf{x + (t - s) : (s, x) in field, 0 <= s <= t}, evaluated
// exactly: a point (s, x) jumps iff x < R(s-). Requires the field to cover
// [0, T] in time and [0, y + T] in space; taller points never bind since
// R(s) <= y + s.
inline StepPath rayleigh_from_field(const PoissonField& field, double y, double horizon) {
  if (y < 0.0) throw std::invalid_argument("rayleigh start must be >= 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("rayleigh horizon must be positive");
  if (field.horizon_t < horizon || field.horizon_x < y + horizon)
    throw std::invalid_argument("poisson field horizons do not cover the rayleigh path");

  StepPath path;
  path.origin = y;
  path.slope = 1.0;
  double last_time = 0.0;
  double last_value = y;
  for (const auto& [s, x] : field.points) {
    if (s > horizon) break;
    const double before = last_value + (s - last_time);
    if (x < before) {
      path.breakpoints.emplace_back(s, x);
      last_time = s;
      last_value = x;
    }
  }
  return path;
}

// Hazard-driven construction: from value v the next-jump waiting time u solves
// v u + u^2/2 = E with E standard exponential, so u = -v + sqrt(v^2 + 2E);
// at the jump the value becomes (v + u) U with U uniform on [0, 1).
template <class Rng>
StepPath rayleigh_event_driven(double y, double horizon, Rng& rng) {
  if (y < 0.0) throw std::invalid_argument("rayleigh start must be >= 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("rayleigh horizon must be positive");
  StepPath path;
  path.origin = y;
  path.slope = 1.0;
  double t = 0.0;
  double value = y;
  for (;;) {
    const double e = exponential(rng);
    const double wait = -value + std::sqrt(value * value + 2.0 * e);
    if (t + wait > horizon) break;
    t += wait;
    value = (value + wait) * uniform01(rng);
    path.breakpoints.emplace_back(t, value);
  }
  return path;
}

// Stationary law of the Rayleigh process: P(W > x) = exp(-x^2/2).
inline double rayleigh_survival(double x) {
  if (x < 0.0) throw std::invalid_argument("rayleigh survival needs x >= 0");
  return std::exp(-0.5 * x * x);
}

// Loop-erasure bookkeeping of an i.i.d. uniform sequence on {1..m} (the lazy
// complete-graph walk): ~I_{i,j} = 1{xi_i = xi_j}, with the S_j recursion.
// retained[j] keeps the sentinel index 0, so L_j = |~S_j| <= j + 1.
struct SurrogateChain {
  std::uint64_t m = 0;
  std::vector<std::uint64_t> xi;                    // xi_1..xi_J
  std::vector<std::vector<std::int32_t>> retained;  // ~S_0..~S_J
  std::vector<std::int32_t> lengths;                // L_0..L_J
};

template <class Rng>
SurrogateChain surrogate_chain(std::uint64_t m, std::int64_t steps, Rng& rng) {
  if (m < 1) throw std::invalid_argument("surrogate chain needs m >= 1");
  if (steps < 0) throw std::invalid_argument("surrogate chain needs steps >= 0");
  SurrogateChain chain;
  chain.m = m;
  chain.xi.reserve(static_cast<std::size_t>(steps));
  chain.retained.reserve(static_cast<std::size_t>(steps) + 1);
  chain.lengths.reserve(static_cast<std::size_t>(steps) + 1);
  chain.retained.push_back({0});
  chain.lengths.push_back(1);

  std::vector<std::int32_t> current = {0};
  for (std::int64_t j = 1; j <= steps; ++j) {
    const std::uint64_t value = uniform_below(rng, m) + 1;
    chain.xi.push_back(value);
    // First retained index whose xi matches erases itself and everything above.
    std::size_t keep = current.size();
    for (std::size_t idx = 1; idx < current.size(); ++idx) {
      if (chain.xi[static_cast<std::size_t>(current[idx]) - 1] == value) {
        keep = idx;
        break;
      }
    }
    current.resize(keep);
    current.push_back(static_cast<std::int32_t>(j));
    chain.retained.push_back(current);
    chain.lengths.push_back(static_cast<std::int32_t>(current.size()));
  }
  return chain;
}

// Exact one-step conditional mean of L_{j+1} given L_j = len for the chain
// above (the origin sentinel cannot be hit).
inline double surrogate_drift_exact(double len, double m) {
  return 1.0 + len - len * (len - 1.0) / (2.0 * m);
}

inline double surrogate_drift_variance_exact(double len, double m) {
  const double collide_each = 1.0 / m;
  double mean = (1.0 - (len - 1.0) / m) * (len + 1.0);
  double second = (1.0 - (len - 1.0) / m) * (len + 1.0) * (len + 1.0);
  for (double h = 1.0; h <= len - 1.0; ++h) {
    mean += collide_each * (h + 1.0);
    second += collide_each * (h + 1.0) * (h + 1.0);
  }
  return std::max(0.0, second - mean * mean);
}

// Poisson-rectangle chain S'_j of the same field that drives R. Column j is
// s in [d(j-1), dj); row i is x in [d(i-1), di). Rank semantics: with
// S'_{j-1} = {l_1 < ... < l_q} (l_1 = 0 has rank 1), l_k survives iff rows
// 1..k of column j hold no point; then j is adjoined.
struct PrimeChain {
  double d = 0.0;
  std::vector<std::vector<std::int32_t>> retained;  // S'_0..S'_J
  std::vector<std::int32_t> lengths;                // |S'_0|..|S'_J|
};

inline PrimeChain prime_chain_from_field(const PoissonField& field, double d,
                                         std::int64_t steps) {
  if (!(d > 0.0)) throw std::invalid_argument("prime chain needs d > 0");
  if (steps < 0) throw std::invalid_argument("prime chain needs steps >= 0");
  if (field.horizon_t < static_cast<double>(steps) * d ||
      field.horizon_x < static_cast<double>(steps + 1) * d)
    throw std::invalid_argument("poisson field horizons do not cover the prime chain");

  // Lowest occupied row per column; only it can trigger a removal.
  std::vector<std::int64_t> min_row(static_cast<std::size_t>(steps) + 1,
                                    std::numeric_limits<std::int64_t>::max());
  for (const auto& [s, x] : field.points) {
    const std::int64_t column = static_cast<std::int64_t>(std::floor(s / d)) + 1;
    if (column < 1 || column > steps) continue;
    const std::int64_t row = static_cast<std::int64_t>(std::floor(x / d)) + 1;
    auto& slot = min_row[static_cast<std::size_t>(column)];
    slot = std::min(slot, row);
  }

  PrimeChain chain;
  chain.d = d;
  chain.retained.reserve(static_cast<std::size_t>(steps) + 1);
  chain.lengths.reserve(static_cast<std::size_t>(steps) + 1);
  chain.retained.push_back({0});
  chain.lengths.push_back(1);
  std::vector<std::int32_t> current = {0};
  for (std::int64_t j = 1; j <= steps; ++j) {
    const std::int64_t lowest = min_row[static_cast<std::size_t>(j)];
    // Ranks 1..lowest-1 survive.
    const std::size_t keep =
        std::min<std::int64_t>(static_cast<std::int64_t>(current.size()), lowest - 1);
    current.resize(static_cast<std::size_t>(keep));
    current.push_back(static_cast<std::int32_t>(j));
    chain.retained.push_back(current);
    chain.lengths.push_back(static_cast<std::int32_t>(current.size()));
  }
  return chain;
}

// Coupling of V (at most one success, P(V = e_i) = p each,
// all zero with probability 1 - jp) against W (i.i.d. Bernoulli(q)^j).
// Diagonal mass first, deterministic lexicographic fill for the remainder.
struct CouplingTable {
  std::int64_t j = 0;
  double p = 0.0;
  double q = 0.0;
  // joint[v][w]: v = 0 is all-zero, v = i is e_i; w enumerates {0,1}^j with
  // w_1 as the most significant bit.
  std::vector<std::vector<double>> joint;
  double match_probability = 0.0;

  // Closed-form lower bound on the matched mass: 1 - j|p-q| - j(j-1)q^2.
  double match_lower_bound() const {
    const double jd = static_cast<double>(j);
    return 1.0 - jd * std::abs(p - q) - jd * (jd - 1.0) * q * q;
  }

  std::uint32_t basis_mask(std::int64_t i) const {  // pattern e_i
    return 1u << (j - i);
  }

  double v_marginal(std::int64_t v) const {
    double total = 0.0;
    for (double cell : joint[static_cast<std::size_t>(v)]) total += cell;
    return total;
  }

  double w_marginal(std::uint32_t w) const {
    double total = 0.0;
    for (const auto& row : joint) total += row[w];
    return total;
  }

  // One draw from the joint law: (v outcome, w bitmask).
  template <class Rng>
  std::pair<std::int64_t, std::uint32_t> sample(Rng& rng) const {
    double u = uniform01(rng);
    for (std::size_t v = 0; v < joint.size(); ++v) {
      for (std::size_t w = 0; w < joint[v].size(); ++w) {
        u -= joint[v][w];
        if (u < 0.0) return {static_cast<std::int64_t>(v), static_cast<std::uint32_t>(w)};
      }
    }
    return {static_cast<std::int64_t>(joint.size()) - 1,
            static_cast<std::uint32_t>(joint.back().size()) - 1};
  }
};

inline CouplingTable maximal_coupling(double p, double q, std::int64_t j) {
  if (j < 1 || j > 16) throw std::invalid_argument("coupling needs 1 <= j <= 16");
  if (!(p > 0.0) || !(p < 1.0 / static_cast<double>(j)))
    throw std::invalid_argument("coupling needs 0 < p < 1/j");
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("coupling needs 0 < q < 1");

  CouplingTable table;
  table.j = j;
  table.p = p;
  table.q = q;
  const std::size_t w_count = 1ULL << j;
  table.joint.assign(static_cast<std::size_t>(j) + 1, std::vector<double>(w_count, 0.0));

  std::vector<double> row_mass(static_cast<std::size_t>(j) + 1, p);
  row_mass[0] = 1.0 - static_cast<double>(j) * p;
  std::vector<double> col_mass(w_count);
  for (std::size_t w = 0; w < w_count; ++w) {
    const int ones = std::popcount(static_cast<unsigned>(w));
    col_mass[w] = std::pow(q, ones) * std::pow(1.0 - q, static_cast<double>(j - ones));
  }

  auto place = [&](std::size_t v, std::size_t w, double amount) {
    table.joint[v][w] += amount;
    row_mass[v] -= amount;
    col_mass[w] -= amount;
  };
  // Matched outcomes first: (zero, zero) and each (e_i, e_i).
  place(0, 0, std::min(row_mass[0], col_mass[0]));
  for (std::int64_t i = 1; i <= j; ++i) {
    const std::size_t w = table.basis_mask(i);
    place(static_cast<std::size_t>(i), w,
          std::min(row_mass[static_cast<std::size_t>(i)], col_mass[w]));
  }
  table.match_probability = table.joint[0][0];
  for (std::int64_t i = 1; i <= j; ++i)
    table.match_probability += table.joint[static_cast<std::size_t>(i)][table.basis_mask(i)];

  // Lexicographic fill of the remainder subject to the marginals.
  for (std::size_t v = 0; v <= static_cast<std::size_t>(j); ++v) {
    for (std::size_t w = 0; w < w_count && row_mass[v] > 0.0; ++w) {
      const double amount = std::min(row_mass[v], std::max(0.0, col_mass[w]));
      if (amount > 0.0) place(v, w, amount);
    }
  }
  return table;
}

}  // namespace lerw
