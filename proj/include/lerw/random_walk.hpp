#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lerw/graph.hpp"
#include "lerw/rng.hpp"

namespace lerw {

// Dense transition profiles are refused above this size.
inline constexpr std::uint64_t kProfileSizeGuard = 10'000'000;
inline constexpr std::int64_t kMaxTrajectorySteps = 1'000'000'000;

// Lazy step: stay with probability 1/2, else move to a uniform neighbor
// (probability 1/(2 degree) per neighbor slot).
template <class Rng>
VertexId lazy_step(const GraphModel& g, VertexId v, Rng& rng) {
  if ((rng() & 1ULL) == 0) return v;
  return neighbor(g, v, uniform_below(rng, g.degree));
}

struct Trajectory {
  GraphModel graph;
  VertexId start = 0;
  std::vector<VertexId> steps;  // X_0..X_T, X_0 = start
  std::uint64_t seed = 0;
};

inline Trajectory walk_trajectory(const GraphModel& g, VertexId start,
                                  std::int64_t total_steps, std::uint64_t seed) {
  check_vertex(g, start);
  if (total_steps < 0 || total_steps > kMaxTrajectorySteps)
    throw std::invalid_argument("trajectory step count out of range");
  Trajectory traj;
  traj.graph = g;
  traj.start = start;
  traj.seed = seed;
  traj.steps.reserve(static_cast<std::size_t>(total_steps) + 1);
  traj.steps.push_back(start);
  SplitMix64 rng(seed);
  VertexId v = start;
  for (std::int64_t t = 0; t < total_steps; ++t) {
    v = lazy_step(g, v, rng);
    traj.steps.push_back(v);
  }
  return traj;
}

namespace detail {

inline void check_profile_size(const GraphModel& g) {
  if (g.vertex_count > kProfileSizeGuard)
    throw std::invalid_argument("transition profile size guard exceeded");
}

// Exact lazy-walk profile on the torus via characters of (Z_n)^d: the
// eigenvalue of frequency vector k is 1/2 + (1/2d) sum_j cos(2 pi k_j / n),
// and the inverse transform factorizes across dimensions.
inline std::vector<double> torus_spectral_profile(const GraphModel& g, std::int64_t t) {
  const std::size_t n = static_cast<std::size_t>(g.side);
  const std::size_t count = static_cast<std::size_t>(g.vertex_count);
  std::vector<double> cos_table(n);
  for (std::size_t r = 0; r < n; ++r)
    cos_table[r] = std::cos(2.0 * M_PI * static_cast<double>(r) / static_cast<double>(n));

  // Eigenvalue powers, indexed like vertices (digit j of k at stride side^j).
  std::vector<double> a(count);
  std::vector<std::size_t> digit(static_cast<std::size_t>(g.dim), 0);
  double cos_sum = static_cast<double>(g.dim);  // all digits zero
  const double inv_two_d = 1.0 / static_cast<double>(g.degree);  // degree = 2d
  for (std::size_t k = 0;; ++k) {
    const double lambda = 0.5 + inv_two_d * cos_sum;
    a[k] = std::pow(lambda, static_cast<double>(t));
    if (k + 1 == count) break;
    for (std::size_t j = 0;; ++j) {  // odometer increment
      cos_sum -= cos_table[digit[j]];
      if (++digit[j] == n) digit[j] = 0;
      cos_sum += cos_table[digit[j]];
      if (digit[j] != 0) break;
    }
  }

  // Dimension-wise cosine-sum transform (data is even in every coordinate).
  std::vector<double> line(n), out(n);
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::size_t stride = static_cast<std::size_t>(g.stride[axis]);
    const std::size_t block = stride * n;
    for (std::size_t high = 0; high < count; high += block) {
      for (std::size_t low = 0; low < stride; ++low) {
        const std::size_t base = high + low;
        for (std::size_t m = 0; m < n; ++m) line[m] = a[base + m * stride];
        for (std::size_t x = 0; x < n; ++x) {
          double acc = 0.0;
          for (std::size_t m = 0; m < n; ++m) acc += line[m] * cos_table[(m * x) % n];
          out[x] = acc;
        }
        for (std::size_t x = 0; x < n; ++x) a[base + x * stride] = out[x];
      }
    }
  }
  const double inv_count = 1.0 / static_cast<double>(g.vertex_count);
  for (double& v : a) v *= inv_count;
  return a;
}

// Complete graph: two-level closed form, p_t(o) = 1/m + (1 - 1/m) lambda^t
// with lambda = 1/2 - 1/(2(m-1)).
inline std::vector<double> complete_profile(const GraphModel& g, std::int64_t t) {
  const double m = static_cast<double>(g.vertex_count);
  const double lambda = 0.5 - 0.5 / (m - 1.0);
  const double at_origin = 1.0 / m + (1.0 - 1.0 / m) * std::pow(lambda, static_cast<double>(t));
  std::vector<double> p(static_cast<std::size_t>(g.vertex_count),
                        (1.0 - at_origin) / (m - 1.0));
  p[0] = at_origin;
  return p;
}

inline std::vector<double> kernel_apply(const GraphModel& g, const std::vector<double>& p) {
  std::vector<double> next(p.size(), 0.0);
  const double move = 0.5 / static_cast<double>(g.degree);
  for (std::uint64_t v = 0; v < g.vertex_count; ++v) {
    double acc = 0.5 * p[v];
    for (std::uint64_t k = 0; k < g.degree; ++k) acc += move * p[neighbor(g, v, k)];
    next[v] = acc;
  }
  return next;
}

}  // namespace detail

// Exact p_{t,n}(.) from origin o = 0.
inline std::vector<double> transition_profile(const GraphModel& g, std::int64_t t) {
  detail::check_profile_size(g);
  if (t < 0) throw std::invalid_argument("transition profile needs t >= 0");
  switch (g.kind) {
    case GraphKind::Torus:
      return detail::torus_spectral_profile(g, t);
    case GraphKind::Complete:
      return detail::complete_profile(g, t);
    case GraphKind::Hypercube: {
      std::vector<double> p(static_cast<std::size_t>(g.vertex_count), 0.0);
      p[0] = 1.0;
      for (std::int64_t u = 0; u < t; ++u) p = detail::kernel_apply(g, p);
      return p;
    }
  }
  throw std::logic_error("unreachable");
}

// Yields p_t for t = 0, 1, 2, ... without recomputing models that iterate.
class ProfileIterator {
 public:
  explicit ProfileIterator(const GraphModel& g) : g_(g), p_(transition_profile(g, 0)) {}

  const std::vector<double>& current() const { return p_; }
  std::int64_t t() const { return t_; }

  void advance() {
    ++t_;
    if (g_.kind == GraphKind::Hypercube)
      p_ = detail::kernel_apply(g_, p_);
    else
      p_ = transition_profile(g_, t_);
  }

 private:
  GraphModel g_;
  std::int64_t t_ = 0;
  std::vector<double> p_;
};

// sup_x |p_t(x)/pi(x) - 1|
inline double separation_deviation(const GraphModel& g, const std::vector<double>& p) {
  const double count = static_cast<double>(g.vertex_count);
  double worst = 0.0;
  for (double v : p) worst = std::max(worst, std::abs(v * count - 1.0));
  return worst;
}

struct MixingReport {
  std::optional<std::int64_t> tau;  // empty: not reached by t_max
  std::vector<std::pair<std::int64_t, double>> separation_curve;
};

// Linear scan in t; no monotonicity of the deviation is assumed.
inline MixingReport mixing_time(const GraphModel& g, std::int64_t t_max) {
  if (t_max < 0) throw std::invalid_argument("mixing_time needs t_max >= 0");
  MixingReport report;
  ProfileIterator it(g);
  for (;;) {
    const double dev = separation_deviation(g, it.current());
    report.separation_curve.emplace_back(it.t(), dev);
    if (dev <= 0.5) {
      report.tau = it.t();
      return report;
    }
    if (it.t() >= t_max) return report;
    it.advance();
  }
}

// Doubling cap search; throws if tau is not reached by hard_cap.
inline std::int64_t find_mixing_time(const GraphModel& g, std::int64_t hard_cap) {
  std::int64_t cap = 16;
  for (;;) {
    cap = std::min(cap, hard_cap);
    const MixingReport report = mixing_time(g, cap);
    if (report.tau) return *report.tau;
    if (cap >= hard_cap)
      throw std::runtime_error("mixing time not reached by cap " + std::to_string(hard_cap));
    cap *= 2;
  }
}

// Case-1 Green-sum condition value: sup_x sum_{t=0}^{floor(sqrt|G|)} (t+1) p_t(x).
inline double green_sum(const GraphModel& g) {
  detail::check_profile_size(g);
  std::uint64_t t_max = static_cast<std::uint64_t>(
      std::floor(std::sqrt(static_cast<double>(g.vertex_count))));
  while ((t_max + 1) * (t_max + 1) <= g.vertex_count) ++t_max;
  while (t_max * t_max > g.vertex_count) --t_max;

  std::vector<double> acc(static_cast<std::size_t>(g.vertex_count), 0.0);
  ProfileIterator it(g);
  for (std::uint64_t t = 0;; ++t) {
    const std::vector<double>& p = it.current();
    const double weight = static_cast<double>(t + 1);
    for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += weight * p[x];
    if (t == t_max) break;
    it.advance();
  }
  double sup = 0.0;
  for (double v : acc) sup = std::max(sup, v);
  return sup;
}

}  // namespace lerw
