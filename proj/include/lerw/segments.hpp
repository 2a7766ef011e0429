#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lerw/loop_erasure.hpp"

namespace lerw {

enum class CaseKind { Case1, Case2 };

struct ScheduleInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// floor(value^{1/8}) with exact integer fixup.
inline std::int64_t floor_root8(unsigned __int128 value) {
  auto pow8 = [](unsigned __int128 v) {
    unsigned __int128 r = 1;
    for (int i = 0; i < 8; ++i) r *= v;
    return r;
  };
  std::int64_t c = static_cast<std::int64_t>(
      std::pow(static_cast<long double>(value), 1.0L / 8.0L));
  while (c > 0 && pow8(static_cast<unsigned __int128>(c)) > value) --c;
  while (c < 60000 && pow8(static_cast<unsigned __int128>(c) + 1) <= value) ++c;
  return c;
}

// floor(tau^{p/8} * count^{q/8}) via the exact eighth root when the integer
// power product fits in 128 bits, long double otherwise.
inline std::int64_t floor_eighth_power(std::int64_t tau, std::uint64_t count, int p, int q) {
  unsigned __int128 value = 1;
  bool exact = tau > 0;
  auto mul_checked = [&](std::uint64_t factor, int times) {
    for (int i = 0; i < times && exact; ++i) {
      if (factor != 0 && value > (~static_cast<unsigned __int128>(0)) / factor) {
        exact = false;
        return;
      }
      value *= factor;
    }
  };
  mul_checked(static_cast<std::uint64_t>(tau), p);
  mul_checked(count, q);
  if (exact) return floor_root8(value);
  const long double x = static_cast<long double>(p) / 8.0L * std::log(static_cast<long double>(tau)) +
                        static_cast<long double>(q) / 8.0L * std::log(static_cast<long double>(count));
  return static_cast<std::int64_t>(std::floor(std::exp(x)));
}

}  // namespace detail

// Segment bookkeeping for one of the two cases.
//   Case 1: r = floor(tau^{1/4} |G|^{3/8}), s = floor(tau^{3/4} |G|^{1/8}),
//           A_i = {(i-1)r + 2s + 1, ..., ir - s}.
//   Case 2: r = floor(n^2 (log n)^{9/22}), w = floor(n^2 (log n)^eta),
//           A_i = {(i-1)r, ..., ir - 1}.
// All logs are natural.
struct SegmentSchedule {
  CaseKind kind = CaseKind::Case1;
  std::int64_t r = 0;
  std::int64_t s = 0;  // Case 1 local window
  std::int64_t w = 0;  // Case 2 cut window
  double eta = 0.05;
  std::vector<TimeWindow> windows;  // A_1..A_J
  bool nonstandard_torus = false;   // Case 2 on a torus with d != 4

  std::int64_t segment_count() const { return static_cast<std::int64_t>(windows.size()); }
  std::int64_t capacity_run_length() const {
    return kind == CaseKind::Case1 ? r : r - 2 * w;
  }
  // Trajectory steps needed so every window plus lookahead is covered.
  std::int64_t required_steps() const {
    const std::int64_t j = segment_count();
    return kind == CaseKind::Case1 ? j * r : j * r - 1;
  }
};

inline SegmentSchedule build_schedule(CaseKind kind, const GraphModel& g, std::int64_t tau,
                                      double eta, std::int64_t horizon_steps) {
  if (horizon_steps < 1) throw std::invalid_argument("schedule horizon must be >= 1");
  SegmentSchedule schedule;
  schedule.kind = kind;
  schedule.eta = eta;

  if (kind == CaseKind::Case1) {
    if (tau < 1) throw std::invalid_argument("Case 1 schedule needs tau >= 1");
    schedule.r = detail::floor_eighth_power(tau, g.vertex_count, 2, 3);
    schedule.s = detail::floor_eighth_power(tau, g.vertex_count, 6, 1);
    if (schedule.r < 1)
      throw ScheduleInfeasible("schedule infeasible: r < 1");
    if (schedule.r - 3 * schedule.s < 1)
      throw ScheduleInfeasible("schedule infeasible: r - 3s < 1 (graph too small for tau)");
  } else {
    if (g.kind != GraphKind::Torus)
      throw std::invalid_argument("Case 2 requires a torus");
    if (eta <= 0) throw std::invalid_argument("Case 2 needs eta > 0");
    schedule.nonstandard_torus = (g.dim != 4);
    const double n2 = static_cast<double>(g.side) * static_cast<double>(g.side);
    const double log_n = std::log(static_cast<double>(g.side));
    if (log_n <= 0) throw ScheduleInfeasible("schedule infeasible: log n <= 0");
    schedule.r = static_cast<std::int64_t>(std::floor(n2 * std::pow(log_n, 9.0 / 22.0)));
    schedule.w = static_cast<std::int64_t>(std::floor(n2 * std::pow(log_n, eta)));
    if (schedule.r < 1) throw ScheduleInfeasible("schedule infeasible: r < 1");
  }

  const std::int64_t count = (horizon_steps + schedule.r - 1) / schedule.r;
  for (std::int64_t i = 1; i <= count; ++i) {
    TimeWindow window;
    if (kind == CaseKind::Case1) {
      window.begin = (i - 1) * schedule.r + 2 * schedule.s + 1;
      window.end = i * schedule.r - schedule.s;
    } else {
      window.begin = (i - 1) * schedule.r;
      window.end = i * schedule.r - 1;
    }
    schedule.windows.push_back(window);
  }
  return schedule;
}

// I_{i,j} for 1 <= i < j <= J, stored as the sorted list of nonzero i per j.
struct IndicatorMatrix {
  std::int64_t segments = 0;
  std::vector<std::vector<std::int32_t>> hits;  // hits[j], j in 1..segments

  bool get(std::int64_t i, std::int64_t j) const {
    if (i < 1 || j <= i || j > segments) return false;
    const auto& row = hits[static_cast<std::size_t>(j)];
    return std::binary_search(row.begin(), row.end(), static_cast<std::int32_t>(i));
  }
};

inline IndicatorMatrix segment_indicators(const Trajectory& traj,
                                          const SegmentSchedule& schedule) {
  const std::int64_t count = schedule.segment_count();
  const std::int64_t last = static_cast<std::int64_t>(traj.steps.size()) - 1;
  if (schedule.required_steps() > last)
    throw std::invalid_argument("trajectory does not cover the schedule");

  std::vector<std::vector<VertexId>> segment_vertices(static_cast<std::size_t>(count) + 1);
  std::vector<std::vector<VertexId>> erased_vertices(static_cast<std::size_t>(count) + 1);
  auto sort_unique = [](std::vector<VertexId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  for (std::int64_t j = 1; j <= count; ++j) {
    const TimeWindow window = schedule.windows[static_cast<std::size_t>(j - 1)];
    auto& raw = segment_vertices[static_cast<std::size_t>(j)];
    raw.assign(traj.steps.begin() + window.begin, traj.steps.begin() + window.end + 1);
    sort_unique(raw);
    auto& erased = erased_vertices[static_cast<std::size_t>(j)];
    if (schedule.kind == CaseKind::Case1) {
      erased = local_loop_erasure(traj, window, schedule.s).path;
    } else {
      erased = loop_erase(std::span<const VertexId>(traj.steps.data() + window.begin,
                                                    static_cast<std::size_t>(window.size())));
    }
    sort_unique(erased);
  }

  auto intersects = [](const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
      if (a[ia] < b[ib])
        ++ia;
      else if (b[ib] < a[ia])
        ++ib;
      else
        return true;
    }
    return false;
  };

  IndicatorMatrix matrix;
  matrix.segments = count;
  matrix.hits.assign(static_cast<std::size_t>(count) + 1, {});
  for (std::int64_t j = 2; j <= count; ++j) {
    for (std::int64_t i = 1; i < j; ++i) {
      if (schedule.kind == CaseKind::Case2 && i + 1 == j) continue;  // I_{i,i+1} = 0
      if (intersects(erased_vertices[static_cast<std::size_t>(i)],
                     segment_vertices[static_cast<std::size_t>(j)]))
        matrix.hits[static_cast<std::size_t>(j)].push_back(static_cast<std::int32_t>(i));
    }
  }
  return matrix;
}

// S_0 = {0}; S_j = {k in S_{j-1} : I_{i,j} = 0 for all i in {1..k} ∩ S_{j-1}} ∪ {j}.
// Equivalently: keep the members of S_{j-1} strictly below the smallest
// retained index that segment j intersects, then adjoin j.
inline std::vector<std::vector<std::int32_t>> retained_sets(const IndicatorMatrix& indicators,
                                                            std::int64_t count) {
  if (count > indicators.segments)
    throw std::invalid_argument("retained_sets: indicators cover fewer segments");
  std::vector<std::vector<std::int32_t>> sets(static_cast<std::size_t>(count) + 1);
  sets[0] = {0};
  std::vector<std::int32_t> current = {0};
  for (std::int64_t j = 1; j <= count; ++j) {
    const auto& row = indicators.hits[static_cast<std::size_t>(j)];
    std::int32_t erased_from = std::numeric_limits<std::int32_t>::max();
    std::size_t ia = 0, ib = 0;
    while (ia < row.size() && ib < current.size()) {
      if (row[ia] < current[ib])
        ++ia;
      else if (current[ib] < row[ia])
        ++ib;
      else {
        erased_from = row[ia];
        break;
      }
    }
    std::vector<std::int32_t> next;
    for (std::int32_t k : current) {
      if (k >= erased_from) break;
      next.push_back(k);
    }
    next.push_back(static_cast<std::int32_t>(j));
    sets[static_cast<std::size_t>(j)] = next;
    current = std::move(next);
  }
  return sets;
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Monte Carlo Cap(V): hit frequency of a stationary-start lazy walk of
// `run_length` steps (positions W_0..W_run_length). The walk always consumes
// the same randomness, so estimates at a fixed seed are coupled monotonically
// in V.
template <class Rng>
Estimate estimate_capacity(const GraphModel& g, const std::vector<VertexId>& targets,
                           std::int64_t run_length, std::int64_t replicates, Rng& rng) {
  if (replicates < 1) throw std::invalid_argument("capacity needs replicates >= 1");
  if (run_length < 0) throw std::invalid_argument("capacity needs run_length >= 0");
  std::vector<VertexId> sorted(targets);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  auto contains = [&](VertexId v) {
    return std::binary_search(sorted.begin(), sorted.end(), v);
  };

  std::int64_t hits = 0;
  for (std::int64_t rep = 0; rep < replicates; ++rep) {
    VertexId v = uniform_vertex(g, rng);
    bool hit = contains(v);
    for (std::int64_t t = 0; t < run_length; ++t) {
      v = lazy_step(g, v, rng);
      hit = hit || contains(v);
    }
    hits += hit ? 1 : 0;
  }
  Estimate est;
  est.value = static_cast<double>(hits) / static_cast<double>(replicates);
  est.se = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(replicates));
  return est;
}

struct ScalingConstants {
  double gamma = 0.0;
  double alpha = 0.0;
  double a = 0.0;  // alpha^{-1/2}
  double b = 0.0;  // alpha^{1/2} / gamma
  double d = 0.0;  // per-case rescaled segment length
  std::uint64_t m = 0;
  double stderr_gamma = 0.0;
  double stderr_alpha = 0.0;
};

inline ScalingConstants derive_scaling_constants(CaseKind kind, const GraphModel& g,
                                                 const SegmentSchedule& schedule,
                                                 double gamma, double alpha,
                                                 double se_gamma = 0.0, double se_alpha = 0.0) {
  if (!(gamma > 0.0) || !(alpha > 0.0))
    throw std::runtime_error("scaling constants need positive gamma and alpha estimates");
  ScalingConstants c;
  c.gamma = gamma;
  c.alpha = alpha;
  c.stderr_gamma = se_gamma;
  c.stderr_alpha = se_alpha;
  c.a = 1.0 / std::sqrt(alpha);
  c.b = std::sqrt(alpha) / gamma;
  if (kind == CaseKind::Case1) {
    c.d = static_cast<double>(schedule.r) * std::sqrt(alpha) /
          std::sqrt(static_cast<double>(g.vertex_count));
    c.m = static_cast<std::uint64_t>(std::ceil(1.0 / (c.d * c.d)));
  } else {
    const double log_n = std::log(static_cast<double>(g.side));
    c.d = std::sqrt(alpha) * std::pow(log_n, -1.0 / 11.0);
    c.m = static_cast<std::uint64_t>(std::floor(1.0 / (c.d * c.d)));
  }
  return c;
}

// gamma and alpha by replicate means: per replicate, one fresh walk segment
// gives |LE_s(A_1)| (Case 1) or |LE((X_t)_{t in A_1})| (Case 2), and one
// independent stationary walk gives an unbiased Cap(LE segment) indicator.
// records, when given, receives one (le_length, cap_hit) pair per replicate.
template <class Rng>
ScalingConstants estimate_constants_recorded(const GraphModel& g, CaseKind kind,
                                             const SegmentSchedule& schedule,
                                             std::int64_t replicates, Rng& rng,
                                             std::vector<std::pair<std::int64_t, int>>& records) {
  if (replicates < 1) throw std::invalid_argument("estimate_constants needs replicates >= 1");
  if (schedule.windows.empty()) throw ScheduleInfeasible("schedule has no segments");
  const std::int64_t cap_run = schedule.capacity_run_length();
  if (cap_run < 1)
    throw ScheduleInfeasible("schedule infeasible: capacity run length r - 2w < 1");

  const std::uint64_t base = rng();
  const TimeWindow window = schedule.windows[0];
  const std::int64_t walk_steps =
      kind == CaseKind::Case1 ? schedule.r : schedule.r - 1;

  records.clear();
  records.reserve(static_cast<std::size_t>(replicates));
  double len_sum = 0.0, len_sq_sum = 0.0;
  std::int64_t cap_hits = 0;
  for (std::int64_t rep = 0; rep < replicates; ++rep) {
    const Trajectory traj =
        walk_trajectory(g, 0, walk_steps, stream_seed(base, static_cast<std::uint64_t>(2 * rep)));
    std::vector<VertexId> erased;
    if (kind == CaseKind::Case1) {
      erased = local_loop_erasure(traj, window, schedule.s).path;
    } else {
      erased = loop_erase(std::span<const VertexId>(
          traj.steps.data() + window.begin, static_cast<std::size_t>(window.size())));
    }
    const double len = static_cast<double>(erased.size());
    len_sum += len;
    len_sq_sum += len * len;

    SplitMix64 cap_rng(stream_seed(base, static_cast<std::uint64_t>(2 * rep + 1)));
    const Estimate hit = estimate_capacity(g, erased, cap_run, 1, cap_rng);
    cap_hits += hit.value > 0.5 ? 1 : 0;
    records.emplace_back(static_cast<std::int64_t>(erased.size()), hit.value > 0.5 ? 1 : 0);
  }

  const double reps = static_cast<double>(replicates);
  const double len_mean = len_sum / reps;
  const double len_var = std::max(0.0, len_sq_sum / reps - len_mean * len_mean);
  const double hit_mean = static_cast<double>(cap_hits) / reps;
  const double hit_se = std::sqrt(hit_mean * (1.0 - hit_mean) / reps);

  double len_norm, cap_norm;
  if (kind == CaseKind::Case1) {
    len_norm = static_cast<double>(schedule.r);
    cap_norm = static_cast<double>(g.vertex_count) /
               (static_cast<double>(schedule.r) * static_cast<double>(schedule.r));
  } else {
    const double n2 = static_cast<double>(g.side) * static_cast<double>(g.side);
    const double log_n = std::log(static_cast<double>(g.side));
    len_norm = n2 * std::pow(log_n, 5.0 / 66.0);
    cap_norm = std::pow(log_n, 2.0 / 11.0);
  }
  const double gamma = len_mean / len_norm;
  const double se_gamma = std::sqrt(len_var / reps) / len_norm;
  const double alpha = cap_norm * hit_mean;
  const double se_alpha = cap_norm * hit_se;
  return derive_scaling_constants(kind, g, schedule, gamma, alpha, se_gamma, se_alpha);
}

template <class Rng>
ScalingConstants estimate_constants(const GraphModel& g, CaseKind kind,
                                    const SegmentSchedule& schedule, std::int64_t replicates,
                                    Rng& rng) {
  std::vector<std::pair<std::int64_t, int>> records;
  return estimate_constants_recorded(g, kind, schedule, replicates, rng, records);
}

}  // namespace lerw
