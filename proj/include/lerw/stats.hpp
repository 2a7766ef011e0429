#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lerw/graph.hpp"
#include "lerw/rayleigh.hpp"
#include "lerw/segments.hpp"

namespace lerw {

// One-sample Kolmogorov-Smirnov statistic against a CDF callable. Sorts a
// copy once and streams; tie blocks are handled by evaluating both one-sided
// gaps at the block boundaries.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t block_end = i;
    while (block_end < samples.size() && samples[block_end] == samples[i]) ++block_end;
    const double value = cdf(samples[i]);
    worst = std::max(worst, value - static_cast<double>(i) / n);
    worst = std::max(worst, static_cast<double>(block_end) / n - value);
    i = block_end;
  }
  return worst;
}

// Two-sample KS distance, sup over the pooled sample points.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample needs samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double worst = 0.0;
  while (ia < a.size() || ib < b.size()) {
    const double value = (ib == b.size() || (ia < a.size() && a[ia] <= b[ib])) ? a[ia] : b[ib];
    while (ia < a.size() && a[ia] == value) ++ia;
    while (ib < b.size() && b[ib] == value) ++ib;
    worst = std::max(worst,
                     std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  return worst;
}

// Length-process rescaling helpers. g(t) is the step index of rescaled time t,
// L_n the time scale, M_n the length scale (Z = Y / M_n).
inline double time_scale(CaseKind kind, const GraphModel& g, double a) {
  if (kind == CaseKind::Case1)
    return a * std::sqrt(static_cast<double>(g.vertex_count));
  const double n2 = static_cast<double>(g.side) * static_cast<double>(g.side);
  return a * n2 * std::sqrt(std::log(static_cast<double>(g.side)));
}

inline double length_scale(CaseKind kind, const GraphModel& g, double b) {
  if (kind == CaseKind::Case1)
    return std::sqrt(static_cast<double>(g.vertex_count)) / b;
  const double n2 = static_cast<double>(g.side) * static_cast<double>(g.side);
  return n2 * std::pow(std::log(static_cast<double>(g.side)), 1.0 / 6.0) / b;
}

inline std::int64_t time_index(CaseKind kind, const GraphModel& g, double a, double t) {
  return static_cast<std::int64_t>(std::floor(time_scale(kind, g, a) * t));
}

struct RescaledLengthPath {
  CaseKind kind = CaseKind::Case1;
  double a = 0.0;
  double b = 0.0;
  double scale = 0.0;                              // M_n
  std::vector<std::pair<double, double>> samples;  // (t, Z_n(t))
};

// Z_n(t_i) from Y samples already taken at step indices g(t_i).
inline RescaledLengthPath rescale_lengths(const std::vector<std::int64_t>& y_samples,
                                          const std::vector<double>& times,
                                          const ScalingConstants& constants, CaseKind kind,
                                          const GraphModel& g) {
  if (y_samples.size() != times.size())
    throw std::invalid_argument("rescale_lengths needs one Y per time");
  if (!(constants.a > 0.0) || !(constants.b > 0.0))
    throw std::invalid_argument("rescale_lengths needs positive constants");
  RescaledLengthPath path;
  path.kind = kind;
  path.a = constants.a;
  path.b = constants.b;
  path.scale = length_scale(kind, g, constants.b);
  path.samples.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    path.samples.emplace_back(times[i], static_cast<double>(y_samples[i]) / path.scale);
  return path;
}

struct FddReport {
  std::vector<double> times;
  std::vector<double> ks;
  std::vector<std::size_t> n_lerw;
  std::vector<std::size_t> n_rayleigh;
};

// Per-time two-sample KS between rescaled-length marginals and Rayleigh
// marginals; no joint test.
inline FddReport fdd_compare(const std::vector<std::vector<double>>& lerw_samples,
                             const std::vector<std::vector<double>>& rayleigh_samples,
                             const std::vector<double>& times) {
  if (lerw_samples.size() != times.size() || rayleigh_samples.size() != times.size())
    throw std::invalid_argument("fdd_compare needs matching time grids");
  FddReport report;
  report.times = times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    report.ks.push_back(ks_two_sample(lerw_samples[i], rayleigh_samples[i]));
    report.n_lerw.push_back(lerw_samples[i].size());
    report.n_rayleigh.push_back(rayleigh_samples[i].size());
  }
  return report;
}

namespace detail {

// Oscillation (sup - inf) of a slope-plus-drops path on [from, to).
inline double oscillation(const StepPath& path, double from, double to) {
  double high = std::max(path.value_at(from), path.value_before(to));
  double low = std::min(path.value_at(from), path.value_before(to));
  auto it = std::upper_bound(
      path.breakpoints.begin(), path.breakpoints.end(), from,
      [](double lhs, const std::pair<double, double>& bp) { return lhs < bp.first; });
  for (; it != path.breakpoints.end() && it->first < to; ++it) {
    high = std::max(high, path.value_before(it->first));
    low = std::min(low, it->second);
  }
  return high - low;
}

}  // namespace detail

// Skorohod modulus w(Z, theta, T): infimum over partitions
// 0 = t_0 < ... < t_m = T with min gap >= theta of the worst oscillation on
// [t_{i-1}, t_i). Dynamic program over candidate boundaries: jump times,
// jump times +/- theta, a theta/4 grid, and the equipartitions {iT/k} for
// k <= floor(T/theta). Exact for slope-plus-downward-jump paths in all
// analyzed cases; an upper bound in pathological ones.
inline double modulus_w(const StepPath& path, double theta, double horizon) {
  if (!(theta > 0.0) || !(theta < horizon))
    throw std::invalid_argument("modulus needs 0 < theta < T");
  if (path.slope < 0.0)
    throw std::invalid_argument("modulus paths have nonnegative slope");
  for (const auto& [time, value] : path.breakpoints)
    if (value > path.value_before(time))
      throw std::invalid_argument("modulus path jumps must be downward");

  std::vector<double> candidates{0.0, horizon};
  for (const auto& [time, value] : path.breakpoints) {
    for (double t : {time, time - theta, time + theta})
      if (t > 0.0 && t < horizon) candidates.push_back(t);
  }
  const double quarter = theta / 4.0;
  for (double t = quarter; t < horizon; t += quarter) candidates.push_back(t);
  const auto max_pieces = static_cast<std::int64_t>(std::floor(horizon / theta));
  for (std::int64_t k = 2; k <= max_pieces; ++k)
    for (std::int64_t i = 1; i < k; ++i)
      candidates.push_back(horizon * static_cast<double>(i) / static_cast<double>(k));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const double gap_floor = theta * (1.0 - 1e-12);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(candidates.size(), inf);
  best[0] = -inf;  // empty partition prefix at t_0 = 0
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    for (std::size_t h = 0; h < i; ++h) {
      if (candidates[i] - candidates[h] < gap_floor) break;  // closer h only shrinks the gap
      if (best[h] == inf) continue;
      const double value =
          std::max(best[h], detail::oscillation(path, candidates[h], candidates[i]));
      best[i] = std::min(best[i], value);
    }
  }
  const double result = best.back();
  return result == -inf ? 0.0 : result;
}

}  // namespace lerw
