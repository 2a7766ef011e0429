#include <catch_amalgamated.hpp>

#include <cmath>

#include "lerw/stats.hpp"
#include "oracles.hpp"

using namespace lerw;

namespace {

StepPath flat_path_with_jumps(double origin, double slope,
                              std::vector<std::pair<double, double>> jumps) {
  StepPath path;
  path.origin = origin;
  path.slope = slope;
  path.breakpoints = std::move(jumps);
  return path;
}

}  // namespace

TEST_CASE("one-sample KS basics") {
  // single sample at the median of the distribution
  CHECK(ks_statistic({0.0}, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }) == 0.5);

  // all samples at a point where the CDF is already 1
  const double all_at_end =
      ks_statistic(std::vector<double>(10, 5.0),
                   [](double x) { return std::min(1.0, std::max(0.0, x / 5.0)); });
  CHECK(all_at_end == 1.0);

  CHECK_THROWS_AS(ks_statistic({}, [](double) { return 0.5; }), std::invalid_argument);
}

TEST_CASE("one-sample KS at scale stays under the Kolmogorov bound") {
  SplitMix64 rng(2025);
  std::vector<double> samples;
  const int count = 100'000;
  samples.reserve(count);
  for (int i = 0; i < count; ++i) samples.push_back(uniform01(rng));
  CHECK(ks_statistic(samples, [](double x) { return std::min(1.0, std::max(0.0, x)); }) <=
        0.01);
}

TEST_CASE("one-sample KS equals the naive oracle, ties included") {
  SplitMix64 rng(606);
  auto cdf = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  for (int round = 0; round < 100; ++round) {
    std::vector<double> samples;
    const int count = 1 + static_cast<int>(uniform_below(rng, 60));
    for (int i = 0; i < count; ++i)
      samples.push_back(static_cast<double>(uniform_below(rng, 10)) / 5.0 - 1.0);
    CHECK(ks_statistic(samples, cdf) ==
          Catch::Approx(oracles::naive_ks(samples, cdf)).margin(1e-12));
  }
}

TEST_CASE("two-sample KS: zero on identical multisets, symmetric, matches oracle") {
  const std::vector<double> tied{1.0, 2.0, 2.0, 3.0};
  CHECK(ks_two_sample(tied, tied) == 0.0);

  SplitMix64 rng(707);
  for (int round = 0; round < 100; ++round) {
    std::vector<double> a, b;
    const int na = 1 + static_cast<int>(uniform_below(rng, 40));
    const int nb = 1 + static_cast<int>(uniform_below(rng, 40));
    for (int i = 0; i < na; ++i) a.push_back(static_cast<double>(uniform_below(rng, 12)));
    for (int i = 0; i < nb; ++i) b.push_back(static_cast<double>(uniform_below(rng, 12)));
    const double forward = ks_two_sample(a, b);
    CHECK(forward == ks_two_sample(b, a));
    CHECK(forward == Catch::Approx(oracles::naive_two_sample_ks(a, b)).margin(1e-12));
  }
}

TEST_CASE("rescale_lengths arithmetic") {
  const GraphModel g = make_complete(10'000);
  ScalingConstants c;
  c.a = 1.0;
  c.b = 1.0;
  const auto path = rescale_lengths({0, 500}, {0.5, 1.0}, c, CaseKind::Case1, g);
  CHECK(path.samples[0].second == 0.0);
  CHECK(path.samples[1].second == 5.0);  // b |G|^{-1/2} Y = 500 / 100

  ScalingConstants doubled = c;
  doubled.b = 2.0;
  const auto path2 = rescale_lengths({0, 500}, {0.5, 1.0}, doubled, CaseKind::Case1, g);
  CHECK(path2.samples[1].second == 10.0);

  SplitMix64 rng(11);
  for (int round = 0; round < 50; ++round) {
    const std::int64_t y = static_cast<std::int64_t>(uniform_below(rng, 100000));
    const double z1 = rescale_lengths({y}, {1.0}, c, CaseKind::Case1, g).samples[0].second;
    const double z2 =
        rescale_lengths({2 * y}, {1.0}, c, CaseKind::Case1, g).samples[0].second;
    CHECK(z2 == Catch::Approx(2.0 * z1).margin(1e-12));
  }

  CHECK_THROWS_AS(rescale_lengths({1, 2}, {0.5}, c, CaseKind::Case1, g),
                  std::invalid_argument);
}

TEST_CASE("time and length scales per case") {
  const GraphModel c = make_complete(10'000);
  CHECK(time_index(CaseKind::Case1, c, 0.5, 2.0) == 100);
  CHECK(length_scale(CaseKind::Case1, c, 2.0) == Catch::Approx(50.0));

  const GraphModel t = make_torus(4, 10);
  const double log10 = std::log(10.0);
  CHECK(time_scale(CaseKind::Case2, t, 1.0) == Catch::Approx(100.0 * std::sqrt(log10)));
  CHECK(time_index(CaseKind::Case2, t, 1.0, 1.0) ==
        static_cast<std::int64_t>(std::floor(100.0 * std::sqrt(log10))));
  CHECK(length_scale(CaseKind::Case2, t, 1.0) ==
        Catch::Approx(100.0 * std::pow(log10, 1.0 / 6.0)));
}

TEST_CASE("fdd_compare basics and calibration") {
  const std::vector<double> times{1.0, 2.0};
  const std::vector<std::vector<double>> same{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
  const FddReport report = fdd_compare(same, same, times);
  CHECK(report.ks == std::vector<double>{0.0, 0.0});
  CHECK(report.n_lerw == std::vector<std::size_t>{3, 3});

  CHECK_THROWS_AS(fdd_compare(same, {{1.0}}, times), std::invalid_argument);

  SplitMix64 rng(404);
  std::vector<double> first, second;
  for (int i = 0; i < 10'000; ++i)
    first.push_back(rayleigh_event_driven(0.0, 1.0, rng).value_at(1.0));
  for (int i = 0; i < 10'000; ++i)
    second.push_back(rayleigh_event_driven(0.0, 1.0, rng).value_at(1.0));
  const FddReport same_law = fdd_compare({first}, {second}, {1.0});
  CHECK(same_law.ks[0] <= 0.025);
}

TEST_CASE("modulus of a pure slope path is c T / floor(T / theta)") {
  const StepPath unit = flat_path_with_jumps(0.0, 1.0, {});
  CHECK(modulus_w(unit, 0.3, 1.0) == Catch::Approx(1.0 / 3.0).margin(1e-12));
  for (double theta : {0.15, 0.21, 0.3, 0.47}) {
    for (double slope : {1.0, 2.0}) {
      StepPath path = flat_path_with_jumps(0.5, slope, {});
      const double pieces = std::floor(1.0 / theta);
      CHECK(modulus_w(path, theta, 1.0) ==
            Catch::Approx(slope / pieces).margin(1e-12));
    }
  }
}

TEST_CASE("modulus hand cases with jumps") {
  // one downward jump, flat elsewhere: a boundary at the jump hides it
  const StepPath one = flat_path_with_jumps(1.0, 0.0, {{0.5, 0.4}});
  CHECK(modulus_w(one, 0.2, 1.0) == Catch::Approx(0.0).margin(1e-12));

  // two jumps closer than theta: the smaller one is unavoidable
  const StepPath two = flat_path_with_jumps(1.0, 0.0, {{0.45, 0.6}, {0.55, 0.3}});
  const double got = modulus_w(two, 0.2, 1.0);
  CHECK(got == Catch::Approx(0.3).margin(1e-12));
  std::vector<double> grid{0.45, 0.55, 1.0};
  for (int k = 1; k < 20; ++k) grid.push_back(0.05 * k);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  CHECK(got == Catch::Approx(oracles::brute_modulus(two, 0.2, 1.0, grid)).margin(1e-12));
}

TEST_CASE("modulus properties") {
  CHECK(modulus_w(flat_path_with_jumps(2.0, 0.0, {}), 0.3, 1.0) == 0.0);

  SplitMix64 rng(999);
  for (int round = 0; round < 40; ++round) {
    StepPath path;
    path.origin = uniform01(rng);
    path.slope = 1.0;
    double after = path.origin;
    double last_time = 0.0;
    double t = 0.0;
    while (true) {
      t += 0.1 + uniform01(rng) * 0.4;
      if (t >= 1.0) break;
      after = (after + (t - last_time)) * uniform01(rng);
      path.breakpoints.emplace_back(t, after);
      last_time = t;
    }
    double previous = std::numeric_limits<double>::infinity();
    for (double theta : {0.45, 0.3, 0.2, 0.1}) {
      const double w = modulus_w(path, theta, 1.0);
      CHECK(w <= previous + 1e-12);
      CHECK(w <= oracles::oscillation_direct(path, 0.0, 1.0) + 1e-12);
      previous = w;
    }
  }

  CHECK_THROWS_AS(modulus_w(flat_path_with_jumps(0, 1, {}), 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(modulus_w(flat_path_with_jumps(0, 1, {}), 1.0, 1.0), std::invalid_argument);
}
