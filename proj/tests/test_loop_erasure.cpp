#include <catch_amalgamated.hpp>

#include <set>
#include <unordered_set>

#include "lerw/loop_erasure.hpp"
#include "oracles.hpp"

using namespace lerw;

namespace {

std::vector<VertexId> random_sequence(SplitMix64& rng, std::uint64_t alphabet,
                                      std::int64_t max_len) {
  const std::int64_t len = 1 + static_cast<std::int64_t>(uniform_below(rng, max_len));
  std::vector<VertexId> seq;
  seq.reserve(static_cast<std::size_t>(len));
  for (std::int64_t i = 0; i < len; ++i) seq.push_back(uniform_below(rng, alphabet));
  return seq;
}

}  // namespace

TEST_CASE("loop_erase hand traces") {
  CHECK(loop_erase(std::vector<VertexId>{7}) == std::vector<VertexId>{7});
  CHECK(loop_erase(std::vector<VertexId>{0, 1, 0, 2}) == std::vector<VertexId>{0, 2});
  CHECK(loop_erase(std::vector<VertexId>{0, 1, 2, 1, 3}) == std::vector<VertexId>{0, 1, 3});
  CHECK(loop_erase(std::vector<VertexId>{0, 0, 1}) == std::vector<VertexId>{0, 1});
  CHECK_THROWS_AS(loop_erase(std::vector<VertexId>{}), std::invalid_argument);
}

TEST_CASE("le_push single steps and truncation") {
  LoopErasedState state;
  le_push(state, 4, 0);
  CHECK(state.path == std::vector<VertexId>{4});
  CHECK(state.length_history == std::vector<std::int64_t>{1});

  LoopErasedState s2;
  le_push(s2, 0, 0);
  le_push(s2, 1, 1);
  le_push(s2, 2, 2);
  le_push(s2, 1, 3);
  CHECK(s2.path == std::vector<VertexId>{0, 1});
  CHECK(s2.length_history == std::vector<std::int64_t>{1, 2, 3, 2});
  CHECK(s2.retained_times == std::vector<std::int64_t>{0, 3});

  CHECK_THROWS_AS(le_push(s2, 9, 99), std::invalid_argument);
}

TEST_CASE("incremental and batch loop erasure agree on random sequences") {
  SplitMix64 rng(314159);
  for (int round = 0; round < 1000; ++round) {
    const auto seq = random_sequence(rng, 1 + uniform_below(rng, 20), 500);

    LoopErasedState state;
    for (std::size_t i = 0; i < seq.size(); ++i)
      le_push(state, seq[i], static_cast<std::int64_t>(i));

    CHECK(state.path == oracles::le_inductive(seq));
    const auto prefix_lengths = oracles::le_prefix_lengths(seq);
    REQUIRE(state.length_history.size() == prefix_lengths.size());
    CHECK(state.length_history == prefix_lengths);

    // position_of is the exact inverse of path
    REQUIRE(state.position_of.size() == state.path.size());
    for (std::size_t i = 0; i < state.path.size(); ++i)
      CHECK(state.position_of.at(state.path[i]) == i);

    // retained times spell the path and match the sigma recursion
    REQUIRE(state.retained_times.size() == state.path.size());
    for (std::size_t i = 0; i < state.path.size(); ++i)
      CHECK(seq[static_cast<std::size_t>(state.retained_times[i])] == state.path[i]);
    CHECK(state.retained_times ==
          oracles::sigma_retained_times(seq, static_cast<std::int64_t>(seq.size()) - 1));
  }
}

TEST_CASE("length history retention is optional") {
  LoopErasedState state;
  state.keep_history = false;
  for (std::int64_t t = 0; t < 8; ++t) le_push(state, static_cast<VertexId>(t % 3), t);
  CHECK(state.length_history.empty());
  CHECK(state.path == std::vector<VertexId>{0, 1});
}

TEST_CASE("loop_erase output properties") {
  SplitMix64 rng(604);
  for (int round = 0; round < 300; ++round) {
    const auto seq = random_sequence(rng, 1 + uniform_below(rng, 12), 200);
    const auto erased = loop_erase(seq);
    CHECK(loop_erase(erased) == erased);  // idempotent
    CHECK(erased.front() == seq.front());
    CHECK(erased.back() == seq.back());
    std::set<VertexId> seen(erased.begin(), erased.end());
    CHECK(seen.size() == erased.size());  // self-avoiding
  }
}

TEST_CASE("length_process invariants and hand cases") {
  const GraphModel g = make_complete(4);

  Trajectory constant;
  constant.graph = g;
  constant.start = 2;
  constant.steps.assign(10, 2);
  const auto constant_y = length_process(constant);
  CHECK(constant_y == std::vector<std::int64_t>(10, 1));

  Trajectory avoiding;
  avoiding.graph = g;
  avoiding.start = 0;
  avoiding.steps = {0, 1, 2, 3};
  CHECK(length_process(avoiding) == std::vector<std::int64_t>{1, 2, 3, 4});

  const Trajectory walk = walk_trajectory(make_torus(2, 5), 0, 2000, 11);
  const auto y = length_process(walk);
  REQUIRE(y.size() == walk.steps.size());
  CHECK(y[0] == 1);
  for (std::size_t t = 0; t < y.size(); ++t) {
    CHECK(y[t] >= 1);
    if (t > 0) CHECK(y[t] <= y[t - 1] + 1);
  }
  CHECK(y == oracles::le_prefix_lengths(walk.steps));
}

TEST_CASE("length_at_times matches the full history") {
  const Trajectory walk = walk_trajectory(make_torus(2, 6), 0, 3000, 23);
  const auto full = length_process(walk);
  const std::vector<std::int64_t> indices{0, 1, 1, 57, 500, 2999, 3000};
  const auto sampled = length_at_times(walk, indices);
  REQUIRE(sampled.size() == indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i)
    CHECK(sampled[i] == full[static_cast<std::size_t>(indices[i])]);

  CHECK_THROWS_AS(length_at_times(walk, {3001}), std::out_of_range);
  CHECK_THROWS_AS(length_at_times(walk, {5, 4}), std::invalid_argument);
}

TEST_CASE("local loop erasure edge cases") {
  Trajectory traj;
  traj.graph = make_complete(12);
  traj.start = 0;
  traj.steps = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  // s = 0: lookahead empty, every time retained
  const auto all = local_loop_erasure(traj, {2, 8}, 0);
  CHECK(all.retained_times == std::vector<std::int64_t>{2, 3, 4, 5, 6, 7, 8});

  // all-distinct vertices: retained for any s
  const auto distinct = local_loop_erasure(traj, {2, 8}, 2);
  CHECK(distinct.retained_times == std::vector<std::int64_t>{2, 3, 4, 5, 6, 7, 8});
  CHECK(distinct.path ==
        std::vector<VertexId>{2, 3, 4, 5, 6, 7, 8});

  CHECK_THROWS_AS(local_loop_erasure(traj, {2, 9}, 2), std::out_of_range);
  CHECK_THROWS_AS(local_loop_erasure(traj, {-1, 5}, 1), std::out_of_range);
}

TEST_CASE("local loop erasure on a short loop fixture") {
  // One loop: time 5 revisits the vertex of time 3.
  Trajectory traj;
  traj.graph = make_complete(9);
  traj.start = 0;
  traj.steps = {0, 1, 2, 3, 4, 3, 5, 6, 7, 8, 0};
  const std::int64_t s = 2;
  const TimeWindow window{2, 8};

  const auto got = local_loop_erasure(traj, window, s);

  // Direct evaluation of the defining condition for every u.
  std::vector<std::int64_t> expected;
  for (std::int64_t u = window.begin; u <= window.end; ++u) {
    const std::int64_t from = std::max<std::int64_t>(0, u - s);
    std::vector<VertexId> prefix(traj.steps.begin() + from, traj.steps.begin() + u + 1);
    const auto erased = oracles::le_inductive(prefix);
    std::unordered_set<VertexId> ahead(traj.steps.begin() + u + 1,
                                       traj.steps.begin() + u + s + 1);
    bool keep = true;
    for (VertexId v : erased) keep = keep && !ahead.count(v);
    if (keep) expected.push_back(u);
  }
  CHECK(got.retained_times == expected);
  // Hand trace: u = 3 and u = 4 both see vertex 3 in their lookahead while it
  // is still on the local erasure, u = 5 erases down to (3) with lookahead
  // {5, 6}, everything after is loop-free.
  CHECK(got.retained_times == std::vector<std::int64_t>{2, 5, 6, 7, 8});
}
