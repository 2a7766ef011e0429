#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lerw/random_walk.hpp"

namespace lerw {

// Chronological loop erasure, incrementally. Pushing a vertex that is already
// on the path truncates the path back to it; the vertex's retained time is
// refreshed to the new visit (the max-time convention of W(u,v)).
// Vertex equality is id equality only; the graph is never consulted.
struct LoopErasedState {
  std::vector<VertexId> path;
  std::unordered_map<VertexId, std::size_t> position_of;
  std::vector<std::int64_t> retained_times;
  std::vector<std::int64_t> length_history;  // Y_0..Y_t when keep_history
  bool keep_history = true;
  std::int64_t next_time = 0;

  std::int64_t length() const { return static_cast<std::int64_t>(path.size()); }
};

inline void le_push(LoopErasedState& state, VertexId v, std::int64_t time) {
  if (time != state.next_time)
    throw std::invalid_argument("le_push times must be consecutive from 0");
  state.next_time = time + 1;

  const auto it = state.position_of.find(v);
  if (it == state.position_of.end()) {
    state.position_of.emplace(v, state.path.size());
    state.path.push_back(v);
    state.retained_times.push_back(time);
  } else {
    const std::size_t keep = it->second + 1;
    for (std::size_t i = keep; i < state.path.size(); ++i)
      state.position_of.erase(state.path[i]);
    state.path.resize(keep);
    state.retained_times.resize(keep);
    state.retained_times[keep - 1] = time;
  }
  if (state.keep_history) state.length_history.push_back(state.length());
}

// Batch LE(lambda) of a whole sequence.
inline std::vector<VertexId> loop_erase(std::span<const VertexId> seq) {
  if (seq.empty()) throw std::invalid_argument("loop_erase needs a nonempty sequence");
  LoopErasedState state;
  state.keep_history = false;
  for (std::size_t i = 0; i < seq.size(); ++i)
    le_push(state, seq[i], static_cast<std::int64_t>(i));
  return std::move(state.path);
}

inline std::vector<VertexId> loop_erase(const std::vector<VertexId>& seq) {
  return loop_erase(std::span<const VertexId>(seq));
}

// Y_t = |LE((X_s)_{s=0}^t)| for t = 0..T.
inline std::vector<std::int64_t> length_process(const Trajectory& traj) {
  LoopErasedState state;
  state.length_history.reserve(traj.steps.size());
  for (std::size_t i = 0; i < traj.steps.size(); ++i)
    le_push(state, traj.steps[i], static_cast<std::int64_t>(i));
  return std::move(state.length_history);
}

// Y at the given ascending time indices only; memory stays O(path length)
// instead of O(T). Long runs sampled at a few times use this.
inline std::vector<std::int64_t> length_at_times(const Trajectory& traj,
                                                 const std::vector<std::int64_t>& indices) {
  const std::int64_t last = static_cast<std::int64_t>(traj.steps.size()) - 1;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] > last)
      throw std::out_of_range("length_at_times index outside the trajectory");
    if (i > 0 && indices[i] < indices[i - 1])
      throw std::invalid_argument("length_at_times needs ascending indices");
  }
  LoopErasedState state;
  state.keep_history = false;
  std::vector<std::int64_t> out;
  out.reserve(indices.size());
  std::size_t next = 0;
  for (std::size_t t = 0; t < traj.steps.size() && next < indices.size(); ++t) {
    le_push(state, traj.steps[t], static_cast<std::int64_t>(t));
    while (next < indices.size() &&
           indices[next] == static_cast<std::int64_t>(t)) {
      out.push_back(state.length());
      ++next;
    }
  }
  return out;
}

// Inclusive time window [begin, end].
struct TimeWindow {
  std::int64_t begin = 0;
  std::int64_t end = -1;
  std::int64_t size() const { return end - begin + 1; }
};

struct LocalErasure {
  std::vector<std::int64_t> retained_times;  // A_i ∩ U, ascending
  std::vector<VertexId> path;                // LE_s(A_i)
};

// A time u is locally retained when LE((X_t)_{t=max{0,u-s}}^u) does not meet
// {X_{u+1},...,X_{u+s}}. Evaluated directly per u.
inline LocalErasure local_loop_erasure(const Trajectory& traj, TimeWindow window,
                                       std::int64_t s) {
  const std::int64_t last = static_cast<std::int64_t>(traj.steps.size()) - 1;
  if (s < 0) throw std::invalid_argument("local erasure window s must be >= 0");
  if (window.begin < 0 || window.begin > window.end || window.end + s > last)
    throw std::out_of_range("local erasure window out of range");

  LocalErasure result;
  std::unordered_set<VertexId> lookahead;
  for (std::int64_t u = window.begin; u <= window.end; ++u) {
    const std::int64_t from = std::max<std::int64_t>(0, u - s);
    const auto erased = loop_erase(
        std::span<const VertexId>(traj.steps.data() + from,
                                  static_cast<std::size_t>(u - from + 1)));
    lookahead.clear();
    for (std::int64_t t = u + 1; t <= u + s; ++t) lookahead.insert(traj.steps[t]);
    bool retained = true;
    for (VertexId v : erased) {
      if (lookahead.count(v)) {
        retained = false;
        break;
      }
    }
    if (retained) {
      result.retained_times.push_back(u);
      result.path.push_back(traj.steps[u]);
    }
  }
  return result;
}

}  // namespace lerw
