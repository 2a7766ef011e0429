#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lerw/rng.hpp"

namespace lerw {

using VertexId = std::uint64_t;

enum class GraphKind { Torus, Complete, Hypercube };

// A finite vertex-transitive graph with an implicit integer vertex encoding:
// mixed-radix for the torus (least-significant dimension first), bit mask for
// the hypercube, identity for the complete graph. Neighbors are computed
// arithmetically; nothing is stored per vertex.
struct GraphModel {
  GraphKind kind = GraphKind::Complete;
  int dim = 0;                        // torus d / hypercube n
  std::uint64_t side = 0;             // torus side length
  std::uint64_t vertex_count = 0;
  std::uint64_t degree = 0;
  std::vector<std::uint64_t> stride;  // torus: side^j for j = 0..dim
};

inline GraphModel make_torus(int d, std::uint64_t n) {
  if (d < 1) throw std::invalid_argument("torus dimension must be >= 1");
  if (n < 2) throw std::invalid_argument("torus side length must be >= 2");
  GraphModel g;
  g.kind = GraphKind::Torus;
  g.dim = d;
  g.side = n;
  g.stride.assign(static_cast<std::size_t>(d) + 1, 1);
  for (int j = 0; j < d; ++j) {
    const unsigned __int128 next =
        static_cast<unsigned __int128>(g.stride[j]) * n;
    if (next > ~0ULL) throw std::invalid_argument("torus vertex count overflows 64-bit ids");
    g.stride[j + 1] = static_cast<std::uint64_t>(next);
  }
  g.vertex_count = g.stride[d];
  g.degree = 2 * static_cast<std::uint64_t>(d);
  return g;
}

inline GraphModel make_complete(std::uint64_t m) {
  if (m < 2) throw std::invalid_argument("complete graph needs m >= 2");
  GraphModel g;
  g.kind = GraphKind::Complete;
  g.vertex_count = m;
  g.degree = m - 1;
  return g;
}

inline GraphModel make_hypercube(int n) {
  if (n < 1) throw std::invalid_argument("hypercube dimension must be >= 1");
  if (n > 63) throw std::invalid_argument("hypercube vertex count overflows 64-bit ids");
  GraphModel g;
  g.kind = GraphKind::Hypercube;
  g.dim = n;
  g.vertex_count = 1ULL << n;
  g.degree = static_cast<std::uint64_t>(n);
  return g;
}

inline void check_vertex(const GraphModel& g, VertexId v) {
  if (v >= g.vertex_count) throw std::out_of_range("vertex id out of range");
}

// k-th neighbor of v, k in [0, degree). Torus order: (+dim0, -dim0, +dim1, ...);
// hypercube: flip bit k; complete: the other vertices in ascending order.
// For a torus of side 2 the +/- entries coincide (multigraph semantics), so
// the degree stays 2d and the uniform step rule is unchanged.
inline VertexId neighbor(const GraphModel& g, VertexId v, std::uint64_t k) {
  switch (g.kind) {
    case GraphKind::Torus: {
      const int j = static_cast<int>(k / 2);
      const std::uint64_t coord = (v / g.stride[j]) % g.side;
      const std::uint64_t next =
          (k % 2 == 0) ? (coord + 1) % g.side : (coord + g.side - 1) % g.side;
      return v + (next - coord) * g.stride[j];
    }
    case GraphKind::Complete:
      return k < v ? k : k + 1;
    case GraphKind::Hypercube:
      return v ^ (1ULL << k);
  }
  throw std::logic_error("unreachable");
}

inline std::vector<VertexId> neighbors(const GraphModel& g, VertexId v) {
  check_vertex(g, v);
  std::vector<VertexId> out;
  out.reserve(g.degree);
  for (std::uint64_t k = 0; k < g.degree; ++k) out.push_back(neighbor(g, v, k));
  return out;
}

template <class Rng>
VertexId uniform_vertex(const GraphModel& g, Rng& rng) {
  return uniform_below(rng, g.vertex_count);
}

// Spec string: "torus:d=4,n=10", "complete:m=1000", "hypercube:n=12".
inline GraphModel parse_graph_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("graph spec needs kind:key=value[,...]: " + spec);
  const std::string kind = spec.substr(0, colon);

  std::vector<std::pair<std::string, std::uint64_t>> kv;
  std::size_t pos = colon + 1;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const std::string item =
        spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= item.size())
      throw std::invalid_argument("bad graph spec item '" + item + "' in " + spec);
    std::uint64_t value = 0;
    try {
      std::size_t used = 0;
      value = std::stoull(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument("bad integer in graph spec item '" + item + "'");
    }
    kv.emplace_back(item.substr(0, eq), value);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }

  auto get = [&](const char* key) {
    for (const auto& [k, v] : kv)
      if (k == key) return v;
    throw std::invalid_argument(std::string("graph spec missing key '") + key + "'");
  };
  auto expect_keys = [&](std::initializer_list<const char*> keys) {
    if (kv.size() != keys.size())
      throw std::invalid_argument("unexpected keys in graph spec: " + spec);
    for (const char* key : keys) (void)get(key);
  };

  if (kind == "torus") {
    expect_keys({"d", "n"});
    const std::uint64_t d = get("d");
    if (d > 64) throw std::invalid_argument("torus dimension too large");
    return make_torus(static_cast<int>(d), get("n"));
  }
  if (kind == "complete") {
    expect_keys({"m"});
    return make_complete(get("m"));
  }
  if (kind == "hypercube") {
    expect_keys({"n"});
    const std::uint64_t n = get("n");
    if (n > 64) throw std::invalid_argument("hypercube dimension too large");
    return make_hypercube(static_cast<int>(n));
  }
  throw std::invalid_argument("unknown graph kind '" + kind + "'");
}

inline std::string graph_spec_string(const GraphModel& g) {
  switch (g.kind) {
    case GraphKind::Torus:
      return "torus:d=" + std::to_string(g.dim) + ",n=" + std::to_string(g.side);
    case GraphKind::Complete:
      return "complete:m=" + std::to_string(g.vertex_count);
    case GraphKind::Hypercube:
      return "hypercube:n=" + std::to_string(g.dim);
  }
  return {};
}

}  // namespace lerw
