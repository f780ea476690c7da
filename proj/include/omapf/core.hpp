#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omapf/world.hpp"

namespace omapf {

// 1-based agent index a_i.
using AgentId = int;

struct Agent {
  AgentId id = 0;
  VertexId start = 0;
  VertexId goal = 0;
  int release = 0;

  bool operator==(const Agent&) const = default;
};

// Graph plus agents sorted by release, ids 1..m in list order.
class OnlineInstance {
 public:
  OnlineInstance() = default;
  OnlineInstance(Graph graph, std::vector<Agent> agents);

  const Graph& graph() const { return graph_; }
  std::span<const Agent> agents() const { return agents_; }
  int size() const { return static_cast<int>(agents_.size()); }
  const Agent& agent(AgentId id) const { return agents_.at(static_cast<std::size_t>(id - 1)); }
  int dist(AgentId id) const;

 private:
  Graph graph_;
  std::vector<Agent> agents_;
};

struct ReleaseGroup {
  int release = 0;
  std::vector<AgentId> agents;
};

// A_1..A_K in increasing release order. Group k is groups[k-1].
struct ReleaseGroups {
  std::vector<ReleaseGroup> groups;

  int count() const { return static_cast<int>(groups.size()); }
  const ReleaseGroup& group(int k) const { return groups.at(static_cast<std::size_t>(k - 1)); }
  // A_{<=k}
  std::vector<AgentId> revealed_through(int k) const;
  // A_{<k}
  std::vector<AgentId> revealed_before(int k) const;
};

ReleaseGroups partition_by_release(const OnlineInstance& inst);

// Timed vertex sequence; vertices[j] is the position at start_time + j.
// The agent is in the graph on [start_time, arrival_time - 1] only.
struct Path {
  int start_time = 0;
  std::vector<VertexId> vertices;

  int arrival_time() const { return start_time + static_cast<int>(vertices.size()) - 1; }
  // Position at t, or nullopt when the agent is not in the graph.
  std::optional<VertexId> occupancy(int t) const;
  // Position including the arrival step; nullopt outside [start_time, arrival_time].
  std::optional<VertexId> at(int t) const;
  int waits() const;

  bool operator==(const Path&) const = default;
};

std::optional<VertexId> occupancy(const Path& path, int t);

// Throws InvalidPath unless `path` is a legal path for `agent` in `g`.
void validate_path(const Graph& g, const Agent& agent, const Path& path);

using Plan = std::map<AgentId, Path>;

enum class ConflictKind { Vertex, Edge };

struct Conflict {
  ConflictKind kind = ConflictKind::Vertex;
  AgentId first = 0;   // smaller id
  AgentId second = 0;  // larger id
  int time = 0;        // for edge conflicts, the departure time t of the move t -> t+1
  VertexId from = 0;   // vertex, or the first agent's move origin
  VertexId to = 0;     // equals `from` for vertex conflicts

  bool operator==(const Conflict&) const = default;
};

std::vector<Conflict> detect_conflicts(const Plan& plan, const OnlineInstance& inst);
std::vector<Conflict> detect_conflicts(const Plan& plan);

struct Metrics {
  std::int64_t flowtime = 0;
  std::int64_t makespan = 0;
  std::int64_t latency = 0;

  bool operator==(const Metrics&) const = default;
};

Metrics evaluate(const Plan& plan, std::span<const AgentId> agents, const OnlineInstance& inst);
// Over every agent of the instance.
Metrics evaluate(const Plan& plan, const OnlineInstance& inst);

struct RationalityBounds {
  std::int64_t flow_bound = 0;
  std::int64_t make_bound = 0;
  AgentId n_k = 1;  // agent whose release anchors the makespan bound
  AgentId m_k = 1;  // largest revealed agent index
};

// Per-release-time bounds on the plan of all revealed agents, 1 <= k <= K.
//
// n_k is the agent maximizing r_n + sum_{i in [n, m_k]} dist_i (the latest
// such agent on ties); n_k = 1 when no later agent beats r_1 + sum dist_i.
RationalityBounds rationality_bounds(const OnlineInstance& inst, int k);
RationalityBounds rationality_bounds(const OnlineInstance& inst, const ReleaseGroups& groups, int k);

bool is_rational_at(const Plan& plan, const OnlineInstance& inst, int k);

struct RatioReport {
  std::int64_t algorithm_cost = 0;
  std::int64_t optimal_cost = 0;
  std::int64_t additive_gap = 0;

  bool infinite() const { return optimal_cost == 0 && algorithm_cost > 0; }
  // algorithm_cost / optimal_cost; 1 when both are zero. Meaningless if infinite().
  double value() const;
  // Reduced fraction "p/q", or "inf".
  std::string fraction() const;
};

RatioReport make_ratio(std::int64_t algorithm_cost, std::int64_t optimal_cost);

}  // namespace omapf
