#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "omapf/core.hpp"

namespace omapf {

// Time-indexed vertex and edge reservations of agents that follow fixed paths.
class DynamicObstacleSet {
 public:
  void reserve_path(AgentId owner, const Path& path);

  std::optional<AgentId> vertex_owner(VertexId v, int t) const;
  // Reservation of the move from -> to departing at t.
  std::optional<AgentId> edge_owner(VertexId from, VertexId to, int t) const;

  bool vertex_free(VertexId v, int t) const { return !vertex_owner(v, t); }
  // True when moving from -> to between t and t+1 swaps with a reserved move.
  bool move_blocked(VertexId from, VertexId to, int t) const { return from != to && edge_owner(to, from, t).has_value(); }

  std::size_t vertex_reservation_count() const { return vertices_.size(); }
  std::size_t edge_reservation_count() const { return edges_.size(); }
  // Latest reservation time + 1; 0 when empty.
  int horizon() const { return horizon_; }
  bool empty() const { return vertices_.empty() && edges_.empty(); }

 private:
  struct EdgeKey {
    VertexId from;
    VertexId to;
    int time;
    bool operator==(const EdgeKey&) const = default;
  };
  struct EdgeKeyHash {
    std::size_t operator()(const EdgeKey& k) const;
  };

  static std::uint64_t vertex_key(VertexId v, int t) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)) << 32) | static_cast<std::uint32_t>(v);
  }

  std::unordered_map<std::uint64_t, AgentId> vertices_;
  std::unordered_map<EdgeKey, AgentId, EdgeKeyHash> edges_;
  int horizon_ = 0;
};

// Every planned agent not in `excluded` becomes a dynamic obstacle.
DynamicObstacleSet build_obstacles(const Plan& plan, const std::set<AgentId>& excluded = {});

struct SearchLimits {
  int horizon_bound = 0;  // 0 selects obstacle horizon + |V| + max release (+ start time)
  std::int64_t node_budget = 10'000'000;
};

enum class Objective { Flowtime, Makespan };

// Collision-free path with the smallest arrival time. The agent may wait
// off-graph and enter its start vertex at any time >= earliest_start.
// Ties: fewer on-graph waits, then the lexicographically smallest vertex sequence.
Path plan_min_arrival(const Graph& g, const Agent& agent, const DynamicObstacleSet& obstacles, int earliest_start,
                      const SearchLimits& limits = {});

// Same, for an agent already standing on `position` at time `now`; the
// returned path starts at `now`.
Path plan_min_arrival_from(const Graph& g, const Agent& agent, VertexId position, int now,
                           const DynamicObstacleSet& obstacles, const SearchLimits& limits = {});

// Agent of a joint query. `position_at_start` pins the agent to a vertex at the
// query's start time; otherwise it enters at s_i no earlier than `earliest_start`.
struct JointAgent {
  Agent agent;
  int earliest_start = 0;
  std::optional<VertexId> position_at_start;
};

struct JointQuery {
  std::vector<JointAgent> agents;
  int start_time = 0;  // time at which pinned agents stand on their positions
  Objective objective = Objective::Flowtime;
  // Prune plans whose makespan exceeds this.
  std::optional<int> makespan_cap;
};

struct JointResult {
  Plan plan;  // paths of pinned agents start at start_time
  std::int64_t flowtime = 0;
  std::int64_t makespan = 0;
  std::int64_t expanded = 0;
};

// Exact joint A* with operator decomposition over (time, per-agent status).
// Minimizes (objective, other objective) lexicographically.
JointResult solve_joint(const Graph& g, const JointQuery& query, const DynamicObstacleSet& frozen,
                        const SearchLimits& limits = {});

// Optimal plan for the query with independence detection on top of solve_joint.
JointResult solve_offline(const Graph& g, const JointQuery& query, const DynamicObstacleSet& frozen,
                          const SearchLimits& limits = {});

// Full-knowledge optimal plan: each agent may start at any time >= its release.
Plan offline_optimal(const Graph& g, std::span<const Agent> agents, const DynamicObstacleSet& frozen,
                     Objective objective, const SearchLimits& limits = {});

}  // namespace omapf
