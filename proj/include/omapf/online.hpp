#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "omapf/core.hpp"
#include "omapf/search.hpp"

namespace omapf {

// Which agents may be (re)planned at a release time.
enum class ControllabilityMode { NewSingle, New, All };

// Custom planner hook: receives the graph, the controllable agents, the
// committed plan and the current time; returns one path per controllable agent.
// In mode All, revealed agents' executed prefixes must be kept.
using PlannerHook =
    std::function<std::vector<Path>(const Graph&, std::span<const Agent>, const Plan& committed, int now)>;

enum class PlannerKind { Sequence, OptRational, Custom };

struct OnlinePolicy {
  ControllabilityMode mode = ControllabilityMode::NewSingle;
  PlannerKind planner = PlannerKind::Sequence;
  Objective objective = Objective::Flowtime;  // OptRational only
  PlannerHook hook;                           // Custom only
  bool rationalized = false;

  static OnlinePolicy sequence() { return {}; }
  static OnlinePolicy opt_rational(ControllabilityMode mode, Objective objective) {
    return {mode, PlannerKind::OptRational, objective, {}, false};
  }
  static OnlinePolicy custom(ControllabilityMode mode, PlannerHook hook) {
    return {mode, PlannerKind::Custom, Objective::Flowtime, std::move(hook), false};
  }
};

// Custom policy that replays a precomputed plan, e.g. a full-knowledge optimum.
// Typically irrational: it delays agents in anticipation of future arrivals.
OnlinePolicy make_replay_policy(Plan plan, ControllabilityMode mode = ControllabilityMode::NewSingle);

// Throws ConfigError on inconsistent policies (Sequence outside NewSingle,
// Custom without a hook).
void check_policy(const OnlinePolicy& policy);

OnlinePolicy rationalize_wrap(OnlinePolicy policy);

// Reveals agents over time. Sources never reveal retroactively.
class RevealSource {
 public:
  virtual ~RevealSource() = default;
  virtual const Graph& graph() const = 0;
  // Next release time, or nullopt when no agents remain. May depend on the
  // plan committed so far.
  virtual std::optional<int> next_release(const Plan& committed) = 0;
  // Agents released at `time`, numbered after the ones revealed before.
  virtual std::vector<Agent> reveal(int time, const Plan& committed) = 0;
};

class InstanceSource : public RevealSource {
 public:
  explicit InstanceSource(OnlineInstance inst);
  const Graph& graph() const override { return inst_.graph(); }
  std::optional<int> next_release(const Plan& committed) override;
  std::vector<Agent> reveal(int time, const Plan& committed) override;

 private:
  OnlineInstance inst_;
  std::size_t cursor_ = 0;
};

struct Snapshot {
  int release = 0;
  int group = 0;  // k, 1-based
  Plan plan;      // committed plan over A_{<=k}
  Metrics metrics;
  RationalityBounds bounds;
  bool rational = false;
  bool fallback = false;  // rationalization replaced (part of) the plan
};

struct SimulationTrace {
  OnlineInstance instance;  // agents as revealed
  std::vector<Snapshot> snapshots;
  Plan final_plan;
  Metrics metrics;
};

SimulationTrace run(RevealSource& source, const OnlinePolicy& policy, const SearchLimits& limits = {});
SimulationTrace run(const OnlineInstance& inst, const OnlinePolicy& policy, const SearchLimits& limits = {});

// SEQUENCE: start at max(release, previous arrival), follow a shortest path.
Path sequence_step(const Graph& g, const Agent& agent, int previous_arrival);

// Shortest path without waits, ties broken by the smallest next vertex.
std::vector<VertexId> shortest_path(const Graph& g, VertexId from, VertexId to);

struct GlobalBoundCheck {
  bool flow_ok = false;
  bool make_ok = false;
  std::int64_t flow_bound = 0;
  std::int64_t make_bound = 0;
};

// Final flowtime <= m * sum dist_i and makespan <= r_{n_K} + sum_{[n_K, m]} dist_i.
GlobalBoundCheck check_global_bounds(const SimulationTrace& trace, const OnlineInstance& inst);
GlobalBoundCheck check_global_bounds(const SimulationTrace& trace);

}  // namespace omapf
