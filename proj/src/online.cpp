#include "omapf/online.hpp"

#include <algorithm>

#include "omapf/errors.hpp"

namespace omapf {

OnlinePolicy make_replay_policy(Plan plan, ControllabilityMode mode) {
  auto shared = std::make_shared<const Plan>(std::move(plan));
  return OnlinePolicy::custom(mode, [shared](const Graph&, std::span<const Agent> agents, const Plan&, int) {
    std::vector<Path> out;
    for (const Agent& a : agents) {
      auto it = shared->find(a.id);
      if (it == shared->end()) throw UnplannedAgent("replayed plan lacks agent " + std::to_string(a.id));
      out.push_back(it->second);
    }
    return out;
  });
}

void check_policy(const OnlinePolicy& policy) {
  if (policy.planner == PlannerKind::Sequence && policy.mode != ControllabilityMode::NewSingle) {
    throw ConfigError("SEQUENCE plans one new agent at a time; use mode new-single");
  }
  if (policy.planner == PlannerKind::Custom && !policy.hook) throw ConfigError("custom policy without a planner hook");
}

OnlinePolicy rationalize_wrap(OnlinePolicy policy) {
  policy.rationalized = true;
  return policy;
}

InstanceSource::InstanceSource(OnlineInstance inst) : inst_(std::move(inst)) {}

std::optional<int> InstanceSource::next_release(const Plan&) {
  if (cursor_ >= inst_.agents().size()) return std::nullopt;
  return inst_.agents()[cursor_].release;
}

std::vector<Agent> InstanceSource::reveal(int time, const Plan&) {
  std::vector<Agent> out;
  while (cursor_ < inst_.agents().size() && inst_.agents()[cursor_].release == time) {
    out.push_back(inst_.agents()[cursor_++]);
  }
  return out;
}

std::vector<VertexId> shortest_path(const Graph& g, VertexId from, VertexId to) {
  auto to_goal = g.distances_from(to);
  std::vector<VertexId> out{from};
  VertexId v = from;
  while (v != to) {
    for (VertexId w : g.neighbors(v)) {
      if (to_goal[static_cast<std::size_t>(w)] == to_goal[static_cast<std::size_t>(v)] - 1) {
        v = w;
        break;
      }
    }
    out.push_back(v);
  }
  return out;
}

Path sequence_step(const Graph& g, const Agent& agent, int previous_arrival) {
  return Path{std::max(agent.release, previous_arrival), shortest_path(g, agent.start, agent.goal)};
}

namespace {

std::int64_t plan_makespan(const Plan& plan) {
  std::int64_t out = 0;
  for (const auto& [id, path] : plan) out = std::max<std::int64_t>(out, path.arrival_time());
  return out;
}

class Runner {
 public:
  Runner(RevealSource& source, const OnlinePolicy& policy, const SearchLimits& limits)
      : source_(source), policy_(policy), limits_(limits), graph_(source.graph()) {}

  SimulationTrace run() {
    check_policy(policy_);
    SimulationTrace trace;
    Plan committed;
    int k = 0;
    int last_release = -1;
    while (auto release = source_.next_release(committed)) {
      const int now = *release;
      if (now <= last_release) throw ProtocolViolation("release times must strictly increase between groups");
      auto fresh = source_.reveal(now, committed);
      if (fresh.empty()) throw ProtocolViolation("source announced release " + std::to_string(now) + " but revealed no agents");
      for (const Agent& a : fresh) {
        if (a.release != now) throw ProtocolViolation("agent " + std::to_string(a.id) + " revealed at the wrong time");
      }
      revealed_.insert(revealed_.end(), fresh.begin(), fresh.end());
      ++k;
      last_release = now;
      const OnlineInstance partial(graph_, revealed_);

      Snapshot snap;
      snap.release = now;
      snap.group = k;
      snap.plan = plan_group(committed, fresh, now, snap.fallback);
      if (policy_.rationalized && policy_.mode != ControllabilityMode::NewSingle && !is_rational_at(snap.plan, partial, k)) {
        snap.plan = sequential_fallback(committed, fresh, now, k);
        snap.fallback = true;
      }
      verify(snap.plan, committed, now);

      const auto groups = partition_by_release(partial);
      const auto ids = groups.revealed_through(k);
      snap.bounds = rationality_bounds(partial, groups, k);
      snap.metrics = evaluate(snap.plan, ids, partial);
      snap.rational = snap.metrics.flowtime <= snap.bounds.flow_bound && snap.metrics.makespan <= snap.bounds.make_bound;
      committed = snap.plan;
      trace.snapshots.push_back(std::move(snap));
    }
    trace.instance = OnlineInstance(graph_, revealed_);
    trace.final_plan = committed;
    trace.metrics = evaluate(committed, trace.instance);
    return trace;
  }

 private:
  Plan plan_group(const Plan& committed, const std::vector<Agent>& fresh, int now, bool& fallback) {
    switch (policy_.mode) {
      case ControllabilityMode::NewSingle:
        return plan_new_single(committed, fresh, now, fallback);
      case ControllabilityMode::New:
        return plan_new(committed, fresh, now);
      case ControllabilityMode::All:
        return plan_all(committed, now);
    }
    return committed;
  }

  Plan plan_new_single(const Plan& committed, const std::vector<Agent>& fresh, int now, bool& fallback) {
    Plan plan = committed;
    for (const Agent& a : fresh) {
      Path path;
      switch (policy_.planner) {
        case PlannerKind::Sequence:
          path = sequence_step(graph_, a, static_cast<int>(plan_makespan(plan)));
          break;
        case PlannerKind::OptRational:
          path = plan_min_arrival(graph_, a, build_obstacles(plan), now, limits_);
          break;
        case PlannerKind::Custom:
          path = call_hook(std::span<const Agent>(&a, 1), plan, now).front();
          break;
      }
      if (policy_.rationalized) {
        const int start = std::max(a.release, static_cast<int>(plan_makespan(plan)));
        if (path.arrival_time() > start + graph_.distance(a.start, a.goal)) {
          path = sequence_step(graph_, a, start);
          fallback = true;
        }
      }
      plan[a.id] = std::move(path);
    }
    return plan;
  }

  Plan plan_new(const Plan& committed, const std::vector<Agent>& fresh, int now) {
    Plan plan = committed;
    if (policy_.planner == PlannerKind::Custom) {
      auto paths = call_hook(fresh, committed, now);
      for (std::size_t i = 0; i < fresh.size(); ++i) plan[fresh[i].id] = std::move(paths[i]);
      return plan;
    }
    JointQuery query;
    query.start_time = now;
    query.objective = policy_.objective;
    for (const Agent& a : fresh) query.agents.push_back(JointAgent{a, now, std::nullopt});
    auto result = solve_offline(graph_, query, build_obstacles(committed), limits_);
    for (auto& [id, path] : result.plan) plan[id] = std::move(path);
    return plan;
  }

  Plan plan_all(const Plan& committed, int now) {
    if (policy_.planner == PlannerKind::Custom) {
      auto paths = call_hook(revealed_, committed, now);
      Plan plan;
      for (std::size_t i = 0; i < revealed_.size(); ++i) plan[revealed_[i].id] = std::move(paths[i]);
      return plan;
    }
    Plan plan;
    JointQuery query;
    query.start_time = now;
    query.objective = policy_.objective;
    for (const Agent& a : revealed_) {
      auto it = committed.find(a.id);
      if (it == committed.end()) {
        query.agents.push_back(JointAgent{a, now, std::nullopt});
        continue;
      }
      const Path& old = it->second;
      if (old.arrival_time() <= now) {
        plan[a.id] = old;
      } else if (old.start_time <= now) {
        query.agents.push_back(JointAgent{a, now, *old.at(now)});
      } else {
        // Off the graph at `now`, which has already happened.
        query.agents.push_back(JointAgent{a, now + 1, std::nullopt});
      }
    }
    auto result = solve_offline(graph_, query, DynamicObstacleSet{}, limits_);
    for (auto& [id, path] : result.plan) {
      auto it = committed.find(id);
      if (it != committed.end() && it->second.start_time <= now) {
        const Path& old = it->second;
        Path merged{old.start_time, {old.vertices.begin(), old.vertices.begin() + (now - old.start_time)}};
        merged.vertices.insert(merged.vertices.end(), path.vertices.begin(), path.vertices.end());
        path = std::move(merged);
      }
      plan[id] = std::move(path);
    }
    return plan;
  }

  Plan sequential_fallback(const Plan& committed, const std::vector<Agent>& fresh, int now, int k) {
    Plan plan = committed;
    int start = k == 1 ? now : std::max(now, static_cast<int>(plan_makespan(committed)));
    for (const Agent& a : fresh) {
      Path path = sequence_step(graph_, a, start);
      start = path.arrival_time();
      plan[a.id] = std::move(path);
    }
    return plan;
  }

  std::vector<Path> call_hook(std::span<const Agent> agents, const Plan& committed, int now) {
    auto paths = policy_.hook(graph_, agents, committed, now);
    if (paths.size() != agents.size()) throw InvalidPath("planner hook returned the wrong number of paths");
    return paths;
  }

  void verify(const Plan& plan, const Plan& committed, int now) const {
    for (const Agent& a : revealed_) {
      auto it = plan.find(a.id);
      if (it == plan.end()) throw UnplannedAgent("agent " + std::to_string(a.id) + " left without a path");
      validate_path(graph_, a, it->second);
      auto old = committed.find(a.id);
      if (old == committed.end()) continue;
      if (policy_.mode != ControllabilityMode::All) {
        if (old->second != it->second) throw InvalidPath("committed path of agent " + std::to_string(a.id) + " changed");
        continue;
      }
      for (int t = std::min(old->second.start_time, it->second.start_time); t <= now; ++t) {
        if (old->second.at(t) != it->second.at(t)) {
          throw InvalidPath("executed prefix of agent " + std::to_string(a.id) + " changed");
        }
      }
    }
    if (!detect_conflicts(plan).empty()) throw InvalidPath("planner produced colliding paths");
  }

  RevealSource& source_;
  const OnlinePolicy& policy_;
  SearchLimits limits_;
  Graph graph_;
  std::vector<Agent> revealed_;
};

}  // namespace

SimulationTrace run(RevealSource& source, const OnlinePolicy& policy, const SearchLimits& limits) {
  return Runner(source, policy, limits).run();
}

SimulationTrace run(const OnlineInstance& inst, const OnlinePolicy& policy, const SearchLimits& limits) {
  InstanceSource source(inst);
  return run(source, policy, limits);
}

GlobalBoundCheck check_global_bounds(const SimulationTrace& trace, const OnlineInstance& inst) {
  GlobalBoundCheck out;
  const auto groups = partition_by_release(inst);
  if (groups.count() == 0) {
    out.flow_ok = out.make_ok = true;
    return out;
  }
  const auto bounds = rationality_bounds(inst, groups, groups.count());
  const Metrics m = evaluate(trace.final_plan, inst);
  out.flow_bound = bounds.flow_bound;
  out.make_bound = bounds.make_bound;
  out.flow_ok = m.flowtime <= bounds.flow_bound;
  out.make_ok = m.makespan <= bounds.make_bound;
  return out;
}

GlobalBoundCheck check_global_bounds(const SimulationTrace& trace) { return check_global_bounds(trace, trace.instance); }

}  // namespace omapf
