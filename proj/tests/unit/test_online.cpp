#include <doctest.h>

#include <algorithm>
#include <random>

#include "omapf/adversary.hpp"
#include "omapf/bench.hpp"
#include "omapf/errors.hpp"
#include "omapf/online.hpp"

using namespace omapf;

namespace {

std::vector<OnlinePolicy> rational_policies() {
  std::vector<OnlinePolicy> out{OnlinePolicy::sequence()};
  for (auto mode : {ControllabilityMode::NewSingle, ControllabilityMode::New, ControllabilityMode::All}) {
    for (auto obj : {Objective::Flowtime, Objective::Makespan}) out.push_back(OnlinePolicy::opt_rational(mode, obj));
  }
  return out;
}

// Releases interleaved on a 3x3 ring so that agents interact.
OnlineInstance ring_instance() {
  return OnlineInstance(build_grid(3, 3, {Cell{1, 1}}), {{1, 0, 7, 0}, {2, 7, 0, 1}, {3, 2, 5, 1}, {4, 5, 2, 3}});
}

}  // namespace

TEST_CASE("shortest path ties prefer the smaller next vertex") {
  const Graph g = build_grid(2, 2);
  CHECK(shortest_path(g, 0, 3) == std::vector<VertexId>{0, 1, 3});
  CHECK(shortest_path(g, 3, 0) == std::vector<VertexId>{3, 1, 0});
  const Path p = sequence_step(g, Agent{1, 0, 3, 2}, 5);
  CHECK(p.start_time == 5);
  CHECK(sequence_step(g, Agent{1, 0, 3, 7}, 5).start_time == 7);
}

TEST_CASE("policy configuration") {
  CHECK_NOTHROW(check_policy(OnlinePolicy::sequence()));
  OnlinePolicy bad = OnlinePolicy::sequence();
  bad.mode = ControllabilityMode::All;
  CHECK_THROWS_AS(check_policy(bad), ConfigError);
  CHECK_THROWS_AS(check_policy(OnlinePolicy::custom(ControllabilityMode::New, {})), ConfigError);
  CHECK(rationalize_wrap(OnlinePolicy::sequence()).rationalized);
}

TEST_CASE("sequence routes one agent after another") {
  const OnlineInstance inst(build_grid(1, 3), {{1, 0, 2, 0}, {2, 2, 0, 0}, {3, 1, 2, 9}});
  const auto trace = run(inst, OnlinePolicy::sequence());
  CHECK(trace.final_plan.at(1) == Path{0, {0, 1, 2}});
  CHECK(trace.final_plan.at(2) == Path{2, {2, 1, 0}});
  CHECK(trace.final_plan.at(3) == Path{9, {1, 2}});
  CHECK(trace.snapshots.size() == 2);
  CHECK(trace.metrics == Metrics{2 + 4 + 1, 10, 7 - 5});
}

TEST_CASE("every policy keeps its commitments") {
  const OnlineInstance inst = ring_instance();
  auto policies = rational_policies();
  for (auto mode : {ControllabilityMode::NewSingle, ControllabilityMode::New, ControllabilityMode::All}) {
    policies.push_back(make_wasteful_policy(mode));
  }
  for (const OnlinePolicy& policy : policies) {
    const auto trace = run(inst, policy);
    REQUIRE(trace.snapshots.size() == 3);
    CHECK(detect_conflicts(trace.final_plan).empty());
    for (std::size_t k = 1; k < trace.snapshots.size(); ++k) {
      const Plan& before = trace.snapshots[k - 1].plan;
      const Plan& after = trace.snapshots[k].plan;
      const int now = trace.snapshots[k].release;
      for (const auto& [id, path] : before) {
        const Path& next = after.at(id);
        if (policy.mode != ControllabilityMode::All) {
          CHECK(next == path);
          continue;
        }
        for (int t = 0; t <= now; ++t) CHECK(next.at(t) == path.at(t));
      }
    }
  }
}

TEST_CASE("mode all replans an agent already on the graph") {
  // Agent 2 appears in front of agent 1, which is mid-route at time 1.
  const OnlineInstance inst(build_grid(1, 4), {{1, 0, 3, 0}, {2, 2, 3, 1}});
  const auto trace = run(inst, OnlinePolicy::opt_rational(ControllabilityMode::All, Objective::Flowtime));
  CHECK(detect_conflicts(trace.final_plan).empty());
  CHECK(trace.final_plan.at(1).at(1) == 1);
  CHECK(trace.snapshots.back().rational);
  CHECK(trace.metrics.flowtime == 3 + 1);
}

TEST_CASE("opt-rational plans are rational at every release") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 15; ++trial) {
    RandomSpec spec;
    spec.height = 4;
    spec.width = 4;
    spec.agents = 5;
    spec.max_release = 4;
    spec.seed = 40 + static_cast<std::uint64_t>(trial);
    const OnlineInstance inst = gen_random(spec);
    for (const OnlinePolicy& policy : rational_policies()) {
      const auto trace = run(inst, policy);
      for (const Snapshot& s : trace.snapshots) CHECK(is_rational_at(s.plan, trace.instance, s.group));
      const auto global = check_global_bounds(trace);
      CHECK(global.flow_ok);
      CHECK(global.make_ok);
    }
  }
}

TEST_CASE("the wasteful policy is irrational until wrapped") {
  const OnlineInstance inst = ring_instance();
  for (auto mode : {ControllabilityMode::NewSingle, ControllabilityMode::New, ControllabilityMode::All}) {
    const auto raw = run(inst, make_wasteful_policy(mode));
    for (const Snapshot& s : raw.snapshots) CHECK_FALSE(s.rational);
    const auto wrapped = run(inst, rationalize_wrap(make_wasteful_policy(mode)));
    for (const Snapshot& s : wrapped.snapshots) {
      CHECK(s.rational);
      CHECK(s.fallback);
    }
  }
}

TEST_CASE("replaying the line optimum is feasible but irrational") {
  const OnlineInstance inst = gen_line(4);
  const auto trace = run(inst, make_replay_policy(line_optimal_witness(4)));
  CHECK(trace.metrics.flowtime == 25);
  CHECK(trace.metrics.makespan == 11);
  const bool all_rational =
      std::all_of(trace.snapshots.begin(), trace.snapshots.end(), [](const Snapshot& s) { return s.rational; });
  CHECK_FALSE(all_rational);
}

TEST_CASE("broken custom planners are caught") {
  const OnlineInstance inst = ring_instance();
  auto colliding = OnlinePolicy::custom(ControllabilityMode::New, [](const Graph& g, std::span<const Agent> agents, const Plan&, int now) {
    std::vector<Path> out;
    for (const Agent& a : agents) out.push_back(Path{now, shortest_path(g, a.start, a.goal)});
    return out;
  });
  CHECK_THROWS_AS(run(inst, colliding), InvalidPath);
  auto short_answer =
      OnlinePolicy::custom(ControllabilityMode::New, [](const Graph&, std::span<const Agent>, const Plan&, int) { return std::vector<Path>{}; });
  CHECK_THROWS_AS(run(inst, short_answer), InvalidPath);
  auto rewrites_history = OnlinePolicy::custom(
      ControllabilityMode::All, [](const Graph& g, std::span<const Agent> agents, const Plan&, int now) {
        std::vector<Path> out;
        // Agents start at once on the first call, then get pushed back past steps already taken.
        int start = now == 0 ? 0 : now + 20;
        for (const Agent& a : agents) {
          out.push_back(Path{std::max(start, a.release), shortest_path(g, a.start, a.goal)});
          start = out.back().arrival_time();
        }
        return out;
      });
  CHECK_THROWS_AS(run(inst, rewrites_history), InvalidPath);
}

TEST_CASE("sources must reveal in time order") {
  class Backwards : public RevealSource {
   public:
    const Graph& graph() const override { return g_; }
    std::optional<int> next_release(const Plan&) override {
      if (step_ >= 2) return std::nullopt;
      return step_ == 0 ? 5 : 3;
    }
    std::vector<Agent> reveal(int time, const Plan&) override {
      ++step_;
      return {Agent{step_, 0, 1, time}};
    }

   private:
    Graph g_ = build_grid(1, 2);
    int step_ = 0;
  };
  Backwards source;
  CHECK_THROWS_AS(run(source, OnlinePolicy::sequence()), ProtocolViolation);
}
