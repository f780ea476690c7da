#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "omapf/errors.hpp"
#include "omapf/search.hpp"

using namespace omapf;

namespace {

// Every legal single-agent path (ignoring other agents) with arrival <= horizon.
std::vector<Path> all_paths(const Graph& g, const Agent& a, int horizon) {
  std::vector<Path> out;
  std::vector<VertexId> walk;
  std::function<void(int, int)> extend = [&](int start, int t) {
    const VertexId v = walk.back();
    if (v == a.goal) {
      out.push_back(Path{start, walk});
      return;
    }
    if (t >= horizon) return;
    std::vector<VertexId> options(g.neighbors(v).begin(), g.neighbors(v).end());
    options.push_back(v);
    for (VertexId w : options) {
      walk.push_back(w);
      extend(start, t + 1);
      walk.pop_back();
    }
  };
  for (int start = a.release; start < horizon; ++start) {
    walk = {a.start};
    extend(start, start);
  }
  return out;
}

struct Best {
  std::int64_t flowtime = -1;
  std::int64_t makespan = -1;
};

// Exhaustive optimum over all conflict-free pairs of paths. Pairs are visited in
// order of arrival so hopeless ones can be skipped.
Best brute_force_pair(const Graph& g, const Agent& a, const Agent& b, int horizon) {
  auto by_arrival = [](const Path& x, const Path& y) { return x.arrival_time() < y.arrival_time(); };
  auto pa = all_paths(g, a, horizon);
  auto pb = all_paths(g, b, horizon);
  std::stable_sort(pa.begin(), pa.end(), by_arrival);
  std::stable_sort(pb.begin(), pb.end(), by_arrival);
  Best best;
  for (const Path& x : pa) {
    for (const Path& y : pb) {
      const std::int64_t flow = (x.arrival_time() - a.release) + (y.arrival_time() - b.release);
      const std::int64_t make = std::max(x.arrival_time(), y.arrival_time());
      const bool better_flow = best.flowtime < 0 || flow < best.flowtime;
      const bool better_make = best.makespan < 0 || make < best.makespan;
      if (!better_flow && !better_make) {
        if (y.arrival_time() >= x.arrival_time()) break;
        continue;
      }
      if (!detect_conflicts(Plan{{a.id, x}, {b.id, y}}).empty()) continue;
      if (better_flow) best.flowtime = flow;
      if (better_make) best.makespan = make;
    }
  }
  return best;
}

Metrics metrics_of(const Plan& plan, std::span<const Agent> agents) {
  Metrics m;
  for (const Agent& a : agents) {
    m.flowtime += plan.at(a.id).arrival_time() - a.release;
    m.makespan = std::max<std::int64_t>(m.makespan, plan.at(a.id).arrival_time());
  }
  return m;
}

}  // namespace

TEST_CASE("obstacle reservations") {
  DynamicObstacleSet obs;
  CHECK(obs.empty());
  obs.reserve_path(7, Path{2, {0, 1, 1, 2}});
  CHECK(obs.vertex_owner(0, 2) == 7);
  CHECK(obs.vertex_owner(1, 4) == 7);
  CHECK(obs.vertex_free(2, 5));  // arrival frees the goal
  CHECK(obs.vertex_free(0, 1));
  CHECK(obs.edge_owner(0, 1, 2) == 7);
  CHECK(obs.move_blocked(1, 0, 2));
  CHECK_FALSE(obs.move_blocked(1, 1, 3));
  CHECK(obs.move_blocked(2, 1, 4));
  CHECK(obs.horizon() == 5);
  CHECK(obs.vertex_reservation_count() == 3);
  CHECK(obs.edge_reservation_count() == 2);

  const Plan plan{{1, Path{0, {0, 1}}}, {2, Path{0, {3, 2}}}};
  CHECK(build_obstacles(plan).vertex_reservation_count() == 2);
  CHECK(build_obstacles(plan, {1}).vertex_reservation_count() == 1);
}

TEST_CASE("single agent on an empty world follows a shortest path") {
  const Graph g = build_grid(2, 2);
  const Path p = plan_min_arrival(g, Agent{1, 0, 3, 0}, {}, 4);
  CHECK(p.start_time == 4);
  // Both 0-1-3 and 0-2-3 are shortest; the smaller sequence wins.
  CHECK(p.vertices == std::vector<VertexId>{0, 1, 3});
}

TEST_CASE("single agent detours around a reserved vertex") {
  const Graph g = build_grid(2, 2);
  DynamicObstacleSet obs;
  obs.reserve_path(9, Path{0, {1, 1, 0}});
  const Path p = plan_min_arrival(g, Agent{1, 0, 3, 0}, obs, 0);
  CHECK(p.arrival_time() == 2);
  CHECK(p.vertices == std::vector<VertexId>{0, 2, 3});
}

TEST_CASE("waiting off the graph is preferred over waiting on it") {
  const Graph g = build_grid(1, 4);
  DynamicObstacleSet obs;
  obs.reserve_path(9, Path{0, {1, 1, 1, 0}});
  const Path p = plan_min_arrival(g, Agent{1, 0, 2, 0}, obs, 0);
  CHECK(p.arrival_time() == 5);
  CHECK(p.start_time == 3);
  CHECK(p.waits() == 0);
}

TEST_CASE("an agent may not enter an occupied start vertex") {
  const Graph g = build_grid(1, 3);
  DynamicObstacleSet obs;
  obs.reserve_path(9, Path{0, {0, 0, 1, 2}});
  const Path p = plan_min_arrival(g, Agent{1, 0, 1, 0}, obs, 0);
  CHECK(p.start_time >= 2);
  CHECK(detect_conflicts(Plan{{1, p}, {9, Path{0, {0, 0, 1, 2}}}}).empty());
}

TEST_CASE("pinned single-agent search starts where the agent stands") {
  const Graph g = build_grid(1, 4);
  const Path p = plan_min_arrival_from(g, Agent{1, 0, 3, 0}, 2, 5, {});
  CHECK(p.start_time == 5);
  CHECK(p.vertices == std::vector<VertexId>{2, 3});
  CHECK_THROWS_AS(plan_min_arrival_from(g, Agent{1, 0, 3, 0}, 3, 5, {}), InvalidPath);
}

TEST_CASE("search limits") {
  const Graph g = build_grid(1, 6);
  SearchLimits tight;
  tight.horizon_bound = 3;
  CHECK_THROWS_AS(plan_min_arrival(g, Agent{1, 0, 5, 0}, {}, 0, tight), BudgetExhausted);
  SearchLimits tiny;
  tiny.node_budget = 2;
  CHECK_THROWS_AS(plan_min_arrival(g, Agent{1, 0, 5, 0}, {}, 0, tiny), BudgetExhausted);
  CHECK_THROWS_AS(plan_min_arrival(g, Agent{1, 0, 5, 3}, {}, 2), Error);

  JointQuery q;
  q.agents = {{Agent{1, 0, 5, 0}, 0, {}}, {Agent{2, 5, 0, 0}, 0, {}}};
  CHECK_THROWS_AS(solve_joint(g, q, {}, tiny), BudgetExhausted);
}

TEST_CASE("joint search on a corridor swap") {
  // Two agents must pass each other on a strip with a side pocket.
  const Graph g = build_grid(2, 3, {Cell{1, 0}, Cell{1, 2}});
  const std::vector<Agent> agents{{1, 0, 2, 0}, {2, 2, 0, 0}};
  const Best want = brute_force_pair(g, agents[0], agents[1], 6);
  CHECK(want.flowtime == 6);
  CHECK(want.makespan == 4);
  const Plan flow = offline_optimal(g, agents, {}, Objective::Flowtime);
  const Plan make = offline_optimal(g, agents, {}, Objective::Makespan);
  CHECK(detect_conflicts(flow).empty());
  CHECK(detect_conflicts(make).empty());
  CHECK(metrics_of(flow, agents).flowtime == want.flowtime);
  CHECK(metrics_of(make, agents).makespan == want.makespan);
}

TEST_CASE("joint optimum matches exhaustive pairs on random small worlds") {
  std::mt19937 rng(5);
  const std::vector<Graph> worlds = {build_grid(2, 2), build_grid(1, 4), build_grid(2, 3, {Cell{1, 1}})};
  int compared = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const Graph& g = worlds[static_cast<std::size_t>(trial) % worlds.size()];
    const int n = g.vertex_count();
    auto pick = [&](VertexId avoid) {
      VertexId v = avoid;
      while (v == avoid) v = static_cast<VertexId>(rng() % static_cast<unsigned>(n));
      return v;
    };
    const VertexId s1 = pick(-1), s2 = pick(-1);
    const int r1 = static_cast<int>(rng() % 2);
    const int r2 = r1 + static_cast<int>(rng() % 2);
    const std::vector<Agent> agents{{1, s1, pick(s1), r1}, {2, s2, pick(s2), r2}};
    constexpr int kHorizon = 6;
    const Best want = brute_force_pair(g, agents[0], agents[1], kHorizon);
    const Plan flow = offline_optimal(g, agents, {}, Objective::Flowtime);
    const Plan make = offline_optimal(g, agents, {}, Objective::Makespan);
    REQUIRE(detect_conflicts(flow).empty());
    REQUIRE(detect_conflicts(make).empty());
    if (want.flowtime < 0) continue;
    ++compared;
    // A plan arriving after the horizon costs at least this much flowtime.
    if (want.flowtime <= kHorizon + 2 - r2) CHECK(metrics_of(flow, agents).flowtime == want.flowtime);
    CHECK(metrics_of(make, agents).makespan == want.makespan);
  }
  CHECK(compared >= 20);
}

TEST_CASE("the optimum does not depend on agent labels") {
  const Graph g = build_grid(3, 3, {Cell{1, 1}});
  const std::vector<Agent> a{{1, 0, 7, 0}, {2, 7, 0, 0}, {3, 2, 5, 0}};
  const std::vector<Agent> b{{1, 2, 5, 0}, {2, 0, 7, 0}, {3, 7, 0, 0}};
  for (auto obj : {Objective::Flowtime, Objective::Makespan}) {
    const Metrics ma = metrics_of(offline_optimal(g, a, {}, obj), a);
    const Metrics mb = metrics_of(offline_optimal(g, b, {}, obj), b);
    if (obj == Objective::Flowtime) CHECK(ma.flowtime == mb.flowtime);
    if (obj == Objective::Makespan) CHECK(ma.makespan == mb.makespan);
  }
}

TEST_CASE("makespan optimum also minimizes flowtime among makespan-optimal plans") {
  // Agent 2 can dawdle without affecting the makespan set by agent 1.
  const Graph g = build_grid(1, 6);
  const std::vector<Agent> agents{{1, 0, 5, 0}, {2, 3, 4, 0}};
  const Plan plan = offline_optimal(g, agents, {}, Objective::Makespan);
  const Metrics m = metrics_of(plan, agents);
  CHECK(m.makespan == 5);
  CHECK(m.flowtime == 6);
}

TEST_CASE("joint search respects frozen obstacles and pinned agents") {
  const Graph g = build_grid(1, 5);
  DynamicObstacleSet frozen;
  frozen.reserve_path(9, Path{0, {4, 3, 3, 3, 4}});
  JointQuery q;
  q.start_time = 1;
  q.agents = {{Agent{1, 0, 2, 0}, 1, VertexId{1}}, {Agent{2, 0, 1, 1}, 1, {}}};
  const JointResult r = solve_joint(g, q, frozen);
  const Path& p1 = r.plan.at(1);
  const Path& p2 = r.plan.at(2);
  CHECK(p1.start_time == 1);
  CHECK(p1.vertices.front() == 1);
  CHECK(p1.arrival_time() == 2);
  CHECK(p2.arrival_time() == 2);
  CHECK(r.flowtime == (2 - 0) + (2 - 1));
  CHECK(detect_conflicts(Plan{{1, p1}, {2, p2}, {9, Path{0, {4, 3, 3, 3, 4}}}}).empty());
}

TEST_CASE("makespan cap prunes plans") {
  const Graph g = build_grid(1, 4);
  JointQuery q;
  q.agents = {{Agent{1, 0, 3, 0}, 0, {}}, {Agent{2, 1, 2, 0}, 0, {}}};
  q.makespan_cap = 3;
  const JointResult r = solve_joint(g, q, {});
  CHECK(r.makespan <= 3);
  SearchLimits limits;
  limits.horizon_bound = 6;
  q.makespan_cap = 2;
  CHECK_THROWS_AS(solve_joint(g, q, {}, limits), BudgetExhausted);
}
