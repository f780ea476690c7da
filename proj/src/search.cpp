#include "omapf/search.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>

#include "omapf/errors.hpp"

namespace omapf {

std::size_t DynamicObstacleSet::EdgeKeyHash::operator()(const EdgeKey& k) const {
  std::uint64_t h = static_cast<std::uint32_t>(k.from);
  h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(k.to);
  h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(k.time);
  return static_cast<std::size_t>(h ^ (h >> 29));
}

void DynamicObstacleSet::reserve_path(AgentId owner, const Path& path) {
  for (int t = path.start_time; t < path.arrival_time(); ++t) {
    VertexId v = *path.at(t);
    VertexId w = *path.at(t + 1);
    vertices_[vertex_key(v, t)] = owner;
    if (v != w) edges_[EdgeKey{v, w, t}] = owner;
    horizon_ = std::max(horizon_, t + 1);
  }
}

std::optional<AgentId> DynamicObstacleSet::vertex_owner(VertexId v, int t) const {
  auto it = vertices_.find(vertex_key(v, t));
  if (it == vertices_.end()) return std::nullopt;
  return it->second;
}

std::optional<AgentId> DynamicObstacleSet::edge_owner(VertexId from, VertexId to, int t) const {
  auto it = edges_.find(EdgeKey{from, to, t});
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

DynamicObstacleSet build_obstacles(const Plan& plan, const std::set<AgentId>& excluded) {
  DynamicObstacleSet out;
  for (const auto& [id, path] : plan) {
    if (!excluded.contains(id)) out.reserve_path(id, path);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single-agent space-time search

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

struct SingleStart {
  bool pinned = false;
  VertexId position = 0;  // when pinned
  int time = 0;           // pinned time, or earliest entry time
};

Path single_search(const Graph& g, const Agent& agent, const DynamicObstacleSet& obstacles, const SingleStart& start,
                   const SearchLimits& limits) {
  const int n = g.vertex_count();
  const int t0 = start.time;
  const int horizon = limits.horizon_bound > 0 ? limits.horizon_bound : std::max(obstacles.horizon(), t0) + n + 1;
  const VertexId goal = agent.goal;
  const VertexId entry = agent.start;

  if (start.pinned && start.position == goal) throw InvalidPath("agent is already at its goal");

  // Forward reachability, one layer per time step starting at t0.
  std::vector<std::vector<char>> layers;
  std::vector<char> first(static_cast<std::size_t>(n), 0);
  if (start.pinned) {
    first[static_cast<std::size_t>(start.position)] = 1;
  } else if (obstacles.vertex_free(entry, t0)) {
    first[static_cast<std::size_t>(entry)] = 1;
  }
  layers.push_back(std::move(first));

  std::int64_t nodes = 0;
  int arrival = -1;
  for (int t = t0; arrival < 0; ++t) {
    if (t + 1 > horizon) {
      throw BudgetExhausted("agent " + std::to_string(agent.id) + ": no path within horizon " + std::to_string(horizon));
    }
    const auto& cur = layers.back();
    std::vector<char> next(static_cast<std::size_t>(n), 0);
    bool reached = false;
    for (VertexId v = 0; v < n; ++v) {
      if (!cur[static_cast<std::size_t>(v)]) continue;
      if (++nodes > limits.node_budget) throw BudgetExhausted("single-agent search exceeded its node budget");
      auto visit = [&](VertexId w) {
        if (obstacles.move_blocked(v, w, t)) return;
        if (w == goal) {
          reached = true;
        } else if (obstacles.vertex_free(w, t + 1)) {
          next[static_cast<std::size_t>(w)] = 1;
        }
      };
      visit(v);
      for (VertexId w : g.neighbors(v)) visit(w);
    }
    if (reached) {
      arrival = t + 1;
      break;
    }
    if (!start.pinned && obstacles.vertex_free(entry, t + 1)) next[static_cast<std::size_t>(entry)] = 1;
    layers.push_back(std::move(next));
  }

  // waits[i][v]: fewest on-graph waits from (v, t0 + i) to (goal, arrival).
  const int steps = arrival - t0;
  std::vector<std::vector<int>> waits(static_cast<std::size_t>(steps), std::vector<int>(static_cast<std::size_t>(n), kInf));
  auto transition_cost = [&](VertexId v, VertexId w, int t) -> int {
    // Cost of v -> w between t and t+1 plus the remaining waits, or kInf.
    if (obstacles.move_blocked(v, w, t)) return kInf;
    if (t + 1 == arrival) return w == goal ? 0 : kInf;
    if (w == goal) return kInf;
    int rest = waits[static_cast<std::size_t>(t + 1 - t0)][static_cast<std::size_t>(w)];
    if (rest >= kInf) return kInf;
    return rest + (v == w ? 1 : 0);
  };
  for (int i = steps - 1; i >= 0; --i) {
    const int t = t0 + i;
    for (VertexId v = 0; v < n; ++v) {
      if (!layers[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)]) continue;
      int best = transition_cost(v, v, t);
      for (VertexId w : g.neighbors(v)) best = std::min(best, transition_cost(v, w, t));
      waits[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)] = best;
    }
  }

  auto greedy = [&](VertexId v, int t) {
    std::vector<VertexId> seq{v};
    while (t < arrival) {
      const int target = t + 1 == arrival ? 0 : waits[static_cast<std::size_t>(t - t0)][static_cast<std::size_t>(v)];
      std::vector<VertexId> options(g.neighbors(v).begin(), g.neighbors(v).end());
      options.insert(std::lower_bound(options.begin(), options.end(), v), v);
      VertexId chosen = -1;
      for (VertexId w : options) {
        if (transition_cost(v, w, t) == (t + 1 == arrival ? 0 : target)) {
          chosen = w;
          break;
        }
      }
      v = chosen;
      seq.push_back(v);
      ++t;
    }
    return seq;
  };

  if (start.pinned) return Path{t0, greedy(start.position, t0)};

  int best_waits = kInf;
  for (int t = t0; t < arrival; ++t) {
    if (!obstacles.vertex_free(entry, t)) continue;
    best_waits = std::min(best_waits, waits[static_cast<std::size_t>(t - t0)][static_cast<std::size_t>(entry)]);
  }
  Path best{0, {}};
  for (int t = t0; t < arrival; ++t) {
    if (!obstacles.vertex_free(entry, t)) continue;
    if (waits[static_cast<std::size_t>(t - t0)][static_cast<std::size_t>(entry)] != best_waits) continue;
    auto seq = greedy(entry, t);
    if (best.vertices.empty() || seq < best.vertices) best = Path{t, std::move(seq)};
  }
  return best;
}

}  // namespace

Path plan_min_arrival(const Graph& g, const Agent& agent, const DynamicObstacleSet& obstacles, int earliest_start,
                      const SearchLimits& limits) {
  if (earliest_start < agent.release) throw Error("earliest start precedes the agent's release");
  return single_search(g, agent, obstacles, SingleStart{false, 0, earliest_start}, limits);
}

Path plan_min_arrival_from(const Graph& g, const Agent& agent, VertexId position, int now,
                           const DynamicObstacleSet& obstacles, const SearchLimits& limits) {
  return single_search(g, agent, obstacles, SingleStart{true, position, now}, limits);
}

// ---------------------------------------------------------------------------
// Joint search

namespace {

using Status = std::int16_t;
constexpr Status kDone = -2;
constexpr Status kPending = -1;
constexpr Status kUnset = -3;

struct JointNode {
  int time = 0;  // `cur` holds positions at time; next[0..depth) positions at time + 1
  int depth = 0;
  bool full = false;
  std::vector<Status> cur;
  std::vector<Status> next;
  std::int64_t g_flow = 0;
  std::int64_t g_make = 0;
  std::int64_t f_flow = 0;
  std::int64_t f_make = 0;
  std::int64_t h_flow = 0;
  std::int64_t parent = -1;
};

class JointSearch {
 public:
  JointSearch(const Graph& g, const JointQuery& q, const DynamicObstacleSet& frozen, const SearchLimits& limits)
      : g_(g), q_(q), frozen_(frozen), limits_(limits), n_(static_cast<int>(q.agents.size())) {
    int latest = std::max(q.start_time, frozen.horizon());
    for (const auto& ja : q.agents) {
      earliest_.push_back(std::max(ja.earliest_start, q.start_time));
      latest = std::max(latest, earliest_.back());
      dist_.push_back(g.distances_from(ja.agent.goal));
    }
    horizon_ = limits.horizon_bound > 0 ? limits.horizon_bound : latest + n_ * g.vertex_count() + 1;
  }

  JointResult run() {
    JointNode root;
    root.time = q_.start_time - 1;
    root.full = true;
    root.cur.resize(static_cast<std::size_t>(n_));
    root.next.assign(static_cast<std::size_t>(n_), kUnset);
    for (int i = 0; i < n_; ++i) {
      const auto& ja = q_.agents[static_cast<std::size_t>(i)];
      root.cur[static_cast<std::size_t>(i)] = ja.position_at_start ? static_cast<Status>(*ja.position_at_start) : kPending;
      root.g_flow += std::max(0, root.time - ja.agent.release);
    }
    skip_done(root);
    score(root);
    push(std::move(root));

    while (!open_.empty()) {
      const std::int64_t idx = open_.top().index;
      open_.pop();
      const JointNode& node = nodes_[static_cast<std::size_t>(idx)];
      auto it = best_g_.find(key(node));
      if (it != best_g_.end() && it->second < node.g_flow) continue;
      ++expanded_;
      if (node.full && all_done(node)) return reconstruct(idx);
      expand(idx);
    }
    throw BudgetExhausted("joint search found no plan within horizon " + std::to_string(horizon_));
  }

 private:
  struct OpenEntry {
    std::int64_t f1, f2, h, seq, index;
    bool operator>(const OpenEntry& o) const {
      return std::tie(f1, f2, h, seq) > std::tie(o.f1, o.f2, o.h, o.seq);
    }
  };

  int dist(int i, VertexId v) const { return dist_[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)]; }
  const Agent& agent(int i) const { return q_.agents[static_cast<std::size_t>(i)].agent; }

  static bool all_done(const JointNode& node) {
    return std::all_of(node.cur.begin(), node.cur.end(), [](Status s) { return s == kDone; });
  }

  // Advances over agents that have no choice left; completes the time step.
  void skip_done(JointNode& node) const {
    for (;;) {
      while (node.depth < n_ && node.cur[static_cast<std::size_t>(node.depth)] == kDone) {
        node.next[static_cast<std::size_t>(node.depth)] = kDone;
        ++node.depth;
      }
      if (node.depth < n_) return;
      node.cur = node.next;
      std::fill(node.next.begin(), node.next.end(), kUnset);
      node.depth = 0;
      node.time += 1;
      node.full = true;
      if (all_done(node)) return;
    }
  }

  void score(JointNode& node) const {
    std::int64_t h = 0;
    std::int64_t make = node.g_make;
    for (int i = 0; i < n_; ++i) {
      const bool assigned = i < node.depth;
      const Status s = assigned ? node.next[static_cast<std::size_t>(i)] : node.cur[static_cast<std::size_t>(i)];
      const int tau = assigned ? node.time + 1 : node.time;
      if (s == kDone) continue;
      std::int64_t arrival;
      if (s == kPending) {
        arrival = std::max(tau + 1, earliest_[static_cast<std::size_t>(i)]) + dist(i, agent(i).start);
        h += arrival - std::max(tau, agent(i).release);
      } else {
        arrival = tau + dist(i, s);
        h += dist(i, s);
      }
      make = std::max(make, arrival);
    }
    node.h_flow = h;
    node.f_flow = node.g_flow + h;
    node.f_make = make;
  }

  std::string key(const JointNode& node) const {
    std::string k;
    k.reserve(8 + 4 * static_cast<std::size_t>(n_));
    auto put = [&k](std::int32_t x) { k.append(reinterpret_cast<const char*>(&x), sizeof x); };
    put(node.time);
    put(node.depth);
    k.append(reinterpret_cast<const char*>(node.cur.data()), node.cur.size() * sizeof(Status));
    k.append(reinterpret_cast<const char*>(node.next.data()), static_cast<std::size_t>(node.depth) * sizeof(Status));
    return k;
  }

  void push(JointNode node) {
    if (q_.makespan_cap && node.f_make > *q_.makespan_cap) return;
    auto k = key(node);
    auto [it, inserted] = best_g_.try_emplace(std::move(k), node.g_flow);
    if (!inserted) {
      if (it->second <= node.g_flow) return;
      it->second = node.g_flow;
    }
    if (static_cast<std::int64_t>(nodes_.size()) >= limits_.node_budget) {
      throw BudgetExhausted("joint search exceeded its node budget of " + std::to_string(limits_.node_budget));
    }
    const bool flow_first = q_.objective == Objective::Flowtime;
    OpenEntry e{flow_first ? node.f_flow : node.f_make, flow_first ? node.f_make : node.f_flow, node.h_flow, seq_++,
                static_cast<std::int64_t>(nodes_.size())};
    nodes_.push_back(std::move(node));
    open_.push(e);
  }

  // Vertex reached by agent i's move this step, or -1 when it makes none.
  VertexId move_target(int i, Status from, Status to) const {
    if (from < 0) return -1;
    if (to == kDone) return agent(i).goal;
    return to;
  }

  void expand(std::int64_t idx) {
    const int a = nodes_[static_cast<std::size_t>(idx)].depth;
    const int t = nodes_[static_cast<std::size_t>(idx)].time;
    const Status from = nodes_[static_cast<std::size_t>(idx)].cur[static_cast<std::size_t>(a)];
    const auto& ja = q_.agents[static_cast<std::size_t>(a)];

    std::vector<Status> options;
    if (from == kPending) {
      if (t + 1 >= earliest_[static_cast<std::size_t>(a)]) options.push_back(static_cast<Status>(ja.agent.start));
      options.push_back(kPending);
    } else if (ja.position_at_start && t == q_.start_time - 1) {
      options.push_back(from);
    } else {
      std::vector<VertexId> ws(g_.neighbors(from).begin(), g_.neighbors(from).end());
      ws.insert(std::lower_bound(ws.begin(), ws.end(), static_cast<VertexId>(from)), from);
      for (VertexId w : ws) options.push_back(w == ja.agent.goal ? kDone : static_cast<Status>(w));
    }

    for (Status to : options) {
      if (t + 1 > horizon_) continue;
      const JointNode& node = nodes_[static_cast<std::size_t>(idx)];
      if (!legal(node, a, from, to)) continue;
      JointNode child;
      child.time = node.time;
      child.depth = a + 1;
      child.cur = node.cur;
      child.next = node.next;
      child.next[static_cast<std::size_t>(a)] = to;
      child.g_flow = node.g_flow + (ja.agent.release <= t ? 1 : 0);
      child.g_make = node.g_make;
      if (to == kDone) child.g_make = std::max<std::int64_t>(child.g_make, t + 1);
      child.parent = idx;
      skip_done(child);
      score(child);
      push(std::move(child));
    }
  }

  bool legal(const JointNode& node, int a, Status from, Status to) const {
    const int t = node.time;
    if (to >= 0) {
      if (!frozen_.vertex_free(to, t + 1)) return false;
      for (int b = 0; b < a; ++b) {
        if (node.next[static_cast<std::size_t>(b)] == to) return false;
      }
    }
    const VertexId target = move_target(a, from, to);
    if (target >= 0 && target != from) {
      if (frozen_.move_blocked(from, target, t)) return false;
      for (int b = 0; b < a; ++b) {
        const Status bf = node.cur[static_cast<std::size_t>(b)];
        const VertexId bt = move_target(b, bf, node.next[static_cast<std::size_t>(b)]);
        if (bt >= 0 && bf == target && bt == from) return false;
      }
    }
    return true;
  }

  JointResult reconstruct(std::int64_t idx) const {
    std::vector<const JointNode*> chain;
    for (std::int64_t i = idx; i >= 0; i = nodes_[static_cast<std::size_t>(i)].parent) {
      const JointNode& node = nodes_[static_cast<std::size_t>(i)];
      if (node.full && node.time >= q_.start_time) chain.push_back(&node);
    }
    std::reverse(chain.begin(), chain.end());

    JointResult out;
    out.expanded = expanded_;
    for (int i = 0; i < n_; ++i) {
      Path path{0, {}};
      for (const JointNode* node : chain) {
        const Status s = node->cur[static_cast<std::size_t>(i)];
        if (s >= 0) {
          if (path.vertices.empty()) path.start_time = node->time;
          path.vertices.push_back(s);
        } else if (s == kDone && !path.vertices.empty()) {
          path.vertices.push_back(agent(i).goal);
          break;
        }
      }
      out.flowtime += path.arrival_time() - agent(i).release;
      out.makespan = std::max<std::int64_t>(out.makespan, path.arrival_time());
      out.plan.emplace(agent(i).id, std::move(path));
    }
    return out;
  }

  const Graph& g_;
  const JointQuery& q_;
  const DynamicObstacleSet& frozen_;
  SearchLimits limits_;
  int n_;
  int horizon_ = 0;
  std::vector<int> earliest_;
  std::vector<std::span<const int>> dist_;

  std::vector<JointNode> nodes_;
  std::unordered_map<std::string, std::int64_t> best_g_;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open_;
  std::int64_t seq_ = 0;
  std::int64_t expanded_ = 0;
};

JointResult solve_single(const Graph& g, const JointAgent& ja, int start_time, const DynamicObstacleSet& frozen,
                         const SearchLimits& limits) {
  Path path = ja.position_at_start
                  ? plan_min_arrival_from(g, ja.agent, *ja.position_at_start, start_time, frozen, limits)
                  : plan_min_arrival(g, ja.agent, frozen, std::max({ja.earliest_start, start_time, ja.agent.release}), limits);
  JointResult out;
  out.flowtime = path.arrival_time() - ja.agent.release;
  out.makespan = path.arrival_time();
  out.plan.emplace(ja.agent.id, std::move(path));
  return out;
}

}  // namespace

JointResult solve_joint(const Graph& g, const JointQuery& query, const DynamicObstacleSet& frozen,
                        const SearchLimits& limits) {
  for (const auto& ja : query.agents) {
    if (ja.position_at_start && *ja.position_at_start == ja.agent.goal) {
      throw InvalidPath("agent " + std::to_string(ja.agent.id) + " is pinned on its goal");
    }
  }
  if (query.agents.empty()) return {};
  JointSearch search(g, query, frozen, limits);
  return search.run();
}

JointResult solve_offline(const Graph& g, const JointQuery& query, const DynamicObstacleSet& frozen,
                          const SearchLimits& limits) {
  using Group = std::vector<std::size_t>;
  std::vector<Group> groups;
  for (std::size_t i = 0; i < query.agents.size(); ++i) groups.push_back({i});

  std::map<std::pair<Group, std::optional<int>>, JointResult> cache;
  auto solve_group = [&](const Group& members, std::optional<int> cap) -> const JointResult& {
    auto cache_key = std::make_pair(members, cap);
    if (auto it = cache.find(cache_key); it != cache.end()) return it->second;
    JointResult result;
    if (members.size() == 1) {
      result = solve_single(g, query.agents[members.front()], query.start_time, frozen, limits);
    } else {
      JointQuery sub;
      sub.start_time = query.start_time;
      sub.objective = cap ? Objective::Flowtime : query.objective;
      sub.makespan_cap = cap;
      for (std::size_t i : members) sub.agents.push_back(query.agents[i]);
      result = solve_joint(g, sub, frozen, limits);
    }
    return cache.emplace(std::move(cache_key), std::move(result)).first->second;
  };

  for (;;) {
    std::vector<const JointResult*> chosen;
    for (const auto& grp : groups) chosen.push_back(&solve_group(grp, query.makespan_cap));
    if (query.objective == Objective::Makespan) {
      // Groups finishing early may trade slack for flowtime.
      std::int64_t makespan = 0;
      for (const auto* r : chosen) makespan = std::max(makespan, r->makespan);
      for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].size() > 1 && chosen[i]->makespan < makespan) {
          chosen[i] = &solve_group(groups[i], static_cast<int>(makespan));
        }
      }
    }

    JointResult combined;
    std::map<AgentId, std::size_t> owner;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      for (const auto& [id, path] : chosen[i]->plan) {
        combined.plan.emplace(id, path);
        owner[id] = i;
      }
      combined.flowtime += chosen[i]->flowtime;
      combined.makespan = std::max(combined.makespan, chosen[i]->makespan);
      combined.expanded += chosen[i]->expanded;
    }

    std::optional<std::pair<std::size_t, std::size_t>> clash;
    for (const Conflict& c : detect_conflicts(combined.plan)) {
      std::size_t a = owner[c.first];
      std::size_t b = owner[c.second];
      if (a != b) {
        clash = std::minmax(a, b);
        break;
      }
    }
    if (!clash) return combined;

    Group merged = groups[clash->first];
    merged.insert(merged.end(), groups[clash->second].begin(), groups[clash->second].end());
    std::sort(merged.begin(), merged.end());
    groups[clash->first] = std::move(merged);
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(clash->second));
  }
}

Plan offline_optimal(const Graph& g, std::span<const Agent> agents, const DynamicObstacleSet& frozen,
                     Objective objective, const SearchLimits& limits) {
  if (agents.empty()) return {};
  JointQuery query;
  query.objective = objective;
  query.start_time = std::numeric_limits<int>::max();
  for (const Agent& a : agents) {
    query.agents.push_back(JointAgent{a, a.release, std::nullopt});
    query.start_time = std::min(query.start_time, a.release);
  }
  return solve_offline(g, query, frozen, limits).plan;
}

}  // namespace omapf
