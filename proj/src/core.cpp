#include "omapf/core.hpp"

#include <algorithm>
#include <numeric>

#include "omapf/errors.hpp"

namespace omapf {

OnlineInstance::OnlineInstance(Graph graph, std::vector<Agent> agents)
    : graph_(std::move(graph)), agents_(std::move(agents)) {
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const Agent& a = agents_[i];
    const std::string who = "agent " + std::to_string(a.id);
    if (a.id != static_cast<AgentId>(i + 1)) {
      throw InvalidInstance("agent ids must be 1..m in list order; found " + std::to_string(a.id) + " at position " +
                            std::to_string(i + 1));
    }
    if (!graph_.valid(a.start) || !graph_.valid(a.goal)) throw InvalidInstance(who + ": vertex out of range");
    if (a.start == a.goal) throw InvalidInstance(who + ": start equals goal");
    if (a.release < 0) throw InvalidInstance(who + ": negative release time");
    if (i > 0 && a.release < agents_[i - 1].release) throw InvalidInstance(who + ": releases not sorted");
  }
}

int OnlineInstance::dist(AgentId id) const {
  const Agent& a = agent(id);
  return graph_.distance(a.start, a.goal);
}

std::vector<AgentId> ReleaseGroups::revealed_through(int k) const {
  std::vector<AgentId> out;
  for (int j = 1; j <= k; ++j) {
    const auto& g = group(j);
    out.insert(out.end(), g.agents.begin(), g.agents.end());
  }
  return out;
}

std::vector<AgentId> ReleaseGroups::revealed_before(int k) const { return revealed_through(k - 1); }

ReleaseGroups partition_by_release(const OnlineInstance& inst) {
  ReleaseGroups out;
  for (const Agent& a : inst.agents()) {
    if (out.groups.empty() || out.groups.back().release != a.release) out.groups.push_back({a.release, {}});
    out.groups.back().agents.push_back(a.id);
  }
  return out;
}

std::optional<VertexId> Path::occupancy(int t) const {
  if (t < start_time || t >= arrival_time()) return std::nullopt;
  return vertices[static_cast<std::size_t>(t - start_time)];
}

std::optional<VertexId> Path::at(int t) const {
  if (t < start_time || t > arrival_time()) return std::nullopt;
  return vertices[static_cast<std::size_t>(t - start_time)];
}

int Path::waits() const {
  int n = 0;
  for (std::size_t j = 1; j < vertices.size(); ++j) n += vertices[j] == vertices[j - 1];
  return n;
}

std::optional<VertexId> occupancy(const Path& path, int t) { return path.occupancy(t); }

void validate_path(const Graph& g, const Agent& agent, const Path& path) {
  const std::string who = "path of agent " + std::to_string(agent.id);
  if (path.vertices.size() < 2) throw InvalidPath(who + " is too short");
  if (path.start_time < agent.release) throw InvalidPath(who + " starts before release");
  if (path.vertices.front() != agent.start) throw InvalidPath(who + " does not begin at the start vertex");
  if (path.vertices.back() != agent.goal) throw InvalidPath(who + " does not end at the goal vertex");
  for (std::size_t j = 0; j + 1 < path.vertices.size(); ++j) {
    VertexId u = path.vertices[j];
    VertexId v = path.vertices[j + 1];
    if (u == agent.goal) throw InvalidPath(who + " visits the goal before arriving");
    if (u != v && !g.adjacent(u, v)) throw InvalidPath(who + " uses a non-edge");
  }
}

namespace {

void conflicts_between(AgentId i, const Path& pi, AgentId j, const Path& pj, std::vector<Conflict>& out) {
  const int lo = std::max(pi.start_time, pj.start_time);
  const int hi = std::min(pi.arrival_time(), pj.arrival_time());  // exclusive for occupancy
  for (int t = lo; t < hi; ++t) {
    VertexId a = *pi.at(t);
    VertexId b = *pj.at(t);
    if (a == b) out.push_back({ConflictKind::Vertex, i, j, t, a, a});
    VertexId a2 = *pi.at(t + 1);
    VertexId b2 = *pj.at(t + 1);
    if (a != a2 && a == b2 && a2 == b) out.push_back({ConflictKind::Edge, i, j, t, a, a2});
  }
}

}  // namespace

std::vector<Conflict> detect_conflicts(const Plan& plan) {
  std::vector<Conflict> out;
  for (auto it = plan.begin(); it != plan.end(); ++it) {
    for (auto jt = std::next(it); jt != plan.end(); ++jt) conflicts_between(it->first, it->second, jt->first, jt->second, out);
  }
  std::sort(out.begin(), out.end(), [](const Conflict& x, const Conflict& y) {
    return std::tie(x.time, x.first, x.second, x.kind) < std::tie(y.time, y.first, y.second, y.kind);
  });
  return out;
}

std::vector<Conflict> detect_conflicts(const Plan& plan, const OnlineInstance&) { return detect_conflicts(plan); }

Metrics evaluate(const Plan& plan, std::span<const AgentId> agents, const OnlineInstance& inst) {
  Metrics m;
  std::int64_t dist_sum = 0;
  for (AgentId id : agents) {
    auto it = plan.find(id);
    if (it == plan.end()) throw UnplannedAgent("agent " + std::to_string(id) + " has no path");
    const Agent& a = inst.agent(id);
    m.flowtime += it->second.arrival_time() - a.release;
    m.makespan = std::max<std::int64_t>(m.makespan, it->second.arrival_time());
    dist_sum += inst.dist(id);
  }
  m.latency = m.flowtime - dist_sum;
  return m;
}

Metrics evaluate(const Plan& plan, const OnlineInstance& inst) {
  std::vector<AgentId> all(static_cast<std::size_t>(inst.size()));
  std::iota(all.begin(), all.end(), 1);
  return evaluate(plan, all, inst);
}

RationalityBounds rationality_bounds(const OnlineInstance& inst, const ReleaseGroups& groups, int k) {
  if (k < 1 || k > groups.count()) throw Error("group index out of range");
  const auto revealed = groups.revealed_through(k);
  RationalityBounds b;
  b.m_k = *std::max_element(revealed.begin(), revealed.end());

  std::int64_t dist_sum = 0;
  for (AgentId id : revealed) dist_sum += inst.dist(id);
  b.flow_bound = static_cast<std::int64_t>(revealed.size()) * dist_sum;

  // suffix[n] = sum_{i in [n, m_k]} dist_i
  std::vector<std::int64_t> suffix(static_cast<std::size_t>(b.m_k) + 2, 0);
  for (AgentId i = b.m_k; i >= 1; --i) suffix[static_cast<std::size_t>(i)] = suffix[static_cast<std::size_t>(i) + 1] + inst.dist(i);
  std::int64_t best = -1;
  for (AgentId n = 1; n <= b.m_k; ++n) {
    std::int64_t candidate = inst.agent(n).release + suffix[static_cast<std::size_t>(n)];
    if (candidate >= best) {
      best = candidate;
      b.n_k = n;
    }
  }
  b.make_bound = best;
  return b;
}

RationalityBounds rationality_bounds(const OnlineInstance& inst, int k) {
  return rationality_bounds(inst, partition_by_release(inst), k);
}

bool is_rational_at(const Plan& plan, const OnlineInstance& inst, int k) {
  const auto groups = partition_by_release(inst);
  const auto bounds = rationality_bounds(inst, groups, k);
  const auto revealed = groups.revealed_through(k);
  const Metrics m = evaluate(plan, revealed, inst);
  return m.flowtime <= bounds.flow_bound && m.makespan <= bounds.make_bound;
}

RatioReport make_ratio(std::int64_t algorithm_cost, std::int64_t optimal_cost) {
  return RatioReport{algorithm_cost, optimal_cost, algorithm_cost - optimal_cost};
}

double RatioReport::value() const {
  if (optimal_cost == 0) return algorithm_cost == 0 ? 1.0 : 0.0;
  return static_cast<double>(algorithm_cost) / static_cast<double>(optimal_cost);
}

std::string RatioReport::fraction() const {
  if (infinite()) return "inf";
  if (optimal_cost == 0) return "1/1";
  std::int64_t g = std::gcd(algorithm_cost, optimal_cost);
  return std::to_string(algorithm_cost / g) + "/" + std::to_string(optimal_cost / g);
}

}  // namespace omapf
