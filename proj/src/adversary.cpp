#include "omapf/adversary.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "omapf/errors.hpp"

namespace omapf {

OnlineInstance gen_line(int m) {
  if (m < 2 || m % 2 != 0) throw OddM("line family needs an even m >= 2, got " + std::to_string(m));
  Graph g = build_grid(1, m + 1);
  std::vector<Agent> agents;
  for (int i = 1; i <= m; ++i) {
    const bool odd = i % 2 == 1;
    agents.push_back(Agent{i, odd ? 0 : m, odd ? m : 0, i - 1});
  }
  return OnlineInstance(std::move(g), std::move(agents));
}

LineClosedForms line_closed_forms(int m) {
  if (m < 2 || m % 2 != 0) throw OddM("line family needs an even m >= 2, got " + std::to_string(m));
  const std::int64_t mm = m;
  auto exact = [](std::int64_t num, std::int64_t den, const char* what) {
    if (num % den != 0) throw NonIntegerResult(std::string(what) + " is not an integer");
    return num / den;
  };
  LineClosedForms out;
  out.rational_flow = exact(mm * mm * mm + mm, 2, "rational flowtime");
  out.rational_make = mm * mm;
  out.opt_flow = exact(15 * mm * mm - 10 * mm, 8, "optimal flowtime");
  out.opt_make = exact(7 * mm - 6, 2, "optimal makespan");
  return out;
}

Plan line_optimal_witness(int m) {
  const OnlineInstance inst = gen_line(m);
  Plan plan;
  for (const Agent& a : inst.agents()) {
    Path path;
    path.start_time = a.id % 2 == 1 ? a.release : 2 * m - 3 + a.id / 2;
    for (int j = 0; j <= m; ++j) path.vertices.push_back(a.start == 0 ? j : m - j);
    plan.emplace(a.id, std::move(path));
  }
  return plan;
}

AdaptiveAdversary::AdaptiveAdversary() : graph_(build_grid(2, 2)) {}

std::optional<int> AdaptiveAdversary::next_release(const Plan&) {
  if (stage_ >= 2) return std::nullopt;
  return stage_;
}

std::vector<Agent> AdaptiveAdversary::reveal(int time, const Plan& committed) {
  if (stage_ >= 2 || time != stage_) throw ProtocolViolation("adversary queried out of order at time " + std::to_string(time));
  if (stage_ == 0) {
    stage_ = 1;
    return {Agent{1, kV1, kV4, 0}};
  }
  auto it = committed.find(1);
  if (it == committed.end()) throw ProtocolViolation("adversary needs a_1's committed plan before revealing a_2");
  observed_.push_back(committed);
  stage_ = 2;
  const VertexId start = it->second.at(1) == kV3 ? kV3 : kV2;
  return {Agent{2, start, kV1, 1}};
}

AdaptiveAdversary gen_2x2_adversary() { return AdaptiveAdversary{}; }

OnlineInstance adversary_instance(const Path& first) {
  AdaptiveAdversary adversary;
  Plan committed;
  auto agents = adversary.reveal(0, committed);
  committed.emplace(1, first);
  auto second = adversary.reveal(1, committed);
  agents.insert(agents.end(), second.begin(), second.end());
  return OnlineInstance(adversary.graph(), std::move(agents));
}

void validate_sat(const SatInstance& sat) {
  if (sat.variable_count < 1) throw MalformedSat("formula has no variables");
  std::vector<int> positive(static_cast<std::size_t>(sat.variable_count) + 1, 0);
  std::vector<int> negative(static_cast<std::size_t>(sat.variable_count) + 1, 0);
  for (std::size_t j = 0; j < sat.clauses.size(); ++j) {
    const auto& clause = sat.clauses[j];
    const std::string where = "clause " + std::to_string(j + 1);
    if (clause.empty() || clause.size() > 3) throw MalformedSat(where + " must have 1 to 3 literals");
    std::set<int> vars;
    for (int lit : clause) {
      const int v = std::abs(lit);
      if (lit == 0 || v > sat.variable_count) throw MalformedSat(where + " has a literal out of range");
      if (!vars.insert(v).second) throw MalformedSat(where + " mentions variable " + std::to_string(v) + " twice");
      (lit > 0 ? positive : negative)[static_cast<std::size_t>(v)]++;
    }
  }
  for (int v = 1; v <= sat.variable_count; ++v) {
    const int p = positive[static_cast<std::size_t>(v)];
    const int n = negative[static_cast<std::size_t>(v)];
    if (p + n != 3 || p == 0 || n == 0) {
      throw MalformedSat("variable " + std::to_string(v) + " occurs " + std::to_string(p) + "+/" + std::to_string(n) +
                         "- times; need three occurrences with both polarities");
    }
  }
}

bool satisfies(const SatInstance& sat, const std::vector<bool>& assignment) {
  return std::all_of(sat.clauses.begin(), sat.clauses.end(), [&](const std::vector<int>& clause) {
    return std::any_of(clause.begin(), clause.end(), [&](int lit) {
      const bool value = assignment.at(static_cast<std::size_t>(std::abs(lit) - 1));
      return lit > 0 ? value : !value;
    });
  });
}

ReductionOutput reduce_sat(const SatInstance& sat) {
  validate_sat(sat);
  const int n_vars = sat.variable_count;
  const int n_clauses = static_cast<int>(sat.clauses.size());

  ReductionOutput out;
  out.sat = sat;
  auto add = [&out](std::string role) {
    out.vertex_roles.push_back(std::move(role));
    return static_cast<VertexId>(out.vertex_roles.size() - 1);
  };

  struct LiteralGadget {
    VertexId s, u, w, x, t;
  };
  // gadget[v][0] is the uncomplemented literal, gadget[v][1] the complemented one.
  std::vector<std::array<LiteralGadget, 2>> gadget(static_cast<std::size_t>(n_vars) + 1);
  std::vector<VertexId> hub(static_cast<std::size_t>(n_vars) + 1);
  for (int v = 1; v <= n_vars; ++v) {
    for (int side = 0; side < 2; ++side) {
      const std::string tag = std::to_string(v) + (side == 0 ? "T" : "F");
      auto& lg = gadget[static_cast<std::size_t>(v)][static_cast<std::size_t>(side)];
      lg.s = add("s_" + tag);
      lg.u = add("u_" + tag);
      lg.w = add("w_" + tag);
      lg.x = add("x_" + tag);
      lg.t = add("t_" + tag);
    }
    hub[static_cast<std::size_t>(v)] = add("v_" + std::to_string(v));
  }

  std::set<std::pair<VertexId, VertexId>> edge_set;
  auto add_path = [&edge_set](std::initializer_list<VertexId> path) {
    for (auto it = path.begin(); std::next(it) != path.end(); ++it) edge_set.insert(std::minmax(*it, *std::next(it)));
  };
  for (int v = 1; v <= n_vars; ++v) {
    for (const auto& lg : gadget[static_cast<std::size_t>(v)]) {
      add_path({lg.s, lg.u, hub[static_cast<std::size_t>(v)], lg.t});
      add_path({lg.s, lg.w, lg.x, lg.t});
    }
  }

  std::map<int, int> seen;  // literal -> occurrences so far
  std::vector<VertexId> clause_start, clause_goal;
  for (int j = 0; j < n_clauses; ++j) {
    const auto& clause = sat.clauses[static_cast<std::size_t>(j)];
    const std::string tag = std::to_string(j + 1);
    const VertexId c = add("c_" + tag);
    std::optional<VertexId> alpha, b;
    std::vector<std::pair<int, int>> uses;  // (literal, occurrence index)
    for (int lit : clause) uses.emplace_back(lit, seen[lit]++);
    for (const auto& [lit, occurrence] : uses) {
      if (occurrence == 1 && !alpha) alpha = add("alpha_" + tag);
    }
    for (const auto& [lit, occurrence] : uses) {
      if (occurrence == 0 && !b) b = add("b_" + tag);
    }
    const VertexId d = add("d_" + tag);
    for (const auto& [lit, occurrence] : uses) {
      const auto& lg = gadget[static_cast<std::size_t>(std::abs(lit))][lit > 0 ? 0 : 1];
      if (occurrence == 0) {
        add_path({c, lg.w, *b, d});
      } else {
        add_path({c, *alpha, lg.x, d});
      }
    }
    clause_start.push_back(c);
    clause_goal.push_back(d);
  }

  std::vector<std::pair<VertexId, VertexId>> edges(edge_set.begin(), edge_set.end());
  Graph g = build_graph(static_cast<int>(out.vertex_roles.size()), edges);

  std::vector<Agent> agents;
  for (int v = 1; v <= n_vars; ++v) {
    for (int side = 0; side < 2; ++side) {
      const auto& lg = gadget[static_cast<std::size_t>(v)][static_cast<std::size_t>(side)];
      const AgentId id = static_cast<AgentId>(agents.size()) + 1;
      agents.push_back(Agent{id, lg.s, lg.t, 0});
      out.agent_roles.push_back("a_" + std::to_string(v) + (side == 0 ? "T" : "F"));
      (side == 0 ? out.true_agent : out.false_agent).push_back(id);
      (side == 0 ? out.true_shared : out.false_shared).push_back(lg.u);
    }
  }
  for (int j = 0; j < n_clauses; ++j) {
    const AgentId id = static_cast<AgentId>(agents.size()) + 1;
    agents.push_back(Agent{id, clause_start[static_cast<std::size_t>(j)], clause_goal[static_cast<std::size_t>(j)], 0});
    out.agent_roles.push_back("a_c" + std::to_string(j + 1));
  }
  out.instance = OnlineInstance(std::move(g), std::move(agents));
  for (const Agent& a : out.instance.agents()) {
    if (out.instance.dist(a.id) != 3) {
      throw Error("distance audit failed: " + out.agent_roles[static_cast<std::size_t>(a.id - 1)] + " is " +
                  std::to_string(out.instance.dist(a.id)) + " steps from its goal");
    }
  }
  return out;
}

std::vector<SharedUse> shared_path_usage(const ReductionOutput& out, const Plan& plan) {
  auto uses = [&plan](AgentId id, VertexId u) {
    auto it = plan.find(id);
    if (it == plan.end()) throw UnplannedAgent("agent " + std::to_string(id) + " has no path");
    const auto& vs = it->second.vertices;
    return std::find(vs.begin(), vs.end(), u) != vs.end();
  };
  std::vector<SharedUse> result;
  for (std::size_t v = 0; v < out.true_agent.size(); ++v) {
    result.push_back({uses(out.true_agent[v], out.true_shared[v]), uses(out.false_agent[v], out.false_shared[v])});
  }
  return result;
}

std::vector<bool> decode_assignment(const ReductionOutput& out, const Plan& plan) {
  const Metrics m = evaluate(plan, out.instance);
  if (m.makespan != 3) throw NotMakespanThree("plan has makespan " + std::to_string(m.makespan));
  std::vector<bool> assignment;
  for (const SharedUse& use : shared_path_usage(out, plan)) assignment.push_back(use.true_shared || !use.false_shared);
  return assignment;
}

namespace {

std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejection sampling keeps the stream identical across standard libraries.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

double draw_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

OnlineInstance gen_random(const RandomSpec& spec) {
  if (spec.agents < 0 || spec.max_release < 0) throw InvalidInstance("negative agent count or release bound");
  std::mt19937_64 rng(spec.seed);
  GridMap map{spec.height, spec.width, {}};
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      if (draw_unit(rng) < spec.block_density) map.blocked.insert(Cell{r, c});
    }
  }
  Graph g = build_grid(map);
  if (g.vertex_count() < 2 && spec.agents > 0) throw InvalidInstance("need two free cells to place an agent");

  std::vector<Agent> agents;
  const auto n = static_cast<std::uint64_t>(g.vertex_count());
  for (int i = 0; i < spec.agents; ++i) {
    Agent a;
    a.start = static_cast<VertexId>(draw_below(rng, n));
    do {
      a.goal = static_cast<VertexId>(draw_below(rng, n));
    } while (a.goal == a.start);
    a.release = static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(spec.max_release) + 1));
    agents.push_back(a);
  }
  std::stable_sort(agents.begin(), agents.end(), [](const Agent& x, const Agent& y) { return x.release < y.release; });
  for (std::size_t i = 0; i < agents.size(); ++i) agents[i].id = static_cast<AgentId>(i + 1);
  return OnlineInstance(std::move(g), std::move(agents));
}

}  // namespace omapf
