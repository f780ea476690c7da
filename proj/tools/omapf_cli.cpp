#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

#include "omapf/bench.hpp"
#include "omapf/errors.hpp"
#include "omapf/io.hpp"

namespace {

using namespace omapf;

struct Flags {
  std::string map, scen, family, cnf, out, plan;
  std::vector<int> m;
  std::vector<std::string> policies;
  std::string mode = "new-single";
  std::string objective = "flowtime";
  bool rationalize = false;
  std::uint64_t seed = 0;
  std::int64_t node_budget = 10'000'000;
  bool force = false;
};

void add_common(CLI::App* cmd, Flags& f, bool many_policies) {
  cmd->add_option("--map", f.map, "grid map or graph file");
  cmd->add_option("--scen", f.scen, "scenario file");
  cmd->add_option("--family", f.family, "line | grid-random | 2x2-adversary");
  cmd->add_option("--cnf", f.cnf, "DIMACS CNF; solves the reduced instance");
  cmd->add_option("--m", f.m, "line size, or agent count for grid-random")->delimiter(',');
  if (many_policies) {
    cmd->add_option("--policy", f.policies, "sequence | opt-rational | custom-irrational, optionally name:mode")->delimiter(',');
  } else {
    f.policies = {"sequence"};
    cmd->add_option("--policy", f.policies, "sequence | opt-rational | custom-irrational")->expected(1);
  }
  cmd->add_option("--mode", f.mode, "new-single | new | all");
  cmd->add_option("--objective", f.objective, "flowtime | makespan | latency");
  cmd->add_flag("--rationalize", f.rationalize, "fall back to sequential routing on a rationality violation");
  cmd->add_option("--seed", f.seed, "seed for grid-random");
  cmd->add_option("--out", f.out, "output file");
  cmd->add_option("--node-budget", f.node_budget, "joint search node budget");
  cmd->add_flag("--force", f.force, "run the oracle beyond 4 agents / 25 vertices");
}

template <class T>
T lookup(const std::map<std::string, T>& table, const std::string& key, const std::string& what) {
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown " + what + " '" + key + "'");
  return it->second;
}

ControllabilityMode parse_mode(const std::string& s) {
  return lookup<ControllabilityMode>(
      {{"new-single", ControllabilityMode::NewSingle}, {"new", ControllabilityMode::New}, {"all", ControllabilityMode::All}},
      s, "mode");
}

PolicySpec policy_spec(const Flags& f, const std::string& entry) {
  PolicySpec p;
  const auto colon = entry.find(':');
  p.name = entry.substr(0, colon);
  p.mode = parse_mode(colon == std::string::npos ? f.mode : entry.substr(colon + 1));
  p.objective = lookup<CostKind>(
      {{"flowtime", CostKind::Flowtime}, {"makespan", CostKind::Makespan}, {"latency", CostKind::Latency}}, f.objective,
      "objective");
  p.rationalize = f.rationalize;
  return p;
}

ExperimentConfig config_of(const Flags& f) {
  ExperimentConfig c;
  if (!f.map.empty()) c.map = f.map;
  if (!f.scen.empty()) c.scenario = f.scen;
  if (!f.cnf.empty()) c.cnf = f.cnf;
  if (!f.family.empty()) {
    c.family = lookup<Family>(
        {{"line", Family::Line}, {"grid-random", Family::GridRandom}, {"2x2-adversary", Family::Adversary2x2}}, f.family,
        "family");
  }
  if (!f.out.empty()) c.out = f.out;
  c.m = f.m;
  c.seed = f.seed;
  c.node_budget = f.node_budget;
  c.force = f.force;
  c.policy = policy_spec(f, f.policies.empty() ? "sequence" : f.policies.front());
  return c;
}

int do_solve(const Flags& f, bool ratio) {
  const ExperimentConfig c = config_of(f);
  const Report r = ratio ? cmd_ratio(c) : cmd_solve(c);
  if (ratio && c.out) {
    std::ofstream plan(*c.out);
    write_plan_csv(plan, r.plan, r.instance);
  }
  write_report_csv(std::cout, {r});
  return 0;
}

int do_sweep(const Flags& f) {
  ExperimentConfig c = config_of(f);
  std::vector<PolicySpec> specs;
  for (const auto& p : f.policies) specs.push_back(policy_spec(f, p));
  if (!specs.empty()) c.policy = specs.front();
  validate(c);
  const SweepResult sweep = cmd_sweep(c, specs);
  if (c.out) {
    std::ofstream out(*c.out);
    if (!out) throw ConfigError("cannot write " + c.out->string());
    write_sweep_csv(out, sweep);
  } else {
    write_sweep_csv(std::cout, sweep);
  }
  for (const auto& failure : sweep.growth_failures) std::cerr << "growth check failed: " << failure << '\n';
  return sweep.growth_ok ? 0 : 1;
}

int do_reduce(const Flags& f) {
  if (f.cnf.empty() || f.out.empty()) throw ConfigError("reduce-sat needs --cnf and --out <dir>");
  const ReduceSummary s = cmd_reduce(f.cnf, f.out);
  std::cout << "variables " << s.variables << "\nclauses " << s.clauses << "\nvertices " << s.vertices << "\nagents "
            << s.agents << "\ndistance_audit " << (s.distance_audit ? "pass" : "fail") << "\ngraph " << s.graph_file.string()
            << "\nscenario " << s.scenario_file.string() << "\nlabels " << s.labels_file.string() << '\n';
  return s.distance_audit ? 0 : 1;
}

int do_validate(const Flags& f) {
  if (!f.cnf.empty()) {
    const SatInstance sat = load_dimacs(f.cnf);
    validate_sat(sat);
    std::cout << "cnf ok: " << sat.variable_count << " variables, " << sat.clauses.size() << " clauses\n";
    return 0;
  }
  if (f.map.empty()) throw ConfigError("validate needs --map (with optional --scen and --plan) or --cnf");
  if (f.scen.empty()) {
    const Graph g = load_world(f.map);
    std::cout << "world ok: " << g.vertex_count() << " vertices, " << g.edge_count() << " edges\n";
    return 0;
  }
  const OnlineInstance inst = load_instance(f.map, f.scen);
  std::cout << "instance ok: " << inst.graph().vertex_count() << " vertices, " << inst.size() << " agents\n";
  if (f.plan.empty()) return 0;
  const Plan plan = load_plan_csv(f.plan);
  for (const Agent& a : inst.agents()) {
    auto it = plan.find(a.id);
    if (it == plan.end()) throw UnplannedAgent("plan has no path for agent " + std::to_string(a.id));
    validate_path(inst.graph(), a, it->second);
  }
  if (plan.size() != static_cast<std::size_t>(inst.size())) throw InvalidPath("plan has paths for unknown agents");
  const auto conflicts = detect_conflicts(plan, inst);
  if (!conflicts.empty()) {
    for (const Conflict& c : conflicts) {
      std::cerr << (c.kind == ConflictKind::Vertex ? "vertex" : "edge") << " conflict: agents " << c.first << " and "
                << c.second << " at t=" << c.time << '\n';
    }
    return 1;
  }
  const Metrics m = evaluate(plan, inst);
  std::cout << "plan ok: flowtime " << m.flowtime << ", makespan " << m.makespan << ", latency " << m.latency << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online multi-agent path finding experiments"};
  app.require_subcommand(1);
  Flags solve_f, ratio_f, sweep_f, reduce_f, validate_f;
  auto* solve = app.add_subcommand("solve", "run a policy and report its costs");
  add_common(solve, solve_f, false);
  auto* ratio = app.add_subcommand("ratio", "compare a policy with the full-knowledge optimum");
  add_common(ratio, ratio_f, false);
  auto* sweep = app.add_subcommand("sweep", "tabulate costs and ratios over m and policies");
  add_common(sweep, sweep_f, true);
  auto* reduce = app.add_subcommand("reduce-sat", "build the path-finding instance of a CNF formula");
  reduce->add_option("--cnf,cnf", reduce_f.cnf, "DIMACS CNF file")->required();
  reduce->add_option("--out", reduce_f.out, "output directory")->required();
  auto* check = app.add_subcommand("validate", "parse and check map, scenario, plan or CNF files");
  check->add_option("--map", validate_f.map, "grid map or graph file");
  check->add_option("--scen", validate_f.scen, "scenario file");
  check->add_option("--plan", validate_f.plan, "plan CSV");
  check->add_option("--cnf", validate_f.cnf, "DIMACS CNF file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return do_solve(solve_f, false);
    if (*ratio) return do_solve(ratio_f, true);
    if (*sweep) return do_sweep(sweep_f);
    if (*reduce) return do_reduce(reduce_f);
    if (*check) return do_validate(validate_f);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const OddM& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
