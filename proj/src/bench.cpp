#include "omapf/bench.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "omapf/errors.hpp"
#include "omapf/io.hpp"

namespace omapf {

Objective planning_objective(CostKind cost) { return cost == CostKind::Makespan ? Objective::Makespan : Objective::Flowtime; }

std::int64_t cost_of(const Metrics& m, CostKind cost) {
  switch (cost) {
    case CostKind::Flowtime:
      return m.flowtime;
    case CostKind::Makespan:
      return m.makespan;
    case CostKind::Latency:
      return m.latency;
  }
  return 0;
}

namespace {

const char* mode_name(ControllabilityMode mode) {
  switch (mode) {
    case ControllabilityMode::NewSingle:
      return "new-single";
    case ControllabilityMode::New:
      return "new";
    case ControllabilityMode::All:
      return "all";
  }
  return "?";
}

const char* cost_name(CostKind cost) {
  switch (cost) {
    case CostKind::Flowtime:
      return "flowtime";
    case CostKind::Makespan:
      return "makespan";
    case CostKind::Latency:
      return "latency";
  }
  return "?";
}

std::int64_t plan_length_sum(const Plan& plan) {
  std::int64_t out = 0;
  for (const auto& [id, path] : plan) out += static_cast<std::int64_t>(path.vertices.size()) - 1;
  return out;
}

int single_m(const ExperimentConfig& config, int fallback) {
  if (config.m.empty()) return fallback;
  if (config.m.size() != 1) throw ConfigError("expected a single --m value");
  return config.m.front();
}

// Owns whatever reveals agents for one run.
struct Source {
  std::string label;
  std::optional<OnlineInstance> instance;
  std::unique_ptr<RevealSource> reveal;
  std::optional<int> line_m;
};

Source open_source(const ExperimentConfig& config) {
  Source s;
  if (config.map) {
    s.label = config.map->filename().string() + "+" + config.scenario->filename().string();
    s.instance = load_instance(*config.map, *config.scenario);
  } else if (config.cnf) {
    s.label = config.cnf->filename().string();
    s.instance = reduce_sat(load_dimacs(*config.cnf)).instance;
  } else {
    switch (*config.family) {
      case Family::Line: {
        const int m = single_m(config, 4);
        s.label = "line-m" + std::to_string(m);
        s.instance = gen_line(m);
        s.line_m = m;
        break;
      }
      case Family::GridRandom: {
        RandomSpec spec;
        spec.block_density = 0.1;
        spec.agents = single_m(config, 4);
        spec.seed = config.seed;
        s.label = "grid-random-a" + std::to_string(spec.agents) + "-s" + std::to_string(config.seed);
        s.instance = gen_random(spec);
        break;
      }
      case Family::Adversary2x2:
        s.label = "2x2-adversary";
        s.reveal = std::make_unique<AdaptiveAdversary>();
        break;
    }
  }
  if (!s.reveal) s.reveal = std::make_unique<InstanceSource>(*s.instance);
  return s;
}

SearchLimits limits_of(const ExperimentConfig& config) {
  SearchLimits limits;
  limits.node_budget = config.node_budget;
  return limits;
}

struct Optimum {
  Metrics metrics;
  std::string source;
};

Optimum optimum_for(const ExperimentConfig& config, const Source& src, const OnlineInstance& inst, CostKind cost) {
  if (src.line_m) {
    const auto cf = line_closed_forms(*src.line_m);
    std::int64_t dist_sum = 0;
    for (const Agent& a : inst.agents()) dist_sum += inst.dist(a.id);
    return {Metrics{cf.opt_flow, cf.opt_make, cf.opt_flow - dist_sum}, "closed-form"};
  }
  const int agents = static_cast<int>(inst.size());
  const int vertices = inst.graph().vertex_count();
  if (!config.force && (agents > 4 || vertices > 25)) {
    throw ConfigError("oracle refused for " + std::to_string(agents) + " agents on " + std::to_string(vertices) +
                      " vertices (limit 4 / 25); pass --force to try anyway");
  }
  const Plan opt = offline_optimal(inst.graph(), inst.agents(), DynamicObstacleSet{}, planning_objective(cost), limits_of(config));
  return {evaluate(opt, inst), "oracle"};
}

struct Run {
  Source source;
  SimulationTrace trace;
  Report report;
};

Run run_config(const ExperimentConfig& config) {
  validate(config);
  Run r;
  r.source = open_source(config);
  r.trace = run(*r.source.reveal, make_policy(config.policy), limits_of(config));
  Report& rep = r.report;
  rep.source = r.source.label;
  rep.policy = config.policy.label();
  rep.instance = r.trace.instance;
  rep.plan = r.trace.final_plan;
  rep.metrics = r.trace.metrics;
  rep.conflicts = detect_conflicts(rep.plan, rep.instance).size();
  rep.objective = config.policy.objective;
  for (const Snapshot& s : r.trace.snapshots) {
    rep.rational_by_release.emplace_back(s.release, s.rational);
    rep.fallback_used = rep.fallback_used || s.fallback;
  }
  if (rep.plan.size() != static_cast<std::size_t>(rep.instance.size())) throw UnplannedAgent("report plan misses agents");
  if (rep.conflicts != 0) throw InvalidPath("report plan has " + std::to_string(rep.conflicts) + " conflicts");
  return r;
}

}  // namespace

std::string PolicySpec::label() const {
  std::string out = name;
  if (name != "sequence") out += std::string("/") + mode_name(mode);
  if (name == "opt-rational") out += std::string("/") + cost_name(objective);
  if (rationalize) out += "/rationalized";
  return out;
}

void validate(const ExperimentConfig& config) {
  const int sources = (config.map || config.scenario ? 1 : 0) + (config.family ? 1 : 0) + (config.cnf ? 1 : 0);
  if (sources != 1) throw ConfigError("give exactly one source: --map with --scen, --family, or --cnf");
  if (config.map.has_value() != config.scenario.has_value()) throw ConfigError("--map and --scen go together");
  if (config.node_budget <= 0) throw ConfigError("--node-budget must be positive");
  for (int m : config.m) {
    if (m < 0) throw ConfigError("--m must be non-negative");
  }
  const auto& p = config.policy;
  if (p.name != "sequence" && p.name != "opt-rational" && p.name != "custom-irrational") {
    throw ConfigError("unknown policy '" + p.name + "'");
  }
  check_policy(make_policy(p));
}

OnlinePolicy make_wasteful_policy(ControllabilityMode mode) {
  return OnlinePolicy::custom(mode, [](const Graph& g, std::span<const Agent> agents, const Plan& committed, int now) {
    Plan plan = committed;
    std::int64_t count = static_cast<std::int64_t>(committed.size());
    std::int64_t total = plan_length_sum(committed);
    for (const Agent& a : agents) {
      if (committed.contains(a.id)) continue;
      ++count;
      total += g.distance(a.start, a.goal);
    }
    // Walked lengths bound the distances from above, so this beats any bound.
    const int delay = static_cast<int>(count * total + 1);
    std::vector<Path> out;
    for (const Agent& a : agents) {
      auto it = committed.find(a.id);
      if (it != committed.end()) {
        out.push_back(it->second);
        continue;
      }
      Path path = plan_min_arrival(g, a, build_obstacles(plan), now + delay);
      plan[a.id] = path;
      out.push_back(std::move(path));
    }
    return out;
  });
}

OnlinePolicy make_policy(const PolicySpec& spec) {
  OnlinePolicy policy;
  if (spec.name == "sequence") {
    policy = OnlinePolicy::sequence();
    policy.mode = spec.mode;
  } else if (spec.name == "opt-rational") {
    policy = OnlinePolicy::opt_rational(spec.mode, planning_objective(spec.objective));
  } else if (spec.name == "custom-irrational") {
    policy = make_wasteful_policy(spec.mode);
  } else {
    throw ConfigError("unknown policy '" + spec.name + "'");
  }
  return spec.rationalize ? rationalize_wrap(std::move(policy)) : policy;
}

bool Report::rational() const {
  return std::all_of(rational_by_release.begin(), rational_by_release.end(), [](const auto& p) { return p.second; });
}

std::string format_ratio(const RatioReport& r) {
  if (r.infinite()) return "inf";
  std::ostringstream ss;
  ss.precision(6);
  ss << r.value();
  return ss.str();
}

void write_report_csv(std::ostream& out, const std::vector<Report>& reports) {
  out << "source,policy,agents,flowtime,makespan,latency,conflicts,rational,fallback,objective,optimal_cost,ratio,"
         "ratio_value,additive_gap,optimum_source\n";
  for (const Report& r : reports) {
    out << r.source << ',' << r.policy << ',' << r.instance.size() << ',' << r.metrics.flowtime << ','
        << r.metrics.makespan << ',' << r.metrics.latency << ',' << r.conflicts << ',' << (r.rational() ? 1 : 0) << ','
        << (r.fallback_used ? 1 : 0) << ',' << cost_name(r.objective) << ',';
    if (r.ratio) {
      out << r.ratio->optimal_cost << ',' << r.ratio->fraction() << ',' << format_ratio(*r.ratio) << ','
          << r.ratio->additive_gap << ',' << r.optimum_source;
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

Report cmd_solve(const ExperimentConfig& config) {
  Run r = run_config(config);
  if (config.out) {
    std::ofstream f(*config.out);
    if (!f) throw ConfigError("cannot write " + config.out->string());
    write_plan_csv(f, r.report.plan, r.report.instance);
  }
  return std::move(r.report);
}

Report cmd_ratio(const ExperimentConfig& config) {
  Run r = run_config(config);
  const CostKind cost = config.policy.objective;
  const Optimum opt = optimum_for(config, r.source, r.report.instance, cost);
  r.report.ratio = make_ratio(cost_of(r.report.metrics, cost), cost_of(opt.metrics, cost));
  r.report.optimum_source = opt.source;
  return std::move(r.report);
}

SweepResult cmd_sweep(const ExperimentConfig& base, const std::vector<PolicySpec>& policies) {
  SweepResult result;
  std::vector<int> ms = base.m.empty() ? std::vector<int>{2, 4, 6} : base.m;
  for (int m : ms) {
    for (const PolicySpec& spec : policies) {
      ExperimentConfig config = base;
      config.m = {m};
      config.policy = spec;
      Run r = run_config(config);
      const Optimum flow = optimum_for(config, r.source, r.report.instance, CostKind::Flowtime);
      const Optimum make = optimum_for(config, r.source, r.report.instance, CostKind::Makespan);
      result.rows.push_back(SweepRow{m, spec.label(), r.report.metrics.flowtime, r.report.metrics.makespan,
                                     make_ratio(r.report.metrics.flowtime, flow.metrics.flowtime),
                                     make_ratio(r.report.metrics.makespan, make.metrics.makespan)});
    }
  }
  if (base.family != Family::Line) return result;
  std::map<std::string, std::vector<std::size_t>> rows_of;
  for (std::size_t i = 0; i < result.rows.size(); ++i) rows_of[result.rows[i].policy].push_back(i);
  for (const PolicySpec& spec : policies) {
    if (spec.name == "custom-irrational" || spec.mode == ControllabilityMode::All) continue;
    const auto& idx = rows_of[spec.label()];
    const SweepRow* prev = nullptr;
    for (std::size_t i : idx) {
      const SweepRow& row = result.rows[i];
      if (row.m < 4) continue;
      if (prev && prev->m < row.m &&
          !(row.ratio_flow.value() > prev->ratio_flow.value() && row.ratio_make.value() > prev->ratio_make.value())) {
        result.growth_ok = false;
        result.growth_failures.push_back(spec.label() + " at m=" + std::to_string(row.m));
      }
      prev = &row;
    }
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "m,policy,flowtime,makespan,ratio_flow,ratio_make\n";
  for (const SweepRow& r : sweep.rows) {
    out << r.m << ',' << r.policy << ',' << r.flowtime << ',' << r.makespan << ',' << format_ratio(r.ratio_flow) << ','
        << format_ratio(r.ratio_make) << '\n';
  }
}

ReduceSummary cmd_reduce(const std::filesystem::path& cnf_path, const std::filesystem::path& out_dir) {
  const ReductionOutput red = reduce_sat(load_dimacs(cnf_path));
  std::filesystem::create_directories(out_dir);
  ReduceSummary s;
  s.variables = red.sat.variable_count;
  s.clauses = static_cast<int>(red.sat.clauses.size());
  s.vertices = red.instance.graph().vertex_count();
  s.agents = static_cast<int>(red.instance.size());
  s.distance_audit = std::all_of(red.instance.agents().begin(), red.instance.agents().end(),
                                 [&](const Agent& a) { return red.instance.dist(a.id) == 3; });
  s.graph_file = out_dir / "graph.txt";
  s.scenario_file = out_dir / "scenario.txt";
  s.labels_file = out_dir / "labels.txt";
  auto write = [](const std::filesystem::path& p, auto&& fn) {
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write " + p.string());
    fn(f);
  };
  write(s.graph_file, [&](std::ostream& f) { write_graph(f, red.instance.graph()); });
  write(s.scenario_file, [&](std::ostream& f) { write_scenario(f, red.instance); });
  write(s.labels_file, [&](std::ostream& f) { write_labels(f, red.vertex_roles); });
  return s;
}

}  // namespace omapf
