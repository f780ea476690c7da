#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "omapf/adversary.hpp"
#include "omapf/core.hpp"
#include "omapf/online.hpp"

namespace omapf {

enum class CostKind { Flowtime, Makespan, Latency };

// Latency differs from flowtime by a constant, so both plan for flowtime.
Objective planning_objective(CostKind cost);
std::int64_t cost_of(const Metrics& m, CostKind cost);

enum class Family { Line, GridRandom, Adversary2x2 };

struct PolicySpec {
  std::string name = "sequence";  // sequence | opt-rational | custom-irrational
  ControllabilityMode mode = ControllabilityMode::NewSingle;
  CostKind objective = CostKind::Flowtime;
  bool rationalize = false;

  std::string label() const;  // e.g. "opt-rational/new/flowtime"
};

struct ExperimentConfig {
  // Exactly one source: map + scenario, a family, or a CNF file.
  std::optional<std::filesystem::path> map;
  std::optional<std::filesystem::path> scenario;
  std::optional<Family> family;
  std::optional<std::filesystem::path> cnf;
  std::vector<int> m;  // line size; agent count for grid-random
  PolicySpec policy;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> out;
  std::int64_t node_budget = 10'000'000;
  bool force = false;
};

// Throws ConfigError when the source is missing or ambiguous.
void validate(const ExperimentConfig& config);

// Delays every newly planned agent past any rational bound, keeping earlier
// paths untouched. Conflict free, never rational.
OnlinePolicy make_wasteful_policy(ControllabilityMode mode);

OnlinePolicy make_policy(const PolicySpec& spec);

struct Report {
  std::string source;
  std::string policy;
  OnlineInstance instance;
  Plan plan;
  Metrics metrics;
  std::size_t conflicts = 0;
  std::vector<std::pair<int, bool>> rational_by_release;  // (release, is_rational_at)
  bool fallback_used = false;
  CostKind objective = CostKind::Flowtime;
  std::optional<RatioReport> ratio;
  std::string optimum_source;  // "closed-form" or "oracle" when ratio is set

  bool rational() const;
};

// Fixed column order:
// source,policy,agents,flowtime,makespan,latency,conflicts,rational,fallback,objective,optimal_cost,ratio,ratio_value,additive_gap,optimum_source
void write_report_csv(std::ostream& out, const std::vector<Report>& reports);

Report cmd_solve(const ExperimentConfig& config);
// cmd_solve plus the ratio against the closed form (line family) or the oracle.
// The oracle is refused beyond 4 agents or 25 vertices unless config.force.
Report cmd_ratio(const ExperimentConfig& config);

struct SweepRow {
  int m = 0;
  std::string policy;
  std::int64_t flowtime = 0;
  std::int64_t makespan = 0;
  RatioReport ratio_flow;
  RatioReport ratio_make;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  // Line family only: ratios of policies in modes new-single and new strictly
  // increase across the rows with m >= 4.
  bool growth_ok = true;
  std::vector<std::string> growth_failures;
};

SweepResult cmd_sweep(const ExperimentConfig& base, const std::vector<PolicySpec>& policies);
// Columns m,policy,flowtime,makespan,ratio_flow,ratio_make.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

struct ReduceSummary {
  int variables = 0;
  int clauses = 0;
  int vertices = 0;
  int agents = 0;
  bool distance_audit = false;
  std::filesystem::path graph_file, scenario_file, labels_file;
};

// Writes graph.txt, scenario.txt and labels.txt into out_dir.
ReduceSummary cmd_reduce(const std::filesystem::path& cnf_path, const std::filesystem::path& out_dir);

std::string format_ratio(const RatioReport& r);

}  // namespace omapf
