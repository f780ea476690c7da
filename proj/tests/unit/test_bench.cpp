#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "omapf/bench.hpp"
#include "omapf/errors.hpp"
#include "omapf/io.hpp"

using namespace omapf;

namespace {

const std::string kData = OMAPF_TEST_DATA;

ExperimentConfig line(int m, PolicySpec policy = {}) {
  ExperimentConfig c;
  c.family = Family::Line;
  c.m = {m};
  c.policy = policy;
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("omapf-unit-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(validate(ExperimentConfig{}), ConfigError);
  ExperimentConfig both = line(4);
  both.cnf = kData + "/sat2.cnf";
  CHECK_THROWS_AS(validate(both), ConfigError);
  ExperimentConfig half;
  half.map = kData + "/ring3x3.map";
  CHECK_THROWS_AS(validate(half), ConfigError);
  CHECK_NOTHROW(validate(line(4)));
}

TEST_CASE("policy labels") {
  CHECK(PolicySpec{}.label() == "sequence");
  CHECK(PolicySpec{"opt-rational", ControllabilityMode::New, CostKind::Flowtime, false}.label() ==
        "opt-rational/new/flowtime");
  CHECK(planning_objective(CostKind::Latency) == Objective::Flowtime);
  CHECK(cost_of(Metrics{7, 3, 2}, CostKind::Latency) == 2);
}

TEST_CASE("solve") {
  const Report seq = cmd_solve(line(4));
  CHECK(seq.metrics == Metrics{34, 16, 18});
  CHECK(seq.conflicts == 0);
  CHECK(seq.rational());
  CHECK_FALSE(seq.fallback_used);

  const Report opt = cmd_solve(line(4, {"opt-rational", ControllabilityMode::New, CostKind::Flowtime, false}));
  CHECK(opt.metrics.flowtime == 34);
  CHECK(opt.rational());

  ExperimentConfig single;
  single.map = kData + "/empty1x2.map";
  single.scenario = kData + "/single-agent.scen";
  const Report one = cmd_solve(single);
  CHECK(one.metrics == Metrics{1, 1, 0});

  ExperimentConfig odd = line(5);
  CHECK_THROWS_AS(cmd_solve(odd), OddM);
}

TEST_CASE("the wasteful policy is caught by the report") {
  const Report raw = cmd_solve(line(4, {"custom-irrational", ControllabilityMode::New, CostKind::Flowtime, false}));
  CHECK(raw.conflicts == 0);
  CHECK_FALSE(raw.rational());
  const Report wrapped = cmd_solve(line(4, {"custom-irrational", ControllabilityMode::New, CostKind::Flowtime, true}));
  CHECK(wrapped.rational());
  CHECK(wrapped.fallback_used);
}

TEST_CASE("ratio") {
  const Report seq = cmd_ratio(line(4));
  REQUIRE(seq.ratio);
  CHECK(seq.ratio->fraction() == "34/25");
  CHECK(seq.ratio->additive_gap == 9);
  CHECK(seq.optimum_source == "closed-form");

  ExperimentConfig adv;
  adv.family = Family::Adversary2x2;
  adv.policy = {"opt-rational", ControllabilityMode::All, CostKind::Makespan, false};
  const Report make = cmd_ratio(adv);
  REQUIRE(make.ratio);
  CHECK(make.ratio->fraction() == "3/2");
  CHECK(make.optimum_source == "oracle");

  adv.policy.objective = CostKind::Latency;
  const Report lat = cmd_ratio(adv);
  REQUIRE(lat.ratio);
  CHECK(lat.ratio->infinite());
  CHECK(lat.ratio->additive_gap == 1);
  CHECK(format_ratio(*lat.ratio) == "inf");

  ExperimentConfig big;
  big.family = Family::GridRandom;
  big.m = {6};
  CHECK_THROWS_AS(cmd_ratio(big), ConfigError);
}

TEST_CASE("sweep over the line family") {
  const std::vector<PolicySpec> policies{
      PolicySpec{},
      PolicySpec{"opt-rational", ControllabilityMode::NewSingle, CostKind::Flowtime, false},
  };
  ExperimentConfig base;
  base.family = Family::Line;
  const SweepResult sweep = cmd_sweep(base, policies);
  REQUIRE(sweep.rows.size() == 6);
  CHECK(sweep.growth_ok);
  std::vector<double> seq;
  for (const SweepRow& row : sweep.rows) {
    if (row.policy == "sequence") seq.push_back(row.ratio_flow.value());
  }
  REQUIRE(seq.size() == 3);
  CHECK(seq[0] == doctest::Approx(1.0));
  CHECK(seq[1] == doctest::Approx(1.36));
  CHECK(seq[2] == doctest::Approx(1.85));
  // NewSingle opt-rational reproduces the sequence rows on this family.
  for (std::size_t i = 0; i < sweep.rows.size(); i += 2) {
    CHECK(sweep.rows[i].flowtime == sweep.rows[i + 1].flowtime);
    CHECK(sweep.rows[i].makespan == sweep.rows[i + 1].makespan);
  }

  std::ostringstream out;
  write_sweep_csv(out, cmd_sweep(base, {}));
  CHECK(out.str() == "m,policy,flowtime,makespan,ratio_flow,ratio_make\n");
}

TEST_CASE("reduce writes the gadget files") {
  const auto dir = scratch("reduce");
  const ReduceSummary s = cmd_reduce(kData + "/sat2.cnf", dir);
  CHECK(s.variables == 2);
  CHECK(s.clauses == 3);
  CHECK(s.agents == 7);
  CHECK(s.distance_audit);
  const OnlineInstance inst = load_instance(s.graph_file, s.scenario_file);
  CHECK(inst.graph().vertex_count() == s.vertices);
  CHECK(inst.size() == 7);
  CHECK(std::filesystem::exists(s.labels_file));
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(cmd_reduce(kData + "/twice.cnf", scratch("twice")), MalformedSat);
}

TEST_CASE("reports are byte stable") {
  auto render = [] {
    std::ostringstream out;
    write_report_csv(out, {cmd_ratio(line(4))});
    return out.str();
  };
  const std::string first = render();
  CHECK(first == render());
  CHECK(first.rfind("source,policy,agents,flowtime,makespan,latency,conflicts,rational,fallback,objective,optimal_cost,ratio,"
                    "ratio_value,additive_gap,optimum_source\n",
                    0) == 0);
  CHECK(first.find(",34,16,18,0,1,0,flowtime,25,34/25,1.36,9,closed-form\n") != std::string::npos);
}
