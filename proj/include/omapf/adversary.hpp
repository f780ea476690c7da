#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "omapf/core.hpp"
#include "omapf/online.hpp"

namespace omapf {

// Strip v_0..v_m; odd agents travel v_0 -> v_m, even agents v_m -> v_0,
// agent i released at i - 1. Throws OddM unless m is even and >= 2.
OnlineInstance gen_line(int m);

struct LineClosedForms {
  std::int64_t rational_flow = 0;  // (m^3 + m) / 2
  std::int64_t rational_make = 0;  // m^2
  std::int64_t opt_flow = 0;       // 15/8 m^2 - 5/4 m
  std::int64_t opt_make = 0;       // 7/2 m - 3

  bool operator==(const LineClosedForms&) const = default;
};

LineClosedForms line_closed_forms(int m);

// The full-knowledge plan with the closed-form optimal costs: odd agents start
// at release, even agent i starts at 2m - 3 + i/2.
Plan line_optimal_witness(int m);

// Adaptive two-agent adversary on the 2x2 grid v1 v2 / v3 v4 (vertex ids 0..3).
// a_1 = (v1 -> v4, r = 0). a_2 = (x -> v1, r = 1) where x is the vertex a_1's
// committed plan occupies at time 1: v2 or v3, defaulting to v2 otherwise.
class AdaptiveAdversary : public RevealSource {
 public:
  AdaptiveAdversary();

  const Graph& graph() const override { return graph_; }
  std::optional<int> next_release(const Plan& committed) override;
  std::vector<Agent> reveal(int time, const Plan& committed) override;

  // Committed plans received so far, one per reveal after the first.
  const std::vector<Plan>& observed() const { return observed_; }

  static constexpr VertexId kV1 = 0;
  static constexpr VertexId kV2 = 1;
  static constexpr VertexId kV3 = 2;
  static constexpr VertexId kV4 = 3;

 private:
  Graph graph_;
  int stage_ = 0;
  std::vector<Plan> observed_;
};

AdaptiveAdversary gen_2x2_adversary();

// The full instance the adversary would reveal against a_1's path `first`.
OnlineInstance adversary_instance(const Path& first);

// A literal is +v or -v for variable v in 1..N.
struct SatInstance {
  int variable_count = 0;
  std::vector<std::vector<int>> clauses;
};

// Throws MalformedSat unless clauses have 1..3 literals over distinct variables
// and each variable occurs in exactly three clauses with both polarities.
void validate_sat(const SatInstance& sat);

// assignment[v - 1] is the value of variable v.
bool satisfies(const SatInstance& sat, const std::vector<bool>& assignment);

struct ReductionOutput {
  SatInstance sat;
  OnlineInstance instance;
  std::vector<std::string> vertex_roles;  // by vertex id: "s_1T", "v_2", "alpha_3", ...
  std::vector<std::string> agent_roles;   // by agent id - 1: "a_1T", "a_1F", "c_1", ...
  // Literal agent ids and the u vertex marking their shared path, per variable.
  std::vector<AgentId> true_agent;
  std::vector<AgentId> false_agent;
  std::vector<VertexId> true_shared;
  std::vector<VertexId> false_shared;
};

// Gadget instance with a makespan-3 solution iff the formula is satisfiable.
// Every agent is exactly three steps from its goal (checked; Error otherwise).
ReductionOutput reduce_sat(const SatInstance& sat);

struct SharedUse {
  bool true_shared = false;
  bool false_shared = false;
};

// Which literal agents use their shared path in `plan`, per variable.
std::vector<SharedUse> shared_path_usage(const ReductionOutput& out, const Plan& plan);

// Literals whose agent takes the shared path become true; a variable with both
// literal agents on private paths is set true. Throws NotMakespanThree.
std::vector<bool> decode_assignment(const ReductionOutput& out, const Plan& plan);

struct RandomSpec {
  int height = 8;
  int width = 8;
  double block_density = 0.0;
  int agents = 10;
  int max_release = 10;
  std::uint64_t seed = 0;
};

// Reproducible for a fixed spec. Throws DisconnectedWorld when the sampled
// obstacles split the map.
OnlineInstance gen_random(const RandomSpec& spec);

}  // namespace omapf
