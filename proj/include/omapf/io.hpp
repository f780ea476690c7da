#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "omapf/adversary.hpp"
#include "omapf/core.hpp"

namespace omapf {

// Parsers take a display name used in ParseError messages.

// `height H` / `width W` / `map` / H rows of '.' and '@'.
Graph parse_map(std::istream& in, const std::string& name);
// `vertices N` then one `u v` edge per line.
Graph parse_graph(std::istream& in, const std::string& name);
// Either of the two formats, chosen by the first keyword.
Graph parse_world(std::istream& in, const std::string& name);
Graph load_world(const std::filesystem::path& path);

// `id release sr sc gr gc` on grid worlds, `id release s g` otherwise; '#'
// starts a comment line. Ids must run 1..m with non-decreasing releases.
OnlineInstance parse_scenario(std::istream& in, const std::string& name, const Graph& g);
OnlineInstance load_instance(const std::filesystem::path& world, const std::filesystem::path& scenario);

// Header `agent,start_time,arrival_time,service_time,path`, path as v0;v1;...
Plan parse_plan_csv(std::istream& in, const std::string& name);
Plan load_plan_csv(const std::filesystem::path& path);
void write_plan_csv(std::ostream& out, const Plan& plan, const OnlineInstance& inst);

// `p cnf N M` then clauses of signed integers ending in 0; 'c' lines are comments.
SatInstance parse_dimacs(std::istream& in, const std::string& name);
SatInstance load_dimacs(const std::filesystem::path& path);

void write_map(std::ostream& out, const GridMap& map);
void write_graph(std::ostream& out, const Graph& g);
// Grid coordinates when the graph came from a grid, vertex ids otherwise.
void write_scenario(std::ostream& out, const OnlineInstance& inst);
void write_world(std::ostream& out, const Graph& g);
// One `vertex_id role` line per vertex.
void write_labels(std::ostream& out, const std::vector<std::string>& roles);

}  // namespace omapf
