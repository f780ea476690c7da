#include "omapf/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "omapf/errors.hpp"

namespace omapf {
namespace {

struct LineReader {
  LineReader(std::istream& stream, std::string display) : in(stream), name(std::move(display)) {}

  std::istream& in;
  std::string name;
  int line_no = 0;
  std::string line;

  bool next() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  // Next line that is neither blank nor a comment starting with `comment`.
  bool next_content(char comment) {
    while (next()) {
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == comment) continue;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(name, line_no, what); }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

int to_int(const LineReader& r, const std::string& tok) {
  int v = 0;
  auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || end != tok.data() + tok.size()) r.fail("expected an integer, got '" + tok + "'");
  return v;
}

int keyword_value(LineReader& r, const std::string& key) {
  if (!r.next_content('#')) r.fail("missing '" + key + "' line");
  auto t = tokens(r.line);
  if (t.size() != 2 || t[0] != key) r.fail("expected '" + key + " <n>'");
  const int v = to_int(r, t[1]);
  if (v < 0) r.fail(key + " must be non-negative");
  return v;
}

Graph parse_map_body(LineReader& r, int height) {
  const int width = keyword_value(r, "width");
  if (!r.next() || tokens(r.line) != std::vector<std::string>{"map"}) r.fail("expected 'map'");
  GridMap map{height, width, {}};
  for (int row = 0; row < height; ++row) {
    if (!r.next()) r.fail("map has fewer than " + std::to_string(height) + " rows");
    if (static_cast<int>(r.line.size()) != width) r.fail("row has " + std::to_string(r.line.size()) + " cells, expected " + std::to_string(width));
    for (int col = 0; col < width; ++col) {
      const char ch = r.line[static_cast<std::size_t>(col)];
      if (ch == '@') {
        map.blocked.insert(Cell{row, col});
      } else if (ch != '.') {
        r.fail(std::string("unknown map character '") + ch + "'");
      }
    }
  }
  while (r.next()) {
    if (!tokens(r.line).empty()) r.fail("trailing content after the map");
  }
  return build_grid(map);
}

Graph parse_graph_body(LineReader& r, int n) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  while (r.next_content('#')) {
    auto t = tokens(r.line);
    if (t.size() != 2) r.fail("expected an edge 'u v'");
    const int u = to_int(r, t[0]);
    const int v = to_int(r, t[1]);
    if (u < 0 || v < 0 || u >= n || v >= n) r.fail("edge endpoint out of range");
    if (u == v) r.fail("self-loop");
    edges.emplace_back(u, v);
  }
  return build_graph(n, edges);
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

}  // namespace

Graph parse_map(std::istream& in, const std::string& name) {
  LineReader r(in, name);
  return parse_map_body(r, keyword_value(r, "height"));
}

Graph parse_graph(std::istream& in, const std::string& name) {
  LineReader r(in, name);
  return parse_graph_body(r, keyword_value(r, "vertices"));
}

Graph parse_world(std::istream& in, const std::string& name) {
  LineReader r(in, name);
  if (!r.next_content('#')) r.fail("empty world file");
  auto t = tokens(r.line);
  if (t.size() != 2) r.fail("expected 'height <n>' or 'vertices <n>'");
  const int v = to_int(r, t[1]);
  if (v < 0) r.fail(t[0] + " must be non-negative");
  if (t[0] == "height") return parse_map_body(r, v);
  if (t[0] == "vertices") return parse_graph_body(r, v);
  r.fail("expected 'height <n>' or 'vertices <n>'");
}

Graph load_world(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_world(in, path.string());
}

OnlineInstance parse_scenario(std::istream& in, const std::string& name, const Graph& g) {
  LineReader r(in, name);
  std::vector<Agent> agents;
  const bool grid = g.grid() != nullptr;
  auto vertex = [&](int a, int b) -> VertexId {
    auto v = g.vertex_at(a, b);
    if (!v) r.fail("cell (" + std::to_string(a) + "," + std::to_string(b) + ") is blocked or off the map");
    return *v;
  };
  while (r.next_content('#')) {
    auto t = tokens(r.line);
    std::vector<int> f;
    for (const auto& tok : t) f.push_back(to_int(r, tok));
    Agent a;
    if (grid && f.size() == 6) {
      a = Agent{f[0], vertex(f[2], f[3]), vertex(f[4], f[5]), f[1]};
    } else if (!grid && f.size() == 4) {
      if (!g.valid(f[2]) || !g.valid(f[3])) r.fail("vertex out of range");
      a = Agent{f[0], f[2], f[3], f[1]};
    } else {
      r.fail(grid ? "expected 'id release sr sc gr gc'" : "expected 'id release s g'");
    }
    if (a.id != static_cast<AgentId>(agents.size()) + 1) r.fail("agent ids must run 1..m in order");
    if (a.release < 0) r.fail("negative release time");
    if (!agents.empty() && a.release < agents.back().release) r.fail("release times must be non-decreasing");
    if (a.start == a.goal) r.fail("start equals goal");
    agents.push_back(a);
  }
  return OnlineInstance(g, std::move(agents));
}

OnlineInstance load_instance(const std::filesystem::path& world, const std::filesystem::path& scenario) {
  Graph g = load_world(world);
  auto in = open(scenario);
  return parse_scenario(in, scenario.string(), g);
}

Plan parse_plan_csv(std::istream& in, const std::string& name) {
  LineReader r(in, name);
  if (!r.next() || r.line != "agent,start_time,arrival_time,service_time,path") r.fail("missing plan header");
  Plan plan;
  while (r.next()) {
    if (r.line.empty()) continue;
    auto f = split(r.line, ',');
    if (f.size() != 5) r.fail("expected 5 columns");
    const int id = to_int(r, f[0]);
    Path p;
    p.start_time = to_int(r, f[1]);
    for (const auto& v : split(f[4], ';')) p.vertices.push_back(to_int(r, v));
    if (p.vertices.empty()) r.fail("empty path");
    if (to_int(r, f[2]) != p.arrival_time()) r.fail("arrival_time disagrees with the path");
    if (!plan.emplace(id, std::move(p)).second) r.fail("duplicate agent " + std::to_string(id));
  }
  return plan;
}

Plan load_plan_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_plan_csv(in, path.string());
}

void write_plan_csv(std::ostream& out, const Plan& plan, const OnlineInstance& inst) {
  out << "agent,start_time,arrival_time,service_time,path\n";
  for (const auto& [id, path] : plan) {
    out << id << ',' << path.start_time << ',' << path.arrival_time() << ','
        << path.arrival_time() - inst.agent(id).release << ',';
    for (std::size_t i = 0; i < path.vertices.size(); ++i) out << (i ? ";" : "") << path.vertices[i];
    out << '\n';
  }
}

SatInstance parse_dimacs(std::istream& in, const std::string& name) {
  LineReader r(in, name);
  if (!r.next_content('c')) r.fail("missing 'p cnf' header");
  auto h = tokens(r.line);
  if (h.size() != 4 || h[0] != "p" || h[1] != "cnf") r.fail("expected 'p cnf N M'");
  SatInstance sat;
  sat.variable_count = to_int(r, h[2]);
  const int clause_count = to_int(r, h[3]);
  if (sat.variable_count < 0 || clause_count < 0) r.fail("negative counts in header");
  std::vector<int> current;
  while (r.next_content('c')) {
    for (const auto& tok : tokens(r.line)) {
      if (tok == "%") break;
      const int lit = to_int(r, tok);
      if (lit == 0) {
        sat.clauses.push_back(std::move(current));
        current.clear();
        continue;
      }
      if (std::abs(lit) > sat.variable_count) r.fail("literal " + tok + " exceeds the variable count");
      current.push_back(lit);
    }
  }
  if (!current.empty()) r.fail("last clause is not terminated by 0");
  if (static_cast<int>(sat.clauses.size()) != clause_count) {
    r.fail("header declares " + std::to_string(clause_count) + " clauses, found " + std::to_string(sat.clauses.size()));
  }
  return sat;
}

SatInstance load_dimacs(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_dimacs(in, path.string());
}

void write_map(std::ostream& out, const GridMap& map) {
  out << "height " << map.height << "\nwidth " << map.width << "\nmap\n";
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) out << (map.is_blocked(r, c) ? '@' : '.');
    out << '\n';
  }
}

void write_graph(std::ostream& out, const Graph& g) {
  out << "vertices " << g.vertex_count() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

void write_world(std::ostream& out, const Graph& g) {
  if (g.grid()) {
    write_map(out, *g.grid());
  } else {
    write_graph(out, g);
  }
}

void write_scenario(std::ostream& out, const OnlineInstance& inst) {
  const Graph& g = inst.graph();
  for (const Agent& a : inst.agents()) {
    out << a.id << ' ' << a.release;
    for (VertexId v : {a.start, a.goal}) {
      if (g.grid()) {
        const Cell c = g.cell_of(v);
        out << ' ' << c.row << ' ' << c.col;
      } else {
        out << ' ' << v;
      }
    }
    out << '\n';
  }
}

void write_labels(std::ostream& out, const std::vector<std::string>& roles) {
  for (std::size_t v = 0; v < roles.size(); ++v) out << v << ' ' << roles[v] << '\n';
}

}  // namespace omapf
