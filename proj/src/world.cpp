#include "omapf/world.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <string>

#include "omapf/errors.hpp"

namespace omapf {

class DistanceCache {
 public:
  explicit DistanceCache(std::size_t n) : rows_(n) {}

  std::span<const int> get(const std::vector<std::vector<VertexId>>& adjacency, VertexId s) {
    std::lock_guard lock(mutex_);
    auto& row = rows_[static_cast<std::size_t>(s)];
    if (row.empty()) row = bfs(adjacency, s);
    return row;
  }

 private:
  static std::vector<int> bfs(const std::vector<std::vector<VertexId>>& adjacency, VertexId s) {
    std::vector<int> dist(adjacency.size(), -1);
    std::deque<VertexId> queue{s};
    dist[static_cast<std::size_t>(s)] = 0;
    while (!queue.empty()) {
      VertexId v = queue.front();
      queue.pop_front();
      for (VertexId w : adjacency[static_cast<std::size_t>(v)]) {
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(w);
        }
      }
    }
    return dist;
  }

  std::mutex mutex_;
  // Rows are never resized after creation, so spans into them stay valid.
  std::vector<std::vector<int>> rows_;
};

Graph::Graph() : distances_(std::make_shared<DistanceCache>(0)) {}

std::size_t Graph::edge_count() const {
  std::size_t degree_sum = 0;
  for (const auto& adj : adjacency_) degree_sum += adj.size();
  return degree_sum / 2;
}

bool Graph::adjacent(VertexId u, VertexId v) const {
  if (!valid(u) || !valid(v)) return false;
  const auto& adj = adjacency_[static_cast<std::size_t>(u)];
  return std::binary_search(adj.begin(), adj.end(), v);
}

int Graph::distance(VertexId s, VertexId t) const { return distances_from(s)[static_cast<std::size_t>(t)]; }

std::span<const int> Graph::distances_from(VertexId s) const { return distances_->get(adjacency_, s); }

Cell Graph::cell_of(VertexId v) const {
  if (!grid_) throw Error("graph has no grid layout");
  return cells_.at(static_cast<std::size_t>(v));
}

std::optional<VertexId> Graph::vertex_at(int row, int col) const {
  if (!grid_) return std::nullopt;
  if (row < 0 || col < 0 || row >= grid_->height || col >= grid_->width) return std::nullopt;
  VertexId v = cell_index_[static_cast<std::size_t>(row * grid_->width + col)];
  if (v < 0) return std::nullopt;
  return v;
}

std::vector<std::pair<VertexId, VertexId>> Graph::edges() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  for (VertexId u = 0; u < vertex_count(); ++u) {
    for (VertexId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

void Graph::finalize() {
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  distances_ = std::make_shared<DistanceCache>(adjacency_.size());
  if (adjacency_.empty()) throw EmptyWorld("world has no vertices");
  auto reach = distances_from(0);
  if (std::any_of(reach.begin(), reach.end(), [](int d) { return d < 0; })) {
    throw DisconnectedWorld("world is not connected");
  }
}

Graph build_grid(const GridMap& map) {
  if (map.height < 1 || map.width < 1) throw EmptyWorld("grid must have at least one cell");
  Graph g;
  g.grid_ = std::make_shared<const GridMap>(map);
  g.cell_index_.assign(static_cast<std::size_t>(map.height * map.width), -1);
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      if (map.is_blocked(r, c)) continue;
      g.cell_index_[static_cast<std::size_t>(r * map.width + c)] = static_cast<VertexId>(g.cells_.size());
      g.cells_.push_back(Cell{r, c});
    }
  }
  if (g.cells_.empty()) throw EmptyWorld("every grid cell is blocked");
  g.adjacency_.resize(g.cells_.size());
  for (std::size_t v = 0; v < g.cells_.size(); ++v) {
    const auto [r, c] = g.cells_[v];
    constexpr int kDr[] = {-1, 0, 0, 1};
    constexpr int kDc[] = {0, -1, 1, 0};
    for (int d = 0; d < 4; ++d) {
      if (auto w = g.vertex_at(r + kDr[d], c + kDc[d])) g.adjacency_[v].push_back(*w);
    }
  }
  g.finalize();
  return g;
}

Graph build_grid(int height, int width, const std::set<Cell>& blocked) {
  return build_grid(GridMap{height, width, blocked});
}

Graph build_graph(int vertex_count, const std::vector<std::pair<VertexId, VertexId>>& edges) {
  if (vertex_count < 1) throw EmptyWorld("graph must have at least one vertex");
  Graph g;
  g.adjacency_.resize(static_cast<std::size_t>(vertex_count));
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= vertex_count || v >= vertex_count) {
      throw InvalidEdge("edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
    }
    if (u == v) throw InvalidEdge("self-loop at vertex " + std::to_string(u));
    g.adjacency_[static_cast<std::size_t>(u)].push_back(v);
    g.adjacency_[static_cast<std::size_t>(v)].push_back(u);
  }
  g.finalize();
  return g;
}

int shortest_dist(const Graph& g, VertexId s, VertexId t) { return g.distance(s, t); }

}  // namespace omapf
