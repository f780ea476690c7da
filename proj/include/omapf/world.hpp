#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace omapf {

using VertexId = std::int32_t;

struct Cell {
  int row = 0;
  int col = 0;

  auto operator<=>(const Cell&) const = default;
};

// Rectangular 4-neighbor map. Unblocked cells become graph vertices.
struct GridMap {
  int height = 0;
  int width = 0;
  std::set<Cell> blocked;

  bool is_blocked(int row, int col) const { return blocked.contains(Cell{row, col}); }
};

class DistanceCache;

// Connected undirected graph with sorted adjacency lists.
//
// Copies share one lazily filled distance cache, so a Graph is cheap to copy
// and safe to read from several threads.
class Graph {
 public:
  Graph();

  int vertex_count() const { return static_cast<int>(adjacency_.size()); }
  std::size_t edge_count() const;
  std::span<const VertexId> neighbors(VertexId v) const { return adjacency_[static_cast<std::size_t>(v)]; }
  bool adjacent(VertexId u, VertexId v) const;
  bool valid(VertexId v) const { return v >= 0 && v < vertex_count(); }

  // Unweighted shortest-path length; memoized per source.
  int distance(VertexId s, VertexId t) const;
  std::span<const int> distances_from(VertexId s) const;

  // Grid layout, present only for graphs built from a GridMap.
  const GridMap* grid() const { return grid_.get(); }
  Cell cell_of(VertexId v) const;
  std::optional<VertexId> vertex_at(int row, int col) const;

  std::vector<std::pair<VertexId, VertexId>> edges() const;

 private:
  friend Graph build_grid(const GridMap& map);
  friend Graph build_graph(int vertex_count, const std::vector<std::pair<VertexId, VertexId>>& edges);

  void finalize();

  std::vector<std::vector<VertexId>> adjacency_;
  std::shared_ptr<const GridMap> grid_;
  std::vector<Cell> cells_;
  std::vector<VertexId> cell_index_;  // row-major, -1 for blocked
  std::shared_ptr<DistanceCache> distances_;
};

// One vertex per unblocked cell, numbered row-major.
Graph build_grid(const GridMap& map);
Graph build_grid(int height, int width, const std::set<Cell>& blocked = {});

Graph build_graph(int vertex_count, const std::vector<std::pair<VertexId, VertexId>>& edges);

int shortest_dist(const Graph& g, VertexId s, VertexId t);

}  // namespace omapf
