#pragma once

#include <algorithm>
#include <queue>
#include <string>
#include <vector>

#include "gsom/error.hpp"

namespace gsom {

/// Sentinel for "no path": units in different components. Kept distinct from
/// any finite hop count so kernels can test it exactly.
inline constexpr int kUnreachable = -1;

enum class LatticeKind { Grid, Strings, Star, Custom };

inline std::string to_string(LatticeKind k) {
  switch (k) {
    case LatticeKind::Grid: return "grid";
    case LatticeKind::Strings: return "strings";
    case LatticeKind::Star: return "star";
    case LatticeKind::Custom: return "custom";
  }
  return "custom";
}

/// Undirected map lattice over K units with precomputed all-pairs
/// shortest-path (edge count) distances. Unit ids are 1-indexed.
///
/// Immutable after construction; concurrent reads are safe.
class MapTopology {
 public:
  /// rows x cols grid, row-major ids: unit = (r-1)*cols + c, 4-neighborhood.
  static MapTopology grid(int rows, int cols) {
    require(rows >= 1 && cols >= 1, "grid: rows and cols must be positive");
    const int k = rows * cols;
    std::vector<std::pair<int, int>> edges;
    for (int r = 1; r <= rows; ++r) {
      for (int c = 1; c <= cols; ++c) {
        const int u = (r - 1) * cols + c;
        if (c < cols) edges.emplace_back(u, u + 1);
        if (r < rows) edges.emplace_back(u, u + cols);
      }
    }
    MapTopology t(k, edges);
    t.kind_ = LatticeKind::Grid;
    t.param_a_ = rows;
    t.param_b_ = cols;
    return t;
  }

  /// n disconnected path graphs of `length` units each; string s occupies
  /// units (s-1)*length+1 .. s*length.
  static MapTopology strings(int n_strings, int length) {
    require(n_strings >= 1 && length >= 1, "strings: arguments must be positive");
    const int k = n_strings * length;
    std::vector<std::pair<int, int>> edges;
    for (int s = 0; s < n_strings; ++s) {
      for (int p = 1; p < length; ++p) {
        const int u = s * length + p;
        edges.emplace_back(u, u + 1);
      }
    }
    MapTopology t(k, edges);
    t.kind_ = LatticeKind::Strings;
    t.param_a_ = n_strings;
    t.param_b_ = length;
    return t;
  }

  /// Star: unit 1 is the center; ray r occupies units 2+(r-1)*ray_length ..
  /// 1+r*ray_length as a path whose first unit touches the center.
  static MapTopology star(int n_rays, int ray_length) {
    require(n_rays >= 1 && ray_length >= 1, "star: arguments must be positive");
    const int k = 1 + n_rays * ray_length;
    std::vector<std::pair<int, int>> edges;
    for (int r = 0; r < n_rays; ++r) {
      const int first = 2 + r * ray_length;
      edges.emplace_back(1, first);
      for (int p = 0; p < ray_length - 1; ++p) edges.emplace_back(first + p, first + p + 1);
    }
    MapTopology t(k, edges);
    t.kind_ = LatticeKind::Star;
    t.param_a_ = n_rays;
    t.param_b_ = ray_length;
    return t;
  }

  /// Arbitrary undirected graph from a 0/1 adjacency matrix.
  static MapTopology from_adjacency(const std::vector<std::vector<int>>& adj) {
    const int k = static_cast<int>(adj.size());
    require(k >= 1, "from_adjacency: empty matrix");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < k; ++i) {
      require(static_cast<int>(adj[i].size()) == k, "from_adjacency: matrix not square");
      require(adj[i][i] == 0, "from_adjacency: nonzero diagonal at unit " + std::to_string(i + 1));
      for (int j = i + 1; j < k; ++j) {
        require(adj[i][j] == adj[j][i],
                "from_adjacency: matrix not symmetric at (" + std::to_string(i + 1) + "," +
                    std::to_string(j + 1) + ")");
        require(adj[i][j] == 0 || adj[i][j] == 1, "from_adjacency: entries must be 0 or 1");
        if (adj[i][j] == 1) edges.emplace_back(i + 1, j + 1);
      }
    }
    return MapTopology(k, edges);
  }

  /// Graph from an explicit 1-indexed edge list.
  static MapTopology from_edges(int unit_count, const std::vector<std::pair<int, int>>& edges) {
    return MapTopology(unit_count, edges);
  }

  int unit_count() const { return unit_count_; }

  bool adjacent(int i, int j) const { return distance(i, j) == 1; }

  /// Shortest-path distance in edges; kUnreachable across components.
  int distance(int i, int j) const {
    check_unit(i);
    check_unit(j);
    return dist_[static_cast<std::size_t>(i - 1) * unit_count_ + (j - 1)];
  }

  /// Neighbor unit ids of u (ascending).
  const std::vector<int>& neighbors(int u) const {
    check_unit(u);
    return neighbors_[u - 1];
  }

  /// Component index of u, 1..component_count(); components are numbered in
  /// order of their smallest member unit id.
  int component_of(int u) const {
    check_unit(u);
    return component_of_[u - 1];
  }

  int component_count() const { return component_count_; }

  /// Units of component c (ascending).
  std::vector<int> component_members(int c) const {
    require(c >= 1 && c <= component_count_, "component_members: index out of range");
    std::vector<int> out;
    for (int u = 1; u <= unit_count_; ++u)
      if (component_of_[u - 1] == c) out.push_back(u);
    return out;
  }

  /// Longest shortest path within the largest component (ties by lowest
  /// component index). 0 for a single isolated unit.
  int largest_component_diameter() const {
    std::vector<int> sizes(component_count_, 0);
    for (int c : component_of_) ++sizes[c - 1];
    const int big = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin()) + 1;
    int diam = 0;
    for (int i = 1; i <= unit_count_; ++i) {
      if (component_of_[i - 1] != big) continue;
      for (int j = i + 1; j <= unit_count_; ++j)
        if (component_of_[j - 1] == big) diam = std::max(diam, distance(i, j));
    }
    return diam;
  }

  LatticeKind kind() const { return kind_; }

  /// Constructor parameters: grid -> (rows, cols), strings -> (n, length),
  /// star -> (rays, ray_length). (0, 0) for custom graphs.
  std::pair<int, int> lattice_params() const { return {param_a_, param_b_}; }

  /// One-token description, e.g. "strings:5x8"; "custom:<K>" for graphs
  /// built from an adjacency matrix or edge list.
  std::string descriptor() const {
    if (kind_ == LatticeKind::Custom) return "custom:" + std::to_string(unit_count_);
    return to_string(kind_) + ":" + std::to_string(param_a_) + "x" + std::to_string(param_b_);
  }

  /// All edges (i < j), ascending.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 1; i <= unit_count_; ++i)
      for (int j : neighbors_[i - 1])
        if (i < j) out.emplace_back(i, j);
    return out;
  }

 private:
  MapTopology(int unit_count, const std::vector<std::pair<int, int>>& edge_list)
      : unit_count_(unit_count) {
    require(unit_count_ >= 1, "MapTopology: unit count must be positive");
    neighbors_.assign(unit_count_, {});
    for (auto [i, j] : edge_list) {
      require(i >= 1 && i <= unit_count_ && j >= 1 && j <= unit_count_,
              "MapTopology: edge endpoint out of range");
      require(i != j, "MapTopology: self-loop at unit " + std::to_string(i));
      neighbors_[i - 1].push_back(j);
      neighbors_[j - 1].push_back(i);
    }
    for (auto& ns : neighbors_) {
      std::sort(ns.begin(), ns.end());
      ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    }
    compute_distances();
    label_components();
  }

  void compute_distances() {
    const std::size_t k = static_cast<std::size_t>(unit_count_);
    dist_.assign(k * k, kUnreachable);
    std::vector<int> queue;
    for (int s = 0; s < unit_count_; ++s) {
      int* row = &dist_[static_cast<std::size_t>(s) * k];
      row[s] = 0;
      queue.clear();
      queue.push_back(s);
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const int u = queue[head];
        for (int v1 : neighbors_[u]) {
          const int v = v1 - 1;
          if (row[v] == kUnreachable) {
            row[v] = row[u] + 1;
            queue.push_back(v);
          }
        }
      }
    }
  }

  void label_components() {
    component_of_.assign(unit_count_, 0);
    component_count_ = 0;
    for (int u = 0; u < unit_count_; ++u) {
      if (component_of_[u] != 0) continue;
      ++component_count_;
      const int* row = &dist_[static_cast<std::size_t>(u) * unit_count_];
      for (int v = 0; v < unit_count_; ++v)
        if (row[v] != kUnreachable) component_of_[v] = component_count_;
    }
  }

  void check_unit(int u) const {
    require(u >= 1 && u <= unit_count_,
            "unit id " + std::to_string(u) + " out of range 1.." + std::to_string(unit_count_));
  }

  int unit_count_ = 0;
  std::vector<std::vector<int>> neighbors_;
  std::vector<int> dist_;
  std::vector<int> component_of_;
  int component_count_ = 0;
  LatticeKind kind_ = LatticeKind::Custom;
  int param_a_ = 0;
  int param_b_ = 0;
};

}  // namespace gsom
