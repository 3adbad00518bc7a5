#pragma once
#include <cmath>

// Shared fixture builders for the test binaries.

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "navmem/memgraph.hpp"
#include "navmem/world.hpp"

namespace testutil {

namespace fs = std::filesystem;
using navmem::world::Scene;
using navmem::world::Viewpoint;

inline std::string padded(int value, int width = 3) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

// rows x cols lattice, 4-connected, unit spacing; every edge has metric
// length exactly 1 so hop-shortest and metric-shortest paths coincide.
inline std::vector<Viewpoint> grid_viewpoints(int rows, int cols,
                                              double spacing = 1.0) {
  std::vector<Viewpoint> vps;
  auto id_of = [](int r, int c) {
    return "r" + padded(r, 2) + "c" + padded(c, 2);
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Viewpoint vp;
      vp.id = id_of(r, c);
      vp.position = {c * spacing, r * spacing, 0.0};
      if (r > 0) vp.neighbors.push_back(id_of(r - 1, c));
      if (r + 1 < rows) vp.neighbors.push_back(id_of(r + 1, c));
      if (c > 0) vp.neighbors.push_back(id_of(r, c - 1));
      if (c + 1 < cols) vp.neighbors.push_back(id_of(r, c + 1));
      vps.push_back(std::move(vp));
    }
  }
  return vps;
}

inline Scene grid_scene(int rows, int cols, const std::string& id = "grid",
                        double spacing = 1.0) {
  return Scene::from_viewpoints(id, grid_viewpoints(rows, cols, spacing));
}

// Path graph n000 - n001 - ... along the y axis, unit spacing.
inline Scene line_scene(int n, const std::string& id = "line") {
  std::vector<Viewpoint> vps;
  for (int i = 0; i < n; ++i) {
    Viewpoint vp;
    vp.id = "n" + padded(i);
    vp.position = {0.0, static_cast<double>(i), 0.0};
    if (i > 0) vp.neighbors.push_back("n" + padded(i - 1));
    if (i + 1 < n) vp.neighbors.push_back("n" + padded(i + 1));
    vps.push_back(std::move(vp));
  }
  return Scene::from_viewpoints(id, vps);
}

// Cycle graph on a circle; walking forward discovers exactly one new node
// per step.
inline Scene cycle_scene(int n, const std::string& id = "cycle") {
  std::vector<Viewpoint> vps;
  const double radius = n / (2.0 * 3.14159265358979323846);
  for (int i = 0; i < n; ++i) {
    Viewpoint vp;
    vp.id = "n" + padded(i);
    const double angle = 2.0 * 3.14159265358979323846 * i / n;
    vp.position = {radius * std::cos(angle), radius * std::sin(angle), 0.0};
    vp.neighbors.push_back("n" + padded((i + n - 1) % n));
    vp.neighbors.push_back("n" + padded((i + 1) % n));
    vps.push_back(std::move(vp));
  }
  return Scene::from_viewpoints(id, vps);
}

// Connected random graph: a random spanning tree plus extra edges, random
// positions in a 10 m box.
inline Scene random_scene(std::mt19937_64& rng, int n,
                          const std::string& id = "rand") {
  std::vector<Viewpoint> vps(n);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  std::uniform_real_distribution<double> height(0.0, 3.0);
  for (int i = 0; i < n; ++i) {
    vps[i].id = "n" + padded(i);
    vps[i].position = {coord(rng), coord(rng), height(rng)};
  }
  std::set<std::pair<int, int>> edges;
  auto add_edge = [&](int a, int b) {
    if (a == b) return;
    if (a > b) std::swap(a, b);
    if (!edges.insert({a, b}).second) return;
    vps[a].neighbors.push_back(vps[b].id);
    vps[b].neighbors.push_back(vps[a].id);
  };
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    add_edge(i, pick(rng));
  }
  const int extra = n / 2;
  std::uniform_int_distribution<int> any(0, n - 1);
  for (int e = 0; e < extra; ++e) add_edge(any(rng), any(rng));
  return Scene::from_viewpoints(id, vps);
}

// Random topological map honoring the map invariants, for pruning property
// tests: up to max_nodes nodes, random edges, a random visited subset with
// visit times in [1, clock], and a visited current node.
inline navmem::memgraph::TopoMap random_map(std::mt19937_64& rng,
                                            int max_nodes = 30,
                                            int max_clock = 40) {
  navmem::memgraph::TopoMap map;
  std::uniform_int_distribution<int> node_count(2, max_nodes);
  const int n = node_count(rng);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    ids.push_back("m" + padded(i, 2));
    map.insert_node(ids.back());
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double edge_prob = std::min(1.0, 2.5 / n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (unit(rng) < edge_prob) map.insert_edge(ids[a], ids[b]);
    }
  }
  std::uniform_int_distribution<int> clock_dist(1, max_clock);
  const int clock = clock_dist(rng);
  std::uniform_int_distribution<int> visit_time(1, clock);
  std::vector<std::string> visited;
  for (const auto& id : ids) {
    if (unit(rng) < 0.6) {
      map.mark_visited(id, visit_time(rng));
      visited.push_back(id);
    }
  }
  if (visited.empty()) {
    map.mark_visited(ids[0], visit_time(rng));
    visited.push_back(ids[0]);
  }
  std::uniform_int_distribution<std::size_t> pick(0, visited.size() - 1);
  const std::string current = visited[pick(rng)];
  map.mark_visited(current, clock);
  map.set_current(current);
  map.set_clock(clock);
  return map;
}

class TmpDir {
 public:
  explicit TmpDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("navmem_" + tag + "_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TmpDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  fs::path path_;
};

}  // namespace testutil
