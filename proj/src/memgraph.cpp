#include "navmem/memgraph.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace navmem::memgraph {

namespace {

std::pair<std::string, std::string> norm_edge(const std::string& a,
                                              const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

const NodeRecord& TopoMap::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw std::out_of_range("no such map node: " + id);
  }
  return it->second;
}

std::vector<std::string> TopoMap::neighbors(const std::string& id) const {
  auto it = adjacency_.find(id);
  if (it == adjacency_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

int TopoMap::degree(const std::string& id) const {
  auto it = adjacency_.find(id);
  return it == adjacency_.end() ? 0 : static_cast<int>(it->second.size());
}

int TopoMap::unvisited_neighbor_count(const std::string& id) const {
  auto it = adjacency_.find(id);
  if (it == adjacency_.end()) return 0;
  int count = 0;
  for (const auto& nbr : it->second) {
    if (!visited_.count(nbr)) ++count;
  }
  return count;
}

int TopoMap::place(const std::string& id) const {
  auto it = places_.find(id);
  if (it == places_.end()) {
    throw std::out_of_range("no place number for node: " + id);
  }
  return it->second;
}

std::string TopoMap::place_label(const std::string& id) const {
  return "Place " + std::to_string(place(id));
}

std::optional<int> TopoMap::hops_from_current(const std::string& id) const {
  if (current_.empty() || !contains(id)) return std::nullopt;
  std::map<std::string, int> dist;
  dist[current_] = 0;
  std::deque<std::string> queue{current_};
  while (!queue.empty()) {
    const std::string at = queue.front();
    queue.pop_front();
    if (at == id) return dist[at];
    auto it = adjacency_.find(at);
    if (it == adjacency_.end()) continue;
    for (const auto& nbr : it->second) {
      if (dist.emplace(nbr, dist[at] + 1).second) {
        queue.push_back(nbr);
      }
    }
  }
  return std::nullopt;
}

void TopoMap::set_clock(int t) {
  assert(t >= clock_);
  clock_ = t;
}

void TopoMap::set_current(const std::string& id) {
  insert_node(id);
  current_ = id;
}

void TopoMap::insert_node(const std::string& id) {
  if (nodes_.emplace(id, NodeRecord{id, std::nullopt, {}}).second) {
    adjacency_.emplace(id, std::set<std::string>{});
    // Re-added nodes keep their original presentation number.
    if (places_.emplace(id, next_place_).second) ++next_place_;
  }
}

void TopoMap::insert_edge(const std::string& a, const std::string& b) {
  if (a == b) return;  // no self-loops
  insert_node(a);
  insert_node(b);
  if (edges_.insert(norm_edge(a, b)).second) {
    adjacency_[a].insert(b);
    adjacency_[b].insert(a);
  }
}

void TopoMap::mark_visited(const std::string& id, int when) {
  insert_node(id);
  NodeRecord& rec = nodes_.at(id);
  rec.last_visit = when;
  if (visited_.insert(id).second) {
    visit_order_.push_back(id);
  }
}

void TopoMap::set_annotation(const std::string& id,
                             std::vector<std::string> names) {
  insert_node(id);
  nodes_.at(id).annotation = std::move(names);
}

void TopoMap::remove_node(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return;
  nodes_.erase(it);
  visited_.erase(id);
  visit_order_.erase(
      std::remove(visit_order_.begin(), visit_order_.end(), id),
      visit_order_.end());
  for (const auto& nbr : adjacency_.at(id)) {
    adjacency_.at(nbr).erase(id);
    edges_.erase(norm_edge(id, nbr));
  }
  adjacency_.erase(id);
  // places_ intentionally keeps the retired number.
}

TopoMap observe_and_update(TopoMap map, const world::StepObservation& obs) {
  assert(map.empty() || map.contains(obs.current));
  map.set_clock(map.clock() + 1);
  map.set_current(obs.current);
  map.mark_visited(obs.current, map.clock());
  map.set_annotation(obs.current, obs.visible_objects);
  for (const auto& entry : obs.navigable) {
    map.insert_node(entry.id);
    map.insert_edge(obs.current, entry.id);
  }
  return map;
}

std::set<std::string> eligible_nodes(const TopoMap& map,
                                     const PruneConfig& cfg) {
  std::set<std::string> out;
  for (const auto& id : map.visited()) {
    if (id == map.current()) continue;
    const auto& last = map.node(id).last_visit;
    assert(last.has_value());
    const int gap = map.clock() - *last;
    if (gap > cfg.theta_recent_visit && gap > cfg.theta_age) {
      out.insert(id);
    }
  }
  return out;
}

double priority_score(const TopoMap& map, const std::string& id,
                      const PruneConfig& cfg) {
  assert(eligible_nodes(map, cfg).count(id));
  const int last = map.node(id).last_visit.value();
  const double staleness =
      std::max(1, map.clock() - last - cfg.theta_age);
  const double connectivity = -map.degree(id);
  const double frontier = -map.unvisited_neighbor_count(id);
  const auto hops = map.hops_from_current(id);
  const double distance =
      hops ? static_cast<double>(*hops)
           : (cfg.unreachable_distance > 0.0
                  ? cfg.unreachable_distance
                  : static_cast<double>(map.node_count()));
  return cfg.lambda_t * staleness + cfg.lambda_d * connectivity +
         cfg.lambda_f * frontier + cfg.lambda_dist * distance;
}

PruneResult prune(TopoMap map, const PruneConfig& cfg) {
  PruneResult result;
  if (map.clock() < cfg.t_start || cfg.n_remove <= 0) {
    result.map = std::move(map);
    return result;
  }
  std::vector<std::pair<std::string, double>> scored;
  for (const auto& id : eligible_nodes(map, cfg)) {
    scored.emplace_back(id, priority_score(map, id, cfg));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::size_t k =
      std::min<std::size_t>(scored.size(), static_cast<std::size_t>(cfg.n_remove));
  for (std::size_t i = 0; i < k; ++i) {
    map.remove_node(scored[i].first);
    result.pruned.push_back(scored[i]);
  }
  result.map = std::move(map);
  return result;
}

MemoryContext render_map_context(const TopoMap& map) {
  MemoryContext ctx;

  std::ostringstream traj;
  traj << "Trajectory:";
  bool first = true;
  for (const auto& id : map.visit_order()) {
    traj << (first ? " " : ", ") << map.place_label(id);
    first = false;
  }
  ctx.trajectory = traj.str();

  // One line per surviving node, ordered by place number; neighbor lists
  // likewise.
  std::vector<std::string> by_place;
  for (const auto& [id, rec] : map.nodes()) by_place.push_back(id);
  std::sort(by_place.begin(), by_place.end(),
            [&](const std::string& a, const std::string& b) {
              return map.place(a) < map.place(b);
            });

  std::ostringstream mapb;
  std::ostringstream supp;
  for (std::size_t i = 0; i < by_place.size(); ++i) {
    const std::string& id = by_place[i];
    if (i > 0) {
      mapb << '\n';
      supp << '\n';
    }
    auto nbrs = map.neighbors(id);
    std::sort(nbrs.begin(), nbrs.end(),
              [&](const std::string& a, const std::string& b) {
                return map.place(a) < map.place(b);
              });
    if (nbrs.empty()) {
      mapb << map.place_label(id) << " has no connections";
    } else {
      mapb << map.place_label(id) << " is connected with ";
      for (std::size_t n = 0; n < nbrs.size(); ++n) {
        if (n > 0) mapb << ", ";
        mapb << map.place_label(nbrs[n]);
      }
    }
    const auto& annotation = map.node(id).annotation;
    supp << map.place_label(id) << ": ";
    if (annotation.empty()) {
      supp << "none";
    } else {
      for (std::size_t n = 0; n < annotation.size(); ++n) {
        if (n > 0) supp << ", ";
        supp << annotation[n];
      }
    }
  }
  ctx.map = mapb.str();
  ctx.supplementary = supp.str();
  return ctx;
}

}  // namespace navmem::memgraph
