#pragma once

// The agent's evolving graph memory: incremental topological map
// construction, eligibility-gated priority-scored pruning, and the textual
// map rendering consumed by planner prompts.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "navmem/world.hpp"

namespace navmem::memgraph {

struct NodeRecord {
  std::string id;
  // Step index of the last visit; empty for observed-but-unvisited nodes.
  std::optional<int> last_visit;
  // Object names observed at the node on its most recent visit.
  std::vector<std::string> annotation;
};

// Pruning constants. The defaults are the tuned values the harness ships
// with; unreachable_distance == 0 means "use the current node count" as the
// graph distance of nodes unreachable from the current viewpoint.
struct PruneConfig {
  int t_start = 15;
  int theta_recent_visit = 3;
  int theta_age = 10;
  int n_remove = 1;
  double lambda_t = 1.0;
  double lambda_d = 2.0;
  double lambda_f = 5.0;
  double lambda_dist = 0.5;
  double unreachable_distance = 0.0;
};

// The three text blocks of the map prompt. `trajectory` is a single line
// including its label; `map` and `supplementary` are newline-joined per-node
// lines without a leading label (the prompt builder adds section headers).
struct MemoryContext {
  std::string trajectory;
  std::string map;
  std::string supplementary;
};

// One map per episode, single writer. Node presentation numbers ("Place k",
// k = order of first observation) are assigned once and survive pruning so
// prompts and traces stay consistent across the whole episode.
class TopoMap {
 public:
  bool empty() const { return nodes_.empty(); }
  bool contains(const std::string& id) const { return nodes_.count(id) != 0; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  int clock() const { return clock_; }
  const std::string& current() const { return current_; }
  const std::map<std::string, NodeRecord>& nodes() const { return nodes_; }
  const std::set<std::pair<std::string, std::string>>& edges() const {
    return edges_;
  }
  const std::set<std::string>& visited() const { return visited_; }
  bool is_visited(const std::string& id) const {
    return visited_.count(id) != 0;
  }
  // First-visit order of the surviving visited nodes.
  const std::vector<std::string>& visit_order() const { return visit_order_; }

  const NodeRecord& node(const std::string& id) const;
  std::vector<std::string> neighbors(const std::string& id) const;
  int degree(const std::string& id) const;
  int unvisited_neighbor_count(const std::string& id) const;

  // Presentation number for a node, assigned at first observation and kept
  // through pruning and re-observation.
  int place(const std::string& id) const;
  std::string place_label(const std::string& id) const;

  // Unweighted hop count from the current viewpoint; empty if unreachable.
  std::optional<int> hops_from_current(const std::string& id) const;

  // Mutators, used by observe_and_update / prune and by test builders.
  void set_clock(int t);
  void set_current(const std::string& id);
  void insert_node(const std::string& id);
  void insert_edge(const std::string& a, const std::string& b);
  void mark_visited(const std::string& id, int when);
  void set_annotation(const std::string& id, std::vector<std::string> names);
  void remove_node(const std::string& id);

 private:
  std::map<std::string, NodeRecord> nodes_;
  std::set<std::pair<std::string, std::string>> edges_;  // normalized a < b
  std::map<std::string, std::set<std::string>> adjacency_;
  std::set<std::string> visited_;
  std::vector<std::string> visit_order_;
  std::string current_;
  int clock_ = 0;
  std::map<std::string, int> places_;
  int next_place_ = 0;
};

// Advances the map clock and folds one observation into the map: the
// observed viewpoint is marked visited and re-annotated, every navigable
// neighbor is inserted (unvisited if new), and the connecting edges are
// added. `obs.current` must already be a node unless the map is empty.
TopoMap observe_and_update(TopoMap map, const world::StepObservation& obs);

// The assessment set: visited, non-current nodes whose last visit is both
// older than theta_recent_visit and older than theta_age steps.
std::set<std::string> eligible_nodes(const TopoMap& map,
                                     const PruneConfig& cfg);

// Pruning priority of an eligible node: staleness, connectivity, frontier
// potential, and hop distance from the current viewpoint, weighted by the
// lambda coefficients. Higher means more prunable.
double priority_score(const TopoMap& map, const std::string& id,
                      const PruneConfig& cfg);

struct PruneResult {
  TopoMap map;
  // Removed ids with their scores, in removal order (best score first, ties
  // to the lexicographically smallest id).
  std::vector<std::pair<std::string, double>> pruned;
};

// No-op before cfg.t_start; otherwise removes the min(n_remove, |eligible|)
// highest-scoring eligible nodes and their incident edges.
PruneResult prune(TopoMap map, const PruneConfig& cfg);

// Renders the Trajectory / Map / Supplementary Info blocks. Pruned nodes
// appear in none of them.
MemoryContext render_map_context(const TopoMap& map);

}  // namespace navmem::memgraph
