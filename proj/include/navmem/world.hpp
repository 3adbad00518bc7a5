#pragma once

// Ground-truth simulated environments and navigation episodes. A Scene is an
// immutable graph of viewpoints with 3D positions, symmetric navigability
// edges, and oriented-box object annotations; episodes name a start, a goal,
// and an expert path through one scene.

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "navmem/geometry.hpp"

namespace navmem::world {

using geom::Mat3;
using geom::Vec3;

// Oriented box: center, per-axis half extents, and the three local axis
// directions stored as the columns of `axes`.
struct ObjectAnnotation {
  std::string name;
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
  Mat3 axes = Mat3::Identity();

  bool operator==(const ObjectAnnotation& o) const {
    return name == o.name && center == o.center &&
           half_extents == o.half_extents && axes == o.axes;
  }
};

struct Viewpoint {
  std::string id;
  Vec3 position = Vec3::Zero();
  std::vector<std::string> neighbors;
  std::vector<ObjectAnnotation> objects;

  bool operator==(const Viewpoint& o) const {
    return id == o.id && position == o.position && neighbors == o.neighbors &&
           objects == o.objects;
  }
};

// Immutable after construction; safe for concurrent reads.
class Scene {
 public:
  Scene() = default;

  // Validates all viewpoint invariants (unique ids, resolvable and symmetric
  // neighbors, no self-loops, positive half extents, orthonormal axes) and
  // throws ValidationError naming the offending id on failure.
  static Scene from_viewpoints(std::string scene_id,
                               std::vector<Viewpoint> viewpoints);

  const std::string& scene_id() const { return scene_id_; }
  const std::vector<Viewpoint>& viewpoints() const { return viewpoints_; }
  bool contains(const std::string& id) const {
    return index_.count(id) != 0;
  }
  const Viewpoint& viewpoint(const std::string& id) const;
  std::size_t size() const { return viewpoints_.size(); }

  // Undirected edges as (a, b) pairs with a < b, one entry per edge.
  std::vector<std::pair<std::string, std::string>> edges() const;

  bool operator==(const Scene& o) const {
    return scene_id_ == o.scene_id_ && viewpoints_ == o.viewpoints_;
  }

 private:
  std::string scene_id_;
  std::vector<Viewpoint> viewpoints_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Episode {
  std::string episode_id;
  std::string scene_id;
  std::string instruction;
  std::string start;
  std::string goal;
  std::vector<std::string> expert_path;
  double goal_radius = 3.0;
  int max_steps = 40;
};

struct NavigableEntry {
  std::string id;
  double heading = 0.0;    // [0, 2*pi), clockwise from north
  double elevation = 0.0;  // [-pi/2, pi/2]
  double distance = 0.0;   // meters
};

struct StepObservation {
  std::string current;
  std::vector<NavigableEntry> navigable;
  std::vector<std::string> visible_objects;
};

// Discrete action space: stop, or move to an adjacent viewpoint.
struct Action {
  enum class Kind { Stop, MoveTo };
  Kind kind = Kind::Stop;
  std::string target;  // empty for Stop

  static Action stop() { return {Kind::Stop, {}}; }
  static Action move_to(std::string id) {
    return {Kind::MoveTo, std::move(id)};
  }
  bool is_stop() const { return kind == Kind::Stop; }
  bool operator==(const Action& o) const {
    return kind == o.kind && target == o.target;
  }
};

// --- scene / episode files (JSON, schema_version 1) ---

Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);

// Episode files are {"schema_version": 1, "episodes": [...]}. Records without
// an "episode_id" get "ep{index}". Intra-record invariants (path endpoints,
// radius, max_steps) are checked here; neighbor consecutiveness needs the
// scene and is checked by validate_episode.
std::vector<Episode> load_episodes(const std::string& path);
void save_episodes(const std::vector<Episode>& episodes,
                   const std::string& path);
void validate_episode(const Episode& episode, const Scene& scene);

// --- simulator queries ---

// Lists the neighbors of `current` with relative direction and Euclidean
// distance, plus the object names annotated at `current`.
StepObservation observe(const Scene& scene, const std::string& current);

// MoveTo returns the target id; Stop returns nullopt. MoveTo to a
// non-neighbor throws IllegalActionError.
std::optional<std::string> step(const Scene& scene, const std::string& current,
                                const Action& action);

// --- graph search over the full scene ---

// Hop counts from `source` to every reachable viewpoint.
std::unordered_map<std::string, int> bfs_hops(const Scene& scene,
                                              const std::string& source);

// Metric shortest-path lengths (Euclidean edge weights) from `source`.
std::unordered_map<std::string, double> dijkstra_lengths(
    const Scene& scene, const std::string& source);

// Metric shortest-path length between two viewpoints, if connected.
std::optional<double> shortest_path_length(const Scene& scene,
                                           const std::string& from,
                                           const std::string& to);

}  // namespace navmem::world
