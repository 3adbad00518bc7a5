#include "navmem/world.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <queue>
#include <set>
#include <utility>

#include <json.hpp>

#include "navmem/errors.hpp"

namespace navmem::world {

namespace {

using nlohmann::json;

Vec3 parse_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(what + " must be an array of 3 numbers", j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json dump_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

ObjectAnnotation parse_object(const json& j) {
  ObjectAnnotation obj;
  obj.name = j.at("name").get<std::string>();
  obj.center = parse_vec3(j.at("center"), "object center");
  obj.half_extents = parse_vec3(j.at("half_extents"), "object half_extents");
  const json& ax = j.at("axes");
  if (!ax.is_array() || ax.size() != 3) {
    throw ParseError("object axes must be an array of 3 vectors", j.dump());
  }
  for (int i = 0; i < 3; ++i) {
    obj.axes.col(i) = parse_vec3(ax[i], "object axis");
  }
  return obj;
}

json dump_object(const ObjectAnnotation& obj) {
  json ax = json::array();
  for (int i = 0; i < 3; ++i) {
    ax.push_back(dump_vec3(obj.axes.col(i)));
  }
  return json{{"name", obj.name},
              {"center", dump_vec3(obj.center)},
              {"half_extents", dump_vec3(obj.half_extents)},
              {"axes", ax}};
}

void check_schema_version(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("schema_version")) {
    throw ParseError(path + ": missing schema_version");
  }
  const int version = j.at("schema_version").get<int>();
  if (version != 1) {
    throw ParseError(path + ": unsupported schema_version " +
                     std::to_string(version));
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

Scene Scene::from_viewpoints(std::string scene_id,
                             std::vector<Viewpoint> viewpoints) {
  Scene scene;
  scene.scene_id_ = std::move(scene_id);
  scene.viewpoints_ = std::move(viewpoints);
  for (std::size_t i = 0; i < scene.viewpoints_.size(); ++i) {
    const auto& vp = scene.viewpoints_[i];
    if (!scene.index_.emplace(vp.id, i).second) {
      throw ValidationError("duplicate viewpoint id: " + vp.id);
    }
  }
  for (const auto& vp : scene.viewpoints_) {
    std::set<std::string> seen;
    for (const auto& nbr : vp.neighbors) {
      if (nbr == vp.id) {
        throw ValidationError("self-loop edge at viewpoint: " + vp.id);
      }
      if (!seen.insert(nbr).second) {
        throw ValidationError("duplicate neighbor " + nbr + " at viewpoint " +
                              vp.id);
      }
      auto it = scene.index_.find(nbr);
      if (it == scene.index_.end()) {
        throw ValidationError("dangling neighbor id " + nbr + " at viewpoint " +
                              vp.id);
      }
      const auto& other = scene.viewpoints_[it->second].neighbors;
      if (std::find(other.begin(), other.end(), vp.id) == other.end()) {
        throw ValidationError("asymmetric edge: " + vp.id + " -> " + nbr);
      }
    }
    for (const auto& obj : vp.objects) {
      if (obj.name.empty()) {
        throw ValidationError("unnamed object at viewpoint " + vp.id);
      }
      if (!(obj.half_extents.array() > 0.0).all()) {
        throw ValidationError("non-positive half_extents for object " +
                              obj.name + " at viewpoint " + vp.id);
      }
      const double err =
          (obj.axes.transpose() * obj.axes - Mat3::Identity())
              .cwiseAbs()
              .maxCoeff();
      if (err > 1e-6) {
        throw ValidationError("non-orthonormal axes for object " + obj.name +
                              " at viewpoint " + vp.id);
      }
    }
  }
  return scene;
}

const Viewpoint& Scene::viewpoint(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw ValidationError("unknown viewpoint id: " + id);
  }
  return viewpoints_[it->second];
}

std::vector<std::pair<std::string, std::string>> Scene::edges() const {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& vp : viewpoints_) {
    for (const auto& nbr : vp.neighbors) {
      out.insert(vp.id < nbr ? std::make_pair(vp.id, nbr)
                             : std::make_pair(nbr, vp.id));
    }
  }
  return {out.begin(), out.end()};
}

Scene load_scene(const std::string& path) {
  const json j = load_json_file(path);
  check_schema_version(j, path);
  std::vector<Viewpoint> viewpoints;
  for (const auto& vj : j.at("viewpoints")) {
    Viewpoint vp;
    vp.id = vj.at("id").get<std::string>();
    vp.position = parse_vec3(vj.at("position"), "viewpoint position");
    vp.neighbors = vj.at("neighbors").get<std::vector<std::string>>();
    if (vj.contains("objects")) {
      for (const auto& oj : vj.at("objects")) {
        vp.objects.push_back(parse_object(oj));
      }
    }
    viewpoints.push_back(std::move(vp));
  }
  return Scene::from_viewpoints(j.at("scene_id").get<std::string>(),
                                std::move(viewpoints));
}

void save_scene(const Scene& scene, const std::string& path) {
  json vps = json::array();
  for (const auto& vp : scene.viewpoints()) {
    json vj{{"id", vp.id},
            {"position", dump_vec3(vp.position)},
            {"neighbors", vp.neighbors}};
    if (!vp.objects.empty()) {
      json objs = json::array();
      for (const auto& obj : vp.objects) objs.push_back(dump_object(obj));
      vj["objects"] = std::move(objs);
    }
    vps.push_back(std::move(vj));
  }
  write_json_file(
      json{{"schema_version", 1},
           {"scene_id", scene.scene_id()},
           {"viewpoints", std::move(vps)}},
      path);
}

std::vector<Episode> load_episodes(const std::string& path) {
  const json j = load_json_file(path);
  check_schema_version(j, path);
  std::vector<Episode> episodes;
  std::size_t index = 0;
  for (const auto& ej : j.at("episodes")) {
    Episode ep;
    ep.episode_id = ej.value("episode_id", "ep" + std::to_string(index));
    ep.scene_id = ej.at("scene_id").get<std::string>();
    ep.instruction = ej.at("instruction").get<std::string>();
    ep.start = ej.at("start").get<std::string>();
    ep.goal = ej.at("goal").get<std::string>();
    ep.expert_path = ej.at("expert_path").get<std::vector<std::string>>();
    ep.goal_radius = ej.value("goal_radius", 3.0);
    ep.max_steps = ej.value("max_steps", 40);
    if (ep.expert_path.empty() || ep.expert_path.front() != ep.start ||
        ep.expert_path.back() != ep.goal) {
      throw ValidationError("episode " + ep.episode_id +
                            ": expert_path must run from start to goal");
    }
    if (ep.goal_radius <= 0.0) {
      throw ValidationError("episode " + ep.episode_id +
                            ": goal_radius must be positive");
    }
    if (ep.max_steps < 1) {
      throw ValidationError("episode " + ep.episode_id +
                            ": max_steps must be positive");
    }
    episodes.push_back(std::move(ep));
    ++index;
  }
  return episodes;
}

void save_episodes(const std::vector<Episode>& episodes,
                   const std::string& path) {
  json list = json::array();
  for (const auto& ep : episodes) {
    list.push_back(json{{"episode_id", ep.episode_id},
                        {"scene_id", ep.scene_id},
                        {"instruction", ep.instruction},
                        {"start", ep.start},
                        {"goal", ep.goal},
                        {"expert_path", ep.expert_path},
                        {"goal_radius", ep.goal_radius},
                        {"max_steps", ep.max_steps}});
  }
  write_json_file(json{{"schema_version", 1}, {"episodes", std::move(list)}},
                  path);
}

void validate_episode(const Episode& episode, const Scene& scene) {
  if (scene.scene_id() != episode.scene_id) {
    throw ValidationError("episode " + episode.episode_id +
                          " references scene " + episode.scene_id +
                          ", got " + scene.scene_id());
  }
  for (std::size_t i = 0; i + 1 < episode.expert_path.size(); ++i) {
    const auto& a = episode.expert_path[i];
    const auto& b = episode.expert_path[i + 1];
    const auto& nbrs = scene.viewpoint(a).neighbors;
    if (std::find(nbrs.begin(), nbrs.end(), b) == nbrs.end()) {
      throw ValidationError("episode " + episode.episode_id +
                            ": expert_path hop " + a + " -> " + b +
                            " is not an edge");
    }
  }
}

StepObservation observe(const Scene& scene, const std::string& current) {
  const Viewpoint& here = scene.viewpoint(current);
  StepObservation obs;
  obs.current = current;
  for (const auto& nbr : here.neighbors) {
    const Viewpoint& other = scene.viewpoint(nbr);
    const Vec3 delta = other.position - here.position;
    const geom::Direction dir = geom::direction_of(delta);
    obs.navigable.push_back({nbr, dir.heading, dir.elevation, delta.norm()});
  }
  for (const auto& obj : here.objects) {
    obs.visible_objects.push_back(obj.name);
  }
  return obs;
}

std::optional<std::string> step(const Scene& scene, const std::string& current,
                                const Action& action) {
  if (action.is_stop()) return std::nullopt;
  const auto& nbrs = scene.viewpoint(current).neighbors;
  if (std::find(nbrs.begin(), nbrs.end(), action.target) == nbrs.end()) {
    throw IllegalActionError("move to " + action.target +
                             " is not navigable from " + current);
  }
  return action.target;
}

std::unordered_map<std::string, int> bfs_hops(const Scene& scene,
                                              const std::string& source) {
  std::unordered_map<std::string, int> dist;
  dist[source] = 0;
  std::deque<std::string> queue{source};
  while (!queue.empty()) {
    const std::string id = queue.front();
    queue.pop_front();
    const int d = dist[id];
    for (const auto& nbr : scene.viewpoint(id).neighbors) {
      if (dist.emplace(nbr, d + 1).second) {
        queue.push_back(nbr);
      }
    }
  }
  return dist;
}

std::unordered_map<std::string, double> dijkstra_lengths(
    const Scene& scene, const std::string& source) {
  std::unordered_map<std::string, double> dist;
  using Entry = std::pair<double, std::string>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    auto [d, id] = queue.top();
    queue.pop();
    if (d > dist.at(id)) continue;
    const Viewpoint& here = scene.viewpoint(id);
    for (const auto& nbr : here.neighbors) {
      const double w = (scene.viewpoint(nbr).position - here.position).norm();
      auto it = dist.find(nbr);
      if (it == dist.end() || d + w < it->second) {
        dist[nbr] = d + w;
        queue.emplace(d + w, nbr);
      }
    }
  }
  return dist;
}

std::optional<double> shortest_path_length(const Scene& scene,
                                           const std::string& from,
                                           const std::string& to) {
  const auto dist = dijkstra_lengths(scene, from);
  auto it = dist.find(to);
  if (it == dist.end()) return std::nullopt;
  return it->second;
}

}  // namespace navmem::world
