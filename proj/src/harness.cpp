#include "navmem/harness.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "navmem/errors.hpp"
#include "navmem/viewgeom.hpp"

namespace navmem::harness {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json action_to_json(const world::Action& action) {
  if (action.is_stop()) return json{{"action", "stop"}};
  return json{{"action", "move"}, {"target", action.target}};
}

world::Action action_from_json(const json& j) {
  if (j.at("action").get<std::string>() == "stop") {
    return world::Action::stop();
  }
  return world::Action::move_to(j.at("target").get<std::string>());
}

int effective_jobs(const RunConfig& cfg) {
  int jobs = cfg.jobs > 0
                 ? cfg.jobs
                 : static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  if (cfg.planner == "external") jobs = std::min(jobs, 8);
  return jobs;
}

// Runs fn(i) for i in [0, n) on up to `jobs` workers.
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const int worker_count = std::min<std::size_t>(jobs, n);
  workers.reserve(worker_count);
  for (int w = 0; w < worker_count; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& worker : workers) worker.join();
}

const world::Scene& resolve_scene(const SceneSet& scenes,
                                  const std::string& scene_id) {
  auto it = scenes.find(scene_id);
  if (it == scenes.end()) {
    throw ValidationError("no loaded scene with id: " + scene_id);
  }
  return it->second;
}

metrics::EpisodeResult error_result(const world::Scene& scene,
                                    const world::Episode& episode) {
  metrics::EpisodeResult result;
  result.episode_id = episode.episode_id;
  result.trajectory = {episode.start};
  result.stopped_at = episode.start;
  result.steps = 0;
  result.path_length = 0.0;
  result.map_nodes = 0;
  result.min_goal_distance = (scene.viewpoint(episode.start).position -
                              scene.viewpoint(episode.goal).position)
                                 .norm();
  result.status = "error";
  result.failed = true;
  return result;
}

std::string padded_index(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05zu", i);
  return buf;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

spatial::Extraction scene_extraction(const world::Scene& scene,
                                     const world::Episode& episode) {
  std::set<std::string> vocabulary;
  for (const auto& vp : scene.viewpoints()) {
    for (const auto& obj : vp.objects) vocabulary.insert(obj.name);
  }
  if (vocabulary.empty()) return {};
  return spatial::extract_objects_rule_based(episode.instruction, vocabulary);
}

TraceRecord run_episode(const world::Scene& scene,
                        const world::Episode& episode,
                        planner::Planner& planner, const RunConfig& cfg) {
  TraceRecord record;
  record.episode_id = episode.episode_id;
  record.scene_id = scene.scene_id();
  record.instruction = episode.instruction;
  record.start = episode.start;
  record.goal = episode.goal;
  record.seed = cfg.seed;

  spatial::Extraction extraction;
  if (cfg.extraction == "rule") {
    extraction = scene_extraction(scene, episode);
  } else if (cfg.extraction == "external") {
    HttpChatClient client(cfg.chat);
    extraction = spatial::extract_objects_external(episode.instruction, client);
  }

  memgraph::TopoMap map;
  viewgeom::CandidateCache cache;
  std::vector<world::Action> history;
  std::string previous_thought;

  std::string current = episode.start;
  std::vector<std::string> trajectory{current};
  double path_length = 0.0;
  int moves = 0;
  std::string status;
  bool failed = false;

  while (true) {
    if (moves >= episode.max_steps) {
      status = "max_steps";
      break;
    }
    const world::StepObservation obs = world::observe(scene, current);
    map = memgraph::observe_and_update(std::move(map), obs);
    std::vector<std::pair<std::string, double>> pruned;
    if (cfg.pruning_enabled) {
      auto result = memgraph::prune(std::move(map), cfg.prune);
      map = std::move(result.map);
      pruned = std::move(result.pruned);
    }
    const auto candidates = viewgeom::discover_candidates(scene, current, cache);
    const planner::PromptBundle bundle =
        planner::build_prompt(episode, map, extraction, candidates, history,
                              cfg.prompt_style, previous_thought);

    StepTrace st;
    st.clock = map.clock();
    st.current = current;
    for (const auto& option : bundle.options) {
      st.options.push_back({option.letter, option.action});
    }
    st.pruned = std::move(pruned);
    st.prompt_bytes = bundle.prompt_bytes();
    st.map_nodes = static_cast<int>(map.node_count());

    try {
      const planner::Decision decision = planner::decide(planner, bundle);
      st.chosen = decision.action;
      st.thought = decision.thought;
      st.forced = decision.error.has_value();
      record.steps.push_back(st);
      if (decision.error) {
        status = "planner_error";
        failed = true;
        break;
      }
      if (decision.action.is_stop()) {
        status = "stopped";
        break;
      }
      const auto next = world::step(scene, current, decision.action);
      const auto& here = scene.viewpoint(current).position;
      const auto& there = scene.viewpoint(*next).position;
      path_length += (there - here).norm();
      history.push_back(decision.action);
      previous_thought = decision.thought;
      current = *next;
      trajectory.push_back(current);
      ++moves;
    } catch (const planner::IllegalDecisionError& e) {
      st.chosen = e.decision().action;
      st.thought = e.what();
      st.forced = true;
      record.steps.push_back(st);
      status = "illegal_action";
      failed = true;
      break;
    } catch (const IllegalActionError& e) {
      st.chosen = world::Action::stop();
      st.thought = e.what();
      st.forced = true;
      record.steps.push_back(st);
      status = "illegal_action";
      failed = true;
      break;
    }
  }

  metrics::EpisodeResult& result = record.result;
  result.episode_id = episode.episode_id;
  result.trajectory = std::move(trajectory);
  result.stopped_at = current;
  result.steps = moves;
  result.path_length = path_length;
  result.map_nodes = static_cast<int>(map.node_count());
  const auto& goal_pos = scene.viewpoint(episode.goal).position;
  double min_dist = std::numeric_limits<double>::infinity();
  for (const auto& id : result.trajectory) {
    min_dist =
        std::min(min_dist, (scene.viewpoint(id).position - goal_pos).norm());
  }
  result.min_goal_distance = min_dist;
  result.status = status;
  result.failed = failed;
  return record;
}

SceneSet load_scenes(const std::vector<std::string>& paths) {
  SceneSet scenes;
  for (const auto& path : paths) {
    world::Scene scene = world::load_scene(path);
    const std::string id = scene.scene_id();
    if (!scenes.emplace(id, std::move(scene)).second) {
      throw ValidationError("duplicate scene id across files: " + id);
    }
  }
  return scenes;
}

PlannerFactory make_planner_factory(const RunConfig& cfg) {
  if (cfg.planner == "oracle") {
    return [](const world::Scene& scene, const world::Episode& episode,
              std::uint64_t) {
      return std::make_unique<planner::OraclePlanner>(scene, episode);
    };
  }
  if (cfg.planner == "frontier") {
    return [](const world::Scene&, const world::Episode&, std::uint64_t) {
      return std::make_unique<planner::FrontierGreedyPlanner>();
    };
  }
  if (cfg.planner == "random") {
    return [](const world::Scene&, const world::Episode&, std::uint64_t seed) {
      return std::make_unique<planner::RandomPlanner>(seed);
    };
  }
  if (cfg.planner == "external") {
    auto client = std::make_shared<HttpChatClient>(cfg.chat);
    planner::ExternalPlannerConfig pc;
    pc.temperature = cfg.temperature;
    pc.max_retries = cfg.max_retries;
    return [client, pc](const world::Scene&, const world::Episode&,
                        std::uint64_t) {
      return std::make_unique<planner::ExternalPlanner>(client, pc);
    };
  }
  throw ValidationError("unknown planner: " + cfg.planner);
}

CorpusOutcome run_corpus(const SceneSet& scenes,
                         const std::vector<world::Episode>& episodes,
                         const PlannerFactory& factory, const RunConfig& cfg) {
  const std::size_t n = episodes.size();
  std::vector<TraceRecord> traces(n);
  std::vector<metrics::MetricRow> rows(n);

  // Resolve scenes up front so a missing scene id fails fast; individual
  // episode failures inside the workers become error rows instead.
  std::vector<const world::Scene*> scene_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    scene_of[i] = &resolve_scene(scenes, episodes[i].scene_id);
  }

  parallel_for(n, effective_jobs(cfg), [&](std::size_t i) {
    const world::Episode& episode = episodes[i];
    const world::Scene& scene = *scene_of[i];
    const std::uint64_t seed = mix_seed(cfg.seed, i);
    RunConfig episode_cfg = cfg;
    episode_cfg.seed = seed;
    try {
      world::validate_episode(episode, scene);
      auto planner = factory(scene, episode, seed);
      traces[i] = run_episode(scene, episode, *planner, episode_cfg);
    } catch (const std::exception&) {
      traces[i] = TraceRecord{};
      traces[i].episode_id = episode.episode_id;
      traces[i].scene_id = episode.scene_id;
      traces[i].instruction = episode.instruction;
      traces[i].start = episode.start;
      traces[i].goal = episode.goal;
      traces[i].seed = seed;
      traces[i].result = error_result(scene, episode);
    }
    rows[i] = metrics::score_episode(traces[i].result, episode, scene);
  });

  CorpusOutcome outcome;
  outcome.report = metrics::make_report(std::move(rows));
  outcome.traces = std::move(traces);

  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    for (std::size_t i = 0; i < outcome.traces.size(); ++i) {
      const fs::path path =
          fs::path(cfg.output_dir) /
          ("trace_" + padded_index(i) + "_" + outcome.traces[i].episode_id +
           ".jsonl");
      write_trace_file(outcome.traces[i], path.string());
    }
    std::ofstream jout(fs::path(cfg.output_dir) / "report.json");
    jout << metrics::report_to_json(outcome.report);
    std::ofstream cout_file(fs::path(cfg.output_dir) / "report.csv");
    cout_file << metrics::report_to_csv(outcome.report);
  }
  return outcome;
}

std::vector<metrics::MetricReport> refine_rounds(
    const SceneSet& scenes, const std::vector<world::Episode>& episodes,
    const PlannerFactory& factory, int rounds, const RunConfig& cfg) {
  if (rounds < 1) {
    throw ValidationError("refine_rounds requires rounds >= 1");
  }
  const std::size_t n = episodes.size();
  std::vector<metrics::MetricRow> cumulative(n);
  std::vector<bool> succeeded(n, false);
  std::vector<metrics::MetricReport> reports;

  std::vector<const world::Scene*> scene_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    scene_of[i] = &resolve_scene(scenes, episodes[i].scene_id);
  }

  for (int round = 0; round < rounds; ++round) {
    std::vector<std::size_t> to_run;
    for (std::size_t i = 0; i < n; ++i) {
      if (round == 0 || !succeeded[i]) to_run.push_back(i);
    }
    RunConfig round_cfg = cfg;
    round_cfg.output_dir.clear();
    round_cfg.seed =
        cfg.reseed_each_round ? mix_seed(cfg.seed, 0x5eedULL + round) : cfg.seed;

    parallel_for(to_run.size(), effective_jobs(cfg), [&](std::size_t k) {
      const std::size_t i = to_run[k];
      const world::Episode& episode = episodes[i];
      const world::Scene& scene = *scene_of[i];
      const std::uint64_t seed = mix_seed(round_cfg.seed, i);
      RunConfig episode_cfg = round_cfg;
      episode_cfg.seed = seed;
      metrics::MetricRow row;
      try {
        world::validate_episode(episode, scene);
        auto planner = factory(scene, episode, seed);
        const TraceRecord trace = run_episode(scene, episode, *planner,
                                              episode_cfg);
        row = metrics::score_episode(trace.result, episode, scene);
      } catch (const std::exception&) {
        row = metrics::score_episode(error_result(scene, episode), episode,
                                     scene);
      }
      cumulative[i] = row;
      if (row.sr == 1) succeeded[i] = true;
    });
    reports.push_back(metrics::make_report(cumulative));
  }
  return reports;
}

metrics::MetricReport slice_long_horizon(const metrics::MetricReport& report,
                                         int threshold) {
  std::vector<metrics::MetricRow> rows;
  for (const auto& row : report.episodes) {
    if (row.steps > threshold) rows.push_back(row);
  }
  return metrics::make_report(std::move(rows));
}

std::string trace_to_jsonl(const TraceRecord& record) {
  std::ostringstream out;
  out << json{{"type", "episode_start"},
              {"schema_version", 1},
              {"episode_id", record.episode_id},
              {"scene_id", record.scene_id},
              {"instruction", record.instruction},
              {"start", record.start},
              {"goal", record.goal},
              {"seed", record.seed}}
             .dump()
      << '\n';
  for (const auto& st : record.steps) {
    json options = json::array();
    for (const auto& option : st.options) {
      json oj = action_to_json(option.action);
      oj["letter"] = std::string(1, option.letter);
      options.push_back(std::move(oj));
    }
    json pruned = json::array();
    for (const auto& [id, score] : st.pruned) {
      pruned.push_back(json::array({id, score}));
    }
    out << json{{"type", "step"},
                {"clock", st.clock},
                {"current", st.current},
                {"options", std::move(options)},
                {"chosen", action_to_json(st.chosen)},
                {"forced", st.forced},
                {"pruned", std::move(pruned)},
                {"prompt_bytes", st.prompt_bytes},
                {"map_nodes", st.map_nodes},
                {"thought", st.thought}}
               .dump()
        << '\n';
  }
  const metrics::EpisodeResult& r = record.result;
  out << json{{"type", "episode_end"},
              {"result",
               json{{"episode_id", r.episode_id},
                    {"trajectory", r.trajectory},
                    {"stopped_at", r.stopped_at},
                    {"steps", r.steps},
                    {"path_length", r.path_length},
                    {"map_nodes", r.map_nodes},
                    {"min_goal_distance", r.min_goal_distance},
                    {"status", r.status},
                    {"failed", r.failed}}}}
             .dump()
      << '\n';
  return out.str();
}

TraceRecord trace_from_jsonl(const std::string& text) {
  TraceRecord record;
  std::istringstream stream(text);
  std::string line;
  bool saw_start = false;
  bool saw_end = false;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed trace line: ") + e.what(), line);
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "episode_start") {
      record.episode_id = j.at("episode_id").get<std::string>();
      record.scene_id = j.at("scene_id").get<std::string>();
      record.instruction = j.at("instruction").get<std::string>();
      record.start = j.at("start").get<std::string>();
      record.goal = j.at("goal").get<std::string>();
      record.seed = j.at("seed").get<std::uint64_t>();
      saw_start = true;
    } else if (type == "step") {
      StepTrace st;
      st.clock = j.at("clock").get<int>();
      st.current = j.at("current").get<std::string>();
      for (const auto& oj : j.at("options")) {
        OptionTrace option;
        option.letter = oj.at("letter").get<std::string>().at(0);
        option.action = action_from_json(oj);
        st.options.push_back(option);
      }
      st.chosen = action_from_json(j.at("chosen"));
      st.forced = j.at("forced").get<bool>();
      for (const auto& pj : j.at("pruned")) {
        st.pruned.emplace_back(pj.at(0).get<std::string>(),
                               pj.at(1).get<double>());
      }
      st.prompt_bytes = j.at("prompt_bytes").get<std::size_t>();
      st.map_nodes = j.at("map_nodes").get<int>();
      st.thought = j.at("thought").get<std::string>();
      record.steps.push_back(std::move(st));
    } else if (type == "episode_end") {
      const json& rj = j.at("result");
      metrics::EpisodeResult& r = record.result;
      r.episode_id = rj.at("episode_id").get<std::string>();
      r.trajectory = rj.at("trajectory").get<std::vector<std::string>>();
      r.stopped_at = rj.at("stopped_at").get<std::string>();
      r.steps = rj.at("steps").get<int>();
      r.path_length = rj.at("path_length").get<double>();
      r.map_nodes = rj.at("map_nodes").get<int>();
      r.min_goal_distance = rj.at("min_goal_distance").get<double>();
      r.status = rj.at("status").get<std::string>();
      r.failed = rj.at("failed").get<bool>();
      saw_end = true;
    } else {
      throw ParseError("unknown trace line type: " + type, line);
    }
  }
  if (!saw_start || !saw_end) {
    throw ParseError("trace missing episode_start or episode_end line", text);
  }
  return record;
}

void write_trace_file(const TraceRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write trace file: " + path);
  out << trace_to_jsonl(record);
}

TraceRecord read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return trace_from_jsonl(buffer.str());
}

std::vector<world::Action> trace_actions(const TraceRecord& record) {
  std::vector<world::Action> actions;
  for (const auto& st : record.steps) {
    actions.push_back(st.chosen);
  }
  return actions;
}

}  // namespace navmem::harness
