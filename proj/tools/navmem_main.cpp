// Command-line front end: run single episodes, evaluate corpora, drive the
// iterative-refinement protocol, slice long-horizon episodes, replay pruning
// decisions from traces, and score object-extraction predictions.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "navmem/errors.hpp"
#include "navmem/harness.hpp"
#include "navmem/memgraph.hpp"
#include "navmem/metrics.hpp"
#include "navmem/planner.hpp"
#include "navmem/spatial.hpp"
#include "navmem/world.hpp"

namespace {

namespace fs = std::filesystem;
using navmem::harness::RunConfig;
using nlohmann::json;

struct CommonArgs {
  std::vector<std::string> scenes;
  std::string episodes;
  RunConfig cfg;
  bool no_prune = false;
  bool reverie = false;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--scene", args.scenes, "Scene JSON file (repeatable)")
      ->required();
  cmd->add_option("--episodes", args.episodes, "Episode JSON file")->required();
  cmd->add_option("--planner", args.cfg.planner,
                  "oracle | frontier | random | external")
      ->capture_default_str();
  cmd->add_option("--extraction", args.cfg.extraction,
                  "rule | external | none")
      ->capture_default_str();
  cmd->add_flag("--reverie", args.reverie,
                "Use the REVERIE-style instruction preamble");
  cmd->add_option("--seed", args.cfg.seed, "Base RNG seed")
      ->capture_default_str();
  cmd->add_option("--jobs", args.cfg.jobs,
                  "Parallel episode runners (0 = number of processors)");
  cmd->add_option("--max-retries", args.cfg.max_retries,
                  "Planner retries before a forced stop")
      ->capture_default_str();
  cmd->add_option("--out", args.cfg.output_dir,
                  "Output directory for traces and reports");

  auto& prune = args.cfg.prune;
  cmd->add_flag("--no-prune", args.no_prune, "Disable map pruning");
  cmd->add_option("--t-start", prune.t_start)->capture_default_str();
  cmd->add_option("--theta-recent-visit", prune.theta_recent_visit)
      ->capture_default_str();
  cmd->add_option("--theta-age", prune.theta_age)->capture_default_str();
  cmd->add_option("--n-remove", prune.n_remove)->capture_default_str();
  cmd->add_option("--lambda-t", prune.lambda_t)->capture_default_str();
  cmd->add_option("--lambda-d", prune.lambda_d)->capture_default_str();
  cmd->add_option("--lambda-f", prune.lambda_f)->capture_default_str();
  cmd->add_option("--lambda-dist", prune.lambda_dist)->capture_default_str();
  cmd->add_option("--unreachable-distance", prune.unreachable_distance,
                  "Graph distance for unreachable nodes (0 = node count)")
      ->capture_default_str();

  cmd->add_option("--api-base", args.cfg.chat.base_url,
                  "External planner base URL")
      ->capture_default_str();
  cmd->add_option("--model", args.cfg.chat.model, "External planner model")
      ->capture_default_str();
  cmd->add_option("--temperature", args.cfg.temperature)
      ->capture_default_str();
  cmd->add_option("--max-in-flight", args.cfg.chat.max_in_flight)
      ->capture_default_str();

  cmd->set_config("--config", "", "Config file (key=value lines)");
}

RunConfig finalize_config(CommonArgs& args) {
  args.cfg.scene_paths = args.scenes;
  args.cfg.episodes_path = args.episodes;
  args.cfg.pruning_enabled = !args.no_prune;
  args.cfg.prompt_style = args.reverie ? navmem::planner::PromptStyle::Reverie
                                       : navmem::planner::PromptStyle::R2R;
  return args.cfg;
}

void print_aggregates(const navmem::metrics::MetricReport& report,
                      const std::string& label) {
  const auto& a = report.aggregates;
  std::printf(
      "%s: episodes=%d sr=%.4f spl=%.4f osr=%.4f ne=%.4f me=%.4f "
      "long_horizon=%d\n",
      label.c_str(), a.episode_count, a.sr, a.spl, a.osr, a.ne, a.me,
      a.long_horizon_count);
}

int cmd_run(CommonArgs& args, const std::string& episode_id,
            const std::string& replay_path) {
  const RunConfig cfg = finalize_config(args);
  const auto scenes = navmem::harness::load_scenes(cfg.scene_paths);
  const auto episodes = navmem::world::load_episodes(cfg.episodes_path);

  const navmem::world::Episode* episode = nullptr;
  if (episode_id.empty()) {
    if (episodes.empty()) throw navmem::Error("episode file is empty");
    episode = &episodes.front();
  } else {
    for (const auto& ep : episodes) {
      if (ep.episode_id == episode_id) episode = &ep;
    }
    if (episode == nullptr) {
      throw navmem::Error("no episode with id " + episode_id);
    }
  }
  auto scene_it = scenes.find(episode->scene_id);
  if (scene_it == scenes.end()) {
    throw navmem::Error("no loaded scene with id " + episode->scene_id);
  }
  const auto& scene = scene_it->second;
  navmem::world::validate_episode(*episode, scene);

  std::unique_ptr<navmem::planner::Planner> planner;
  if (!replay_path.empty()) {
    const auto trace = navmem::harness::read_trace_file(replay_path);
    planner = std::make_unique<navmem::planner::ReplayPlanner>(
        navmem::harness::trace_actions(trace));
  } else {
    planner = navmem::harness::make_planner_factory(cfg)(
        scene, *episode, navmem::harness::mix_seed(cfg.seed, 0));
  }

  const auto trace =
      navmem::harness::run_episode(scene, *episode, *planner, cfg);
  const auto row =
      navmem::metrics::score_episode(trace.result, *episode, scene);

  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    navmem::harness::write_trace_file(
        trace, (fs::path(cfg.output_dir) /
                ("trace_" + trace.episode_id + ".jsonl"))
                   .string());
  }
  json summary{{"episode_id", row.episode_id},
               {"status", trace.result.status},
               {"steps", row.steps},
               {"path_length", row.path_length},
               {"map_nodes", row.map_nodes},
               {"ne", row.ne},
               {"sr", row.sr},
               {"osr", row.osr},
               {"spl", row.spl},
               {"me", row.me}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_eval(CommonArgs& args) {
  const RunConfig cfg = finalize_config(args);
  const auto scenes = navmem::harness::load_scenes(cfg.scene_paths);
  const auto episodes = navmem::world::load_episodes(cfg.episodes_path);
  const auto factory = navmem::harness::make_planner_factory(cfg);
  const auto outcome =
      navmem::harness::run_corpus(scenes, episodes, factory, cfg);
  print_aggregates(outcome.report, "corpus");
  return 0;
}

int cmd_refine(CommonArgs& args, int rounds, bool reseed) {
  args.cfg.reseed_each_round = reseed;
  const RunConfig cfg = finalize_config(args);
  const auto scenes = navmem::harness::load_scenes(cfg.scene_paths);
  const auto episodes = navmem::world::load_episodes(cfg.episodes_path);
  const auto factory = navmem::harness::make_planner_factory(cfg);
  const auto reports =
      navmem::harness::refine_rounds(scenes, episodes, factory, rounds, cfg);
  for (std::size_t r = 0; r < reports.size(); ++r) {
    print_aggregates(reports[r], "round " + std::to_string(r + 1));
    if (!cfg.output_dir.empty()) {
      fs::create_directories(cfg.output_dir);
      std::ofstream out(fs::path(cfg.output_dir) /
                        ("report_round_" + std::to_string(r + 1) + ".json"));
      out << navmem::metrics::report_to_json(reports[r]);
    }
  }
  return 0;
}

int cmd_slice(const std::string& report_path, int min_steps,
              const std::string& out_path) {
  std::ifstream in(report_path);
  if (!in) throw navmem::Error("cannot open report: " + report_path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const auto report = navmem::metrics::report_from_json(buffer.str());
  const auto sliced = navmem::harness::slice_long_horizon(report, min_steps);
  const std::string text = navmem::metrics::report_to_json(sliced);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    out << text;
  }
  print_aggregates(sliced, "slice(steps>" + std::to_string(min_steps) + ")");
  return 0;
}

int cmd_prune_sim(const std::string& scene_path, const std::string& trace_path,
                  const navmem::memgraph::PruneConfig& prune_cfg) {
  const auto scene = navmem::world::load_scene(scene_path);
  const auto trace = navmem::harness::read_trace_file(trace_path);
  const auto actions = navmem::harness::trace_actions(trace);

  navmem::memgraph::TopoMap map;
  std::string current = trace.start;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto obs = navmem::world::observe(scene, current);
    map = navmem::memgraph::observe_and_update(std::move(map), obs);
    const auto eligible = navmem::memgraph::eligible_nodes(map, prune_cfg);
    std::printf("step %zu clock=%d current=%s (%s)\n", i + 1, map.clock(),
                current.c_str(), map.place_label(current).c_str());
    for (const auto& id : eligible) {
      std::printf("  candidate %-12s (%s) score=%.6f\n", id.c_str(),
                  map.place_label(id).c_str(),
                  navmem::memgraph::priority_score(map, id, prune_cfg));
    }
    auto result = navmem::memgraph::prune(std::move(map), prune_cfg);
    map = std::move(result.map);
    for (const auto& [id, score] : result.pruned) {
      std::printf("  pruned    %-12s score=%.6f\n", id.c_str(), score);
    }
    if (actions[i].is_stop()) {
      std::printf("  action    stop\n");
      break;
    }
    std::printf("  action    move to %s\n", actions[i].target.c_str());
    const auto next = navmem::world::step(scene, current, actions[i]);
    current = *next;
  }
  return 0;
}

int cmd_ios_eval(const std::string& pred_path, const std::string& truth_path,
                 const std::string& out_dir) {
  const auto pred = navmem::spatial::load_ios_file(pred_path);
  const auto truth = navmem::spatial::load_ios_file(truth_path);
  if (pred.size() != truth.size()) {
    throw navmem::Error("prediction and truth files differ in length (" +
                        std::to_string(pred.size()) + " vs " +
                        std::to_string(truth.size()) + ")");
  }
  json rows = json::array();
  double f1do = 0.0, f1io = 0.0, f1 = 0.0, ndcg_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    navmem::spatial::Extraction extraction;
    extraction.direct = pred[i].direct_objects;
    extraction.inferred = pred[i].inferred_objects;
    const auto scores = navmem::metrics::f1_scores(extraction, truth[i]);

    // NDCG over the combined ranked lists, direct first.
    auto combined = [](const navmem::spatial::IOSample& s) {
      std::vector<std::string> out = s.direct_objects;
      out.insert(out.end(), s.inferred_objects.begin(),
                 s.inferred_objects.end());
      return out;
    };
    const double nd =
        navmem::metrics::ndcg(combined(pred[i]), combined(truth[i]));
    f1do += scores.direct;
    f1io += scores.inferred;
    f1 += scores.combined;
    ndcg_sum += nd;
    rows.push_back(json{{"index", i},
                        {"f1do", scores.direct},
                        {"f1io", scores.inferred},
                        {"f1", scores.combined},
                        {"ndcg", nd}});
  }
  const double n = static_cast<double>(pred.size());
  json summary{{"samples", pred.size()},
               {"f1do", f1do / n},
               {"f1io", f1io / n},
               {"f1", f1 / n},
               {"ndcg", ndcg_sum / n}};
  std::printf("ios-eval: samples=%zu f1do=%.4f f1io=%.4f f1=%.4f ndcg=%.4f\n",
              pred.size(), f1do / n, f1io / n, f1 / n, ndcg_sum / n);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "ios_report.json");
    out << json{{"summary", summary}, {"samples", rows}}.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological-map navigation harness with dynamic map pruning"};
  app.require_subcommand(1);

  CommonArgs run_args;
  std::string run_episode_id;
  std::string run_replay;
  auto* run_cmd = app.add_subcommand("run", "Run a single episode");
  add_common_options(run_cmd, run_args);
  run_cmd->add_option("--episode", run_episode_id,
                      "Episode id (default: first in file)");
  run_cmd->add_option("--replay", run_replay,
                      "Replay the action sequence of a trace file");

  CommonArgs eval_args;
  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate a corpus and write a report");
  add_common_options(eval_cmd, eval_args);

  CommonArgs refine_args;
  int rounds = 5;
  bool reseed = false;
  auto* refine_cmd = app.add_subcommand(
      "refine", "Iteratively re-run cumulative failures for N rounds");
  add_common_options(refine_cmd, refine_args);
  refine_cmd->add_option("--rounds", rounds, "Number of rounds")
      ->capture_default_str();
  refine_cmd->add_flag("--reseed-each-round", reseed,
                       "Derive a fresh seed per round");

  std::string slice_report;
  int min_steps = 10;
  std::string slice_out;
  auto* slice_cmd =
      app.add_subcommand("slice", "Re-aggregate long-horizon episodes");
  slice_cmd->add_option("--report", slice_report, "report.json from eval")
      ->required();
  slice_cmd->add_option("--min-steps", min_steps,
                        "Keep episodes with steps > this value")
      ->capture_default_str();
  slice_cmd->add_option("--out", slice_out, "Write the sliced report here");

  std::string sim_scene;
  std::string sim_trace;
  navmem::memgraph::PruneConfig sim_prune;
  auto* sim_cmd = app.add_subcommand(
      "prune-sim", "Replay a trace and print per-step pruning scores");
  sim_cmd->add_option("--scene", sim_scene, "Scene JSON file")->required();
  sim_cmd->add_option("--trace", sim_trace, "Trace JSONL file")->required();
  sim_cmd->add_option("--t-start", sim_prune.t_start)->capture_default_str();
  sim_cmd->add_option("--theta-recent-visit", sim_prune.theta_recent_visit)
      ->capture_default_str();
  sim_cmd->add_option("--theta-age", sim_prune.theta_age)
      ->capture_default_str();
  sim_cmd->add_option("--n-remove", sim_prune.n_remove)->capture_default_str();
  sim_cmd->add_option("--lambda-t", sim_prune.lambda_t)->capture_default_str();
  sim_cmd->add_option("--lambda-d", sim_prune.lambda_d)->capture_default_str();
  sim_cmd->add_option("--lambda-f", sim_prune.lambda_f)->capture_default_str();
  sim_cmd->add_option("--lambda-dist", sim_prune.lambda_dist)
      ->capture_default_str();
  sim_cmd->add_option("--unreachable-distance", sim_prune.unreachable_distance)
      ->capture_default_str();

  std::string pred_path;
  std::string truth_path;
  std::string ios_out;
  auto* ios_cmd = app.add_subcommand(
      "ios-eval", "Score extraction predictions against ground truth");
  ios_cmd->add_option("--pred", pred_path, "Predicted samples (I-O-S JSON)")
      ->required();
  ios_cmd->add_option("--truth", truth_path, "Ground-truth samples")
      ->required();
  ios_cmd->add_option("--out", ios_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run_args, run_episode_id, run_replay);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (refine_cmd->parsed()) return cmd_refine(refine_args, rounds, reseed);
    if (slice_cmd->parsed())
      return cmd_slice(slice_report, min_steps, slice_out);
    if (sim_cmd->parsed())
      return cmd_prune_sim(sim_scene, sim_trace, sim_prune);
    if (ios_cmd->parsed()) return cmd_ios_eval(pred_path, truth_path, ios_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
