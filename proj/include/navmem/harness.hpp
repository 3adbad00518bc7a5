#pragma once

// Episode loop and corpus evaluation: observe, fold the observation into the
// map, prune, assemble the prompt, decide, step; traces are persisted as
// line-delimited JSON and reports aggregated through the metrics module.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "navmem/chat_client.hpp"
#include "navmem/memgraph.hpp"
#include "navmem/metrics.hpp"
#include "navmem/planner.hpp"
#include "navmem/world.hpp"

namespace navmem::harness {

struct RunConfig {
  std::vector<std::string> scene_paths;
  std::string episodes_path;

  // "oracle", "frontier", "random", or "external" ("replay" is driven
  // explicitly through run_episode with a ReplayPlanner).
  std::string planner = "oracle";
  // "rule" (scene-vocabulary rule-based), "external", or "none".
  std::string extraction = "rule";
  planner::PromptStyle prompt_style = planner::PromptStyle::R2R;

  memgraph::PruneConfig prune;
  bool pruning_enabled = true;

  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = number of processors; capped at 8 for "external"
  int max_retries = 2;
  bool reseed_each_round = false;
  std::string output_dir;  // empty = no trace/report files

  HttpChatConfig chat;
  double temperature = 0.0;
};

struct OptionTrace {
  char letter = 'A';
  world::Action action;
};

struct StepTrace {
  int clock = 0;
  std::string current;
  std::vector<OptionTrace> options;
  world::Action chosen;
  bool forced = false;  // chosen did not come from a clean planner reply
  std::vector<std::pair<std::string, double>> pruned;
  std::size_t prompt_bytes = 0;
  int map_nodes = 0;  // surviving map size after this round's prune
  std::string thought;
};

struct TraceRecord {
  std::string episode_id;
  std::string scene_id;
  std::string instruction;
  std::string start;
  std::string goal;
  std::uint64_t seed = 0;
  std::vector<StepTrace> steps;
  metrics::EpisodeResult result;
};

// Deterministic seed derivation (splitmix64 over the combined words).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Runs one episode to termination (Stop, max_steps, illegal action, or
// planner hard-failure) and returns the full trace.
TraceRecord run_episode(const world::Scene& scene,
                        const world::Episode& episode,
                        planner::Planner& planner, const RunConfig& cfg);

using SceneSet = std::map<std::string, world::Scene>;
SceneSet load_scenes(const std::vector<std::string>& paths);

using PlannerFactory = std::function<std::unique_ptr<planner::Planner>(
    const world::Scene&, const world::Episode&, std::uint64_t seed)>;

// Factory for cfg.planner; external planners share one rate-capped client.
PlannerFactory make_planner_factory(const RunConfig& cfg);

struct CorpusOutcome {
  metrics::MetricReport report;
  std::vector<TraceRecord> traces;  // episode order, regardless of jobs
};

// Runs every episode (parallel up to the job cap); per-episode failures are
// recorded in the report and never abort the corpus. With cfg.output_dir
// set, traces and the report (JSON + CSV) are written there.
CorpusOutcome run_corpus(const SceneSet& scenes,
                         const std::vector<world::Episode>& episodes,
                         const PlannerFactory& factory, const RunConfig& cfg);

// Iterative refinement: round 1 runs the full corpus; each later round
// re-runs only the episodes still failed in the cumulative results and folds
// the new outcomes in. Returns the cumulative report after every round.
std::vector<metrics::MetricReport> refine_rounds(
    const SceneSet& scenes, const std::vector<world::Episode>& episodes,
    const PlannerFactory& factory, int rounds, const RunConfig& cfg);

// Episodes with steps > threshold, re-aggregated; an empty slice yields a
// report flagged empty with zero counts.
metrics::MetricReport slice_long_horizon(const metrics::MetricReport& report,
                                         int threshold = 10);

// Rule-based task-object extraction against the scene's object vocabulary.
spatial::Extraction scene_extraction(const world::Scene& scene,
                                     const world::Episode& episode);

// --- trace files (line-delimited JSON) ---

std::string trace_to_jsonl(const TraceRecord& record);
TraceRecord trace_from_jsonl(const std::string& text);
void write_trace_file(const TraceRecord& record, const std::string& path);
TraceRecord read_trace_file(const std::string& path);

// Action sequence of a trace, for replay.
std::vector<world::Action> trace_actions(const TraceRecord& record);

}  // namespace navmem::harness
