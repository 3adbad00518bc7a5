#pragma once

// Evaluation metrics: navigation error, success and oracle success, success
// weighted by path length, map efficiency, object-extraction F1 variants,
// and NDCG, plus per-episode and corpus-level report aggregation.

#include <string>
#include <vector>

#include "navmem/spatial.hpp"
#include "navmem/world.hpp"

namespace navmem::metrics {

// Outcome of one episode as consumed by the metric formulas.
struct EpisodeResult {
  std::string episode_id;
  std::vector<std::string> trajectory;  // visited ids in order, start first
  std::string stopped_at;
  int steps = 0;  // moves taken; |trajectory| - 1
  double path_length = 0.0;
  int map_nodes = 0;  // final memory-map size
  double min_goal_distance = 0.0;
  // "stopped", "max_steps", "illegal_action", "planner_error", or "error".
  std::string status = "stopped";
  bool failed = false;  // error'd episodes never count as successes
};

double navigation_error(const EpisodeResult& result,
                        const world::Episode& episode,
                        const world::Scene& scene);

// 1 when the agent finished within goal_radius of the goal and the episode
// did not fail; oracle success ignores stopping and uses the closest
// approach anywhere along the trajectory.
int success(const EpisodeResult& result, const world::Episode& episode,
            const world::Scene& scene);
int oracle_success(const EpisodeResult& result, const world::Episode& episode,
                   const world::Scene& scene);

// success * l / max(p, l) with l the metric shortest-path length and p the
// traveled length; degenerate l = p = 0 yields the success value.
double spl(const EpisodeResult& result, const world::Episode& episode,
           const world::Scene& scene);

inline constexpr double kDefaultMapEfficiencyAlpha = 0.25;

// Expert-node coverage discounted by map size:
//   (|T ∩ T_expert| / |T_expert|) * 1 / (1 + alpha * |V| / |T_expert|)
// with T the trajectory node set and V the final map node count.
double map_efficiency(const EpisodeResult& result,
                      const world::Episode& episode,
                      double alpha = kDefaultMapEfficiencyAlpha);

struct F1Scores {
  double direct = 0.0;    // F1DO
  double inferred = 0.0;  // F1IO
  double combined = 0.0;  // F1 over the union of both lists
};

// Set-based F1 with empty-vs-empty defined as 1 and empty-vs-nonempty 0.
// Names are compared in normalized (lowercased, trimmed) form.
F1Scores f1_scores(const spatial::Extraction& predicted,
                   const spatial::IOSample& truth);

// Binary-relevance NDCG with log2 discounts over 1-indexed ranks; duplicate
// predictions keep their first occurrence. Empty truth scores 1 against an
// empty prediction and 0 otherwise.
double ndcg(const std::vector<std::string>& predicted,
            const std::vector<std::string>& truth);

struct MetricRow {
  std::string episode_id;
  double ne = 0.0;
  int sr = 0;
  int osr = 0;
  double spl = 0.0;
  double me = 0.0;
  int steps = 0;
  double path_length = 0.0;
  int map_nodes = 0;
  std::string status = "stopped";
};

struct Aggregates {
  double ne = 0.0;
  double sr = 0.0;
  double osr = 0.0;
  double spl = 0.0;
  double me = 0.0;
  int episode_count = 0;
  int long_horizon_count = 0;  // episodes with steps > 10
  bool empty = true;
};

struct MetricReport {
  std::vector<MetricRow> episodes;
  Aggregates aggregates;
};

MetricRow score_episode(const EpisodeResult& result,
                        const world::Episode& episode,
                        const world::Scene& scene);

// Aggregates are plain means of the per-episode values.
MetricReport make_report(std::vector<MetricRow> rows);

std::string report_to_json(const MetricReport& report);
std::string report_to_csv(const MetricReport& report);
MetricReport report_from_json(const std::string& text);

}  // namespace navmem::metrics
