#include "navmem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "navmem/errors.hpp"

namespace navmem::metrics {

namespace {

using nlohmann::json;

std::set<std::string> normalized_set(const std::vector<std::string>& names) {
  std::set<std::string> out;
  for (const auto& name : names) out.insert(spatial::normalize_name(name));
  return out;
}

double f1_of_sets(const std::set<std::string>& predicted,
                  const std::set<std::string>& truth) {
  if (predicted.empty() && truth.empty()) return 1.0;
  if (predicted.empty() || truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& name : predicted) {
    if (truth.count(name)) ++hits;
  }
  if (hits == 0) return 0.0;
  const double precision = static_cast<double>(hits) / predicted.size();
  const double recall = static_cast<double>(hits) / truth.size();
  return 2.0 * precision * recall / (precision + recall);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double navigation_error(const EpisodeResult& result,
                        const world::Episode& episode,
                        const world::Scene& scene) {
  const auto& stop_pos = scene.viewpoint(result.stopped_at).position;
  const auto& goal_pos = scene.viewpoint(episode.goal).position;
  return (stop_pos - goal_pos).norm();
}

int success(const EpisodeResult& result, const world::Episode& episode,
            const world::Scene& scene) {
  if (result.failed) return 0;
  return navigation_error(result, episode, scene) <= episode.goal_radius ? 1
                                                                         : 0;
}

int oracle_success(const EpisodeResult& result, const world::Episode& episode,
                   const world::Scene& scene) {
  const auto& goal_pos = scene.viewpoint(episode.goal).position;
  for (const auto& id : result.trajectory) {
    if ((scene.viewpoint(id).position - goal_pos).norm() <=
        episode.goal_radius) {
      return 1;
    }
  }
  return 0;
}

double spl(const EpisodeResult& result, const world::Episode& episode,
           const world::Scene& scene) {
  const int s = success(result, episode, scene);
  if (s == 0) return 0.0;
  const auto l = world::shortest_path_length(scene, episode.start, episode.goal);
  if (!l) return 0.0;
  const double denom = std::max(result.path_length, *l);
  if (denom == 0.0) return static_cast<double>(s);
  return s * *l / denom;
}

double map_efficiency(const EpisodeResult& result,
                      const world::Episode& episode, double alpha) {
  if (episode.expert_path.empty()) {
    throw std::invalid_argument("map_efficiency: empty expert path");
  }
  const std::set<std::string> expert(episode.expert_path.begin(),
                                     episode.expert_path.end());
  const std::set<std::string> visited(result.trajectory.begin(),
                                      result.trajectory.end());
  std::size_t covered = 0;
  for (const auto& id : visited) {
    if (expert.count(id)) ++covered;
  }
  const double expert_size = static_cast<double>(expert.size());
  const double coverage = covered / expert_size;
  const double penalty = 1.0 + alpha * result.map_nodes / expert_size;
  return coverage / penalty;
}

F1Scores f1_scores(const spatial::Extraction& predicted,
                   const spatial::IOSample& truth) {
  F1Scores out;
  const auto pred_direct = normalized_set(predicted.direct);
  const auto pred_inferred = normalized_set(predicted.inferred);
  const auto truth_direct = normalized_set(truth.direct_objects);
  const auto truth_inferred = normalized_set(truth.inferred_objects);
  out.direct = f1_of_sets(pred_direct, truth_direct);
  out.inferred = f1_of_sets(pred_inferred, truth_inferred);

  auto merge = [](std::set<std::string> a, const std::set<std::string>& b) {
    a.insert(b.begin(), b.end());
    return a;
  };
  out.combined = f1_of_sets(merge(pred_direct, pred_inferred),
                            merge(truth_direct, truth_inferred));
  return out;
}

double ndcg(const std::vector<std::string>& predicted,
            const std::vector<std::string>& truth) {
  const auto truth_set = normalized_set(truth);
  std::vector<std::string> unique_pred;
  {
    std::set<std::string> seen;
    for (const auto& name : predicted) {
      const std::string norm = spatial::normalize_name(name);
      if (seen.insert(norm).second) unique_pred.push_back(norm);
    }
  }
  if (truth_set.empty()) return unique_pred.empty() ? 1.0 : 0.0;

  double dcg = 0.0;
  for (std::size_t i = 0; i < unique_pred.size(); ++i) {
    if (truth_set.count(unique_pred[i])) {
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
  }
  double idcg = 0.0;
  for (std::size_t i = 0; i < truth_set.size(); ++i) {
    idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / idcg;
}

MetricRow score_episode(const EpisodeResult& result,
                        const world::Episode& episode,
                        const world::Scene& scene) {
  MetricRow row;
  row.episode_id = result.episode_id;
  row.ne = navigation_error(result, episode, scene);
  row.sr = success(result, episode, scene);
  row.osr = oracle_success(result, episode, scene);
  row.spl = spl(result, episode, scene);
  row.me = map_efficiency(result, episode);
  row.steps = result.steps;
  row.path_length = result.path_length;
  row.map_nodes = result.map_nodes;
  row.status = result.status;
  return row;
}

MetricReport make_report(std::vector<MetricRow> rows) {
  MetricReport report;
  report.episodes = std::move(rows);
  Aggregates& agg = report.aggregates;
  agg.episode_count = static_cast<int>(report.episodes.size());
  agg.empty = report.episodes.empty();
  if (agg.empty) return report;
  for (const auto& row : report.episodes) {
    agg.ne += row.ne;
    agg.sr += row.sr;
    agg.osr += row.osr;
    agg.spl += row.spl;
    agg.me += row.me;
    if (row.steps > 10) ++agg.long_horizon_count;
  }
  const double n = agg.episode_count;
  agg.ne /= n;
  agg.sr /= n;
  agg.osr /= n;
  agg.spl /= n;
  agg.me /= n;
  return report;
}

std::string report_to_json(const MetricReport& report) {
  json rows = json::array();
  for (const auto& row : report.episodes) {
    rows.push_back(json{{"episode_id", row.episode_id},
                        {"ne", row.ne},
                        {"sr", row.sr},
                        {"osr", row.osr},
                        {"spl", row.spl},
                        {"me", row.me},
                        {"steps", row.steps},
                        {"path_length", row.path_length},
                        {"map_nodes", row.map_nodes},
                        {"status", row.status}});
  }
  const Aggregates& agg = report.aggregates;
  json j{{"schema_version", 1},
         {"aggregates",
          json{{"ne", agg.ne},
               {"sr", agg.sr},
               {"osr", agg.osr},
               {"spl", agg.spl},
               {"me", agg.me},
               {"episode_count", agg.episode_count},
               {"long_horizon_count", agg.long_horizon_count},
               {"empty", agg.empty}}},
         {"episodes", std::move(rows)}};
  return j.dump(2) + "\n";
}

std::string report_to_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "episode_id,ne,sr,osr,spl,me,steps,path_length,map_nodes,status\n";
  for (const auto& row : report.episodes) {
    out << row.episode_id << ',' << format_double(row.ne) << ',' << row.sr
        << ',' << row.osr << ',' << format_double(row.spl) << ','
        << format_double(row.me) << ',' << row.steps << ','
        << format_double(row.path_length) << ',' << row.map_nodes << ','
        << row.status << '\n';
  }
  return out.str();
}

MetricReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what(), text);
  }
  std::vector<MetricRow> rows;
  for (const auto& rj : j.at("episodes")) {
    MetricRow row;
    row.episode_id = rj.at("episode_id").get<std::string>();
    row.ne = rj.at("ne").get<double>();
    row.sr = rj.at("sr").get<int>();
    row.osr = rj.at("osr").get<int>();
    row.spl = rj.at("spl").get<double>();
    row.me = rj.at("me").get<double>();
    row.steps = rj.at("steps").get<int>();
    row.path_length = rj.at("path_length").get<double>();
    row.map_nodes = rj.at("map_nodes").get<int>();
    row.status = rj.at("status").get<std::string>();
    rows.push_back(std::move(row));
  }
  return make_report(std::move(rows));
}

}  // namespace navmem::metrics
