#include "navmem/planner.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include "navmem/errors.hpp"

namespace navmem::planner {

namespace {

const char* kSystemPreamble =
    R"(You are a navigation agent moving through a building by walking between connected places.
Each round you receive an 'Instruction', a 'Trajectory' of places already visited, a 'Map' describing known connections between places, 'Supplementary Info' listing objects observed at mapped places, and lettered 'Action Options'.)";

const char* kR2RInstructionRole =
    R"('Instruction' is the global route description you should follow step by step until the described destination is reached.)";

const char* kReverieInstructionRole =
    R"('Instruction' serves as global guidance that you should follow. Your task is to locate the specified or hidden target object, stop, and disregard any actions related to the target object mentioned in the 'Instruction'. You should not overly focus on color details of landmarks or the target object described in the 'Instruction', as these color descriptions may be inaccurate.)";

const char* kSystemEpilogue =
    R"('Possible Destination Info', when present, describes the possible object spatial layout of the target destination. This is for reference only and may not be completely accurate.
Choose exactly one action option per round, and choose the stop option only when you judge the instruction to be completed.
Reply with a line starting with 'Thought:' explaining your reasoning, then a line starting with 'Action:' containing only the chosen option letter, or 'Action: Stop' to stop.)";

const char* kResponseDirective =
    R"(Reply with a 'Thought:' line followed by an 'Action:' line selecting one option letter, or 'Action: Stop'.)";

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ", ";
    out += parts[i];
  }
  return out;
}

// Last line whose trimmed form starts with the given label; empty optional
// when absent.
std::optional<std::string> last_labeled_line(const std::string& raw,
                                             const std::string& label) {
  std::optional<std::string> found;
  std::istringstream stream(raw);
  std::string line;
  while (std::getline(stream, line)) {
    const std::string trimmed = trim(line);
    if (trimmed.rfind(label, 0) == 0) {
      found = trim(trimmed.substr(label.size()));
    }
  }
  return found;
}

// Breadth-first hop counts over the map graph from an arbitrary source.
std::map<std::string, int> map_hops_from(const memgraph::TopoMap& map,
                                         const std::string& source) {
  std::map<std::string, int> dist;
  if (!map.contains(source)) return dist;
  dist[source] = 0;
  std::deque<std::string> queue{source};
  while (!queue.empty()) {
    const std::string at = queue.front();
    queue.pop_front();
    for (const auto& nbr : map.neighbors(at)) {
      if (dist.emplace(nbr, dist[at] + 1).second) queue.push_back(nbr);
    }
  }
  return dist;
}

}  // namespace

const OptionEntry* PromptBundle::find_option(char letter) const {
  for (const auto& option : options) {
    if (option.letter == letter) return &option;
  }
  return nullptr;
}

const OptionEntry* PromptBundle::find_move_option(
    const std::string& target) const {
  for (const auto& option : options) {
    if (!option.action.is_stop() && option.action.target == target) {
      return &option;
    }
  }
  return nullptr;
}

const OptionEntry& PromptBundle::stop_option() const {
  return options.back();  // Stop is always last
}

PromptBundle build_prompt(const world::Episode& episode,
                          const memgraph::TopoMap& map,
                          const spatial::Extraction& extraction,
                          const std::vector<viewgeom::CandidateView>& candidates,
                          const std::vector<Action>& history,
                          PromptStyle style,
                          const std::string& previous_thought) {
  PromptBundle bundle;
  bundle.instruction = episode.instruction;
  bundle.memory = memgraph::render_map_context(map);
  bundle.layout = extraction.layout;
  bundle.direct_objects = extraction.direct;
  bundle.map_view = &map;

  // Task objects for highlighting: direct then inferred, first mention wins.
  std::vector<std::string> task_objects;
  {
    std::set<std::string> seen;
    for (const auto* list : {&extraction.direct, &extraction.inferred}) {
      for (const auto& name : *list) {
        if (seen.insert(spatial::normalize_name(name)).second) {
          task_objects.push_back(name);
        }
      }
    }
  }
  auto enhanced_at = [&](const std::string& id) -> std::vector<std::string> {
    if (!map.contains(id)) return {};
    const auto& annotation = map.node(id).annotation;
    return spatial::enhance_observation(
        std::set<std::string>(annotation.begin(), annotation.end()),
        task_objects);
  };

  std::vector<const viewgeom::CandidateView*> ordered;
  for (const auto& cand : candidates) ordered.push_back(&cand);
  std::sort(ordered.begin(), ordered.end(),
            [&](const viewgeom::CandidateView* a,
                const viewgeom::CandidateView* b) {
              return map.place(a->target) < map.place(b->target);
            });

  char letter = 'A';
  for (const auto* cand : ordered) {
    OptionEntry option;
    option.letter = letter++;
    option.action = Action::move_to(cand->target);
    option.enhanced = enhanced_at(cand->target);
    std::string label = "move to " + map.place_label(cand->target);
    if (!option.enhanced.empty()) {
      label += " [objects: " + join(option.enhanced) + "]";
    }
    option.label = std::move(label);
    bundle.options.push_back(std::move(option));
  }
  {
    OptionEntry stop;
    stop.letter = letter;
    stop.action = Action::stop();
    stop.enhanced = enhanced_at(map.current());
    stop.label = "stop";
    bundle.options.push_back(std::move(stop));
  }

  if (history.empty()) {
    bundle.history_summary = "none";
  } else {
    std::vector<std::string> parts;
    for (const auto& action : history) {
      parts.push_back(action.is_stop()
                          ? std::string("stop")
                          : "move to " + map.place_label(action.target));
    }
    bundle.history_summary = join(parts);
  }
  bundle.previous_planning =
      previous_thought.empty() ? "none" : previous_thought;

  bundle.system_text = std::string(kSystemPreamble) + "\n" +
                       (style == PromptStyle::Reverie ? kReverieInstructionRole
                                                      : kR2RInstructionRole) +
                       "\n" + kSystemEpilogue;

  std::ostringstream dynamic;
  dynamic << "Instruction: " << bundle.instruction << '\n'
          << bundle.memory.trajectory << '\n'
          << "Map:\n"
          << bundle.memory.map << '\n'
          << "Supplementary Info:\n"
          << bundle.memory.supplementary << '\n';
  if (bundle.layout) {
    dynamic << "Possible Destination Info: " << *bundle.layout << '\n';
  }
  dynamic << "History: " << bundle.history_summary << '\n'
          << "Previous Planning: " << bundle.previous_planning << '\n'
          << "Action Options:\n";
  for (const auto& option : bundle.options) {
    dynamic << option.letter << ". " << option.label << '\n';
  }
  dynamic << kResponseDirective;
  bundle.dynamic_text = dynamic.str();
  return bundle;
}

Action parse_response(const std::string& raw,
                      const std::vector<OptionEntry>& options) {
  const auto payload = last_labeled_line(raw, "Action:");
  if (!payload) {
    throw ParseError("reply has no 'Action:' line", raw);
  }
  // First token of the payload; tolerates forms like "B. move to Place 3".
  std::string token;
  for (char c : *payload) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token.push_back(c);
    } else if (!token.empty()) {
      break;
    }
  }
  if (token.empty()) {
    throw ParseError("empty 'Action:' payload", raw);
  }
  std::string lowered;
  for (char c : token) {
    lowered.push_back(
        static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lowered == "stop") return Action::stop();
  if (token.size() == 1 && std::isalpha(static_cast<unsigned char>(token[0]))) {
    const char letter =
        static_cast<char>(std::toupper(static_cast<unsigned char>(token[0])));
    for (const auto& option : options) {
      if (option.letter == letter) return option.action;
    }
  }
  throw ParseError("unknown action option '" + token + "'", raw);
}

std::string parse_thought(const std::string& raw) {
  return last_labeled_line(raw, "Thought:").value_or("");
}

Decision decide(Planner& planner, const PromptBundle& bundle) {
  Decision decision = planner.decide(bundle);
  if (!decision.action.is_stop() &&
      bundle.find_move_option(decision.action.target) == nullptr) {
    const std::string what = "planner '" + planner.name() +
                             "' chose non-option target " +
                             decision.action.target;
    throw IllegalDecisionError(what, std::move(decision));
  }
  return decision;
}

OraclePlanner::OraclePlanner(const world::Scene& scene,
                             const world::Episode& episode)
    : dist_to_goal_(world::bfs_hops(scene, episode.goal)),
      goal_(episode.goal) {}

Decision OraclePlanner::decide(const PromptBundle& bundle) {
  const std::string& current = bundle.map_view->current();
  Decision decision;
  if (current == goal_) {
    decision.action = Action::stop();
    decision.thought = "at the goal";
    return decision;
  }
  const OptionEntry* best = nullptr;
  int best_dist = std::numeric_limits<int>::max();
  for (const auto& option : bundle.options) {
    if (option.action.is_stop()) continue;
    auto it = dist_to_goal_.find(option.action.target);
    if (it == dist_to_goal_.end()) continue;
    if (it->second < best_dist ||
        (it->second == best_dist && option.action.target < best->action.target)) {
      best = &option;
      best_dist = it->second;
    }
  }
  if (best == nullptr) {
    decision.action = Action::stop();
    decision.thought = "goal unreachable";
    return decision;
  }
  decision.action = best->action;
  decision.thought = "shortest path step";
  return decision;
}

Decision FrontierGreedyPlanner::decide(const PromptBundle& bundle) {
  const memgraph::TopoMap& map = *bundle.map_view;
  Decision decision;

  if (!bundle.direct_objects.empty()) {
    const auto& here = bundle.stop_option().enhanced;
    std::set<std::string> visible;
    for (const auto& name : here) visible.insert(spatial::normalize_name(name));
    const bool covered = std::all_of(
        bundle.direct_objects.begin(), bundle.direct_objects.end(),
        [&](const std::string& name) {
          return visible.count(spatial::normalize_name(name)) != 0;
        });
    if (covered) {
      decision.action = Action::stop();
      decision.thought = "all direct task objects visible here";
      return decision;
    }
  }

  // Nearest unvisited node by hop count (ties to the smallest id), then the
  // first step along a shortest map path toward it.
  const auto from_current = map_hops_from(map, map.current());
  const std::string* frontier = nullptr;
  int frontier_dist = std::numeric_limits<int>::max();
  for (const auto& [id, rec] : map.nodes()) {
    if (map.is_visited(id)) continue;
    auto it = from_current.find(id);
    if (it == from_current.end()) continue;
    if (it->second < frontier_dist ||
        (it->second == frontier_dist && id < *frontier)) {
      frontier = &id;
      frontier_dist = it->second;
    }
  }
  const OptionEntry* chosen = nullptr;
  if (frontier != nullptr) {
    const auto to_frontier = map_hops_from(map, *frontier);
    int best = std::numeric_limits<int>::max();
    for (const auto& option : bundle.options) {
      if (option.action.is_stop()) continue;
      auto it = to_frontier.find(option.action.target);
      if (it == to_frontier.end()) continue;
      if (it->second < best ||
          (it->second == best && option.action.target < chosen->action.target)) {
        chosen = &option;
        best = it->second;
      }
    }
  }
  if (chosen == nullptr) {
    // No reachable frontier: wander to the first move option if any.
    for (const auto& option : bundle.options) {
      if (!option.action.is_stop()) {
        chosen = &option;
        break;
      }
    }
  }
  if (chosen == nullptr) {
    decision.action = Action::stop();
    decision.thought = "nowhere to go";
    return decision;
  }
  decision.action = chosen->action;
  decision.thought = frontier ? "toward nearest unexplored place" : "wandering";
  return decision;
}

Decision RandomPlanner::decide(const PromptBundle& bundle) {
  std::uniform_int_distribution<std::size_t> pick(0,
                                                  bundle.options.size() - 1);
  Decision decision;
  decision.action = bundle.options[pick(rng_)].action;
  return decision;
}

Decision ReplayPlanner::decide(const PromptBundle&) {
  Decision decision;
  decision.action =
      next_ < script_.size() ? script_[next_++] : Action::stop();
  return decision;
}

ExternalPlanner::ExternalPlanner(std::shared_ptr<ChatClient> client,
                                 ExternalPlannerConfig config)
    : client_(std::move(client)), config_(config) {}

Decision ExternalPlanner::decide(const PromptBundle& bundle) {
  ChatRequest request;
  request.system = bundle.system_text;
  request.user = bundle.dynamic_text;
  request.temperature = config_.temperature;

  std::string last_failure;
  std::string last_raw;
  const int attempts = 1 + std::max(0, config_.max_retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    try {
      const std::string raw = client_->complete(request);
      last_raw = raw;
      Decision decision;
      decision.action = parse_response(raw, bundle.options);
      decision.thought = parse_thought(raw);
      decision.raw = raw;
      return decision;
    } catch (const TransportError& e) {
      last_failure = e.what();
    } catch (const ParseError& e) {
      last_failure = e.what();
      last_raw = e.raw().empty() ? last_raw : e.raw();
    }
  }
  Decision decision;
  decision.action = Action::stop();
  decision.raw = last_raw;
  decision.error = "forced stop after " + std::to_string(attempts) +
                   " failed attempts: " + last_failure;
  return decision;
}

}  // namespace navmem::planner
