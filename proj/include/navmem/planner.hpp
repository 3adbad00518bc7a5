#pragma once

// Decision-making contract: prompt assembly from the memory and spatial
// contexts, the response grammar, a pluggable planner interface, and the
// deterministic reference planners used for desk-scale evaluation.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "navmem/chat_client.hpp"
#include "navmem/errors.hpp"
#include "navmem/memgraph.hpp"
#include "navmem/spatial.hpp"
#include "navmem/viewgeom.hpp"
#include "navmem/world.hpp"

namespace navmem::planner {

using world::Action;

enum class PromptStyle { R2R, Reverie };

struct OptionEntry {
  char letter = 'A';
  Action action;
  std::string label;                  // rendered option line text
  std::vector<std::string> enhanced;  // task objects visible for this option
};

// Everything the decision step consumes, plus the assembled prompt text.
// `map_view` is a read-only snapshot handle for planners that reason over
// the graph structure directly; nothing mutates the map while a decision is
// in flight.
struct PromptBundle {
  std::string instruction;
  memgraph::MemoryContext memory;
  std::optional<std::string> layout;
  std::string history_summary;
  std::string previous_planning;
  std::vector<OptionEntry> options;  // MoveTo options first, Stop always last
  std::vector<std::string> direct_objects;
  std::string system_text;
  std::string dynamic_text;
  const memgraph::TopoMap* map_view = nullptr;

  std::size_t prompt_bytes() const {
    return system_text.size() + dynamic_text.size();
  }
  const OptionEntry* find_option(char letter) const;
  const OptionEntry* find_move_option(const std::string& target) const;
  const OptionEntry& stop_option() const;
};

struct Decision {
  Action action;
  std::string thought;  // model rationale, may be empty
  std::string raw;      // verbatim model output for tracing
  // Set when the action is a forced Stop after unrecoverable planner
  // failures; the harness records the episode as failed-with-error.
  std::optional<std::string> error;
};

// Assembles the system block and the dynamic block. MoveTo options are
// ordered by place number with Stop labeled last; per-option enhanced
// objects come from the map annotations filtered to the extraction's task
// objects (the Stop option carries the current node's). Pure: identical
// inputs produce byte-identical prompts.
PromptBundle build_prompt(const world::Episode& episode,
                          const memgraph::TopoMap& map,
                          const spatial::Extraction& extraction,
                          const std::vector<viewgeom::CandidateView>& candidates,
                          const std::vector<Action>& history,
                          PromptStyle style = PromptStyle::R2R,
                          const std::string& previous_thought = {});

// Extracts the action from a model reply: the last line starting with
// "Action:" wins; its payload is either an option letter or the literal
// "Stop". Throws ParseError (carrying the raw reply) when no such line
// exists or the letter is unknown.
Action parse_response(const std::string& raw,
                      const std::vector<OptionEntry>& options);

// Rationale text: payload of the last "Thought:" line, empty if none.
std::string parse_thought(const std::string& raw);

class Planner {
 public:
  virtual ~Planner() = default;
  virtual Decision decide(const PromptBundle& bundle) = 0;
  virtual std::string name() const = 0;
};

// Raised by decide() when a planner picks an action outside the bundle's
// options; carries the offending decision so traces can record what was
// attempted.
class IllegalDecisionError : public IllegalActionError {
 public:
  IllegalDecisionError(const std::string& what, Decision decision)
      : IllegalActionError(what), decision_(std::move(decision)) {}
  const Decision& decision() const { return decision_; }

 private:
  Decision decision_;
};

// Invokes the planner and enforces that the returned action is one of the
// bundle's options; a violation throws IllegalActionError.
Decision decide(Planner& planner, const PromptBundle& bundle);

// Full-knowledge shortest-path planner (hop metric, ties to the smallest
// id); validates the harness end to end.
class OraclePlanner : public Planner {
 public:
  OraclePlanner(const world::Scene& scene, const world::Episode& episode);
  Decision decide(const PromptBundle& bundle) override;
  std::string name() const override { return "oracle"; }

 private:
  std::unordered_map<std::string, int> dist_to_goal_;
  std::string goal_;
};

// Moves toward the nearest unvisited map node; stops once every direct task
// object is visible at the current location (an empty direct list never
// triggers a stop).
class FrontierGreedyPlanner : public Planner {
 public:
  Decision decide(const PromptBundle& bundle) override;
  std::string name() const override { return "frontier"; }
};

// Seeded uniform choice over the option list.
class RandomPlanner : public Planner {
 public:
  explicit RandomPlanner(std::uint64_t seed) : rng_(seed) {}
  Decision decide(const PromptBundle& bundle) override;
  std::string name() const override { return "random"; }

 private:
  std::mt19937_64 rng_;
};

// Replays a fixed action script; Stop once the script is exhausted.
class ReplayPlanner : public Planner {
 public:
  explicit ReplayPlanner(std::vector<Action> script)
      : script_(std::move(script)) {}
  Decision decide(const PromptBundle& bundle) override;
  std::string name() const override { return "replay"; }

 private:
  std::vector<Action> script_;
  std::size_t next_ = 0;
};

struct ExternalPlannerConfig {
  double temperature = 0.0;
  int max_retries = 2;  // additional attempts after the first failure
};

// Chat-completion backed planner. Transport and parse failures are retried;
// after the retry budget the decision is a forced Stop with the failure
// recorded.
class ExternalPlanner : public Planner {
 public:
  ExternalPlanner(std::shared_ptr<ChatClient> client,
                  ExternalPlannerConfig config = {});
  Decision decide(const PromptBundle& bundle) override;
  std::string name() const override { return "external"; }

 private:
  std::shared_ptr<ChatClient> client_;
  ExternalPlannerConfig config_;
};

}  // namespace navmem::planner
