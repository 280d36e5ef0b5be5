#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "coast/constraints.hpp"
#include "coast/stream_planner.hpp"
#include "coast/stream_sampler.hpp"
#include "coast/task_planner.hpp"

namespace coast {

/// Where an instance came from; enough to regenerate it.
struct InstanceInfo {
  std::string kind;
  int parameter = 0;
  std::uint64_t seed = 0;
  bool feasible = true;
};

/// Everything one TAMP run needs: the symbolic task, the stream and
/// geometric layers, the initial geometry and the samplers.
struct TampProblem {
  InstanceInfo info;
  Domain domain;
  Problem problem;
  std::vector<StreamDef> streams;
  std::vector<GeomActionDef> geom;
  State init_geom;
  /// Stream objects that exist before planning (initial poses and the like).
  TypedList initial_objects;
  Binding init_values;
  SamplerRegistry samplers;
  ConstraintMode mode = ConstraintMode::Action;
  double cache_probability = 0.0;
};

struct EngineConfig {
  double timeout_s = 60.0;
  ConstraintMode mode = ConstraintMode::Action;
  SampleBudget budget;
  double cache_probability = 0.0;
  std::uint64_t seed = 0;
  std::size_t node_budget = 500'000;
  std::size_t initial_horizon = 20;
  std::size_t max_horizon = 128;
  /// Drop a constraint set once it has been popped this many times.
  std::optional<std::size_t> revisit_limit;
  std::ostream* event_log = nullptr;
};

/// Engine config with the problem's own mode and cache probability.
EngineConfig default_config(const TampProblem& tp);

struct PlannerState {
  ConstraintSet constraints;
  std::size_t demotion = 0;
};

/// Queue of planner states. pop() returns the state minimizing
/// (times its constraint set was popped before, copies of that set queued,
/// |constraints|, demotion, insertion order).
class StateQueue {
 public:
  void push(PlannerState s);
  PlannerState pop();
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t times_popped(const ConstraintSet& cs) const;
  std::size_t copies(const ConstraintSet& cs) const;

 private:
  struct Entry {
    PlannerState state;
    std::string key;
    std::size_t seq;
  };
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> popped_;
  std::map<std::string, std::size_t> queued_;
  std::size_t next_seq_ = 0;
};

struct Solution {
  /// Symbolic plan over the unaugmented domain.
  Plan plan;
  std::vector<GroundedGeomAction> geom_plan;
  Binding bindings;
  std::set<Atom> certified;
  /// Every stream object the solution refers to, with its type.
  TypedList stream_objects;
};

struct IterationTrace {
  std::size_t iteration = 0;
  double task_time = 0;
  double stream_plan_time = 0;
  double sample_time = 0;
  double cumulative_task_time = 0;
  std::size_t plan_length = 0;
  std::size_t constraints = 0;
  std::string outcome;
};

enum class EngineStatus { Solved, Unsolvable, Timeout };
std::string to_string(EngineStatus s);

struct EngineStats {
  std::size_t iterations = 0;
  double task_time = 0;
  double stream_plan_time = 0;
  double sample_time = 0;
  double total_time = 0;
  std::size_t sampler_calls = 0;
  std::size_t sample_attempts = 0;
  std::size_t cache_hits = 0;
  std::size_t max_ground_actions = 0;
  std::size_t max_queue = 0;
};

struct EngineResult {
  EngineStatus status = EngineStatus::Unsolvable;
  std::optional<Solution> solution;
  EngineStats stats;
  std::vector<IterationTrace> trace;
};

/// Plan, stream-plan, sample and constrain until a refinement succeeds,
/// the queue runs dry or the timeout expires.
EngineResult coast(const TampProblem& tp, const EngineConfig& cfg);

struct ValidationReport {
  bool ok = true;
  std::string reason;
};

/// Independent replay: the symbolic plan on the original domain, the
/// geometric plan re-grounded from the geometric definitions, and every
/// certified fact re-checked with the domain's checkers on bound values.
/// With `fresh_outputs` every geometric output must be a new stream object.
ValidationReport validate_solution(const Solution& sol, const TampProblem& tp, bool fresh_outputs = true);

/// Plain-text solution format, round-trippable.
void write_solution(std::ostream& out, const Solution& sol, const InstanceInfo& info);
std::pair<Solution, InstanceInfo> read_solution(std::istream& in);

}  // namespace coast
