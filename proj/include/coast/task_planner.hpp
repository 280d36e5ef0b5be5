#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "coast/pddl.hpp"

namespace coast {

/// A schema instance with ground, quantifier-free precondition and effect.
struct GroundedAction {
  std::string schema_name;
  std::vector<std::string> arguments;
  Formula precondition;
  Formula effect;

  bool operator==(const GroundedAction&) const = default;
  /// "Pick(apple, table)"
  std::string str() const;
};

GroundedAction instantiate(const ActionSchema& schema, const std::vector<std::string>& arguments,
                           const ObjectUniverse& universe);

class GroundingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ground condition over fact indices.
struct Condition {
  enum class Kind : std::uint8_t { True, False, Fact, Not, And, Or };
  Kind kind = Kind::True;
  int fact = -1;
  std::vector<Condition> kids;
};

/// Conjunction of literals, or an arbitrary tree when `complex` is set.
struct CompiledCondition {
  std::vector<int> pos;
  std::vector<int> neg;
  std::optional<Condition> complex;
};

struct CompiledEffect {
  CompiledCondition condition;
  bool conditional = false;
  std::vector<int> adds;
  std::vector<int> dels;
};

struct CompiledOp {
  int schema = -1;
  std::vector<int> args;
  CompiledCondition pre;
  std::vector<CompiledEffect> effects;
};

struct GroundingStats {
  /// Type-consistent parameter assignments, before any pruning.
  std::size_t type_consistent = 0;
  std::size_t actions = 0;
  std::size_t facts = 0;
  bool cache_hit = false;
};

/// Ground operators shared between tasks that differ only in their initial
/// state.
struct CompiledOps {
  std::shared_ptr<const Domain> domain;
  std::shared_ptr<const ObjectUniverse> universe;
  std::vector<std::string> object_names;
  std::vector<Atom> facts;
  std::map<Atom, int> fact_index;
  std::vector<CompiledOp> ops;
  CompiledCondition goal;
  /// Predicates whose atoms are kept as facts (fluents and negative-only
  /// statics); all other init atoms were folded into the operators.
  std::set<std::string> kept_predicates;
  GroundingStats stats;
};

class GroundedTask {
 public:
  GroundedTask(std::shared_ptr<const CompiledOps> ops, State init, Formula goal);

  std::size_t size() const { return ops_->ops.size(); }
  GroundedAction action(std::size_t i) const;
  const State& init() const { return init_; }
  const Formula& goal() const { return goal_; }
  const GroundingStats& stats() const { return stats_; }
  void mark_cache_hit() { stats_.cache_hit = true; }

  const CompiledOps& compiled() const { return *ops_; }
  const std::vector<std::uint64_t>& init_bits() const { return init_bits_; }
  /// Packs a state into the fact bitset; atoms without a fact index are ignored.
  std::vector<std::uint64_t> pack(const State& s) const;

 private:
  std::shared_ptr<const CompiledOps> ops_;
  State init_;
  Formula goal_;
  GroundingStats stats_;
  std::vector<std::uint64_t> init_bits_;
};

/// Grounds a task. Actions whose folded static preconditions are false in the
/// initial state are dropped; effects on atoms that no condition or goal reads
/// are dropped as well.
GroundedTask ground(const Domain& domain, const Problem& problem, std::size_t instance_cap = 1'000'000);

/// Grounding with reuse of the operator set when only fluent or guard parts
/// of the initial state change.
class Grounder {
 public:
  explicit Grounder(std::size_t instance_cap = 1'000'000) : cap_(instance_cap) {}
  GroundedTask ground(const Domain& domain, const Problem& problem);
  std::size_t cache_size() const { return cache_.size(); }

 private:
  std::size_t cap_;
  std::map<std::string, std::shared_ptr<const CompiledOps>> cache_;
};

struct Plan {
  std::vector<GroundedAction> steps;
  std::size_t length() const { return steps.size(); }
};

enum class PlanStatus { Found, Unsolvable, BudgetExhausted };

struct SearchConfig {
  std::size_t node_budget = 500'000;
  std::optional<std::uint64_t> seed;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  bool use_heuristic = true;
};

struct PlanResult {
  PlanStatus status = PlanStatus::Unsolvable;
  Plan plan;
  std::size_t expanded = 0;
  std::size_t evaluated = 0;
  std::size_t generated = 0;
};

/// Lazy greedy best-first search on h_add with FIFO tie-breaking; breadth
/// first when `use_heuristic` is off. Unsolvable is reported only after the
/// reachable space is exhausted.
PlanResult plan(const GroundedTask& task, const SearchConfig& cfg = {});

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Additive delete-relaxation estimate; 0 iff the goal holds in `s`.
double heuristic(const GroundedTask& task, const State& s);

bool is_applicable(const State& s, const GroundedAction& a);
/// Successor with When conditions read from the pre-state; deletes before adds.
State apply_action(const State& s, const GroundedAction& a);
/// Folds apply_action from `init` and checks the goal.
bool plan_is_valid(const State& init, const Formula& goal, const Plan& plan);

}  // namespace coast
