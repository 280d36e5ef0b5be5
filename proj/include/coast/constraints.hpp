#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "coast/pddl.hpp"
#include "coast/stream_planner.hpp"
#include "coast/task_planner.hpp"

namespace coast {

enum class ConstraintMode { Sequence, Action, Collision };

std::string to_string(ConstraintMode mode);
ConstraintMode parse_constraint_mode(const std::string& text);

struct FailureRecord {
  std::vector<GroundedAction> plan_prefix;  // a_1 .. a_{t-1}
  GroundedAction failed_action;             // a_t
  StreamInstance failed_instance;
};

struct SchemaEdit {
  std::string action;
  Formula effect;

  bool operator==(const SchemaEdit& o) const { return action == o.action && effect == o.effect; }
};

/// Accumulated PDDL edits of one planner state. Edits are kept in a
/// canonical order so equal sets compare and hash equal.
struct ConstraintSet {
  std::set<Atom> added_init_atoms;
  std::vector<SchemaEdit> schema_edits;
  std::size_t horizon = 0;

  std::size_t size() const { return added_init_atoms.size() + schema_edits.size(); }
  void add_edit(SchemaEdit edit);
  void merge(const ConstraintSet& other);
  std::string canonical() const;
  std::size_t hash() const;
  bool operator==(const ConstraintSet& o) const { return canonical() == o.canonical(); }
};

class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fail_predicate(const std::string& action) { return "fail-" + to_lower(action); }
inline std::string log_predicate(const std::string& action) { return "log-" + to_lower(action); }
inline std::string time_object(std::size_t i) { return "t" + std::to_string(i); }

/// Adds (?tprev ?t - time), the at-time/next-time/fail/log bookkeeping to
/// every action.
Domain augment_with_timestamps(const Domain& domain);
/// Declares objects t0..tT with (at-time t0) and the next-time chain.
Problem add_time_objects(const Problem& problem, std::size_t horizon);
/// Adds (not (fail-<name> params...)) to every action precondition.
Domain augment_with_fail_guards(const Domain& domain);
bool is_timestamped(const Domain& domain);

ConstraintSet compile_sequence_constraint(const FailureRecord& fr, const Domain& augmented);
ConstraintSet compile_action_constraint(const FailureRecord& fr);
/// Ground fail-effect of the failing stream instance. The effect is
/// attached to every action schema with its conditions regressed through
/// that schema's unconditional effects, so the implication always reflects
/// the state after the action; it is also evaluated once against `init`.
ConstraintSet compile_collision_constraint(const FailureRecord& fr, const StreamDef& sd, const Domain& domain,
                                           const State& init);

/// Mode dispatch; Collision falls back to Action when the failing stream has
/// no fail-effect.
ConstraintSet constrain_pddl(const Domain& domain, const Problem& problem, const FailureRecord& fr,
                             const std::vector<StreamDef>& streams, ConstraintMode mode);

/// Materializes a planner state: edits appended to the schemas, init atoms
/// added, time objects declared when the domain is timestamped.
std::pair<Domain, Problem> apply_constraints(const Domain& base, const Problem& base_problem, const ConstraintSet& cs);

/// Builds the failure record for instance `failed` of a stream plan.
FailureRecord make_failure_record(const Plan& plan, const StreamInstance& failed);

}  // namespace coast
