#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "coast/pddl.hpp"
#include "coast/task_planner.hpp"

namespace coast {

/// A stream applied to concrete arguments. The certified fact is
/// (stream_name inputs... outputs...).
struct StreamInstance {
  std::string stream_name;
  std::vector<ObjectRef> inputs;
  std::vector<ObjectRef> outputs;
  Atom certified_fact;
  std::size_t owner_step = 0;

  bool operator==(const StreamInstance&) const = default;
  /// "sample-pose(apple, rack)->pose_3"
  std::string str() const;
};

struct GroundedGeomAction {
  GroundedAction base;
  /// Geometric precondition/effect with parameters, inputs and outputs
  /// substituted; quantifiers are left in place.
  Formula precondition;
  Formula effect;
  std::vector<std::pair<std::string, ObjectRef>> input_bindings;
  std::vector<std::pair<std::string, ObjectRef>> output_bindings;
  bool has_geometry = false;

  bool operator==(const GroundedGeomAction&) const = default;
  /// "Place(apple, rack; grasp_1, pose_2)"
  std::string str() const;
};

struct StreamPlan {
  std::vector<StreamInstance> instances;
  std::vector<GroundedGeomAction> geom_plan;
};

class GroundingFailure : public std::runtime_error {
 public:
  GroundingFailure(std::size_t step, const std::string& atom)
      : std::runtime_error("step " + std::to_string(step) + ": no geometric atom matches " + atom),
        step_(step),
        atom_(atom) {}
  std::size_t step() const { return step_; }
  const std::string& atom() const { return atom_; }

 private:
  std::size_t step_;
  std::string atom_;
};

/// Typed objects visible to stream planning: PDDL objects plus stream
/// objects, each stream object with a creation index. Fresh names are
/// `<type>_<counter>` and never reused.
class ObjectRegistry {
 public:
  ObjectRegistry() = default;
  explicit ObjectRegistry(ObjectUniverse pddl_objects) : universe_(std::move(pddl_objects)) {}

  /// Registers a stream object that exists before planning (e.g. an
  /// initial pose).
  void add_initial(const std::string& name, const std::string& type);
  std::string fresh(const std::string& type);

  bool is_stream_object(const std::string& name) const { return creation_.count(name) != 0; }
  std::size_t creation_index(const std::string& name) const;
  ObjectRef ref(const std::string& name) const;
  const ObjectUniverse& universe() const { return universe_; }
  std::size_t counter() const { return counter_; }

 private:
  ObjectUniverse universe_;
  std::map<std::string, std::size_t> creation_;
  std::size_t next_index_ = 0;
  std::size_t counter_ = 0;
};

/// Binds geometric inputs by matching the non-certified precondition atoms
/// against `s_geom` (lowest creation indices win on ambiguity) and binds
/// outputs to fresh stream objects. A null `def` yields a pass-through action.
GroundedGeomAction ground_geom_action(const GeomActionDef* def, const std::vector<StreamDef>& streams,
                                      const State& s_geom, const GroundedAction& call, ObjectRegistry& objects,
                                      std::size_t step = 0);

/// One instance per certified-fact atom of the precondition, with Forall
/// expanded over the registry and When conditions read from `s_geom`.
std::vector<StreamInstance> get_precondition_streams(const GroundedGeomAction& ga,
                                                     const std::vector<StreamDef>& streams, const State& s_geom,
                                                     const ObjectRegistry& objects, std::size_t step = 0);

State apply_geom_action(const State& s_geom, const GroundedGeomAction& ga, const ObjectRegistry& objects);

StreamPlan stream_plan(const std::vector<GeomActionDef>& geom_defs, const std::vector<StreamDef>& streams,
                       const State& s0_geom, const Plan& plan, ObjectRegistry& objects);

}  // namespace coast
