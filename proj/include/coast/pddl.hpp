#pragma once

#include <compare>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coast/sexpr.hpp"

namespace coast {

inline bool is_variable(std::string_view term) { return !term.empty() && term.front() == '?'; }

struct TypedName {
  std::string name;
  std::string type = "object";

  bool operator==(const TypedName&) const = default;
};
using TypedList = std::vector<TypedName>;

/// A ground (or lifted) atom. Certified facts are ordinary atoms whose
/// predicate is the stream name.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;

  auto operator<=>(const Atom&) const = default;
  bool operator==(const Atom&) const = default;

  std::string str() const;
};

/// Closed-world set of ground atoms. Used for both symbolic and geometric
/// states.
class State {
 public:
  State() = default;
  State(std::initializer_list<Atom> atoms) : atoms_(atoms) {}
  explicit State(std::set<Atom> atoms) : atoms_(std::move(atoms)) {}

  bool contains(const Atom& a) const { return atoms_.count(a) != 0; }
  void add(Atom a) { atoms_.insert(std::move(a)); }
  void remove(const Atom& a) { atoms_.erase(a); }
  size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const std::set<Atom>& atoms() const { return atoms_; }

  auto begin() const { return atoms_.begin(); }
  auto end() const { return atoms_.end(); }

  bool operator==(const State&) const = default;
  bool operator<(const State& o) const { return atoms_ < o.atoms_; }

 private:
  std::set<Atom> atoms_;
};

/// Recursive logical expression shared by the symbolic and geometric layers.
///
///   Atom    predicate(terms...)
///   And/Or  children
///   Not     children[0]
///   Forall  vars, children[0]
///   When    children[0] (condition), children[1] (effect)
///   Equal   terms[0] == terms[1]
struct Formula {
  enum class Kind { Atom, And, Or, Not, Forall, When, Equal };

  Kind kind = Kind::And;
  std::string predicate;
  std::vector<std::string> terms;
  std::vector<Formula> children;
  TypedList vars;

  static Formula atom(std::string predicate, std::vector<std::string> terms = {});
  static Formula conj(std::vector<Formula> children = {});
  static Formula disj(std::vector<Formula> children);
  static Formula negate(Formula child);
  static Formula forall(TypedList vars, Formula body);
  static Formula when(Formula condition, Formula effect);
  static Formula equal(std::string lhs, std::string rhs);

  bool is_true() const { return kind == Kind::And && children.empty(); }
  bool operator==(const Formula&) const = default;
};

std::string to_string(const Formula& f);

class TypeHierarchy {
 public:
  TypeHierarchy();

  void add(const std::string& type, const std::string& parent = "object");
  bool contains(const std::string& type) const { return parent_.count(type) != 0; }
  bool is_subtype(const std::string& type, const std::string& ancestor) const;
  const std::string& parent(const std::string& type) const;
  /// Declared types in declaration order, excluding the implicit root.
  const std::vector<std::string>& declared() const { return order_; }

 private:
  std::map<std::string, std::string> parent_;
  std::vector<std::string> order_;
};

struct PredicateSig {
  std::string name;
  TypedList params;
};

struct ActionSchema {
  std::string name;
  TypedList parameters;
  Formula precondition;
  Formula effect;
};

struct Domain {
  std::string name;
  std::vector<std::string> requirements;
  TypeHierarchy types;
  TypedList constants;
  std::vector<PredicateSig> predicates;
  std::vector<ActionSchema> actions;

  const ActionSchema* find_action(std::string_view name) const;
  ActionSchema* find_action(std::string_view name);
  const PredicateSig* find_predicate(std::string_view name) const;
};

struct Problem {
  std::string name;
  std::string domain_name;
  TypedList objects;
  State init;
  Formula goal;
};

struct StreamDef {
  std::string name;
  TypedList inputs;
  TypedList outputs;
  /// Optional input filter used only by the incremental baseline; free
  /// variables other than inputs are existential.
  std::optional<Formula> domain;
  std::optional<Formula> fail_effect;

  size_t arity() const { return inputs.size() + outputs.size(); }
};

struct GeomActionDef {
  std::string name;
  TypedList parameters;
  TypedList inputs;
  TypedList outputs;
  Formula precondition;
  Formula effect;
};

enum class ObjectKind { PddlObject, StreamObject };

struct ObjectRef {
  std::string name;
  ObjectKind kind = ObjectKind::PddlObject;
  std::string type_name;

  bool operator==(const ObjectRef&) const = default;
};

/// Typed objects available for quantifier expansion: problem objects,
/// domain constants, and live stream objects.
class ObjectUniverse {
 public:
  ObjectUniverse() = default;
  explicit ObjectUniverse(TypeHierarchy types) : types_(std::move(types)) {}
  ObjectUniverse(const Domain& domain, const Problem& problem);

  void add(const std::string& name, const std::string& type);
  bool contains(const std::string& name) const { return type_of_.count(name) != 0; }
  const std::string* type_of(const std::string& name) const;
  std::vector<std::string> objects_of(const std::string& type) const;
  const TypeHierarchy& types() const { return types_; }
  TypeHierarchy& types() { return types_; }
  const std::vector<TypedName>& objects() const { return objects_; }

 private:
  TypeHierarchy types_;
  std::vector<TypedName> objects_;
  std::unordered_map<std::string, std::string> type_of_;
};

using Bindings = std::map<std::string, std::string>;

class UnboundVariableError : public std::runtime_error {
 public:
  explicit UnboundVariableError(const std::string& var)
      : std::runtime_error("unbound variable " + var) {}
};

/// Lookup hook for atoms that are not read from the state (e.g. certified
/// facts re-verified against sampled values).
using AtomOracle = std::function<std::optional<bool>(const Atom&)>;

/// Closed-world evaluation. Forall ranges over `universe`; When is read as
/// implication so the same evaluator handles geometric preconditions.
bool eval_formula(const Formula& f, const State& s, const Bindings& bindings,
                  const ObjectUniverse& universe, const AtomOracle* oracle = nullptr);

std::string resolve_term(const std::string& term, const Bindings& bindings);
Atom ground_atom(const Formula& atom, const Bindings& bindings);
Formula substitute(const Formula& f, const Bindings& bindings);
/// Replaces every Forall with the conjunction of its instances.
Formula expand_quantifiers(const Formula& f, const ObjectUniverse& universe);

struct EffectSet {
  std::vector<Atom> adds;
  std::vector<Atom> dels;
};

/// Collects add/delete atoms of an effect; When conditions are evaluated
/// against the pre-state `s`.
EffectSet collect_effects(const Formula& effect, const State& s, const Bindings& bindings,
                          const ObjectUniverse& universe);
/// Deletes first, then adds.
State apply_effects(const State& s, const EffectSet& effects);

// Parsers. All throw ParseError on malformed or inconsistent input.
Domain parse_domain(std::string_view text);
Problem parse_problem(std::string_view text, const Domain& domain);
std::vector<StreamDef> parse_streams(std::string_view text);
std::vector<GeomActionDef> parse_geometric(std::string_view text, const Domain& domain);
/// Cross-checks geometric actions against stream declarations: certified-fact
/// atoms must name a declared stream with matching arity, and every output
/// must be certified by at least one of them.
void check_geometric_streams(const std::vector<GeomActionDef>& geoms,
                             const std::vector<StreamDef>& streams);

std::string to_pddl(const Domain& domain);
std::string to_pddl(const Problem& problem);
std::string streams_to_pddl(const std::vector<StreamDef>& streams, const std::string& name = "streams");
std::string geometric_to_pddl(const std::vector<GeomActionDef>& geoms,
                              const std::string& name = "geometric");

}  // namespace coast
