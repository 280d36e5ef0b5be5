#include <algorithm>
#include <functional>

#include "coast/constraints.hpp"

namespace coast {

std::string to_string(ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::Sequence:
      return "sequence";
    case ConstraintMode::Action:
      return "action";
    case ConstraintMode::Collision:
      return "collision";
  }
  return "?";
}

ConstraintMode parse_constraint_mode(const std::string& text) {
  std::string t = to_lower(text);
  if (t == "sequence" || t == "timestamp") return ConstraintMode::Sequence;
  if (t == "action") return ConstraintMode::Action;
  if (t == "collision") return ConstraintMode::Collision;
  throw std::invalid_argument("unknown constraint mode " + text);
}

void ConstraintSet::add_edit(SchemaEdit edit) {
  auto key = [](const SchemaEdit& e) { return e.action + "\x1f" + coast::to_string(e.effect); };
  std::string k = key(edit);
  auto pos = std::lower_bound(schema_edits.begin(), schema_edits.end(), k,
                              [&](const SchemaEdit& e, const std::string& v) { return key(e) < v; });
  if (pos != schema_edits.end() && key(*pos) == k) return;
  schema_edits.insert(pos, std::move(edit));
}

void ConstraintSet::merge(const ConstraintSet& other) {
  added_init_atoms.insert(other.added_init_atoms.begin(), other.added_init_atoms.end());
  for (const auto& e : other.schema_edits) add_edit(e);
  horizon = std::max(horizon, other.horizon);
}

std::string ConstraintSet::canonical() const {
  std::string out = "T=" + std::to_string(horizon) + "\n";
  for (const auto& a : added_init_atoms) out += a.str() + "\n";
  for (const auto& e : schema_edits) out += e.action + ": " + coast::to_string(e.effect) + "\n";
  return out;
}

size_t ConstraintSet::hash() const { return std::hash<std::string>{}(canonical()); }

namespace {

void declare(Domain& d, const std::string& name, TypedList params) {
  if (d.find_predicate(name)) throw ConstraintError("predicate " + name + " already declared");
  d.predicates.push_back({name, std::move(params)});
}

std::vector<std::string> names(const TypedList& l) {
  std::vector<std::string> out;
  for (const auto& v : l) out.push_back(v.name);
  return out;
}

Formula append(const Formula& base, Formula extra) {
  Formula out = base.kind == Formula::Kind::And ? base : Formula::conj({base});
  out.children.push_back(std::move(extra));
  return out;
}

void flatten_literals(const Formula& f, std::vector<const Formula*>& adds, std::vector<const Formula*>& dels) {
  using K = Formula::Kind;
  if (f.kind == K::And) {
    for (const auto& c : f.children) flatten_literals(c, adds, dels);
  } else if (f.kind == K::Atom) {
    adds.push_back(&f);
  } else if (f.kind == K::Not && f.children[0].kind == K::Atom) {
    dels.push_back(&f.children[0]);
  }
}

// Condition under which `effect_atom` (lifted, over schema parameters) is the
// ground atom `a`; nullopt when it can never be.
std::optional<Formula> unifies(const Formula& effect_atom, const Atom& a) {
  if (effect_atom.predicate != a.predicate || effect_atom.terms.size() != a.args.size()) return std::nullopt;
  std::vector<Formula> eqs;
  for (size_t i = 0; i < a.args.size(); ++i) {
    const std::string& t = effect_atom.terms[i];
    if (is_variable(t)) {
      eqs.push_back(Formula::equal(t, a.args[i]));
    } else if (t != a.args[i]) {
      return std::nullopt;
    }
  }
  return Formula::conj(std::move(eqs));
}

// Value of a ground condition after applying `schema` (deletes before adds).
Formula regress(const Formula& f, const ActionSchema& schema) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::Atom: {
      std::vector<const Formula*> adds, dels;
      flatten_literals(schema.effect, adds, dels);
      Atom a{f.predicate, f.terms};
      std::vector<Formula> made, removed;
      for (const Formula* e : adds)
        if (auto u = unifies(*e, a)) made.push_back(std::move(*u));
      for (const Formula* e : dels)
        if (auto u = unifies(*e, a)) removed.push_back(std::move(*u));
      Formula kept = removed.empty() ? f : Formula::conj({f, Formula::negate(Formula::disj(std::move(removed)))});
      if (made.empty()) return kept;
      made.push_back(std::move(kept));
      return Formula::disj(std::move(made));
    }
    case K::Not:
    case K::And:
    case K::Or: {
      Formula out = f;
      for (auto& c : out.children) c = regress(c, schema);
      return out;
    }
    default:
      return f;
  }
}

Formula regress_effect(const Formula& effect, const ActionSchema& schema) {
  using K = Formula::Kind;
  if (effect.kind == K::When) return Formula::when(regress(effect.children[0], schema), effect.children[1]);
  if (effect.kind == K::And) {
    Formula out = effect;
    for (auto& c : out.children) c = regress_effect(c, schema);
    return out;
  }
  return effect;
}

}  // namespace

bool is_timestamped(const Domain& domain) { return domain.find_predicate("at-time") != nullptr; }

Domain augment_with_timestamps(const Domain& domain) {
  if (is_timestamped(domain)) throw ConstraintError("domain is already timestamped");
  Domain d = domain;
  if (!d.types.contains("time")) d.types.add("time");
  declare(d, "at-time", {{"?t", "time"}});
  declare(d, "next-time", {{"?t1", "time"}, {"?t2", "time"}});
  for (auto& a : d.actions) {
    for (const auto& p : a.parameters)
      if (p.name == "?tprev" || p.name == "?t") throw ConstraintError("action " + a.name + " already uses " + p.name);
    TypedList params = a.parameters;
    params.push_back({"?tprev", "time"});
    params.push_back({"?t", "time"});
    declare(d, fail_predicate(a.name), params);
    declare(d, log_predicate(a.name), params);
    std::vector<std::string> args = names(params);
    a.parameters = params;
    a.precondition = append(a.precondition, Formula::atom("at-time", {"?tprev"}));
    a.precondition = append(a.precondition, Formula::atom("next-time", {"?tprev", "?t"}));
    a.precondition = append(a.precondition, Formula::negate(Formula::atom(fail_predicate(a.name), args)));
    a.effect = append(a.effect, Formula::negate(Formula::atom("at-time", {"?tprev"})));
    a.effect = append(a.effect, Formula::atom("at-time", {"?t"}));
    a.effect = append(a.effect, Formula::atom(log_predicate(a.name), args));
  }
  return d;
}

Problem add_time_objects(const Problem& problem, size_t horizon) {
  Problem p = problem;
  for (size_t i = 0; i <= horizon; ++i) p.objects.push_back({time_object(i), "time"});
  p.init.add({"at-time", {time_object(0)}});
  for (size_t i = 0; i < horizon; ++i) p.init.add({"next-time", {time_object(i), time_object(i + 1)}});
  return p;
}

Domain augment_with_fail_guards(const Domain& domain) {
  Domain d = domain;
  for (auto& a : d.actions) {
    declare(d, fail_predicate(a.name), a.parameters);
    a.precondition = append(a.precondition, Formula::negate(Formula::atom(fail_predicate(a.name), names(a.parameters))));
  }
  return d;
}

ConstraintSet compile_sequence_constraint(const FailureRecord& fr, const Domain& augmented) {
  ConstraintSet cs;
  Formula fail = Formula::atom(fail_predicate(fr.failed_action.schema_name), fr.failed_action.arguments);
  if (fr.plan_prefix.empty()) {
    cs.added_init_atoms.insert({fail.predicate, fail.terms});
    return cs;
  }
  const GroundedAction& prev = fr.plan_prefix.back();
  const ActionSchema* schema = augmented.find_action(prev.schema_name);
  if (!schema) throw ConstraintError("unknown action " + prev.schema_name);
  if (schema->parameters.size() != prev.arguments.size())
    throw ConstraintError("argument count mismatch for " + prev.schema_name);
  std::vector<Formula> cond;
  for (size_t i = 0; i + 1 < fr.plan_prefix.size(); ++i)
    cond.push_back(Formula::atom(log_predicate(fr.plan_prefix[i].schema_name), fr.plan_prefix[i].arguments));
  for (size_t k = 0; k < prev.arguments.size(); ++k)
    cond.push_back(Formula::equal(schema->parameters[k].name, prev.arguments[k]));
  cs.add_edit({prev.schema_name, Formula::when(Formula::conj(std::move(cond)), fail)});
  return cs;
}

ConstraintSet compile_action_constraint(const FailureRecord& fr) {
  ConstraintSet cs;
  cs.added_init_atoms.insert({fail_predicate(fr.failed_action.schema_name), fr.failed_action.arguments});
  return cs;
}

ConstraintSet compile_collision_constraint(const FailureRecord& fr, const StreamDef& sd, const Domain& domain,
                                           const State& init) {
  if (!sd.fail_effect) throw ConstraintError("stream " + sd.name + " has no fail-effect");
  const auto& args = fr.failed_instance.certified_fact.args;
  if (args.size() != sd.arity()) throw ConstraintError("failed instance does not match stream " + sd.name);
  Bindings b;
  for (size_t i = 0; i < sd.inputs.size(); ++i) b[sd.inputs[i].name] = args[i];
  for (size_t i = 0; i < sd.outputs.size(); ++i) b[sd.outputs[i].name] = args[sd.inputs.size() + i];
  Formula ground = substitute(*sd.fail_effect, b);
  ConstraintSet cs;
  for (const auto& a : domain.actions) cs.add_edit({a.name, regress_effect(ground, a)});
  EffectSet now = collect_effects(ground, init, {}, ObjectUniverse{});
  for (const auto& a : now.adds)
    if (!init.contains(a)) cs.added_init_atoms.insert(a);
  return cs;
}

ConstraintSet constrain_pddl(const Domain& domain, const Problem& problem, const FailureRecord& fr,
                             const std::vector<StreamDef>& streams, ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::Sequence:
      return compile_sequence_constraint(fr, domain);
    case ConstraintMode::Action:
      return compile_action_constraint(fr);
    case ConstraintMode::Collision: {
      auto sd = std::find_if(streams.begin(), streams.end(),
                             [&](const StreamDef& s) { return s.name == fr.failed_instance.stream_name; });
      if (sd == streams.end() || !sd->fail_effect) return compile_action_constraint(fr);
      return compile_collision_constraint(fr, *sd, domain, problem.init);
    }
  }
  return {};
}

std::pair<Domain, Problem> apply_constraints(const Domain& base, const Problem& base_problem, const ConstraintSet& cs) {
  Domain d = base;
  for (const auto& e : cs.schema_edits) {
    ActionSchema* a = d.find_action(e.action);
    if (!a) throw ConstraintError("edit references unknown action " + e.action);
    a->effect = append(a->effect, e.effect);
  }
  Problem p = is_timestamped(base) ? add_time_objects(base_problem, cs.horizon) : base_problem;
  for (const auto& a : cs.added_init_atoms) p.init.add(a);
  return {std::move(d), std::move(p)};
}

FailureRecord make_failure_record(const Plan& plan, const StreamInstance& failed) {
  FailureRecord fr;
  size_t t = failed.owner_step;
  if (t >= plan.steps.size()) throw ConstraintError("failed instance belongs to no plan step");
  fr.plan_prefix.assign(plan.steps.begin(), plan.steps.begin() + static_cast<long>(t));
  fr.failed_action = plan.steps[t];
  fr.failed_instance = failed;
  return fr;
}

}  // namespace coast
