#include <algorithm>
#include <set>

#include "coast/stream_planner.hpp"

namespace coast {

std::string StreamInstance::str() const {
  std::string out = stream_name + "(";
  for (size_t i = 0; i < inputs.size(); ++i) out += (i ? ", " : "") + inputs[i].name;
  out += ")";
  if (!outputs.empty()) {
    out += "->";
    for (size_t i = 0; i < outputs.size(); ++i) out += (i ? ", " : "") + outputs[i].name;
  }
  return out;
}

std::string GroundedGeomAction::str() const {
  std::string out = base.schema_name + "(";
  for (size_t i = 0; i < base.arguments.size(); ++i) out += (i ? ", " : "") + base.arguments[i];
  if (!input_bindings.empty() || !output_bindings.empty()) {
    out += ";";
    for (const auto& [_, o] : input_bindings) out += " " + o.name + ",";
    for (const auto& [_, o] : output_bindings) out += " " + o.name + ",";
    out.pop_back();
  }
  return out + ")";
}

void ObjectRegistry::add_initial(const std::string& name, const std::string& type) {
  if (creation_.emplace(name, next_index_).second) ++next_index_;
  universe_.add(name, type);
}

std::string ObjectRegistry::fresh(const std::string& type) {
  std::string name;
  do {
    name = type + "_" + std::to_string(counter_++);
  } while (universe_.contains(name));
  creation_.emplace(name, next_index_++);
  universe_.add(name, type);
  return name;
}

size_t ObjectRegistry::creation_index(const std::string& name) const {
  auto it = creation_.find(name);
  return it == creation_.end() ? 0 : it->second;
}

ObjectRef ObjectRegistry::ref(const std::string& name) const {
  const std::string* type = universe_.type_of(name);
  return {name, is_stream_object(name) ? ObjectKind::StreamObject : ObjectKind::PddlObject,
          type ? *type : std::string("object")};
}

namespace {

using K = Formula::Kind;

bool is_stream(const std::string& predicate, const std::vector<StreamDef>& streams) {
  return std::any_of(streams.begin(), streams.end(), [&](const StreamDef& s) { return s.name == predicate; });
}

void flatten(const Formula& f, std::vector<const Formula*>& out) {
  if (f.kind == K::And) {
    for (const auto& c : f.children) flatten(c, out);
  } else {
    out.push_back(&f);
  }
}

struct Matcher {
  const std::vector<const Formula*>& patterns;
  const State& state;
  const ObjectRegistry& objects;
  const std::vector<std::string>& inputs;
  Bindings current;
  std::optional<Bindings> best;
  std::vector<size_t> best_key;
  size_t deepest = 0;

  void run(size_t i) {
    deepest = std::max(deepest, i);
    if (i == patterns.size()) {
      std::vector<size_t> key;
      for (const auto& v : inputs) key.push_back(objects.creation_index(current.at(v)));
      if (!best || key < best_key) {
        best = current;
        best_key = std::move(key);
      }
      return;
    }
    const Formula& p = *patterns[i];
    Atom lo{p.predicate, {}};
    for (auto it = state.atoms().lower_bound(lo); it != state.atoms().end() && it->predicate == p.predicate; ++it) {
      if (it->args.size() != p.terms.size()) continue;
      std::vector<std::string> newly;
      bool ok = true;
      for (size_t k = 0; k < p.terms.size() && ok; ++k) {
        const std::string& t = p.terms[k];
        if (!is_variable(t)) {
          ok = t == it->args[k];
        } else if (auto b = current.find(t); b != current.end()) {
          ok = b->second == it->args[k];
        } else {
          current[t] = it->args[k];
          newly.push_back(t);
        }
      }
      if (ok) run(i + 1);
      for (const auto& v : newly) current.erase(v);
    }
  }
};

void collect_certified(const Formula& f, const std::vector<StreamDef>& streams, const State& s, Bindings& b,
                       const ObjectUniverse& u, std::vector<Atom>& out) {
  switch (f.kind) {
    case K::Atom:
      if (is_stream(f.predicate, streams)) out.push_back(ground_atom(f, b));
      return;
    case K::And:
      for (const auto& c : f.children) collect_certified(c, streams, s, b, u, out);
      return;
    case K::When:
      if (eval_formula(f.children[0], s, b, u)) collect_certified(f.children[1], streams, s, b, u, out);
      return;
    case K::Forall: {
      std::vector<std::vector<std::string>> doms;
      for (const auto& v : f.vars) {
        doms.push_back(u.objects_of(v.type));
        if (doms.back().empty()) return;
      }
      Bindings saved = b;
      std::vector<size_t> idx(doms.size(), 0);
      while (true) {
        for (size_t i = 0; i < doms.size(); ++i) b[f.vars[i].name] = doms[i][idx[i]];
        collect_certified(f.children[0], streams, s, b, u, out);
        size_t k = 0;
        while (k < idx.size() && ++idx[k] == doms[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
      b = std::move(saved);
      return;
    }
    default:
      return;
  }
}

}  // namespace

GroundedGeomAction ground_geom_action(const GeomActionDef* def, const std::vector<StreamDef>& streams,
                                      const State& s_geom, const GroundedAction& call, ObjectRegistry& objects,
                                      size_t step) {
  GroundedGeomAction ga;
  ga.base = call;
  if (!def) {
    ga.precondition = Formula::conj();
    ga.effect = Formula::conj();
    return ga;
  }
  ga.has_geometry = true;
  Bindings b;
  for (size_t i = 0; i < def->parameters.size(); ++i) b[def->parameters[i].name] = call.arguments.at(i);
  Formula pre = substitute(def->precondition, b);

  std::vector<std::string> input_vars;
  for (const auto& v : def->inputs) input_vars.push_back(v.name);
  if (!input_vars.empty()) {
    std::vector<const Formula*> conjuncts, patterns;
    flatten(pre, conjuncts);
    std::set<std::string> covered;
    for (const Formula* c : conjuncts) {
      if (c->kind != K::Atom || is_stream(c->predicate, streams)) continue;
      bool uses_input = false;
      for (const auto& t : c->terms)
        if (std::find(input_vars.begin(), input_vars.end(), t) != input_vars.end()) {
          uses_input = true;
          covered.insert(t);
        }
      if (uses_input) patterns.push_back(c);
    }
    for (const auto& v : input_vars)
      if (!covered.count(v)) throw GroundingFailure(step, "input " + v + " of " + def->name + " (no pattern)");
    Matcher m{patterns, s_geom, objects, input_vars, {}, std::nullopt, {}, 0};
    m.run(0);
    if (!m.best) throw GroundingFailure(step, to_string(*patterns[std::min(m.deepest, patterns.size() - 1)]));
    for (const auto& v : def->inputs) {
      const std::string& name = m.best->at(v.name);
      b[v.name] = name;
      ga.input_bindings.emplace_back(v.name, objects.ref(name));
    }
  }
  for (const auto& v : def->outputs) {
    std::string name = objects.fresh(v.type);
    b[v.name] = name;
    ga.output_bindings.emplace_back(v.name, objects.ref(name));
  }
  ga.precondition = substitute(def->precondition, b);
  ga.effect = substitute(def->effect, b);
  return ga;
}

std::vector<StreamInstance> get_precondition_streams(const GroundedGeomAction& ga, const std::vector<StreamDef>& streams,
                                                     const State& s_geom, const ObjectRegistry& objects, size_t step) {
  std::vector<Atom> facts;
  Bindings b;
  collect_certified(ga.precondition, streams, s_geom, b, objects.universe(), facts);
  std::vector<StreamInstance> out;
  std::set<Atom> seen;
  for (auto& fact : facts) {
    if (!seen.insert(fact).second) continue;
    auto def = std::find_if(streams.begin(), streams.end(), [&](const StreamDef& s) { return s.name == fact.predicate; });
    if (fact.args.size() != def->arity())
      throw std::invalid_argument("certified fact " + fact.str() + " does not match stream arity");
    StreamInstance si;
    si.stream_name = fact.predicate;
    for (size_t i = 0; i < fact.args.size(); ++i)
      (i < def->inputs.size() ? si.inputs : si.outputs).push_back(objects.ref(fact.args[i]));
    si.certified_fact = std::move(fact);
    si.owner_step = step;
    out.push_back(std::move(si));
  }
  // Stable topological order: producers before consumers within the step.
  std::vector<StreamInstance> ordered;
  std::vector<char> placed(out.size(), 0);
  std::set<std::string> pending;
  for (const auto& si : out)
    for (const auto& o : si.outputs) pending.insert(o.name);
  while (ordered.size() < out.size()) {
    bool progress = false;
    for (size_t i = 0; i < out.size(); ++i) {
      if (placed[i]) continue;
      bool ready = std::none_of(out[i].inputs.begin(), out[i].inputs.end(),
                                [&](const ObjectRef& r) { return pending.count(r.name) != 0; });
      if (!ready) continue;
      placed[i] = 1;
      for (const auto& o : out[i].outputs) pending.erase(o.name);
      ordered.push_back(out[i]);
      progress = true;
      break;
    }
    if (!progress) throw std::invalid_argument("cyclic stream dependencies in " + ga.str());
  }
  return ordered;
}

State apply_geom_action(const State& s_geom, const GroundedGeomAction& ga, const ObjectRegistry& objects) {
  return apply_effects(s_geom, collect_effects(ga.effect, s_geom, {}, objects.universe()));
}

StreamPlan stream_plan(const std::vector<GeomActionDef>& geom_defs, const std::vector<StreamDef>& streams,
                       const State& s0_geom, const Plan& plan, ObjectRegistry& objects) {
  StreamPlan out;
  State s = s0_geom;
  std::set<Atom> seen;
  for (size_t t = 0; t < plan.steps.size(); ++t) {
    const auto& call = plan.steps[t];
    auto def = std::find_if(geom_defs.begin(), geom_defs.end(),
                            [&](const GeomActionDef& g) { return g.name == call.schema_name; });
    GroundedGeomAction ga =
        ground_geom_action(def == geom_defs.end() ? nullptr : &*def, streams, s, call, objects, t);
    for (auto& si : get_precondition_streams(ga, streams, s, objects, t))
      if (seen.insert(si.certified_fact).second) out.instances.push_back(std::move(si));
    s = apply_geom_action(s, ga, objects);
    out.geom_plan.push_back(std::move(ga));
  }
  return out;
}

}  // namespace coast
