#include <algorithm>

#include "coast/engine.hpp"

namespace coast {

namespace {

ValidationReport fail(std::string why) { return {false, std::move(why)}; }

}  // namespace

ValidationReport validate_solution(const Solution& sol, const TampProblem& tp, bool fresh_outputs) {
  ObjectUniverse universe(tp.domain, tp.problem);

  State s = tp.problem.init;
  for (size_t t = 0; t < sol.plan.steps.size(); ++t) {
    const auto& step = sol.plan.steps[t];
    const ActionSchema* schema = tp.domain.find_action(step.schema_name);
    if (!schema) return fail("step " + std::to_string(t) + ": unknown action " + step.schema_name);
    if (schema->parameters.size() != step.arguments.size())
      return fail("step " + std::to_string(t) + ": wrong argument count");
    for (size_t k = 0; k < step.arguments.size(); ++k) {
      const std::string* type = universe.type_of(step.arguments[k]);
      if (!type || !universe.types().is_subtype(*type, schema->parameters[k].type))
        return fail("step " + std::to_string(t) + ": bad argument " + step.arguments[k]);
    }
    GroundedAction a = instantiate(*schema, step.arguments, universe);
    if (!is_applicable(s, a)) return fail("step " + std::to_string(t) + ": precondition of " + a.str() + " fails");
    s = apply_action(s, a);
  }
  if (!eval_formula(tp.problem.goal, s, {}, universe)) return fail("goal not reached");

  if (sol.geom_plan.size() != sol.plan.steps.size()) return fail("geometric plan length differs from the plan");
  ObjectUniverse geo = universe;
  for (const auto& o : tp.initial_objects) geo.add(o.name, o.type);
  for (const auto& o : sol.stream_objects) geo.add(o.name, o.type);
  std::set<std::string> stream_names;
  for (const auto& o : tp.initial_objects) stream_names.insert(o.name);
  for (const auto& o : sol.stream_objects) stream_names.insert(o.name);

  auto is_stream = [&](const std::string& pred) {
    return std::any_of(tp.streams.begin(), tp.streams.end(), [&](const StreamDef& d) { return d.name == pred; });
  };
  std::string oracle_error;
  AtomOracle oracle = [&](const Atom& a) -> std::optional<bool> {
    if (!is_stream(a.predicate)) return std::nullopt;
    auto checker = tp.samplers.checkers.find(a.predicate);
    if (checker == tp.samplers.checkers.end()) {
      oracle_error = "no checker for " + a.predicate;
      return false;
    }
    std::vector<SamplerArg> args;
    for (const auto& name : a.args) {
      SamplerArg arg{name, nullptr};
      if (stream_names.count(name)) {
        if (auto v = sol.bindings.find(name); v != sol.bindings.end()) {
          arg.value = &v->second;
        } else if (auto w = tp.init_values.find(name); w != tp.init_values.end()) {
          arg.value = &w->second;
        } else {
          oracle_error = "stream object " + name + " has no value";
          return false;
        }
      }
      args.push_back(arg);
    }
    bool ok = checker->second(args);
    if (!ok) oracle_error = a.str() + " does not hold for the bound values";
    return ok;
  };

  std::set<std::string> outputs_seen;
  State g = tp.init_geom;
  for (size_t t = 0; t < sol.geom_plan.size(); ++t) {
    const auto& ga = sol.geom_plan[t];
    const auto& step = sol.plan.steps[t];
    if (ga.base.schema_name != step.schema_name || ga.base.arguments != step.arguments)
      return fail("step " + std::to_string(t) + ": geometric action does not match the plan");
    auto def = std::find_if(tp.geom.begin(), tp.geom.end(), [&](const GeomActionDef& d) { return d.name == step.schema_name; });
    if (def == tp.geom.end()) continue;
    if (ga.input_bindings.size() != def->inputs.size() || ga.output_bindings.size() != def->outputs.size())
      return fail("step " + std::to_string(t) + ": binding arity mismatch");
    Bindings b;
    for (size_t i = 0; i < def->parameters.size(); ++i) b[def->parameters[i].name] = step.arguments[i];
    for (size_t i = 0; i < def->inputs.size(); ++i) {
      if (ga.input_bindings[i].first != def->inputs[i].name) return fail("input order mismatch");
      b[def->inputs[i].name] = ga.input_bindings[i].second.name;
    }
    for (size_t i = 0; i < def->outputs.size(); ++i) {
      const std::string& name = ga.output_bindings[i].second.name;
      if (ga.output_bindings[i].first != def->outputs[i].name) return fail("output order mismatch");
      if (fresh_outputs && (!outputs_seen.insert(name).second || tp.init_values.count(name)))
        return fail("stream object " + name + " produced twice");
      b[def->outputs[i].name] = name;
    }
    Formula pre = substitute(def->precondition, b);
    oracle_error.clear();
    if (!eval_formula(pre, g, {}, geo, &oracle))
      return fail("step " + std::to_string(t) + ": geometric precondition fails" +
                  (oracle_error.empty() ? std::string() : ": " + oracle_error));
    g = apply_effects(g, collect_effects(substitute(def->effect, b), g, {}, geo));
  }
  return {};
}

}  // namespace coast
