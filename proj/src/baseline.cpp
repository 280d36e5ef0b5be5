#include <algorithm>
#include <chrono>
#include <functional>

#include "coast/baseline.hpp"

namespace coast {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Preconditions cannot carry When; (when c e) reads as (or (not c) e).
Formula when_to_or(const Formula& f) {
  if (f.kind == Formula::Kind::When)
    return Formula::disj({Formula::negate(when_to_or(f.children[0])), when_to_or(f.children[1])});
  Formula out = f;
  for (auto& c : out.children) c = when_to_or(c);
  return out;
}

void collect_atoms(const Formula& f, std::map<std::string, size_t>& arity) {
  if (f.kind == Formula::Kind::Atom) arity.emplace(f.predicate, f.terms.size());
  for (const auto& c : f.children) collect_atoms(c, arity);
}

void ground_atoms(const Formula& f, std::vector<Atom>& out) {
  if (f.kind == Formula::Kind::Atom) out.push_back({f.predicate, f.terms});
  for (const auto& c : f.children) ground_atoms(c, out);
}

}  // namespace

Domain certified_domain(const TampProblem& tp) {
  Domain d = tp.domain;
  d.name += "-certified";
  for (const char* r : {":disjunctive-preconditions", ":universal-preconditions", ":equality", ":conditional-effects"})
    if (std::find(d.requirements.begin(), d.requirements.end(), r) == d.requirements.end()) d.requirements.push_back(r);
  auto add_type = [&](const std::string& t) {
    if (!d.types.contains(t)) d.types.add(t);
  };
  for (const auto& s : tp.streams) {
    for (const auto& v : s.inputs) add_type(v.type);
    for (const auto& v : s.outputs) add_type(v.type);
    PredicateSig sig{s.name, s.inputs};
    sig.params.insert(sig.params.end(), s.outputs.begin(), s.outputs.end());
    d.predicates.push_back(sig);
  }
  std::map<std::string, size_t> arity;
  for (const auto& g : tp.geom) {
    for (const auto& v : g.inputs) add_type(v.type);
    for (const auto& v : g.outputs) add_type(v.type);
    collect_atoms(g.precondition, arity);
    collect_atoms(g.effect, arity);
  }
  for (const auto& [name, n] : arity) {
    if (d.find_predicate(name)) continue;
    PredicateSig sig{name, {}};
    for (size_t i = 0; i < n; ++i) sig.params.push_back({"?x" + std::to_string(i), "object"});
    d.predicates.push_back(sig);
  }
  for (const auto& g : tp.geom) {
    ActionSchema* a = d.find_action(g.name);
    if (!a) continue;
    a->parameters.insert(a->parameters.end(), g.inputs.begin(), g.inputs.end());
    a->parameters.insert(a->parameters.end(), g.outputs.begin(), g.outputs.end());
    a->precondition = Formula::conj({a->precondition, when_to_or(g.precondition)});
    a->effect = Formula::conj({a->effect, g.effect});
  }
  return d;
}

namespace {

class Incremental {
 public:
  Incremental(const TampProblem& tp, const IncrementalConfig& cfg)
      : tp_(tp),
        cfg_(cfg),
        start_(Clock::now()),
        deadline_(start_ + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(std::max(0.0, cfg.timeout_s)))),
        dstar_(certified_domain(tp)),
        pddl_(tp.domain, tp.problem),
        rng_(cfg.seed) {
    for (const auto& s : tp.streams) stream_names_.insert(s.name);
    for (const auto& o : tp.initial_objects) add_object(o.name, o.type, true, 0);
    values_ = tp.init_values;
  }

  IncrementalResult run() {
    IncrementalResult res;
    solve(res);
    res.stats = stats_;
    res.stats.total_time = seconds_since(start_);
    res.instances = insts_.size();
    return res;
  }

 private:
  enum class Status { Pending, Certified, Failed };
  struct Inst {
    const StreamDef* def;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    Atom fact;
    Status status = Status::Pending;
  };
  struct Obj {
    std::string type;
    bool real = false;
    bool dead = false;
    size_t level = 0;
    std::optional<size_t> producer;
  };

  bool timed_out() const { return Clock::now() >= deadline_; }

  void add_object(const std::string& name, const std::string& type, bool real, size_t level) {
    objs_[name] = {type, real, false, level, std::nullopt};
    order_.push_back(name);
  }

  std::string fresh(const std::string& type) {
    std::string name;
    do name = type + "_" + std::to_string(counter_++);
    while (objs_.count(name) || pddl_.contains(name));
    return name;
  }

  bool is_pddl_type(const std::string& type) const { return tp_.domain.types.contains(type) || type == "object"; }

  // Returns false when the instance cap is hit.
  bool create_streams(size_t level, size_t& created) {
    std::vector<std::string> snapshot;
    for (const auto& n : order_)
      if (!objs_[n].dead && objs_[n].level < level) snapshot.push_back(n);
    for (const auto& s : tp_.streams) {
      std::vector<std::vector<std::string>> cand;
      bool all_pddl = true;
      for (const auto& in : s.inputs) {
        std::vector<std::string> c;
        if (is_pddl_type(in.type)) {
          c = pddl_.objects_of(in.type);
        } else {
          all_pddl = false;
          for (const auto& n : snapshot)
            if (objs_[n].type == in.type) c.push_back(n);
        }
        cand.push_back(std::move(c));
      }
      if (std::any_of(cand.begin(), cand.end(), [](const auto& c) { return c.empty(); })) continue;
      std::vector<size_t> idx(cand.size(), 0);
      while (true) {
        std::vector<std::string> inputs;
        for (size_t i = 0; i < cand.size(); ++i) inputs.push_back(cand[i][idx[i]]);
        std::string key = s.name;
        for (const auto& x : inputs) key += " " + x;
        size_t& gen = generations_[key];
        // Streams over PDDL objects yield one new output per level.
        if ((all_pddl && gen < level) || gen == 0) {
          ++gen;
          Inst inst{&s, inputs, {}, {}, Status::Pending};
          for (const auto& o : s.outputs) {
            std::string name = fresh(o.type);
            add_object(name, o.type, false, level);
            objs_[name].producer = insts_.size();
            inst.outputs.push_back(name);
          }
          inst.fact.predicate = s.name;
          inst.fact.args = inputs;
          inst.fact.args.insert(inst.fact.args.end(), inst.outputs.begin(), inst.outputs.end());
          fact_index_[inst.fact] = insts_.size();
          insts_.push_back(std::move(inst));
          ++created;
          if (insts_.size() > cfg_.max_instances) return false;
        }
        size_t k = 0;
        while (k < idx.size() && ++idx[k] == cand[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    }
    return true;
  }

  Problem current_problem() const {
    Problem p = tp_.problem;
    for (const auto& n : order_) {
      const Obj& o = objs_.at(n);
      if (!o.dead) p.objects.push_back({n, o.type});
    }
    for (const auto& a : tp_.init_geom) p.init.add(a);
    for (const auto& i : insts_)
      if (i.status != Status::Failed) p.init.add(i.fact);
    return p;
  }

  // Pending facts the plan cannot do without, plus their pending ancestors.
  std::set<size_t> retrace(const Plan& plan, const State& init) {
    std::set<size_t> needed;
    State s = init;
    for (const auto& step : plan.steps) {
      std::vector<Atom> atoms;
      ground_atoms(step.precondition, atoms);
      // Greedy: drop optional pending facts so the rest still suffice.
      State trimmed = s;
      for (const auto& a : atoms) {
        if (!stream_names_.count(a.predicate)) continue;
        auto it = fact_index_.find(a);
        if (it == fact_index_.end() || insts_[it->second].status != Status::Pending) continue;
        if (needed.count(it->second) || !trimmed.contains(a)) continue;
        trimmed.remove(a);
        if (!eval_formula(step.precondition, trimmed, {}, pddl_)) {
          trimmed.add(a);
          needed.insert(it->second);
        }
      }
      s = apply_action(s, step);
    }
    std::vector<size_t> stack(needed.begin(), needed.end());
    while (!stack.empty()) {
      size_t i = stack.back();
      stack.pop_back();
      for (const auto& in : insts_[i].inputs) {
        auto o = objs_.find(in);
        if (o == objs_.end() || o->second.real || !o->second.producer) continue;
        if (needed.insert(*o->second.producer).second) stack.push_back(*o->second.producer);
      }
    }
    return needed;
  }

  ObjectRef ref(const std::string& name) const {
    auto it = objs_.find(name);
    if (it != objs_.end()) return {name, ObjectKind::StreamObject, it->second.type};
    const std::string* t = pddl_.type_of(name);
    return {name, ObjectKind::PddlObject, t ? *t : "object"};
  }

  void kill(size_t i) {
    insts_[i].status = Status::Failed;
    for (const auto& o : insts_[i].outputs) objs_[o].dead = true;
    for (size_t j = 0; j < insts_.size(); ++j) {
      if (insts_[j].status == Status::Failed) continue;
      for (const auto& in : insts_[j].inputs)
        if (objs_.count(in) && objs_[in].dead) {
          kill(j);
          break;
        }
    }
  }

  // Samples the needed instances in creation order; false if any failed.
  bool bind(const std::set<size_t>& needed) {
    auto t0 = Clock::now();
    bool ok = true;
    size_t global = 0;
    const size_t limit = cfg_.budget.global + needed.size();
    SampleStats st;
    for (size_t i : needed) {
      Inst& inst = insts_[i];
      if (inst.status != Status::Pending) {
        ok = false;
        continue;
      }
      StreamInstance si;
      si.stream_name = inst.def->name;
      for (const auto& x : inst.inputs) si.inputs.push_back(ref(x));
      for (const auto& x : inst.outputs) si.outputs.push_back(ref(x));
      si.certified_fact = inst.fact;
      bool got = false;
      for (size_t k = 0; k < cfg_.budget.per_instance && global < limit && !timed_out(); ++k) {
        ++global;
        if (sample_instance(si, values_, tp_.samplers, cache_, rng_, &st)) {
          got = true;
          break;
        }
      }
      if (got) {
        inst.status = Status::Certified;
        for (const auto& o : inst.outputs) objs_[o].real = true;
      } else {
        kill(i);
        ok = false;
      }
    }
    stats_.sampler_calls += st.sampler_calls;
    stats_.sample_attempts += global;
    stats_.sample_time += seconds_since(t0);
    return ok;
  }

  Solution make_solution(const Plan& plan) const {
    Solution sol;
    std::set<std::string> initial;
    for (const auto& o : tp_.initial_objects) initial.insert(o.name);
    for (const auto& step : plan.steps) {
      const ActionSchema* base = tp_.domain.find_action(step.schema_name);
      const size_t k = base ? base->parameters.size() : step.arguments.size();
      GroundedAction a;
      a.schema_name = step.schema_name;
      a.arguments.assign(step.arguments.begin(), step.arguments.begin() + static_cast<long>(k));
      GroundedGeomAction ga;
      ga.base = a;
      auto g = std::find_if(tp_.geom.begin(), tp_.geom.end(), [&](const GeomActionDef& d) { return d.name == a.schema_name; });
      if (g != tp_.geom.end()) {
        ga.has_geometry = true;
        size_t j = k;
        for (const auto& v : g->inputs) ga.input_bindings.emplace_back(v.name, ref(step.arguments[j++]));
        for (const auto& v : g->outputs) ga.output_bindings.emplace_back(v.name, ref(step.arguments[j++]));
      }
      sol.plan.steps.push_back(std::move(a));
      sol.geom_plan.push_back(std::move(ga));
    }
    for (const auto& n : order_) {
      const Obj& o = objs_.at(n);
      if (!o.real || o.dead || initial.count(n)) continue;
      sol.stream_objects.push_back({n, o.type});
      sol.bindings[n] = values_.at(n);
    }
    for (const auto& i : insts_)
      if (i.status == Status::Certified) sol.certified.insert(i.fact);
    return sol;
  }

  void solve(IncrementalResult& res) {
    for (size_t level = 1; level <= cfg_.max_levels; ++level) {
      res.levels = level;
      ++stats_.iterations;
      if (timed_out()) {
        res.status = EngineStatus::Timeout;
        return;
      }
      size_t created = 0;
      if (!create_streams(level, created)) {
        res.resource_exhausted = true;
        return;
      }
      Problem p = current_problem();
      auto t0 = Clock::now();
      PlanResult pr;
      try {
        GroundedTask task = ground(dstar_, p, cfg_.grounding_cap);
        stats_.max_ground_actions = std::max(stats_.max_ground_actions, task.size());
        SearchConfig sc;
        sc.node_budget = cfg_.node_budget;
        sc.deadline = deadline_;
        pr = plan(task, sc);
      } catch (const GroundingError&) {
        stats_.task_time += seconds_since(t0);
        res.resource_exhausted = true;
        return;
      }
      stats_.task_time += seconds_since(t0);
      if (pr.status == PlanStatus::BudgetExhausted) {
        if (timed_out()) {
          res.status = EngineStatus::Timeout;
        } else {
          res.resource_exhausted = true;
        }
        return;
      }
      if (pr.status == PlanStatus::Unsolvable) {
        if (created == 0) return;
        continue;
      }
      std::set<size_t> needed = retrace(pr.plan, p.init);
      if (bind(needed)) {
        res.status = EngineStatus::Solved;
        res.solution = make_solution(pr.plan);
        return;
      }
    }
    res.resource_exhausted = true;
  }

  const TampProblem& tp_;
  const IncrementalConfig& cfg_;
  Clock::time_point start_;
  Clock::time_point deadline_;
  Domain dstar_;
  ObjectUniverse pddl_;
  Rng rng_;
  StreamCache cache_;
  std::set<std::string> stream_names_;
  std::map<std::string, Obj> objs_;
  std::vector<std::string> order_;
  size_t counter_ = 0;
  Binding values_;
  std::vector<Inst> insts_;
  std::map<Atom, size_t> fact_index_;
  std::map<std::string, size_t> generations_;
  EngineStats stats_;
};

}  // namespace

IncrementalResult incremental(const TampProblem& tp, const IncrementalConfig& cfg) {
  return Incremental(tp, cfg).run();
}

}  // namespace coast
