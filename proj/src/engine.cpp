#include <algorithm>
#include <chrono>
#include <tuple>

#include "json.hpp"

#include "coast/engine.hpp"

namespace coast {

std::string to_string(EngineStatus s) {
  switch (s) {
    case EngineStatus::Solved:
      return "solved";
    case EngineStatus::Unsolvable:
      return "unsolvable";
    case EngineStatus::Timeout:
      return "timeout";
  }
  return "?";
}

EngineConfig default_config(const TampProblem& tp) {
  EngineConfig cfg;
  cfg.mode = tp.mode;
  cfg.cache_probability = tp.cache_probability;
  return cfg;
}

void StateQueue::push(PlannerState s) {
  std::string key = s.constraints.canonical();
  ++queued_[key];
  entries_.push_back({std::move(s), std::move(key), next_seq_++});
}

PlannerState StateQueue::pop() {
  if (entries_.empty()) throw std::out_of_range("pop on empty state queue");
  auto rank = [&](const Entry& e) {
    return std::make_tuple(times_popped(e.state.constraints), queued_.at(e.key), e.state.constraints.size(),
                           e.state.demotion, e.seq);
  };
  auto best = entries_.begin();
  auto best_rank = rank(*best);
  for (auto it = std::next(entries_.begin()); it != entries_.end(); ++it) {
    auto r = rank(*it);
    if (r < best_rank) {
      best = it;
      best_rank = r;
    }
  }
  Entry e = std::move(*best);
  entries_.erase(best);
  if (--queued_[e.key] == 0) queued_.erase(e.key);
  ++popped_[e.key];
  return std::move(e.state);
}

std::size_t StateQueue::times_popped(const ConstraintSet& cs) const {
  auto it = popped_.find(cs.canonical());
  return it == popped_.end() ? 0 : it->second;
}

std::size_t StateQueue::copies(const ConstraintSet& cs) const {
  auto it = queued_.find(cs.canonical());
  return it == queued_.end() ? 0 : it->second;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

GroundedAction strip_times(GroundedAction a, const Domain& base) {
  if (const ActionSchema* s = base.find_action(a.schema_name))
    if (a.arguments.size() > s->parameters.size()) a.arguments.resize(s->parameters.size());
  return a;
}

class Engine {
 public:
  Engine(const TampProblem& tp, const EngineConfig& cfg)
      : tp_(tp), cfg_(cfg), start_(Clock::now()), deadline_(start_ + to_duration(cfg.timeout_s)), rng_(cfg.seed) {
    cache_.reuse_probability = cfg.cache_probability;
  }

  EngineResult run() {
    EngineResult out = solve();
    out.stats = stats_;
    out.stats.total_time = seconds_since(start_);
    out.trace = std::move(trace_);
    event("done", 0.0, to_string(out.status));
    return out;
  }

 private:
  static Clock::duration to_duration(double s) {
    return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(std::max(0.0, s)));
  }

  bool timed_out() const { return Clock::now() >= deadline_; }

  void event(const std::string& stage, double duration, const std::string& outcome, nlohmann::json extra = {}) {
    if (!cfg_.event_log) return;
    nlohmann::json j = {{"iteration", stats_.iterations}, {"stage", stage}, {"duration", duration}, {"outcome", outcome}};
    if (extra.is_object()) j.update(extra);
    *cfg_.event_log << j.dump() << '\n';
  }

  // Grounding overflow counts as a budget hit.
  PlanResult task_plan(const Domain& d, const Problem& p, IterationTrace& it) {
    auto t0 = Clock::now();
    PlanResult res;
    try {
      GroundedTask task = grounder_.ground(d, p);
      stats_.max_ground_actions = std::max(stats_.max_ground_actions, task.size());
      SearchConfig sc;
      sc.node_budget = cfg_.node_budget;
      sc.deadline = deadline_;
      res = plan(task, sc);
    } catch (const GroundingError&) {
      res.status = PlanStatus::BudgetExhausted;
    }
    double dt = seconds_since(t0);
    it.task_time += dt;
    stats_.task_time += dt;
    event("task-plan", dt, res.status == PlanStatus::Found ? "found"
                           : res.status == PlanStatus::Unsolvable ? "unsolvable"
                                                                  : "budget",
          {{"plan_length", res.plan.length()}});
    return res;
  }

  EngineResult solve() {
    EngineResult out;
    Domain base = tp_.domain;
    switch (cfg_.mode) {
      case ConstraintMode::Sequence:
        base = augment_with_timestamps(tp_.domain);
        break;
      case ConstraintMode::Action:
      case ConstraintMode::Collision:
        base = augment_with_fail_guards(tp_.domain);
        break;
    }

    PlannerState first;
    std::optional<Plan> root_plan;
    if (cfg_.mode == ConstraintMode::Sequence) {
      // The untimed task decides solvability and sizes the horizon.
      IterationTrace probe;
      PlanResult pr = task_plan(tp_.domain, tp_.problem, probe);
      record_probe(probe);
      if (pr.status == PlanStatus::Unsolvable) return out;
      std::size_t T = std::max<std::size_t>(cfg_.initial_horizon, 1);
      if (pr.status == PlanStatus::Found) {
        while (T < pr.plan.length() && T < cfg_.max_horizon) T = std::min(T * 2, cfg_.max_horizon);
        if (pr.plan.length() <= T) root_plan = std::move(pr.plan);
      }
      first.constraints.horizon = T;
    }

    StateQueue queue;
    queue.push(first);
    while (true) {
      if (timed_out()) {
        out.status = EngineStatus::Timeout;
        return out;
      }
      if (queue.empty()) {
        out.status = EngineStatus::Unsolvable;
        return out;
      }
      stats_.max_queue = std::max(stats_.max_queue, queue.size());
      PlannerState ps = queue.pop();
      if (cfg_.revisit_limit && queue.times_popped(ps.constraints) > *cfg_.revisit_limit) continue;
      ++stats_.iterations;
      IterationTrace it;
      it.iteration = stats_.iterations;
      it.constraints = ps.constraints.size();
      auto [d, p] = apply_constraints(base, tp_.problem, ps.constraints);

      PlanResult pr;
      if (root_plan && ps.constraints.size() == 0) {
        // Without constraints the timed task is the untimed one; reuse its plan.
        pr.status = PlanStatus::Found;
        pr.plan = with_times(*root_plan, d, p);
      } else {
        pr = task_plan(d, p, it);
      }
      if (pr.status != PlanStatus::Found) {
        if (pr.status == PlanStatus::BudgetExhausted) {
          ++ps.demotion;
          queue.push(std::move(ps));
          it.outcome = "planner-budget";
        } else if (cfg_.mode == ConstraintMode::Sequence && ps.constraints.horizon < cfg_.max_horizon) {
          ps.constraints.horizon = std::min(ps.constraints.horizon * 2, cfg_.max_horizon);
          queue.push(std::move(ps));
          it.outcome = "grow-horizon";
        } else {
          it.outcome = "no-plan";
        }
        record(it);
        continue;
      }
      it.plan_length = pr.plan.length();
      if (timed_out()) {
        record(it);
        continue;
      }

      auto t1 = Clock::now();
      ObjectRegistry objects(ObjectUniverse(tp_.domain, tp_.problem));
      for (const auto& o : tp_.initial_objects) objects.add_initial(o.name, o.type);
      StreamPlan psi;
      std::optional<std::size_t> bad_step;
      try {
        psi = stream_plan(tp_.geom, tp_.streams, tp_.init_geom, pr.plan, objects);
      } catch (const GroundingFailure& e) {
        bad_step = e.step();
      }
      it.stream_plan_time = seconds_since(t1);
      stats_.stream_plan_time += it.stream_plan_time;
      event("stream-plan", it.stream_plan_time, bad_step ? "grounding-failure" : "ok",
            {{"instances", psi.instances.size()}});
      if (bad_step) {
        // The plan has no geometric reading at all: forbid the step outright.
        queue.push(ps);
        FailureRecord fr;
        fr.plan_prefix.assign(pr.plan.steps.begin(), pr.plan.steps.begin() + static_cast<long>(*bad_step));
        fr.failed_action = pr.plan.steps[*bad_step];
        PlannerState next = ps;
        next.demotion = 0;
        next.constraints.merge(compile_action_constraint(fr));
        queue.push(std::move(next));
        it.outcome = "grounding-failure";
        record(it);
        continue;
      }
      if (timed_out()) {
        record(it);
        continue;
      }

      auto t2 = Clock::now();
      SampleResult sr = adaptive_binding(psi, tp_.samplers, cache_, cfg_.budget, rng_, tp_.init_values);
      it.sample_time = seconds_since(t2);
      stats_.sample_time += it.sample_time;
      stats_.sampler_calls += sr.stats.sampler_calls;
      stats_.sample_attempts += sr.stats.total_attempts;
      stats_.cache_hits += sr.stats.cache_hits;
      event("sample", it.sample_time, sr.success() ? "success" : "failure",
            {{"attempts", sr.stats.total_attempts},
             {"failed", sr.failed_instance ? sr.failed_instance->str() : std::string()}});

      if (sr.success() && is_successful(psi, sr.certified)) {
        Solution sol;
        for (const auto& a : pr.plan.steps) sol.plan.steps.push_back(strip_times(a, tp_.domain));
        sol.geom_plan = std::move(psi.geom_plan);
        for (auto& ga : sol.geom_plan) ga.base = strip_times(ga.base, tp_.domain);
        sol.bindings = std::move(sr.bindings);
        sol.certified = std::move(sr.certified);
        for (const auto& o : objects.universe().objects())
          if (objects.is_stream_object(o.name)) sol.stream_objects.push_back(o);
        it.outcome = "solved";
        record(it);
        out.status = EngineStatus::Solved;
        out.solution = std::move(sol);
        return out;
      }

      queue.push(ps);
      FailureRecord fr = make_failure_record(pr.plan, *sr.failed_instance);
      PlannerState next = ps;
      next.demotion = 0;
      next.constraints.merge(constrain_pddl(d, p, fr, tp_.streams, cfg_.mode));
      event("constrain", 0.0, to_string(cfg_.mode),
            {{"failed_action", fr.failed_action.str()}, {"constraints", next.constraints.size()}});
      queue.push(std::move(next));
      it.outcome = "sample-failure";
      record(it);
    }
  }

  static Plan with_times(const Plan& plan, const Domain& d, const Problem& p) {
    ObjectUniverse u(d, p);
    Plan out;
    for (size_t k = 0; k < plan.steps.size(); ++k) {
      auto args = plan.steps[k].arguments;
      args.push_back(time_object(k));
      args.push_back(time_object(k + 1));
      out.steps.push_back(instantiate(*d.find_action(plan.steps[k].schema_name), args, u));
    }
    return out;
  }

  void record_probe(const IterationTrace& probe) { cumulative_task_ += probe.task_time; }

  void record(IterationTrace it) {
    cumulative_task_ += it.task_time;
    it.cumulative_task_time = cumulative_task_;
    trace_.push_back(std::move(it));
  }

  const TampProblem& tp_;
  const EngineConfig& cfg_;
  Clock::time_point start_;
  Clock::time_point deadline_;
  Rng rng_;
  StreamCache cache_;
  Grounder grounder_;
  EngineStats stats_;
  std::vector<IterationTrace> trace_;
  double cumulative_task_ = 0;
};

}  // namespace

EngineResult coast(const TampProblem& tp, const EngineConfig& cfg) { return Engine(tp, cfg).run(); }

}  // namespace coast
