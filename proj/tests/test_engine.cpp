#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "json.hpp"

#include "coast/domains.hpp"

using namespace coast;

namespace {

ConstraintSet with_atoms(int n, const std::string& tag) {
  ConstraintSet cs;
  for (int i = 0; i < n; ++i) cs.added_init_atoms.insert({"fail-" + tag, {std::to_string(i)}});
  return cs;
}

PlannerState state(ConstraintSet cs, size_t demotion = 0) { return {std::move(cs), demotion}; }

}  // namespace

TEST(StateQueue, SmallerConstraintSetFirst) {
  StateQueue q;
  q.push(state(with_atoms(3, "a")));
  q.push(state(with_atoms(0, "a")));
  EXPECT_EQ(q.pop().constraints.size(), 0u);
  EXPECT_EQ(q.pop().constraints.size(), 3u);
  EXPECT_TRUE(q.empty());
}

TEST(StateQueue, UniqueBeforeRepeated) {
  StateQueue q;
  for (int i = 0; i < 3; ++i) q.push(state(with_atoms(1, "a")));
  q.push(state(with_atoms(1, "b")));
  EXPECT_EQ(q.pop().constraints.canonical(), with_atoms(1, "b").canonical());
}

TEST(StateQueue, NeverPoppedBeforeRevisited) {
  StateQueue q;
  q.push(state(with_atoms(0, "a")));
  q.pop();
  q.push(state(with_atoms(0, "a")));
  q.push(state(with_atoms(2, "b")));
  EXPECT_EQ(q.pop().constraints.size(), 2u);
  EXPECT_EQ(q.times_popped(with_atoms(0, "a")), 1u);
}

TEST(StateQueue, DemotionBreaksTies) {
  StateQueue q;
  q.push(state(with_atoms(1, "a"), 2));
  q.push(state(with_atoms(1, "b"), 0));
  EXPECT_EQ(q.pop().demotion, 0u);
}

TEST(StateQueue, FifoAmongEquals) {
  std::mt19937 rng(5);
  for (int round = 0; round < 100; ++round) {
    std::vector<int> tags(6);
    std::iota(tags.begin(), tags.end(), 0);
    std::shuffle(tags.begin(), tags.end(), rng);
    StateQueue q;
    for (int t : tags) q.push(state(with_atoms(1, std::to_string(t))));
    for (int t : tags) ASSERT_EQ(q.pop().constraints.canonical(), with_atoms(1, std::to_string(t)).canonical());
  }
}

TEST(StateQueue, NothingIsLost) {
  StateQueue q;
  std::mt19937 rng(11);
  size_t pushed = 0, popped = 0;
  for (int i = 0; i < 500; ++i) {
    if (q.empty() || rng() % 3) {
      q.push(state(with_atoms(static_cast<int>(rng() % 4), std::to_string(rng() % 5))));
      ++pushed;
    } else {
      q.pop();
      ++popped;
    }
  }
  EXPECT_EQ(q.size(), pushed - popped);
  while (!q.empty()) q.pop();
}

TEST(Engine, BlocksWithoutObstaclesOneIteration) {
  auto tp = domains::make_instance("blocks", 0, 3);
  auto r = coast::coast(tp, default_config(tp));
  ASSERT_EQ(r.status, EngineStatus::Solved);
  EXPECT_EQ(r.stats.iterations, 1u);
  EXPECT_EQ(r.solution->plan.length(), 2u);
  EXPECT_TRUE(validate_solution(*r.solution, tp).ok) << validate_solution(*r.solution, tp).reason;
}

TEST(Engine, ProvenUnsolvableGoal) {
  auto tp = domains::make_instance("blocks", 1, 0);
  tp.problem.goal = Formula::conj({Formula::atom("holding", {"red"}), Formula::atom("handempty")});
  for (auto mode : {ConstraintMode::Action, ConstraintMode::Sequence, ConstraintMode::Collision}) {
    auto cfg = default_config(tp);
    cfg.mode = mode;
    auto r = coast::coast(tp, cfg);
    EXPECT_EQ(r.status, EngineStatus::Unsolvable) << to_string(mode);
  }
}

TEST(Engine, ZeroTimeout) {
  auto tp = domains::make_instance("blocks", 2, 0);
  auto cfg = default_config(tp);
  cfg.timeout_s = 0;
  EXPECT_EQ(coast::coast(tp, cfg).status, EngineStatus::Timeout);
}

TEST(Engine, DefaultModesSolveEveryDomain) {
  for (const std::string kind : {"blocks", "kitchen", "rover"}) {
    for (uint64_t seed = 0; seed < 3; ++seed) {
      auto tp = domains::make_instance(kind, 3, seed);
      auto cfg = default_config(tp);
      cfg.seed = seed;
      cfg.timeout_s = 30;
      auto r = coast::coast(tp, cfg);
      ASSERT_EQ(r.status, EngineStatus::Solved) << kind << " seed " << seed;
      EXPECT_TRUE(validate_solution(*r.solution, tp).ok);
    }
  }
}

TEST(Engine, TraceIsMonotone) {
  auto tp = domains::make_instance("blocks", 5, 2);
  auto r = coast::coast(tp, default_config(tp));
  ASSERT_EQ(r.status, EngineStatus::Solved);
  ASSERT_EQ(r.trace.size(), r.stats.iterations);
  double prev = 0;
  for (const auto& it : r.trace) {
    EXPECT_GE(it.cumulative_task_time, prev);
    prev = it.cumulative_task_time;
  }
  EXPECT_EQ(r.trace.back().outcome, "solved");
}

TEST(Engine, EventLogIsJsonLines) {
  auto tp = domains::make_instance("blocks", 3, 1);
  std::ostringstream log;
  auto cfg = default_config(tp);
  cfg.event_log = &log;
  ASSERT_EQ(coast::coast(tp, cfg).status, EngineStatus::Solved);
  std::istringstream in(log.str());
  size_t lines = 0;
  std::string last;
  for (std::string line; std::getline(in, line); ++lines) {
    auto j = nlohmann::json::parse(line);
    for (const char* k : {"iteration", "stage", "duration", "outcome"}) EXPECT_TRUE(j.contains(k)) << line;
    last = j["stage"];
  }
  EXPECT_GT(lines, 2u);
  EXPECT_EQ(last, "done");
}

TEST(Engine, SameSeedSameSolution) {
  auto tp = domains::make_instance("rover", 2, 4);
  auto a = coast::coast(tp, default_config(tp));
  auto b = coast::coast(tp, default_config(tp));
  ASSERT_EQ(a.status, EngineStatus::Solved);
  ASSERT_EQ(b.status, EngineStatus::Solved);
  EXPECT_EQ(a.solution->bindings, b.solution->bindings);
  EXPECT_EQ(a.stats.iterations, b.stats.iterations);
}

TEST(Engine, OccludedObjectiveUnsolvable) {
  auto tp = domains::make_instance("rover-occluded", 1, 0);
  EXPECT_FALSE(tp.info.feasible);
  auto cfg = default_config(tp);
  cfg.revisit_limit = 3;
  cfg.timeout_s = 30;
  EXPECT_EQ(coast::coast(tp, cfg).status, EngineStatus::Unsolvable);
}

// A blocks solution whose poses are moved must be rejected by the replay.
TEST(Validate, MutationsAreCaught) {
  auto tp = domains::make_instance("blocks", 2, 0);
  auto r = coast::coast(tp, default_config(tp));
  ASSERT_EQ(r.status, EngineStatus::Solved);
  const Solution& sol = *r.solution;
  ASSERT_TRUE(validate_solution(sol, tp).ok);

  std::set<domains::Cell> occupied;
  for (const auto& a : tp.problem.init)
    if (a.predicate == "at") occupied.insert(*domains::BlocksWorld::loc_cell(a.args[1]));

  std::set<std::string> used;
  for (const auto& f : sol.certified) used.insert(f.args.begin(), f.args.end());
  size_t mutated = 0;
  for (const auto& o : sol.stream_objects) {
    if (o.type != "pose" || !used.count(o.name)) continue;
    for (auto c : occupied) {
      Solution bad = sol;
      bad.bindings[o.name] = {c.c + 0.5, c.r + 0.5};
      // Moving a pose onto a cell its location does not name breaks sample-place.
      EXPECT_FALSE(validate_solution(bad, tp).ok) << o.name;
      ++mutated;
    }
  }
  EXPECT_GT(mutated, 0u);

  Solution dropped = sol;
  dropped.plan.steps.pop_back();
  dropped.geom_plan.pop_back();
  EXPECT_FALSE(validate_solution(dropped, tp).ok);

  Solution swapped = sol;
  if (swapped.plan.length() >= 2) {
    std::swap(swapped.plan.steps[0], swapped.plan.steps[1]);
    EXPECT_FALSE(validate_solution(swapped, tp).ok);
  }
}

TEST(Validate, EmptyPlanWithSatisfiedGoal) {
  auto tp = domains::make_instance("blocks", 0, 0);
  tp.problem.goal = Formula::atom("handempty");
  EXPECT_TRUE(validate_solution(Solution{}, tp).ok);
}

TEST(SolutionIo, RoundTrip) {
  for (const std::string kind : {"blocks", "kitchen", "rover"}) {
    auto tp = domains::make_instance(kind, 2, 1);
    auto r = coast::coast(tp, default_config(tp));
    ASSERT_EQ(r.status, EngineStatus::Solved) << kind;
    std::stringstream ss;
    write_solution(ss, *r.solution, tp.info);
    auto [sol, info] = read_solution(ss);
    EXPECT_EQ(info.kind, kind);
    EXPECT_EQ(info.parameter, 2);
    EXPECT_EQ(info.seed, 1u);
    EXPECT_EQ(sol.bindings, r.solution->bindings);
    EXPECT_EQ(sol.certified, r.solution->certified);
    ASSERT_EQ(sol.plan.length(), r.solution->plan.length());
    for (size_t i = 0; i < sol.plan.length(); ++i) {
      EXPECT_EQ(sol.plan.steps[i].str(), r.solution->plan.steps[i].str());
      EXPECT_EQ(sol.geom_plan[i].input_bindings, r.solution->geom_plan[i].input_bindings);
      EXPECT_EQ(sol.geom_plan[i].output_bindings, r.solution->geom_plan[i].output_bindings);
    }
    EXPECT_TRUE(validate_solution(sol, tp).ok) << validate_solution(sol, tp).reason;
  }
}

TEST(SolutionIo, RejectsGarbage) {
  std::istringstream in("instance blocks 1 2 1\nstep Pick red l1\nbogus line\n");
  EXPECT_THROW(read_solution(in), std::runtime_error);
}
