#include <gtest/gtest.h>

#include <functional>

#include "coast/constraints.hpp"
#include "fixtures.hpp"

using namespace coast;

namespace {

using K = Formula::Kind;

const char* kFruitProblem = R"(
(define (problem fruit)
  (:domain pick-place)
  (:objects apple banana - obj table rack - region)
  (:init (on apple table) (on banana rack) (handempty))
  (:goal (and (on apple rack) (on banana table))))
)";

GroundedAction call(std::string name, std::vector<std::string> args) {
  GroundedAction a;
  a.schema_name = std::move(name);
  a.arguments = std::move(args);
  return a;
}

std::string plan_key(const std::vector<GroundedAction>& steps) {
  std::string out;
  for (const auto& a : steps) out += a.str() + " ";
  return out;
}

// All goal-reaching action sequences of length <= max_len, found by
// exhaustive forward enumeration.
std::set<std::string> all_plans(const Domain& d, const Problem& p, size_t max_len) {
  GroundedTask task = ground(d, p);
  std::vector<GroundedAction> actions;
  for (size_t i = 0; i < task.size(); ++i) actions.push_back(task.action(i));
  ObjectUniverse u(d, p);
  std::set<std::string> out;
  std::vector<GroundedAction> prefix;
  std::function<void(const State&)> dfs = [&](const State& s) {
    if (eval_formula(p.goal, s, {}, u)) out.insert(plan_key(prefix));
    if (prefix.size() == max_len) return;
    for (const auto& a : actions) {
      if (!is_applicable(s, a)) continue;
      prefix.push_back(a);
      dfs(apply_action(s, a));
      prefix.pop_back();
    }
  };
  dfs(p.init);
  return out;
}

struct Timestamped {
  Domain base = parse_domain(fixtures::kPickPlaceDomain);
  Domain aug = augment_with_timestamps(base);
  Problem prob = parse_problem(kFruitProblem, base);
};

TEST(Timestamps, AugmentationShape) {
  Timestamped t;
  const ActionSchema* pick0 = t.base.find_action("Pick");
  const ActionSchema* pick = t.aug.find_action("Pick");
  EXPECT_EQ(pick->parameters.size(), pick0->parameters.size() + 2);
  EXPECT_EQ(pick->parameters.back(), (TypedName{"?t", "time"}));
  EXPECT_EQ(pick->precondition.children.size(), pick0->precondition.children.size() + 3);
  EXPECT_EQ(pick->effect.children.size(), pick0->effect.children.size() + 3);
  EXPECT_EQ(pick->precondition.children.back(),
            Formula::negate(Formula::atom("fail-pick", {"?o", "?r", "?tprev", "?t"})));
  EXPECT_EQ(pick->effect.children.back(), Formula::atom("log-pick", {"?o", "?r", "?tprev", "?t"}));
  EXPECT_TRUE(is_timestamped(t.aug));
  EXPECT_THROW(augment_with_timestamps(t.aug), ConstraintError);

  Domain reparsed = parse_domain(to_pddl(t.aug));
  EXPECT_EQ(to_pddl(reparsed), to_pddl(t.aug));
}

TEST(Timestamps, NameCollision) {
  Domain d = parse_domain(R"((define (domain x) (:predicates (log-go)) (:action Go :parameters () :effect (log-go))))");
  EXPECT_THROW(augment_with_timestamps(d), ConstraintError);
}

TEST(Timestamps, ZeroHorizonHasNoActions) {
  Timestamped t;
  ConstraintSet cs;
  cs.horizon = 0;
  auto [d, p] = apply_constraints(t.aug, t.prob, cs);
  EXPECT_EQ(ground(d, p).size(), 0u);
}

TEST(Timestamps, PlanCarriesTimestamps) {
  Timestamped t;
  ConstraintSet cs;
  cs.horizon = 4;
  auto [d, p] = apply_constraints(t.aug, t.prob, cs);
  GroundedTask task = ground(d, p);
  auto res = plan(task);
  ASSERT_EQ(res.status, PlanStatus::Found);
  ASSERT_EQ(res.plan.length(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    const auto& args = res.plan.steps[i].arguments;
    EXPECT_EQ(args[args.size() - 2], time_object(i));
    EXPECT_EQ(args.back(), time_object(i + 1));
  }
  EXPECT_TRUE(plan_is_valid(p.init, p.goal, res.plan));
}

TEST(SequenceConstraint, FirstStepGoesToInit) {
  Timestamped t;
  FailureRecord fr;
  fr.failed_action = call("Pick", {"apple", "table", "t0", "t1"});
  auto cs = compile_sequence_constraint(fr, t.aug);
  EXPECT_TRUE(cs.schema_edits.empty());
  EXPECT_EQ(cs.added_init_atoms, (std::set<Atom>{{"fail-pick", {"apple", "table", "t0", "t1"}}}));
}

const std::vector<GroundedAction> kFourStep{
    call("Pick", {"apple", "table", "t0", "t1"}), call("Place", {"apple", "rack", "t1", "t2"}),
    call("Pick", {"banana", "rack", "t2", "t3"}), call("Place", {"banana", "table", "t3", "t4"})};

TEST(SequenceConstraint, ThirdStepWhenClause) {
  Timestamped t;
  FailureRecord fr{{kFourStep[0], kFourStep[1]}, kFourStep[2], {}};
  auto cs = compile_sequence_constraint(fr, t.aug);
  ASSERT_EQ(cs.schema_edits.size(), 1u);
  EXPECT_TRUE(cs.added_init_atoms.empty());
  EXPECT_EQ(cs.schema_edits[0].action, "Place");
  Formula expected = Formula::when(
      Formula::conj({Formula::atom("log-pick", {"apple", "table", "t0", "t1"}), Formula::equal("?o", "apple"),
                     Formula::equal("?r", "rack"), Formula::equal("?tprev", "t1"), Formula::equal("?t", "t2")}),
      Formula::atom("fail-pick", {"banana", "rack", "t2", "t3"}));
  EXPECT_EQ(cs.schema_edits[0].effect, expected);
}

// Soundness and minimality against plan enumeration: exactly the plans that
// start with the failed three-step prefix disappear.
TEST(SequenceConstraint, PrunesExactlyThePrefix) {
  Timestamped t;
  ConstraintSet empty;
  empty.horizon = 4;
  auto [d0, p0] = apply_constraints(t.aug, t.prob, empty);
  auto before = all_plans(d0, p0, 4);
  std::string prefix = plan_key({kFourStep[0], kFourStep[1], kFourStep[2]});
  ASSERT_TRUE(before.count(plan_key(kFourStep)));

  FailureRecord fr{{kFourStep[0], kFourStep[1]}, kFourStep[2], {}};
  ConstraintSet cs = compile_sequence_constraint(fr, t.aug);
  cs.horizon = 4;
  auto [d1, p1] = apply_constraints(t.aug, t.prob, cs);
  auto after = all_plans(d1, p1, 4);

  std::set<std::string> expected;
  for (const auto& s : before)
    if (s.rfind(prefix, 0) != 0) expected.insert(s);
  EXPECT_EQ(after, expected);
  EXPECT_LT(after.size(), before.size());

  GroundedTask task = ground(d1, p1);
  auto res = plan(task);
  ASSERT_EQ(res.status, PlanStatus::Found);
  EXPECT_NE(plan_key(res.plan.steps).rfind(prefix, 0), 0u);
}

TEST(ActionConstraint, AddsFailAtom) {
  FailureRecord fr;
  fr.failed_action = call("Pick", {"apple", "table"});
  auto cs = compile_action_constraint(fr);
  EXPECT_EQ(cs.added_init_atoms, (std::set<Atom>{{"fail-pick", {"apple", "table"}}}));
  FailureRecord fr2;
  fr2.failed_action = call("Place", {"apple", "rack"});
  cs.merge(compile_action_constraint(fr2));
  EXPECT_EQ(cs.size(), 2u);
}

TEST(ActionConstraint, PrunesActionEverywhere) {
  Domain base = augment_with_fail_guards(parse_domain(fixtures::kPickPlaceDomain));
  EXPECT_EQ(base.find_action("Pick")->precondition.children.back(),
            Formula::negate(Formula::atom("fail-pick", {"?o", "?r"})));
  Problem prob = parse_problem(kFruitProblem, base);
  auto before = all_plans(base, prob, 6);
  FailureRecord fr;
  fr.failed_action = call("Pick", {"banana", "rack"});
  auto [d, p] = apply_constraints(base, prob, compile_action_constraint(fr));
  auto after = all_plans(d, p, 6);
  std::set<std::string> expected;
  for (const auto& s : before)
    if (s.find("Pick(banana, rack)") == std::string::npos) expected.insert(s);
  EXPECT_EQ(after, expected);
  EXPECT_TRUE(after.empty());
}

const char* kBlocksDomain = R"(
(define (domain blocks-line)
  (:requirements :strips :typing :negative-preconditions :conditional-effects)
  (:types block gridloc)
  (:predicates (at ?b - block ?l - gridloc) (clear ?l - gridloc) (holding ?b - block)
               (handempty) (blocked ?l - gridloc))
  (:action Pick
    :parameters (?b - block ?l - gridloc)
    :precondition (and (at ?b ?l) (handempty))
    :effect (and (not (at ?b ?l)) (clear ?l) (holding ?b) (not (handempty))))
  (:action Place
    :parameters (?b - block ?l - gridloc)
    :precondition (and (holding ?b) (clear ?l) (not (blocked ?l)))
    :effect (and (at ?b ?l) (not (clear ?l)) (not (holding ?b)) (handempty))))
)";

const char* kBlocksProblem = R"(
(define (problem two)
  (:domain blocks-line)
  (:objects b1 b2 - block l1 l2 l3 l9 - gridloc)
  (:init (at b1 l9) (at b2 l2) (clear l1) (clear l3) (handempty))
  (:goal (at b1 l1)))
)";

struct Blocks {
  Domain d = augment_with_fail_guards(parse_domain(kBlocksDomain));
  Problem p = parse_problem(kBlocksProblem, d);
  StreamDef sd = parse_streams(fixtures::kBlockCollisionStream)[0];
  FailureRecord fr;

  Blocks() {
    Plan pi{{call("Pick", {"b1", "l9"}), call("Place", {"b1", "l1"})}};
    StreamInstance si;
    si.stream_name = sd.name;
    si.certified_fact = {sd.name, {"traj_2", "l1", "b2", "l2"}};
    si.owner_step = 1;
    fr = make_failure_record(pi, si);
  }
};

TEST(CollisionConstraint, BlockedFromInitAndReversible) {
  Blocks b;
  EXPECT_EQ(b.fr.plan_prefix.size(), 1u);
  EXPECT_EQ(b.fr.failed_action.str(), "Place(b1, l1)");
  auto cs = constrain_pddl(b.d, b.p, b.fr, {b.sd}, ConstraintMode::Collision);
  EXPECT_EQ(cs.added_init_atoms, (std::set<Atom>{{"blocked", {"l1"}}}));
  EXPECT_EQ(cs.schema_edits.size(), 2u);
  auto [d, p] = apply_constraints(b.d, b.p, cs);

  GroundedTask task = ground(d, p);
  State s = p.init;
  // l2 cleared by picking b2: l1 is free again.
  s = apply_action(s, instantiate(*d.find_action("Pick"), {"b2", "l2"}, ObjectUniverse(d, p)));
  EXPECT_FALSE(s.contains({"blocked", {"l1"}}));
  // Putting b2 back re-blocks l1.
  State back = apply_action(s, instantiate(*d.find_action("Place"), {"b2", "l2"}, ObjectUniverse(d, p)));
  EXPECT_TRUE(back.contains({"blocked", {"l1"}}));
  // Putting b2 elsewhere keeps l1 free.
  State away = apply_action(s, instantiate(*d.find_action("Place"), {"b2", "l3"}, ObjectUniverse(d, p)));
  EXPECT_FALSE(away.contains({"blocked", {"l1"}}));

  auto res = plan(task);
  ASSERT_EQ(res.status, PlanStatus::Found);
  EXPECT_TRUE(plan_is_valid(p.init, p.goal, res.plan));
  std::string key = plan_key(res.plan.steps);
  EXPECT_LT(key.find("Pick(b2, l2)"), key.find("Place(b1, l1)"));

  // Every plan of the constrained problem clears l2 before using l1, and the
  // two-phase plan survives.
  auto plans = all_plans(d, p, 4);
  EXPECT_TRUE(plans.count("Pick(b2, l2) Place(b2, l3) Pick(b1, l9) Place(b1, l1) "));
  for (const auto& s2 : plans) EXPECT_LT(s2.find("Pick(b2, l2)"), s2.find("Place(b1, l1)")) << s2;
}

TEST(CollisionConstraint, FallsBackToActionMode) {
  Blocks b;
  StreamDef plain = b.sd;
  plain.fail_effect.reset();
  auto cs = constrain_pddl(b.d, b.p, b.fr, {plain}, ConstraintMode::Collision);
  EXPECT_EQ(cs.added_init_atoms, (std::set<Atom>{{"fail-place", {"b1", "l1"}}}));
  EXPECT_THROW(compile_collision_constraint(b.fr, plain, b.d, b.p.init), ConstraintError);
}

TEST(ConstraintSet, Idempotent) {
  Timestamped t;
  FailureRecord fr{{kFourStep[0], kFourStep[1]}, kFourStep[2], {}};
  ConstraintSet once = compile_sequence_constraint(fr, t.aug);
  ConstraintSet twice = once;
  twice.merge(compile_sequence_constraint(fr, t.aug));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(once.hash(), twice.hash());

  Blocks b;
  auto c1 = constrain_pddl(b.d, b.p, b.fr, {b.sd}, ConstraintMode::Collision);
  auto c2 = c1;
  c2.merge(constrain_pddl(b.d, b.p, b.fr, {b.sd}, ConstraintMode::Collision));
  EXPECT_EQ(c1, c2);
}

TEST(ConstraintSet, CanonicalOrderIgnoresInsertion) {
  ConstraintSet a, b;
  SchemaEdit e1{"Pick", Formula::when(Formula::atom("p"), Formula::atom("q"))};
  SchemaEdit e2{"Place", Formula::when(Formula::atom("r"), Formula::atom("q"))};
  a.add_edit(e1);
  a.add_edit(e2);
  b.add_edit(e2);
  b.add_edit(e1);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.hash(), b.hash());
}

TEST(ConstraintMode, Parse) {
  EXPECT_EQ(parse_constraint_mode("Sequence"), ConstraintMode::Sequence);
  EXPECT_EQ(parse_constraint_mode("collision"), ConstraintMode::Collision);
  EXPECT_EQ(to_string(ConstraintMode::Action), "action");
  EXPECT_THROW(parse_constraint_mode("bogus"), std::invalid_argument);
}

}  // namespace
