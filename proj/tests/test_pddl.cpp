#include <gtest/gtest.h>

#include <random>

#include "coast/pddl.hpp"
#include "fixtures.hpp"

using namespace coast;
using K = Formula::Kind;

namespace {

Domain pick_place() { return parse_domain(fixtures::kPickPlaceDomain); }

// Naive evaluator: substitutes every quantifier instance by hand and
// evaluates the ground result without reusing eval_formula.
bool naive_eval(const Formula& f, const State& s, const std::map<std::string, std::vector<std::string>>& objs) {
  switch (f.kind) {
    case K::Atom:
      return s.contains(Atom{f.predicate, f.terms});
    case K::Equal:
      return f.terms[0] == f.terms[1];
    case K::And:
      for (const auto& c : f.children)
        if (!naive_eval(c, s, objs)) return false;
      return true;
    case K::Or:
      for (const auto& c : f.children)
        if (naive_eval(c, s, objs)) return true;
      return false;
    case K::Not:
      return !naive_eval(f.children[0], s, objs);
    case K::When:
      return !naive_eval(f.children[0], s, objs) || naive_eval(f.children[1], s, objs);
    case K::Forall: {
      const auto& v = f.vars[0];
      Formula rest = f.vars.size() == 1 ? f.children[0]
                                        : Formula::forall(TypedList(f.vars.begin() + 1, f.vars.end()), f.children[0]);
      for (const auto& o : objs.at(v.type))
        if (!naive_eval(substitute(rest, {{v.name, o}}), s, objs)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace

TEST(ParseDomain, PickPlaceListing) {
  Domain d = pick_place();
  ASSERT_EQ(d.actions.size(), 2u);
  EXPECT_EQ(d.actions[0].name, "Pick");
  EXPECT_EQ(d.actions[1].name, "Place");
  std::set<std::string> preds;
  for (const auto& p : d.predicates) preds.insert(p.name);
  EXPECT_EQ(preds, (std::set<std::string>{"on", "handempty", "holding"}));
  EXPECT_EQ(d.actions[0].parameters, (TypedList{{"?o", "obj"}, {"?r", "region"}}));
}

TEST(ParseDomain, EmptyActionList) {
  Domain d = parse_domain("(define (domain d) (:predicates))");
  EXPECT_EQ(d.name, "d");
  EXPECT_TRUE(d.actions.empty());
}

TEST(ParseDomain, NestedForallWhenEffect) {
  Domain d = parse_domain(R"(
    (define (domain c)
      (:types obj pose)
      (:predicates (at-pose ?o - obj ?p - pose) (moved ?o - obj) (touched ?o - obj))
      (:action Place
        :parameters (?o - obj)
        :precondition (and)
        :effect (and (moved ?o)
          (forall ?oo - obj
            (forall ?pp - pose
              (when (and (at-pose ?oo ?pp) (not (= ?oo ?o))) (touched ?oo)))))))
  )");
  const Formula& eff = d.actions[0].effect;
  ASSERT_EQ(eff.kind, K::And);
  const Formula& outer = eff.children[1];
  ASSERT_EQ(outer.kind, K::Forall);
  EXPECT_EQ(outer.vars, (TypedList{{"?oo", "obj"}}));
  ASSERT_EQ(outer.children[0].kind, K::Forall);
  EXPECT_EQ(outer.children[0].children[0].kind, K::When);
}

TEST(ParseDomain, Errors) {
  EXPECT_THROW(parse_domain("(define (domain d) (:predicates (p ?x - nosuch)))"), ParseError);
  EXPECT_THROW(parse_domain(R"((define (domain d) (:predicates (p ?x))
      (:action A :parameters (?x) :precondition (p ?x ?x) :effect (and))))"),
               ParseError);
  EXPECT_THROW(parse_domain(R"((define (domain d) (:predicates (p ?x))
      (:action A :parameters (?x) :precondition (p ?y) :effect (and))))"),
               ParseError);
  EXPECT_THROW(parse_domain(R"((define (domain d) (:predicates (p ?x))
      (:action A :parameters (?x) :precondition (when (p ?x) (p ?x)) :effect (and))))"),
               ParseError);
  try {
    parse_domain("(define (domain d)\n  (:predicates (p)\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GT(e.location().line, 0);
  }
}

TEST(ParseProblem, BlocksGoalAndInit) {
  Domain d = parse_domain(R"(
    (define (domain b) (:types block gridloc)
      (:predicates (at ?b - block ?l - gridloc) (clear ?l - gridloc) (handempty)))
  )");
  Problem p = parse_problem(R"(
    (define (problem b1) (:domain b)
      (:objects red - block l1 l2 l3 l4 l5 l6 l7 l8 l9 - gridloc)
      (:init (at red l1) (handempty) (clear l2))
      (:goal (at red l5)))
  )",
                            d);
  ASSERT_EQ(p.goal.kind, K::Atom);
  EXPECT_EQ(p.goal.predicate, "at");
  EXPECT_EQ(p.goal.terms, (std::vector<std::string>{"red", "l5"}));
  EXPECT_EQ(p.init.size(), 3u);
  EXPECT_TRUE(p.init.contains({"at", {"red", "l1"}}));
}

TEST(ParseProblem, EmptyGoalIsTrue) {
  Domain d = pick_place();
  Problem p = parse_problem("(define (problem e) (:domain pick-place) (:objects) (:init) (:goal (and)))", d);
  ObjectUniverse u(d, p);
  EXPECT_TRUE(eval_formula(p.goal, p.init, {}, u));
}

TEST(ParseProblem, UndeclaredObjectInInit) {
  Domain d = pick_place();
  EXPECT_THROW(parse_problem("(define (problem e) (:domain pick-place) (:objects apple - obj) (:init (on pear table)))",
                             d),
               ParseError);
}

TEST(ParseStreams, SamplePose) {
  auto s = parse_streams(R"((:stream sample-pose
      :inputs (?o - obj ?r - region)
      :outputs (?p - pose)))");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].inputs, (TypedList{{"?o", "obj"}, {"?r", "region"}}));
  EXPECT_EQ(s[0].outputs, (TypedList{{"?p", "pose"}}));
  EXPECT_FALSE(s[0].fail_effect);
}

TEST(ParseStreams, FailEffect) {
  auto s = parse_streams(fixtures::kBlockCollisionStream);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_TRUE(s[0].outputs.empty());
  ASSERT_TRUE(s[0].fail_effect);
  Formula expected = Formula::conj(
      {Formula::when(Formula::negate(Formula::atom("clear", {"?l2"})), Formula::atom("blocked", {"?l1"})),
       Formula::when(Formula::atom("clear", {"?l2"}), Formula::negate(Formula::atom("blocked", {"?l1"})))});
  EXPECT_EQ(*s[0].fail_effect, expected);
}

TEST(ParseStreams, Errors) {
  EXPECT_THROW(parse_streams("(:stream a :inputs (?x) :outputs (?y)) (:stream a :inputs () :outputs ())"), ParseError);
  EXPECT_THROW(parse_streams("(:stream a :inputs (?x) :outputs (?x))"), ParseError);
}

TEST(ParseGeometric, PlaceListing) {
  Domain d = pick_place();
  auto g = parse_geometric(fixtures::kPlaceGeom, d);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].inputs, (TypedList{{"?g", "grasp"}}));
  EXPECT_EQ(g[0].outputs, (TypedList{{"?p", "pose"}}));
}

TEST(ParseGeometric, IkPlace) {
  Domain d = pick_place();
  auto g = parse_geometric(fixtures::kIkPlaceGeom, d);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].inputs, (TypedList{{"?q1", "conf"}, {"?g", "grasp"}}));
  EXPECT_EQ(g[0].outputs, (TypedList{{"?p", "pose"}, {"?q2", "conf"}, {"?t", "traj"}}));
  const Formula& fa = g[0].precondition.children.back();
  ASSERT_EQ(fa.kind, K::Forall);
  ASSERT_EQ(fa.children[0].kind, K::Forall);
  EXPECT_EQ(fa.children[0].children[0].kind, K::When);
  EXPECT_NO_THROW(check_geometric_streams(g, parse_streams(fixtures::kIkStreams)));
}

TEST(ParseGeometric, Errors) {
  Domain d = pick_place();
  EXPECT_THROW(parse_geometric(R"((:geom-action Place :parameters (?r - region ?o - obj)))", d), ParseError);
  EXPECT_THROW(parse_geometric(R"((:geom-action Stack :parameters ()))", d), ParseError);
  auto g = parse_geometric(fixtures::kPlaceGeom, d);
  EXPECT_THROW(check_geometric_streams(g, parse_streams("(:stream sample-pose :inputs (?o) :outputs ())")),
               ParseError);
}

TEST(RoundTrip, PrintParseFixpoint) {
  Domain d = pick_place();
  Domain d2 = parse_domain(to_pddl(d));
  EXPECT_EQ(to_pddl(d2), to_pddl(d));
  EXPECT_EQ(d2.actions[0].effect, d.actions[0].effect);
  Problem p = parse_problem(fixtures::kPickPlaceProblem, d);
  Problem p2 = parse_problem(to_pddl(p), d2);
  EXPECT_EQ(p2.init, p.init);
  EXPECT_EQ(p2.goal, p.goal);
  auto g = parse_geometric(fixtures::kIkPlaceGeom, d);
  auto g2 = parse_geometric(geometric_to_pddl(g), d);
  EXPECT_EQ(g2[0].precondition, g[0].precondition);
  auto s = parse_streams(fixtures::kBlockCollisionStream);
  EXPECT_EQ(*parse_streams(streams_to_pddl(s))[0].fail_effect, *s[0].fail_effect);
}

TEST(EvalFormula, Basics) {
  ObjectUniverse u;
  EXPECT_TRUE(eval_formula(Formula::atom("handempty"), State{{"handempty", {}}}, {}, u));
  EXPECT_TRUE(eval_formula(Formula::negate(Formula::atom("on", {"apple", "table"})), State{}, {}, u));
  EXPECT_THROW(eval_formula(Formula::atom("on", {"?o"}), State{}, {}, u), UnboundVariableError);
  EXPECT_TRUE(eval_formula(Formula::equal("?a", "x"), State{}, {{"?a", "x"}}, u));
}

TEST(EvalFormula, CollisionClauseMatchesExpansion) {
  Domain d = pick_place();
  auto g = parse_geometric(fixtures::kIkPlaceGeom, d);
  const Formula& clause = g[0].precondition.children.back();
  ObjectUniverse u(d.types);
  u.add("apple", "obj");
  u.add("orange", "obj");
  u.add("p1", "pose");
  u.add("p2", "pose");
  std::map<std::string, std::vector<std::string>> objs{{"obj", {"apple", "orange"}}, {"pose", {"p1", "p2"}}};
  std::vector<Atom> pool{{"at-pose", {"apple", "p1"}},           {"at-pose", {"orange", "p2"}},
                         {"check-collision", {"t1", "orange", "p2"}}, {"check-collision", {"t1", "apple", "p1"}},
                         {"at-pose", {"orange", "p1"}}};
  for (unsigned mask = 0; mask < (1u << pool.size()); ++mask) {
    State s;
    for (size_t i = 0; i < pool.size(); ++i)
      if (mask & (1u << i)) s.add(pool[i]);
    Bindings b{{"?o", "apple"}, {"?t", "t1"}};
    Formula ground = substitute(clause, b);
    EXPECT_EQ(eval_formula(clause, s, b, u), naive_eval(ground, s, objs)) << mask;
  }
}

TEST(EvalFormula, RandomFormulasMatchNaiveExpansion) {
  std::mt19937_64 rng(11);
  std::vector<std::string> objects{"a", "b", "c", "d", "e", "f"};
  ObjectUniverse u;
  for (size_t i = 0; i < objects.size(); ++i) u.add(objects[i], i < 3 ? "ta" : "tb");
  std::map<std::string, std::vector<std::string>> objs{
      {"ta", {"a", "b", "c"}}, {"tb", {"d", "e", "f"}}, {"object", objects}};
  auto pick = [&](size_t n) { return static_cast<size_t>(rng() % n); };
  std::function<Formula(int, std::vector<std::string>&)> gen = [&](int depth, std::vector<std::string>& vars) {
    auto term = [&]() { return !vars.empty() && pick(2) ? vars[pick(vars.size())] : objects[pick(objects.size())]; };
    size_t choice = depth <= 0 ? pick(2) : pick(7);
    switch (choice) {
      case 0:
        return Formula::atom("p", {term()});
      case 1:
        return Formula::atom("q", {term(), term()});
      case 2:
        return Formula::equal(term(), term());
      case 3:
        return Formula::negate(gen(depth - 1, vars));
      case 4:
      case 5: {
        std::vector<Formula> kids;
        for (size_t i = 0, n = 1 + pick(3); i < n; ++i) kids.push_back(gen(depth - 1, vars));
        return choice == 4 ? Formula::conj(kids) : Formula::disj(kids);
      }
      default: {
        std::string v = "?v" + std::to_string(vars.size());
        std::string type = pick(3) == 0 ? "object" : (pick(2) ? "ta" : "tb");
        vars.push_back(v);
        Formula body = gen(depth - 1, vars);
        vars.pop_back();
        return Formula::forall({{v, type}}, body);
      }
    }
  };
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<std::string> vars;
    Formula f = gen(4, vars);
    State s;
    for (const auto& x : objects) {
      if (pick(2)) s.add({"p", {x}});
      for (const auto& y : objects)
        if (pick(4) == 0) s.add({"q", {x, y}});
    }
    EXPECT_EQ(eval_formula(f, s, {}, u), naive_eval(f, s, objs)) << to_string(f);
    EXPECT_EQ(eval_formula(expand_quantifiers(f, u), s, {}, u), naive_eval(f, s, objs));
  }
}

TEST(Effects, WhenReadsPreState) {
  ObjectUniverse u;
  Formula eff = Formula::conj({Formula::negate(Formula::atom("a")),
                               Formula::when(Formula::atom("a"), Formula::atom("b"))});
  State s{{"a", {}}};
  State next = apply_effects(s, collect_effects(eff, s, {}, u));
  EXPECT_EQ(next, (State{{"b", {}}}));
}
