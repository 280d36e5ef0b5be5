#include <gtest/gtest.h>

#include <random>
#include <set>

#include "coast/stream_planner.hpp"
#include "fixtures.hpp"

using namespace coast;

namespace {

struct PickPlaceSetup {
  Domain d = parse_domain(fixtures::kPickPlaceDomain);
  Problem p = parse_problem(fixtures::kPickPlaceProblem, d);
  std::vector<GeomActionDef> geoms = parse_geometric(fixtures::kPickPlaceGeom, d);
  std::vector<StreamDef> streams = parse_streams(fixtures::kPickPlaceStreams);
};

GroundedAction call(std::string name, std::vector<std::string> args) {
  GroundedAction a;
  a.schema_name = std::move(name);
  a.arguments = std::move(args);
  return a;
}

std::vector<std::string> names(const StreamPlan& sp) {
  std::vector<std::string> out;
  for (const auto& si : sp.instances) out.push_back(si.str());
  return out;
}

TEST(StreamPlan, PickPlaceExample) {
  PickPlaceSetup s;
  ObjectRegistry reg(ObjectUniverse(s.d, s.p));
  reg.add_initial("p_apple", "pose");
  reg.add_initial("p_orange", "pose");
  State g0{{"at-pose", {"apple", "p_apple"}}, {"at-pose", {"orange", "p_orange"}}};
  Plan pi{{call("Pick", {"apple", "table"}), call("Place", {"apple", "rack"})}};
  StreamPlan sp = stream_plan(s.geoms, s.streams, g0, pi, reg);
  ASSERT_EQ(sp.geom_plan.size(), 2u);
  EXPECT_EQ(sp.geom_plan[0].str(), "Pick(apple, table; p_apple, grasp_0)");
  EXPECT_EQ(sp.geom_plan[1].str(), "Place(apple, rack; grasp_0, pose_1)");
  EXPECT_EQ(names(sp), (std::vector<std::string>{"sample-grasp(apple, p_apple)->grasp_0",
                                                   "sample-pose(apple, rack)->pose_1"}));
  EXPECT_EQ(sp.instances[1].certified_fact, (Atom{"sample-pose", {"apple", "rack", "pose_1"}}));
  EXPECT_EQ(sp.instances[1].owner_step, 1u);
  EXPECT_EQ(sp.instances[0].inputs[1].kind, ObjectKind::StreamObject);
  EXPECT_EQ(sp.instances[0].inputs[0].kind, ObjectKind::PddlObject);
}

TEST(StreamPlan, EmptyPlan) {
  PickPlaceSetup s;
  ObjectRegistry reg(ObjectUniverse(s.d, s.p));
  StreamPlan sp = stream_plan(s.geoms, s.streams, {}, Plan{}, reg);
  EXPECT_TRUE(sp.instances.empty());
  EXPECT_TRUE(sp.geom_plan.empty());
}

TEST(StreamPlan, ActionWithoutGeometryPassesThrough) {
  PickPlaceSetup s;
  ObjectRegistry reg(ObjectUniverse(s.d, s.p));
  State g0{{"at-pose", {"apple", "p0"}}};
  StreamPlan sp = stream_plan(s.geoms, s.streams, g0, Plan{{call("Cook", {"apple"})}}, reg);
  ASSERT_EQ(sp.geom_plan.size(), 1u);
  EXPECT_FALSE(sp.geom_plan[0].has_geometry);
  EXPECT_EQ(sp.geom_plan[0].str(), "Cook(apple)");
  EXPECT_TRUE(sp.instances.empty());
  EXPECT_EQ(apply_geom_action(g0, sp.geom_plan[0], reg), g0);
}

TEST(GroundGeomAction, InfersGraspFromState) {
  PickPlaceSetup s;
  ObjectRegistry reg(ObjectUniverse(s.d, s.p));
  reg.add_initial("p1", "pose");
  reg.add_initial("g1", "grasp");
  State g{{"at-pose", {"orange", "p1"}}, {"in-grasp", {"apple", "g1"}}};
  auto ga = ground_geom_action(&s.geoms[1], s.streams, g, call("Place", {"apple", "rack"}), reg);
  ASSERT_EQ(ga.input_bindings.size(), 1u);
  EXPECT_EQ(ga.input_bindings[0].second.name, "g1");
  ASSERT_EQ(ga.output_bindings.size(), 1u);
  EXPECT_FALSE(g.contains({"at-pose", {"apple", ga.output_bindings[0].second.name}}));
  EXPECT_TRUE(reg.is_stream_object(ga.output_bindings[0].second.name));

  State after = apply_geom_action(g, ga, reg);
  EXPECT_EQ(after, (State{{"at-pose", {"orange", "p1"}}, {"at-pose", {"apple", ga.output_bindings[0].second.name}}}));
}

TEST(GroundGeomAction, AmbiguityPrefersOldestObject) {
  PickPlaceSetup s;
  for (int run = 0; run < 3; ++run) {
    ObjectRegistry reg(ObjectUniverse(s.d, s.p));
    reg.add_initial("g_z", "grasp");
    reg.add_initial("g_a", "grasp");
    State g{{"in-grasp", {"apple", "g_a"}}, {"in-grasp", {"apple", "g_z"}}};
    auto ga = ground_geom_action(&s.geoms[1], s.streams, g, call("Place", {"apple", "rack"}), reg);
    EXPECT_EQ(ga.input_bindings[0].second.name, "g_z");
    EXPECT_EQ(ga.output_bindings[0].second.name, "pose_0");
  }
}

TEST(GroundGeomAction, NoInputsBindsOutputsOnly) {
  PickPlaceSetup s;
  Domain d = s.d;
  auto geoms = parse_geometric(R"((:geom-action Pick :parameters (?o - obj ?r - region)
      :outputs (?g - grasp) :geom-precondition (sample-grasp ?o ?r ?g)))",
                               d);
  ObjectRegistry reg(ObjectUniverse(s.d, s.p));
  auto ga = ground_geom_action(&geoms[0], s.streams, {}, call("Pick", {"apple", "table"}), reg);
  EXPECT_TRUE(ga.input_bindings.empty());
  EXPECT_EQ(ga.output_bindings.size(), 1u);
  EXPECT_EQ(ga.precondition, Formula::atom("sample-grasp", {"apple", "table", "grasp_0"}));
}

TEST(GroundGeomAction, UnmatchedInputFails) {
  PickPlaceSetup s;
  ObjectRegistry reg(ObjectUniverse(s.d, s.p));
  reg.add_initial("p_apple", "pose");
  State g0{{"at-pose", {"apple", "p_apple"}}};
  Plan pi{{call("Pick", {"apple", "table"}), call("Place", {"orange", "rack"})}};
  try {
    stream_plan(s.geoms, s.streams, g0, pi, reg);
    FAIL() << "expected GroundingFailure";
  } catch (const GroundingFailure& e) {
    EXPECT_EQ(e.step(), 1u);
    EXPECT_NE(e.atom().find("in-grasp orange"), std::string::npos);
  }
}

TEST(GetPreconditionStreams, NoCertifiedFacts) {
  PickPlaceSetup s;
  GroundedGeomAction ga;
  ga.precondition = Formula::atom("in-grasp", {"apple", "g1"});
  ObjectRegistry reg;
  EXPECT_TRUE(get_precondition_streams(ga, s.streams, {}, reg).empty());
}

// Place with the collision clause: one check-collision instance per other
// placed object, compared against a direct scan of the geometric state.
TEST(GetPreconditionStreams, CollisionClauseExpansion) {
  Domain d = parse_domain(fixtures::kPickPlaceDomain);
  Problem p = parse_problem(fixtures::kPickPlaceProblem, d);
  auto geoms = parse_geometric(fixtures::kIkPlaceGeom, d);
  auto streams = parse_streams(fixtures::kIkStreams);
  std::mt19937 rng(11);
  for (int n = 0; n <= 5; ++n) {
    ObjectUniverse u(d, p);
    for (int i = 0; i < n; ++i) u.add("obs" + std::to_string(i), "obj");
    ObjectRegistry reg(u);
    reg.add_initial("g1", "grasp");
    reg.add_initial("q0", "conf");
    State g{{"in-grasp", {"apple", "g1"}}, {"at-conf", {"q0"}}};
    for (int i = 0; i < n; ++i) {
      std::string pose = "pp" + std::to_string(rng() % 1000) + "_" + std::to_string(i);
      reg.add_initial(pose, "pose");
      g.add({"at-pose", {"obs" + std::to_string(i), pose}});
    }
    auto ga = ground_geom_action(&geoms[0], streams, g, call("Place", {"apple", "rack"}), reg);
    auto out = get_precondition_streams(ga, streams, g, reg);
    std::string traj = ga.output_bindings[2].second.name;
    std::set<Atom> expected{
        {"sample-pose", {"apple", "rack", ga.output_bindings[0].second.name}},
        {"sample-ik",
         {"apple", ga.output_bindings[0].second.name, "g1", ga.output_bindings[1].second.name, traj}}};
    for (const auto& a : g)
      if (a.predicate == "at-pose" && a.args[0] != "apple") expected.insert({"check-collision", {traj, a.args[0], a.args[1]}});
    std::set<Atom> got;
    for (const auto& si : out) got.insert(si.certified_fact);
    EXPECT_EQ(out.size(), static_cast<size_t>(2 + n));
    EXPECT_EQ(got, expected);
    EXPECT_EQ(out[0].stream_name, "sample-pose");
    EXPECT_EQ(out[1].stream_name, "sample-ik");

    State after = apply_geom_action(g, ga, reg);
    EXPECT_FALSE(after.contains({"at-conf", {"q0"}}));
    EXPECT_TRUE(after.contains({"at-conf", {ga.output_bindings[1].second.name}}));
    EXPECT_FALSE(after.contains({"in-grasp", {"apple", "g1"}}));
  }
}

// Random valid pick/place plans: determinism, freshness, bijectivity and
// dependency order.
TEST(StreamPlan, RandomPlanInvariants) {
  PickPlaceSetup s;
  const std::vector<std::string> objs{"apple", "orange"};
  const std::vector<std::string> regions{"table", "rack"};
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    size_t len = rng() % 21;
    Plan pi;
    std::optional<std::string> held;
    for (size_t t = 0; t < len; ++t) {
      std::string r = regions[rng() % 2];
      if (held) {
        pi.steps.push_back(call("Place", {*held, r}));
        held.reset();
      } else {
        held = objs[rng() % 2];
        pi.steps.push_back(call("Pick", {*held, r}));
      }
    }
    auto run = [&] {
      ObjectRegistry reg(ObjectUniverse(s.d, s.p));
      reg.add_initial("p_apple", "pose");
      reg.add_initial("p_orange", "pose");
      State g0{{"at-pose", {"apple", "p_apple"}}, {"at-pose", {"orange", "p_orange"}}};
      return stream_plan(s.geoms, s.streams, g0, pi, reg);
    };
    StreamPlan a = run(), b = run();
    EXPECT_EQ(a.instances, b.instances);
    EXPECT_EQ(a.geom_plan, b.geom_plan);
    ASSERT_EQ(a.instances.size(), pi.length());

    std::set<std::string> outputs;
    std::set<Atom> facts;
    std::set<std::string> available{"p_apple", "p_orange"};
    for (size_t i = 0; i < a.instances.size(); ++i) {
      const auto& si = a.instances[i];
      EXPECT_EQ(si.owner_step, i);
      EXPECT_TRUE(facts.insert(si.certified_fact).second);
      for (const auto& in : si.inputs)
        if (in.kind == ObjectKind::StreamObject) EXPECT_TRUE(available.count(in.name)) << in.name;
      for (const auto& o : si.outputs) {
        EXPECT_TRUE(outputs.insert(o.name).second) << o.name;
        available.insert(o.name);
      }
    }
  }
}

}  // namespace
