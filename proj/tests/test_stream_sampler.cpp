#include <gtest/gtest.h>

#include <cmath>

#include "coast/stream_sampler.hpp"

using namespace coast;

namespace {

ObjectRef pddl(std::string n) { return {std::move(n), ObjectKind::PddlObject, "object"}; }
ObjectRef sobj(std::string n) { return {std::move(n), ObjectKind::StreamObject, "object"}; }

StreamInstance inst(std::string stream, std::vector<ObjectRef> in, std::vector<ObjectRef> out, size_t step = 0) {
  StreamInstance si;
  si.stream_name = stream;
  si.inputs = std::move(in);
  si.outputs = std::move(out);
  si.certified_fact.predicate = std::move(stream);
  for (const auto& r : si.inputs) si.certified_fact.args.push_back(r.name);
  for (const auto& r : si.outputs) si.certified_fact.args.push_back(r.name);
  si.owner_step = step;
  return si;
}

SamplerFn always(double v) {
  return [v](std::span<const SamplerArg>, Rng&) { return std::optional<std::vector<Value>>{{{v}}}; };
}

SamplerFn coin(double p_success) {
  return [p_success](std::span<const SamplerArg>, Rng& rng) -> std::optional<std::vector<Value>> {
    if (std::bernoulli_distribution(p_success)(rng)) return std::vector<Value>{{1.0}};
    return std::nullopt;
  };
}

// gen -> x uniform in [0,1); use(x) succeeds iff x > 0.9.
SamplerRegistry producer_consumer() {
  SamplerRegistry r;
  r.samplers["gen"] = [](std::span<const SamplerArg>, Rng& rng) -> std::optional<std::vector<Value>> {
    return std::vector<Value>{{std::uniform_real_distribution<double>(0, 1)(rng)}};
  };
  r.samplers["use"] = [](std::span<const SamplerArg> in, Rng&) -> std::optional<std::vector<Value>> {
    if ((*in[1].value)[0] > 0.9) return std::vector<Value>{};
    return std::nullopt;
  };
  return r;
}

StreamPlan producer_consumer_plan() {
  StreamPlan psi;
  psi.instances.push_back(inst("gen", {pddl("apple")}, {sobj("x_0")}));
  psi.instances.push_back(inst("use", {pddl("apple"), sobj("x_0")}, {}));
  return psi;
}

TEST(AdaptiveBinding, SingleInstanceSucceeds) {
  SamplerRegistry r;
  r.samplers["sample-pose"] = always(0.25);
  StreamPlan psi;
  psi.instances.push_back(inst("sample-pose", {pddl("apple"), pddl("rack")}, {sobj("pose_1")}));
  StreamCache cache;
  Rng rng(1);
  auto res = adaptive_binding(psi, r, cache, {}, rng);
  EXPECT_TRUE(res.success());
  EXPECT_EQ(res.certified, (std::set<Atom>{{"sample-pose", {"apple", "rack", "pose_1"}}}));
  EXPECT_EQ(res.bindings.at("pose_1"), Value{0.25});
  EXPECT_TRUE(is_successful(psi, res.certified));
}

TEST(AdaptiveBinding, EmptyPlan) {
  SamplerRegistry r;
  StreamCache cache;
  Rng rng(1);
  auto res = adaptive_binding(StreamPlan{}, r, cache, {}, rng);
  EXPECT_TRUE(res.success());
  EXPECT_TRUE(res.bindings.empty());
  EXPECT_TRUE(is_successful(StreamPlan{}, {}));
}

TEST(AdaptiveBinding, ShelfTooSmallFails) {
  SamplerRegistry r;
  r.samplers["sample-pose"] = [](std::span<const SamplerArg> in, Rng&) -> std::optional<std::vector<Value>> {
    if (in[1].name == "shelf") return std::nullopt;
    return std::vector<Value>{{0.0}};
  };
  StreamPlan psi;
  psi.instances.push_back(inst("sample-pose", {pddl("apple"), pddl("shelf")}, {sobj("p1")}));
  StreamCache cache;
  Rng rng(1);
  auto res = adaptive_binding(psi, r, cache, {}, rng);
  EXPECT_FALSE(res.success());
  EXPECT_TRUE(res.certified.empty());
  EXPECT_EQ(res.failed_index, 0u);
  EXPECT_EQ(res.stats.attempts[0], 20u);
  EXPECT_FALSE(is_successful(psi, res.certified));
}

TEST(AdaptiveBinding, MissingSampler) {
  StreamPlan psi;
  psi.instances.push_back(inst("nothing", {}, {}));
  StreamCache cache;
  Rng rng(1);
  EXPECT_THROW(adaptive_binding(psi, SamplerRegistry{}, cache, {}, rng), MissingSampler);
}

// Success probability of a p=0.5 sampler under k attempts is 1 - 2^-k.
TEST(AdaptiveBinding, MonteCarloMatchesGeometricLaw) {
  SamplerRegistry r;
  r.samplers["s"] = coin(0.5);
  StreamPlan psi;
  psi.instances.push_back(inst("s", {pddl("a")}, {sobj("v")}));
  for (size_t k : {3u, 50u}) {
    const int runs = k == 3 ? 4000 : 1000;
    int ok = 0;
    for (int seed = 0; seed < runs; ++seed) {
      StreamCache cache;
      Rng rng(seed);
      ok += adaptive_binding(psi, r, cache, {k, 200}, rng).success();
    }
    double expected = 1 - std::pow(0.5, static_cast<double>(k));
    double rate = static_cast<double>(ok) / runs;
    double sd = std::sqrt(expected * (1 - expected) / runs);
    EXPECT_NEAR(rate, expected, std::max(4 * sd, 1e-9)) << "k=" << k;
    if (k == 50) EXPECT_GE(rate, 0.99);
  }
}

// A consumer failure rewinds to its producer; with per-instance budget k the
// consumer gets at most k draws, so success = 1 - 0.9^k.
TEST(AdaptiveBinding, BacktracksToProducer) {
  auto r = producer_consumer();
  auto psi = producer_consumer_plan();
  const int runs = 3000;
  int ok = 0;
  for (int seed = 0; seed < runs; ++seed) {
    StreamCache cache;
    Rng rng(seed);
    auto res = adaptive_binding(psi, r, cache, {20, 200}, rng);
    ok += res.success();
    EXPECT_EQ(res.stats.attempts[0], res.stats.attempts[1]);
    if (res.success()) {
      EXPECT_GT(res.bindings.at("x_0")[0], 0.9);
    } else {
      EXPECT_EQ(res.failed_index, 1u);
      EXPECT_EQ(res.failed_instance->stream_name, "use");
      EXPECT_EQ(res.certified, (std::set<Atom>{psi.instances[0].certified_fact}));
    }
  }
  double expected = 1 - std::pow(0.9, 20);
  double sd = std::sqrt(expected * (1 - expected) / runs);
  EXPECT_NEAR(static_cast<double>(ok) / runs, expected, 4 * sd);
}

TEST(AdaptiveBinding, GlobalBudgetStops) {
  auto r = producer_consumer();
  r.samplers["use"] = [](std::span<const SamplerArg>, Rng&) -> std::optional<std::vector<Value>> {
    return std::nullopt;
  };
  StreamCache cache;
  Rng rng(3);
  auto res = adaptive_binding(producer_consumer_plan(), r, cache, {100, 7}, rng);
  EXPECT_FALSE(res.success());
  EXPECT_EQ(res.stats.total_attempts, 7u + 2u);
}

TEST(AdaptiveBinding, LongPlanFitsGlobalBudget) {
  SamplerRegistry r;
  r.samplers["s"] = [](std::span<const SamplerArg>, Rng&) -> std::optional<std::vector<Value>> {
    return std::vector<Value>{{1.0}};
  };
  StreamPlan psi;
  for (int i = 0; i < 300; ++i) psi.instances.push_back(inst("s", {pddl("b")}, {sobj("y" + std::to_string(i))}));
  StreamCache cache;
  Rng rng(0);
  auto res = adaptive_binding(psi, r, cache, {20, 200}, rng);
  EXPECT_TRUE(res.success());
  EXPECT_EQ(res.stats.total_attempts, 300u);
}

TEST(AdaptiveBinding, Reproducible) {
  auto r = producer_consumer();
  r.samplers["s"] = coin(0.3);
  auto psi = producer_consumer_plan();
  psi.instances.push_back(inst("s", {pddl("b")}, {sobj("y")}));
  for (int seed = 0; seed < 50; ++seed) {
    StreamCache c1, c2;
    Rng r1(seed), r2(seed);
    auto a = adaptive_binding(psi, r, c1, {5, 30}, r1);
    auto b = adaptive_binding(psi, r, c2, {5, 30}, r2);
    EXPECT_EQ(a.bindings, b.bindings);
    EXPECT_EQ(a.certified, b.certified);
    EXPECT_EQ(a.failed_index, b.failed_index);
    EXPECT_EQ(a.stats.attempts, b.stats.attempts);
  }
}

TEST(AdaptiveBinding, BudgetMonotone) {
  auto r = producer_consumer();
  auto psi = producer_consumer_plan();
  for (int seed = 0; seed < 300; ++seed) {
    bool before = false;
    for (size_t k = 1; k <= 12; ++k) {
      StreamCache cache;
      Rng rng(seed);
      bool now = adaptive_binding(psi, r, cache, {k, 200}, rng).success();
      EXPECT_FALSE(before && !now) << "seed " << seed << " budget " << k;
      before = now;
    }
  }
}

// Every certified fact comes with the values its sampler actually returned.
TEST(AdaptiveBinding, CertificationSoundness) {
  std::map<std::string, Value> returned;
  SamplerRegistry r;
  r.samplers["s"] = [&](std::span<const SamplerArg> in, Rng& rng) -> std::optional<std::vector<Value>> {
    double v = std::uniform_real_distribution<double>(0, 1)(rng);
    if (v < 0.4) return std::nullopt;
    returned[in[0].name] = {v};
    return std::vector<Value>{{v}};
  };
  StreamPlan psi;
  for (int i = 0; i < 4; ++i)
    psi.instances.push_back(inst("s", {pddl("o" + std::to_string(i))}, {sobj("v" + std::to_string(i))}));
  for (int seed = 0; seed < 100; ++seed) {
    returned.clear();
    StreamCache cache;
    Rng rng(seed);
    auto res = adaptive_binding(psi, r, cache, {3, 200}, rng);
    for (const auto& f : res.certified) EXPECT_EQ(res.bindings.at(f.args[1]), returned.at(f.args[0]));
    for (const auto& f : res.certified)
      EXPECT_TRUE(std::any_of(psi.instances.begin(), psi.instances.end(),
                              [&](const StreamInstance& si) { return si.certified_fact == f; }));
    EXPECT_EQ(res.success(), res.certified.size() == psi.instances.size());
  }
}

TEST(StreamCache, ZeroProbabilityNeverReads) {
  SamplerRegistry r;
  r.samplers["s"] = coin(0.5);
  StreamPlan psi;
  psi.instances.push_back(inst("s", {pddl("a")}, {sobj("v")}));
  StreamCache cache;
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    auto res = adaptive_binding(psi, r, cache, {}, rng);
    EXPECT_EQ(res.stats.sampler_calls, res.stats.total_attempts);
    EXPECT_EQ(res.stats.cache_hits, 0u);
  }
  EXPECT_FALSE(cache.entries.empty());
}

TEST(StreamCache, OnlyPddlInputsAreCached) {
  auto r = producer_consumer();
  StreamCache cache;
  cache.reuse_probability = 0.9;
  Rng rng(4);
  size_t hits = 0;
  for (int i = 0; i < 200; ++i) {
    Binding init{{"x_0", {0.95}}};
    StreamPlan psi;
    psi.instances.push_back(inst("use", {pddl("apple"), sobj("x_0")}, {}));
    hits += adaptive_binding(psi, r, cache, {}, rng, init).stats.cache_hits;
  }
  EXPECT_EQ(hits, 0u);
  EXPECT_TRUE(cache.entries.empty());
}

TEST(StreamCache, ReusesWithProbability) {
  SamplerRegistry r;
  r.samplers["s"] = always(0.5);
  StreamPlan psi;
  psi.instances.push_back(inst("s", {pddl("a")}, {sobj("v")}));
  StreamCache cache;
  cache.reuse_probability = 0.5;
  Rng rng(9);
  size_t hits = 0;
  const int runs = 4000;
  for (int i = 0; i < runs; ++i) hits += adaptive_binding(psi, r, cache, {}, rng).stats.cache_hits;
  // First call always misses; afterwards each call hits with probability 0.5.
  double sd = std::sqrt(0.25 / (runs - 1));
  EXPECT_NEAR(static_cast<double>(hits) / (runs - 1), 0.5, 4 * sd);
}

}  // namespace
