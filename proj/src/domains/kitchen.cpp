#include <array>
#include <deque>
#include <unordered_map>

#include "common.hpp"

namespace coast::domains {

namespace {

constexpr const char* kDomain = R"(
(define (domain kitchen)
  (:requirements :strips :typing :negative-preconditions :conditional-effects)
  (:types item surface)
  (:predicates
    (on ?o - item ?r - surface)
    (holding ?o - item)
    (handempty)
    (free ?r - surface)
    (single ?r - surface)
    (is-sink ?r - surface)
    (is-stove ?r - surface)
    (cleaned ?o - item)
    (cooked ?o - item))
  (:action Pick
    :parameters (?o - item ?r - surface)
    :precondition (and
      (on ?o ?r)
      (handempty))
    :effect (and
      (not (on ?o ?r))
      (holding ?o)
      (not (handempty))
      (free ?r)))
  (:action Place
    :parameters (?o - item ?r - surface)
    :precondition (and
      (holding ?o)
      (free ?r))
    :effect (and
      (on ?o ?r)
      (not (holding ?o))
      (handempty)
      (when (single ?r)
        (not (free ?r)))))
  (:action Clean
    :parameters (?o - item ?r - surface)
    :precondition (and
      (on ?o ?r)
      (is-sink ?r))
    :effect (cleaned ?o))
  (:action Cook
    :parameters (?o - item ?r - surface)
    :precondition (and
      (on ?o ?r)
      (is-stove ?r)
      (cleaned ?o))
    :effect (cooked ?o)))
)";

constexpr const char* kStreams = R"(
(define (stream kitchen)
  (:stream sample-grasp
    :inputs (?o - item ?p - pose)
    :outputs (?g - grasp))
  (:stream sample-pose
    :inputs (?o - item ?r - surface)
    :outputs (?p - pose))
  (:stream check-collision
    :inputs (?o - item ?p - pose ?o2 - item ?p2 - pose)
    :outputs ()))
)";

constexpr const char* kGeom = R"(
(define (geometric kitchen)
  (:geom-action Pick
    :parameters (?o - item ?r - surface)
    :inputs (?p - pose)
    :outputs (?g - grasp)
    :geom-precondition (and
      (at-pose ?o ?p)
      (sample-grasp ?o ?p ?g))
    :geom-effect (and
      (not (at-pose ?o ?p))
      (in-grasp ?o ?g)))
  (:geom-action Place
    :parameters (?o - item ?r - surface)
    :inputs (?g - grasp)
    :outputs (?p - pose)
    :geom-precondition (and
      (in-grasp ?o ?g)
      (sample-pose ?o ?r ?p)
      (forall ?o2 - item
        (forall ?p2 - pose
          (when
            (at-pose ?o2 ?p2)
            (check-collision ?o ?p ?o2 ?p2)))))
    :geom-effect (and
      (not (in-grasp ?o ?g))
      (at-pose ?o ?p))))
)";

constexpr int kItems = 4;
constexpr double kSlotJitter = 0.05;
constexpr double kGraspJitter = 0.1;

double sample_x(const std::string& surface, Rng& rng) {
  const Surface& s = kitchen_surfaces().at(surface);
  int slots = static_cast<int>(s.hi - s.lo);
  int k = std::uniform_int_distribution<int>(0, slots - 1)(rng);
  return s.lo + k + 0.5 + detail::uniform(rng, -kSlotJitter, kSlotJitter);
}

SamplerRegistry samplers() {
  using detail::value;
  SamplerRegistry reg;
  reg.samplers["sample-grasp"] = [](std::span<const SamplerArg>, Rng& rng) -> std::optional<std::vector<Value>> {
    return std::vector<Value>{{detail::uniform(rng, -kGraspJitter, kGraspJitter)}};
  };
  reg.checkers["sample-grasp"] = [](std::span<const SamplerArg> a) {
    const Value& g = value(a[2]);
    return g.size() == 1 && std::abs(g[0]) <= kGraspJitter;
  };
  reg.samplers["sample-pose"] = [](std::span<const SamplerArg> in, Rng& rng) -> std::optional<std::vector<Value>> {
    if (!kitchen_surfaces().count(in[1].name)) return std::nullopt;
    return std::vector<Value>{{sample_x(in[1].name, rng)}};
  };
  reg.checkers["sample-pose"] = [](std::span<const SamplerArg> a) {
    auto it = kitchen_surfaces().find(a[1].name);
    const Value& p = value(a[2]);
    return it != kitchen_surfaces().end() && p.size() == 1 && p[0] - kItemWidth / 2 >= it->second.lo &&
           p[0] + kItemWidth / 2 <= it->second.hi;
  };
  auto apart = [](std::span<const SamplerArg> a) {
    const Value& p = value(a[1]);
    const Value& q = value(a[3]);
    return a[0].name == a[2].name || std::abs(p.at(0) - q.at(0)) >= kItemWidth;
  };
  reg.samplers["check-collision"] = [apart](std::span<const SamplerArg> in, Rng&) -> std::optional<std::vector<Value>> {
    if (!apart(in)) return std::nullopt;
    return std::vector<Value>{};
  };
  reg.checkers["check-collision"] = apart;
  return reg;
}

}  // namespace

const std::map<std::string, Surface>& kitchen_surfaces() {
  static const std::map<std::string, Surface> s{
      {"table", {0.0, 4.0, 4}}, {"sink", {5.0, 6.0, 1}}, {"stove", {7.0, 8.0, 1}}};
  return s;
}

KitchenWorld make_kitchen_world(int n_goals, std::uint64_t seed) {
  if (n_goals < 1 || n_goals > 2 * kItems) throw std::invalid_argument("kitchen: goals must be in 1..8");
  Rng rng(detail::mix(seed, 0));
  KitchenWorld w;
  std::vector<int> slots(kItems);
  std::iota(slots.begin(), slots.end(), 0);
  std::shuffle(slots.begin(), slots.end(), rng);
  for (int i = 0; i < kItems; ++i) {
    w.items.push_back("i" + std::to_string(i + 1));
    w.slot[w.items.back()] = slots[static_cast<size_t>(i)];
  }
  std::vector<Atom> pool;
  for (const auto& it : w.items) {
    pool.push_back({"cleaned", {it}});
    pool.push_back({"cooked", {it}});
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  w.goals.assign(pool.begin(), pool.begin() + n_goals);
  std::sort(w.goals.begin(), w.goals.end());
  return w;
}

std::optional<int> kitchen_oracle_plan_length(const KitchenWorld& w) {
  // Per item: place (0 table, 1 sink, 2 stove, 3 held), cleaned, cooked.
  using S = std::array<std::uint8_t, 3 * kItems>;
  const int n = static_cast<int>(w.items.size());
  auto index = [&](const std::string& name) {
    return static_cast<int>(std::find(w.items.begin(), w.items.end(), name) - w.items.begin());
  };
  auto done = [&](const S& s) {
    for (const Atom& g : w.goals) {
      int i = index(g.args[0]);
      if (s[static_cast<size_t>(3 * i + (g.predicate == "cleaned" ? 1 : 2))] == 0) return false;
    }
    return true;
  };
  auto hash = [](const S& s) {
    std::size_t h = 0;
    for (auto v : s) h = h * 31 + v;
    return h;
  };
  S start{};
  std::unordered_map<S, int, decltype(hash)> dist(16, hash);
  dist[start] = 0;
  std::deque<S> q{start};
  while (!q.empty()) {
    S s = q.front();
    q.pop_front();
    int d = dist[s];
    if (done(s)) return d;
    int held = -1;
    bool busy[3] = {false, false, false};
    for (int i = 0; i < n; ++i) {
      auto at = s[static_cast<size_t>(3 * i)];
      if (at == 3) held = i;
      else busy[at] = true;
    }
    std::vector<S> next;
    for (int i = 0; i < n; ++i) {
      const size_t b = static_cast<size_t>(3 * i);
      if (held == -1) {
        S t = s;
        t[b] = 3;
        next.push_back(t);
      }
      if (s[b] == 1 && !s[b + 1]) {
        S t = s;
        t[b + 1] = 1;
        next.push_back(t);
      }
      if (s[b] == 2 && s[b + 1] && !s[b + 2]) {
        S t = s;
        t[b + 2] = 1;
        next.push_back(t);
      }
    }
    if (held != -1)
      for (std::uint8_t r = 0; r < 3; ++r)
        if (r == 0 || !busy[r]) {
          S t = s;
          t[static_cast<size_t>(3 * held)] = r;
          next.push_back(t);
        }
    for (const S& t : next)
      if (dist.emplace(t, d + 1).second) q.push_back(t);
  }
  return std::nullopt;
}

TampProblem kitchen_instance(int n_goals, std::uint64_t seed) {
  KitchenWorld w = make_kitchen_world(n_goals, seed);
  std::ostringstream p;
  p << "(define (problem kitchen-" << n_goals << "-" << seed << ")\n  (:domain kitchen)\n  (:objects";
  for (const auto& it : w.items) p << ' ' << it;
  p << " - item table sink stove - surface)\n";
  p << "  (:init (handempty) (free table) (free sink) (free stove) (single sink) (single stove)"
       " (is-sink sink) (is-stove stove)";
  for (const auto& it : w.items) p << " (on " << it << " table)";
  p << ")\n  (:goal (and";
  for (const Atom& g : w.goals) p << " (" << g.predicate << ' ' << g.args[0] << ')';
  p << ")))\n";

  InstanceInfo info{"kitchen", n_goals, seed, kitchen_oracle_plan_length(w).has_value()};
  TampProblem tp = detail::assemble(info, kDomain, p.str(), kStreams, kGeom);
  Rng rng(detail::mix(seed, 1000));
  for (const auto& it : w.items) {
    std::string pose = "p_" + it;
    tp.initial_objects.push_back({pose, "pose"});
    tp.init_values[pose] = {w.slot.at(it) + 0.5 + detail::uniform(rng, -kSlotJitter, kSlotJitter)};
    tp.init_geom.add({"at-pose", {it, pose}});
  }
  tp.samplers = samplers();
  tp.mode = ConstraintMode::Sequence;
  tp.cache_probability = 0.0;
  return tp;
}

}  // namespace coast::domains
