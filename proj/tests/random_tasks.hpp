#pragma once

#include <deque>
#include <random>

#include "coast/pddl.hpp"

namespace testing_support {

using namespace coast;

struct RandomTask {
  Domain domain;
  Problem problem;
};

// Small random STRIPS tasks with negative preconditions, a static relation
// and conditional effects. Ground action count stays far below 200.
inline RandomTask random_task(std::mt19937_64& rng) {
  auto pick = [&](size_t n) { return static_cast<size_t>(rng() % n); };
  RandomTask t;
  Domain& d = t.domain;
  d.name = "rand";
  d.types.add("thing");
  d.predicates = {{"p", {{"?x", "thing"}}},
                  {"q", {{"?x", "thing"}}},
                  {"r", {{"?x", "thing"}, {"?y", "thing"}}},
                  {"s", {{"?x", "thing"}, {"?y", "thing"}}},
                  {"z", {}}};
  auto literal = [&](const std::vector<std::string>& params, bool allow_static) {
    size_t which = pick(allow_static ? 5 : 4);
    auto arg = [&] { return params[pick(params.size())]; };
    Formula a;
    switch (which) {
      case 0:
        a = Formula::atom("p", {arg()});
        break;
      case 1:
        a = Formula::atom("q", {arg()});
        break;
      case 2:
        a = Formula::atom("r", {arg(), arg()});
        break;
      case 3:
        a = Formula::atom("z");
        break;
      default:
        return Formula::atom("s", {arg(), arg()});
    }
    return pick(3) == 0 ? Formula::negate(a) : a;
  };
  size_t n_actions = 2 + pick(2);
  for (size_t i = 0; i < n_actions; ++i) {
    ActionSchema a;
    a.name = "a" + std::to_string(i);
    std::vector<std::string> params;
    for (size_t k = 0, n = 1 + pick(2); k < n; ++k) {
      params.push_back("?x" + std::to_string(k));
      a.parameters.push_back({params.back(), "thing"});
    }
    std::vector<Formula> pre;
    for (size_t k = 0, n = 1 + pick(3); k < n; ++k) pre.push_back(literal(params, true));
    a.precondition = Formula::conj(pre);
    std::vector<Formula> eff;
    for (size_t k = 0, n = 1 + pick(3); k < n; ++k) eff.push_back(literal(params, false));
    if (pick(2) == 0) eff.push_back(Formula::when(literal(params, true), literal(params, false)));
    a.effect = Formula::conj(eff);
    d.actions.push_back(std::move(a));
  }
  Problem& p = t.problem;
  p.name = "rand-p";
  p.domain_name = d.name;
  size_t n_obj = 2 + pick(2);
  std::vector<std::string> objs;
  for (size_t i = 0; i < n_obj; ++i) {
    objs.push_back("o" + std::to_string(i));
    p.objects.push_back({objs.back(), "thing"});
  }
  for (const auto& x : objs) {
    if (pick(3) == 0) p.init.add({"p", {x}});
    if (pick(3) == 0) p.init.add({"q", {x}});
    for (const auto& y : objs) {
      if (pick(4) == 0) p.init.add({"r", {x, y}});
      if (pick(2) == 0) p.init.add({"s", {x, y}});
    }
  }
  if (pick(2)) p.init.add({"z", {}});
  std::vector<Formula> goal;
  for (size_t k = 0, n = 1 + pick(2); k < n; ++k) goal.push_back(literal(objs, false));
  p.goal = Formula::conj(goal);
  return t;
}

// Breadth-first search straight over the lifted schemas; returns the optimal
// plan length or -1 when the goal is unreachable.
inline int bfs_plan_length(const Domain& d, const Problem& p, size_t state_cap = 100000) {
  ObjectUniverse u(d, p);
  if (eval_formula(p.goal, p.init, {}, u)) return 0;
  std::map<State, int> dist{{p.init, 0}};
  std::deque<State> queue{p.init};
  while (!queue.empty()) {
    State s = queue.front();
    queue.pop_front();
    int ds = dist[s];
    for (const auto& a : d.actions) {
      std::vector<std::vector<std::string>> doms;
      for (const auto& par : a.parameters) doms.push_back(u.objects_of(par.type));
      bool empty = false;
      for (const auto& dm : doms) empty |= dm.empty();
      if (empty) continue;
      std::vector<size_t> idx(doms.size(), 0);
      while (true) {
        Bindings b;
        for (size_t i = 0; i < doms.size(); ++i) b[a.parameters[i].name] = doms[i][idx[i]];
        if (eval_formula(a.precondition, s, b, u)) {
          State next = apply_effects(s, collect_effects(a.effect, s, b, u));
          if (!dist.count(next)) {
            if (eval_formula(p.goal, next, {}, u)) return ds + 1;
            dist[next] = ds + 1;
            if (dist.size() > state_cap) return -2;
            queue.push_back(next);
          }
        }
        size_t k = 0;
        while (k < idx.size() && ++idx[k] == doms[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    }
  }
  return -1;
}

}  // namespace testing_support
