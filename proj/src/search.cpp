#include <algorithm>
#include <queue>
#include <random>
#include <unordered_map>

#include "coast/task_planner.hpp"

namespace coast {

bool is_applicable(const State& s, const GroundedAction& a) {
  return eval_formula(a.precondition, s, {}, ObjectUniverse{});
}

State apply_action(const State& s, const GroundedAction& a) {
  if (!is_applicable(s, a)) throw PreconditionViolated("precondition of " + a.str() + " does not hold");
  return apply_effects(s, collect_effects(a.effect, s, {}, ObjectUniverse{}));
}

bool plan_is_valid(const State& init, const Formula& goal, const Plan& plan) {
  State s = init;
  for (const auto& a : plan.steps) {
    if (!is_applicable(s, a)) return false;
    s = apply_action(s, a);
  }
  return eval_formula(goal, s, {}, ObjectUniverse{});
}

namespace {

using Bits = std::vector<std::uint64_t>;

inline bool test(const Bits& b, int f) { return (b[f >> 6] >> (f & 63)) & 1; }
inline void set(Bits& b, int f) { b[f >> 6] |= std::uint64_t{1} << (f & 63); }
inline void clear(Bits& b, int f) { b[f >> 6] &= ~(std::uint64_t{1} << (f & 63)); }

bool holds(const Condition& c, const Bits& s) {
  switch (c.kind) {
    case Condition::Kind::True:
      return true;
    case Condition::Kind::False:
      return false;
    case Condition::Kind::Fact:
      return test(s, c.fact);
    case Condition::Kind::Not:
      return !holds(c.kids[0], s);
    case Condition::Kind::And:
      for (const auto& k : c.kids)
        if (!holds(k, s)) return false;
      return true;
    case Condition::Kind::Or:
      for (const auto& k : c.kids)
        if (holds(k, s)) return true;
      return false;
  }
  return false;
}

bool holds(const CompiledCondition& c, const Bits& s) {
  if (c.complex) return holds(*c.complex, s);
  for (int f : c.pos)
    if (!test(s, f)) return false;
  for (int f : c.neg)
    if (test(s, f)) return false;
  return true;
}

Bits successor(const CompiledOp& op, const Bits& s) {
  Bits next = s;
  std::vector<char> fire(op.effects.size());
  for (size_t i = 0; i < op.effects.size(); ++i)
    fire[i] = !op.effects[i].conditional || holds(op.effects[i].condition, s);
  for (size_t i = 0; i < op.effects.size(); ++i)
    if (fire[i])
      for (int f : op.effects[i].dels) clear(next, f);
  for (size_t i = 0; i < op.effects.size(); ++i)
    if (fire[i])
      for (int f : op.effects[i].adds) set(next, f);
  return next;
}

// Relaxed cost of a condition: negations are free, Or takes the minimum.
double relaxed_cost(const Condition& c, const std::vector<double>& cost) {
  switch (c.kind) {
    case Condition::Kind::True:
    case Condition::Kind::Not:
      return 0;
    case Condition::Kind::False:
      return kInfiniteCost;
    case Condition::Kind::Fact:
      return cost[c.fact];
    case Condition::Kind::And: {
      double sum = 0;
      for (const auto& k : c.kids) sum += relaxed_cost(k, cost);
      return sum;
    }
    case Condition::Kind::Or: {
      double best = kInfiniteCost;
      for (const auto& k : c.kids) best = std::min(best, relaxed_cost(k, cost));
      return best;
    }
  }
  return kInfiniteCost;
}

void positive_facts(const Condition& c, std::vector<int>& out) {
  if (c.kind == Condition::Kind::Fact) out.push_back(c.fact);
  if (c.kind == Condition::Kind::Not) return;
  for (const auto& k : c.kids) positive_facts(k, out);
}

// Delete-relaxed operators: one per (op, effect group).
struct RelaxedOp {
  std::vector<int> pre;     // every positive fact read; drives the trigger counter
  std::vector<int> simple;  // facts summed directly
  std::vector<const Condition*> complex;
  std::vector<int> adds;
};

class AddHeuristic {
 public:
  explicit AddHeuristic(const CompiledOps& c) : c_(c), listeners_(c.facts.size()) {
    for (const auto& op : c.ops) {
      for (const auto& e : op.effects) {
        if (e.adds.empty()) continue;
        RelaxedOp r;
        r.adds = e.adds;
        add_condition(op.pre, r);
        if (e.conditional) add_condition(e.condition, r);
        for (auto* v : {&r.pre, &r.simple}) {
          std::sort(v->begin(), v->end());
          v->erase(std::unique(v->begin(), v->end()), v->end());
        }
        ops_.push_back(std::move(r));
      }
    }
    for (size_t i = 0; i < ops_.size(); ++i) {
      for (int f : ops_[i].pre) listeners_[f].push_back(static_cast<int>(i));
      if (ops_[i].pre.empty() || !ops_[i].complex.empty()) roots_.push_back(static_cast<int>(i));
    }
    goal_facts_ = c.goal.pos;
    if (c.goal.complex) positive_facts(*c.goal.complex, goal_facts_);
    std::sort(goal_facts_.begin(), goal_facts_.end());
    goal_facts_.erase(std::unique(goal_facts_.begin(), goal_facts_.end()), goal_facts_.end());
    cost_.resize(c.facts.size());
    done_.resize(c.facts.size());
    remaining_.resize(ops_.size());
  }

  double operator()(const Bits& s) {
    if (holds(c_.goal, s)) return 0;
    std::fill(cost_.begin(), cost_.end(), kInfiniteCost);
    std::fill(done_.begin(), done_.end(), 0);
    for (size_t i = 0; i < ops_.size(); ++i) remaining_[i] = static_cast<int>(ops_[i].pre.size());
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (size_t f = 0; f < cost_.size(); ++f)
      if (test(s, static_cast<int>(f))) {
        cost_[f] = 0;
        heap.emplace(0.0, static_cast<int>(f));
      }
    auto fire = [&](int oi) {
      const auto& r = ops_[oi];
      double c = 1;
      for (int f : r.simple) c += cost_[f];
      for (const Condition* cond : r.complex) c += relaxed_cost(*cond, cost_);
      if (c == kInfiniteCost) return;
      for (int f : r.adds)
        if (c < cost_[f]) {
          cost_[f] = c;
          heap.emplace(c, f);
        }
    };
    for (int oi : roots_) fire(oi);
    size_t goals_left = goal_facts_.size();
    bool simple_goal = !c_.goal.complex;
    while (!heap.empty()) {
      auto [c, f] = heap.top();
      heap.pop();
      if (done_[f] || c > cost_[f]) continue;
      done_[f] = 1;
      if (simple_goal && std::binary_search(goal_facts_.begin(), goal_facts_.end(), f)) {
        if (--goals_left == 0) break;
      }
      for (int oi : listeners_[f]) {
        if (ops_[oi].complex.empty()) {
          if (--remaining_[oi] == 0) fire(oi);
        } else {
          fire(oi);
        }
      }
    }
    double h = 0;
    if (simple_goal) {
      for (int f : c_.goal.pos) h += cost_[f];
    } else {
      h = relaxed_cost(*c_.goal.complex, cost_);
    }
    if (h == kInfiniteCost) return h;
    return std::max(h, 1.0);
  }

 private:
  static void add_condition(const CompiledCondition& c, RelaxedOp& r) {
    if (c.complex) {
      r.complex.push_back(&*c.complex);
      positive_facts(*c.complex, r.pre);
    } else {
      r.simple.insert(r.simple.end(), c.pos.begin(), c.pos.end());
      r.pre.insert(r.pre.end(), c.pos.begin(), c.pos.end());
    }
  }

  const CompiledOps& c_;
  std::vector<RelaxedOp> ops_;
  std::vector<std::vector<int>> listeners_;
  std::vector<int> roots_;
  std::vector<int> goal_facts_;
  std::vector<double> cost_;
  std::vector<char> done_;
  std::vector<int> remaining_;
};

struct BitsHash {
  size_t operator()(const Bits& b) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto w : b) {
      h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<size_t>(h);
  }
};

}  // namespace

double heuristic(const GroundedTask& task, const State& s) {
  AddHeuristic h(task.compiled());
  return h(task.pack(s));
}

PlanResult plan(const GroundedTask& task, const SearchConfig& cfg) {
  const CompiledOps& c = task.compiled();
  PlanResult result;

  struct Node {
    int parent;
    int op;
  };
  std::vector<Bits> states;
  std::vector<Node> nodes;
  std::unordered_map<Bits, int, BitsHash> seen;

  auto extract = [&](int id) {
    std::vector<int> ops;
    for (int n = id; nodes[n].parent >= 0; n = nodes[n].parent) ops.push_back(nodes[n].op);
    std::reverse(ops.begin(), ops.end());
    for (int o : ops) result.plan.steps.push_back(task.action(static_cast<size_t>(o)));
    result.status = PlanStatus::Found;
  };

  states.push_back(task.init_bits());
  nodes.push_back({-1, -1});
  seen.emplace(states[0], 0);
  if (holds(c.goal, states[0])) {
    result.status = PlanStatus::Found;
    return result;
  }

  // Successor generation indexed by one positive precondition fact per op.
  std::vector<std::vector<int>> anchored(c.facts.size());
  std::vector<int> unanchored;
  for (size_t i = 0; i < c.ops.size(); ++i) {
    const auto& pre = c.ops[i].pre;
    if (!pre.complex && !pre.pos.empty()) {
      anchored[pre.pos.front()].push_back(static_cast<int>(i));
    } else {
      unanchored.push_back(static_cast<int>(i));
    }
  }
  std::vector<int> rank(c.ops.size());
  for (size_t i = 0; i < rank.size(); ++i) rank[i] = static_cast<int>(i);
  if (cfg.seed) {
    std::mt19937_64 rng(*cfg.seed);
    std::shuffle(rank.begin(), rank.end(), rng);
  }

  std::unique_ptr<AddHeuristic> h;
  if (cfg.use_heuristic) h = std::make_unique<AddHeuristic>(c);

  double h0 = 0;
  if (h) {
    h0 = (*h)(states[0]);
    ++result.evaluated;
    if (h0 == kInfiniteCost) return result;
  }

  using Entry = std::tuple<double, std::uint64_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<char> closed(1, 0);
  std::uint64_t seq = 0;
  open.emplace(0.0, seq++, 0);
  std::vector<int> applicable;

  while (!open.empty()) {
    auto [parent_h, _, id] = open.top();
    open.pop();
    if (closed[id]) continue;
    closed[id] = 1;
    double hv = 0;
    if (h) {
      if (id == 0) {
        hv = h0;
      } else {
        hv = (*h)(states[id]);
        ++result.evaluated;
        if (hv == kInfiniteCost) continue;
      }
    }
    if (++result.expanded > cfg.node_budget) {
      result.status = PlanStatus::BudgetExhausted;
      return result;
    }
    if (cfg.deadline && (result.expanded & 127) == 0 && std::chrono::steady_clock::now() > *cfg.deadline) {
      result.status = PlanStatus::BudgetExhausted;
      return result;
    }

    applicable.clear();
    const Bits cur = states[id];
    for (size_t w = 0; w < cur.size(); ++w) {
      for (std::uint64_t word = cur[w]; word; word &= word - 1) {
        int f = static_cast<int>(w * 64 + static_cast<size_t>(__builtin_ctzll(word)));
        for (int oi : anchored[f]) applicable.push_back(oi);
      }
    }
    applicable.insert(applicable.end(), unanchored.begin(), unanchored.end());
    std::sort(applicable.begin(), applicable.end(), [&](int a, int b) { return rank[a] < rank[b]; });

    for (int oi : applicable) {
      const auto& op = c.ops[oi];
      if (!holds(op.pre, cur)) continue;
      Bits next = successor(op, cur);
      ++result.generated;
      auto [it, inserted] = seen.emplace(next, static_cast<int>(states.size()));
      if (!inserted) continue;
      states.push_back(std::move(next));
      nodes.push_back({id, oi});
      closed.push_back(0);
      int nid = static_cast<int>(nodes.size()) - 1;
      if (holds(c.goal, states[nid])) {
        extract(nid);
        return result;
      }
      open.emplace(h ? hv : static_cast<double>(0), seq++, nid);
    }
  }
  return result;
}

}  // namespace coast
