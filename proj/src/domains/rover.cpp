#include <memory>

#include "common.hpp"

namespace coast::domains {

namespace {

constexpr const char* kDomain = R"(
(define (domain rovers)
  (:requirements :strips :typing)
  (:types rover rock objective)
  (:predicates
    (empty ?v - rover)
    (full ?v - rover)
    (have-analysis ?v - rover ?r - rock)
    (analysis-sent ?r - rock)
    (have-image ?v - rover ?o - objective)
    (image-sent ?o - objective))
  (:action SampleRock
    :parameters (?v - rover ?r - rock)
    :precondition (empty ?v)
    :effect (and
      (not (empty ?v))
      (full ?v)
      (have-analysis ?v ?r)))
  (:action Drop
    :parameters (?v - rover)
    :precondition (full ?v)
    :effect (and
      (not (full ?v))
      (empty ?v)))
  (:action SendAnalysis
    :parameters (?v - rover ?r - rock)
    :precondition (have-analysis ?v ?r)
    :effect (analysis-sent ?r))
  (:action TakeImage
    :parameters (?v - rover ?o - objective)
    :precondition (and)
    :effect (have-image ?v ?o))
  (:action SendImage
    :parameters (?v - rover ?o - objective)
    :precondition (have-image ?v ?o)
    :effect (image-sent ?o)))
)";

constexpr const char* kStreams = R"(
(define (stream rovers)
  (:stream sample-above
    :inputs (?v - rover ?r - rock)
    :outputs (?q - conf))
  (:stream sample-view
    :inputs (?v - rover ?o - objective)
    :outputs (?q - conf))
  (:stream sample-comm
    :inputs (?v - rover)
    :outputs (?q - conf))
  (:stream plan-motion
    :inputs (?v - rover ?q1 - conf ?q2 - conf)
    :outputs (?t - traj)))
)";

constexpr const char* kGeom = R"(
(define (geometric rovers)
  (:geom-action SampleRock
    :parameters (?v - rover ?r - rock)
    :inputs (?q1 - conf)
    :outputs (?q2 - conf ?t - traj)
    :geom-precondition (and
      (at-conf ?v ?q1)
      (sample-above ?v ?r ?q2)
      (plan-motion ?v ?q1 ?q2 ?t))
    :geom-effect (and
      (not (at-conf ?v ?q1))
      (at-conf ?v ?q2)))
  (:geom-action SendAnalysis
    :parameters (?v - rover ?r - rock)
    :inputs (?q1 - conf)
    :outputs (?q2 - conf ?t - traj)
    :geom-precondition (and
      (at-conf ?v ?q1)
      (sample-comm ?v ?q2)
      (plan-motion ?v ?q1 ?q2 ?t))
    :geom-effect (and
      (not (at-conf ?v ?q1))
      (at-conf ?v ?q2)))
  (:geom-action TakeImage
    :parameters (?v - rover ?o - objective)
    :inputs (?q1 - conf)
    :outputs (?q2 - conf ?t - traj)
    :geom-precondition (and
      (at-conf ?v ?q1)
      (sample-view ?v ?o ?q2)
      (plan-motion ?v ?q1 ?q2 ?t))
    :geom-effect (and
      (not (at-conf ?v ?q1))
      (at-conf ?v ?q2)))
  (:geom-action SendImage
    :parameters (?v - rover ?o - objective)
    :inputs (?q1 - conf)
    :outputs (?q2 - conf ?t - traj)
    :geom-precondition (and
      (at-conf ?v ?q1)
      (sample-comm ?v ?q2)
      (plan-motion ?v ?q1 ?q2 ?t))
    :geom-effect (and
      (not (at-conf ?v ?q1))
      (at-conf ?v ?q2))))
)";

constexpr int kWalls = 8;

Value conf(Cell c) { return {c.c + 0.5, c.r + 0.5}; }

std::optional<Cell> conf_cell(const Value& q) {
  if (q.size() != 2) return std::nullopt;
  Cell c = cell_of(q[0], q[1]);
  if (std::abs(q[0] - (c.c + 0.5)) > 1e-9 || std::abs(q[1] - (c.r + 0.5)) > 1e-9) return std::nullopt;
  return c;
}

bool adjacent_to(Cell a, Cell b) { return std::abs(a.r - b.r) <= 1 && std::abs(a.c - b.c) <= 1; }

// Uniform over the arena, then a visibility test.
std::optional<Cell> sample_seeing(const RoverWorld& w, Cell target, Rng& rng) {
  Cell c{std::uniform_int_distribution<int>(0, w.grid.rows() - 1)(rng),
         std::uniform_int_distribution<int>(0, w.grid.cols() - 1)(rng)};
  if (!rover_sees(w, c, target)) return std::nullopt;
  return c;
}

SamplerRegistry samplers(std::shared_ptr<const RoverWorld> w) {
  using detail::value;
  using Out = std::optional<std::vector<Value>>;
  SamplerRegistry reg;
  reg.samplers["sample-above"] = [w](std::span<const SamplerArg> in, Rng& rng) -> Out {
    auto rock = w->rocks.find(in[1].name);
    if (rock == w->rocks.end()) return std::nullopt;
    std::uniform_int_distribution<int> d(-1, 1);
    Cell c{rock->second.r + d(rng), rock->second.c + d(rng)};
    if (w->grid.blocked(c)) return std::nullopt;
    return std::vector<Value>{conf(c)};
  };
  reg.checkers["sample-above"] = [w](std::span<const SamplerArg> a) {
    auto rock = w->rocks.find(a[1].name);
    auto c = conf_cell(value(a[2]));
    return rock != w->rocks.end() && c && w->grid.free(*c) && adjacent_to(*c, rock->second);
  };
  reg.samplers["sample-view"] = [w](std::span<const SamplerArg> in, Rng& rng) -> Out {
    auto obj = w->objectives.find(in[1].name);
    if (obj == w->objectives.end()) return std::nullopt;
    auto c = sample_seeing(*w, obj->second, rng);
    if (!c) return std::nullopt;
    return std::vector<Value>{conf(*c)};
  };
  reg.checkers["sample-view"] = [w](std::span<const SamplerArg> a) {
    auto obj = w->objectives.find(a[1].name);
    auto c = conf_cell(value(a[2]));
    return obj != w->objectives.end() && c && rover_sees(*w, *c, obj->second);
  };
  reg.samplers["sample-comm"] = [w](std::span<const SamplerArg>, Rng& rng) -> Out {
    auto c = sample_seeing(*w, w->lander, rng);
    if (!c) return std::nullopt;
    return std::vector<Value>{conf(*c)};
  };
  reg.checkers["sample-comm"] = [w](std::span<const SamplerArg> a) {
    auto c = conf_cell(value(a[1]));
    return c && rover_sees(*w, *c, w->lander);
  };
  reg.samplers["plan-motion"] = [w](std::span<const SamplerArg> in, Rng&) -> Out {
    auto a = conf_cell(value(in[1]));
    auto b = conf_cell(value(in[2]));
    if (!a || !b) return std::nullopt;
    auto path = w->grid.path(*a, *b);
    if (path.empty()) return std::nullopt;
    Value t;
    for (Cell c : path) {
      t.push_back(c.c + 0.5);
      t.push_back(c.r + 0.5);
    }
    return std::vector<Value>{t};
  };
  reg.checkers["plan-motion"] = [w](std::span<const SamplerArg> a) {
    auto from = conf_cell(value(a[1]));
    auto to = conf_cell(value(a[2]));
    const Value& t = value(a[3]);
    if (!from || !to || t.size() < 2 || t.size() % 2) return false;
    std::optional<Cell> prev;
    for (size_t i = 0; i < t.size(); i += 2) {
      auto c = conf_cell({t[i], t[i + 1]});
      if (!c || w->grid.blocked(*c)) return false;
      if (prev && std::abs(prev->r - c->r) + std::abs(prev->c - c->c) != 1) return false;
      if (!prev && *c != *from) return false;
      prev = c;
    }
    return *prev == *to;
  };
  return reg;
}

std::vector<Cell> free_cells(const Grid& g) {
  std::vector<Cell> out;
  for (int r = 0; r < g.rows(); ++r)
    for (int c = 0; c < g.cols(); ++c)
      if (g.free({r, c})) out.push_back({r, c});
  return out;
}

}  // namespace

bool rover_sees(const RoverWorld& w, Cell from, Cell target) {
  if (from == target || w.grid.blocked(from)) return false;
  double dr = from.r - target.r, dc = from.c - target.c;
  if (std::sqrt(dr * dr + dc * dc) > w.range) return false;
  for (Cell c : supercover(from.c + 0.5, from.r + 0.5, target.c + 0.5, target.r + 0.5))
    if (c != target && w.grid.blocked(c)) return false;
  return true;
}

bool rover_feasible(const RoverWorld& w) {
  auto comps = w.grid.components();
  auto serves = [&](int comp, auto&& pred) {
    for (Cell c : free_cells(w.grid))
      if (w.grid.component(comps, c) == comp && pred(c)) return true;
    return false;
  };
  auto comm = [&](Cell c) { return rover_sees(w, c, w.lander); };
  auto any_rover = [&](auto&& pred) {
    for (const auto& [name, at] : w.rovers) {
      int comp = w.grid.component(comps, at);
      if (serves(comp, pred) && serves(comp, comm)) return true;
    }
    return false;
  };
  for (const auto& [name, rock] : w.rocks)
    if (!any_rover([&](Cell c) { return adjacent_to(c, rock); })) return false;
  for (const auto& [name, obj] : w.objectives)
    if (!any_rover([&](Cell c) { return rover_sees(w, c, obj); })) return false;
  return true;
}

RoverWorld make_rover_world(int n_goals, std::uint64_t seed, const RoverOptions& opt) {
  if (n_goals < 1 || n_goals > 4) throw std::invalid_argument("rover: goals must be in 1..4");
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(detail::mix(seed, attempt));
    RoverWorld w;
    const int R = w.grid.rows(), C = w.grid.cols();
    for (int k = 0; k < kWalls; ++k) {
      bool horizontal = std::bernoulli_distribution(0.5)(rng);
      int len = std::uniform_int_distribution<int>(3, 8)(rng);
      int r = std::uniform_int_distribution<int>(0, R - 1)(rng);
      int c = std::uniform_int_distribution<int>(0, C - 1)(rng);
      for (int i = 0; i < len; ++i) {
        Cell x = horizontal ? Cell{r, c + i} : Cell{r + i, c};
        if (w.grid.inside(x)) w.grid.set_blocked(x);
      }
    }
    if (opt.connected) {
      auto comps = w.grid.components();
      if (*std::max_element(comps.begin(), comps.end()) > 0) continue;
    }
    std::vector<Cell> cells = free_cells(w.grid);
    std::shuffle(cells.begin(), cells.end(), rng);
    if (cells.size() < static_cast<size_t>(3 + 2 * n_goals)) continue;
    size_t next = 0;
    w.rovers["v1"] = cells[next++];
    w.rovers["v2"] = cells[next++];
    w.lander = cells[next++];
    for (int i = 1; i <= n_goals; ++i) w.rocks["r" + std::to_string(i)] = cells[next++];
    for (int i = 1; i <= n_goals; ++i) {
      Cell o = cells[next++];
      if (opt.occlude_objectives) {
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc)
            if ((dr || dc) && w.grid.inside({o.r + dr, o.c + dc})) w.grid.set_blocked({o.r + dr, o.c + dc});
      }
      w.objectives["o" + std::to_string(i)] = o;
    }
    if (opt.occlude_objectives) {
      // The walls must not have buried anything else.
      bool ok = w.grid.free(w.lander);
      for (const auto& [n, c] : w.rovers) ok = ok && w.grid.free(c);
      for (const auto& [n, c] : w.rocks) ok = ok && w.grid.free(c);
      if (ok || attempt >= 1000) return w;
      continue;
    }
    if (rover_feasible(w) || attempt >= 1000) return w;
  }
}

TampProblem rover_instance(int n_goals, std::uint64_t seed, const RoverOptions& opt) {
  auto w = std::make_shared<RoverWorld>(make_rover_world(n_goals, seed, opt));
  std::ostringstream p;
  p << "(define (problem rovers-" << n_goals << "-" << seed << ")\n  (:domain rovers)\n  (:objects";
  for (const auto& [n, c] : w->rovers) p << ' ' << n;
  p << " - rover";
  for (const auto& [n, c] : w->rocks) p << ' ' << n;
  p << " - rock";
  for (const auto& [n, c] : w->objectives) p << ' ' << n;
  p << " - objective)\n  (:init";
  for (const auto& [n, c] : w->rovers) p << " (empty " << n << ')';
  p << ")\n  (:goal (and";
  for (const auto& [n, c] : w->rocks) p << " (analysis-sent " << n << ')';
  for (const auto& [n, c] : w->objectives) p << " (image-sent " << n << ')';
  p << ")))\n";

  std::string kind = opt.occlude_objectives ? "rover-occluded" : opt.connected ? "rover-connected" : "rover";
  InstanceInfo info{kind, n_goals, seed, rover_feasible(*w)};
  TampProblem tp = detail::assemble(info, kDomain, p.str(), kStreams, kGeom);
  for (const auto& [n, c] : w->rovers) {
    std::string q = "q_" + n;
    tp.initial_objects.push_back({q, "conf"});
    tp.init_values[q] = conf(c);
    tp.init_geom.add({"at-conf", {n, q}});
  }
  tp.samplers = samplers(w);
  tp.mode = ConstraintMode::Action;
  tp.cache_probability = 0.5;
  return tp;
}

}  // namespace coast::domains
