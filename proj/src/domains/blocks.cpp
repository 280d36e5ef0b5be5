#include <deque>
#include <unordered_map>

#include "common.hpp"

namespace coast::domains {

namespace {

constexpr const char* kDomain = R"(
(define (domain blocks)
  (:requirements :strips :typing :negative-preconditions :conditional-effects)
  (:types block gridloc)
  (:predicates
    (at ?b - block ?l - gridloc)
    (clear ?l - gridloc)
    (holding ?b - block)
    (handempty)
    (blocked ?l - gridloc))
  (:action Pick
    :parameters (?b - block ?l - gridloc)
    :precondition (and
      (at ?b ?l)
      (handempty)
      (not (blocked ?l)))
    :effect (and
      (not (at ?b ?l))
      (clear ?l)
      (holding ?b)
      (not (handempty))))
  (:action Place
    :parameters (?b - block ?l - gridloc)
    :precondition (and
      (holding ?b)
      (clear ?l)
      (not (blocked ?l)))
    :effect (and
      (at ?b ?l)
      (not (clear ?l))
      (not (holding ?b))
      (handempty))))
)";

constexpr const char* kStreams = R"(
(define (stream blocks)
  (:stream sample-grasp
    :inputs (?b - block ?p - pose)
    :outputs (?g - grasp))
  (:stream sample-place
    :inputs (?b - block ?l - gridloc)
    :outputs (?p - pose))
  (:stream sample-ik
    :inputs (?b - block ?p - pose ?g - grasp)
    :outputs (?t - traj))
  (:stream check-block-collision
    :inputs (?t - traj ?l1 - gridloc ?b2 - block ?l2 - gridloc)
    :outputs ()
    :fail-effect (and
      (when (not (clear ?l2))
        (blocked ?l1))
      (when (clear ?l2)
        (not (blocked ?l1))))))
)";

constexpr const char* kGeom = R"(
(define (geometric blocks)
  (:geom-action Pick
    :parameters (?b - block ?l - gridloc)
    :inputs (?p - pose)
    :outputs (?g - grasp ?t - traj)
    :geom-precondition (and
      (at-pose ?b ?p)
      (sample-grasp ?b ?p ?g)
      (sample-ik ?b ?p ?g ?t)
      (forall ?b2 - block
        (forall ?l2 - gridloc
          (when
            (and
              (located ?b2 ?l2)
              (not (= ?b2 ?b)))
            (check-block-collision ?t ?l ?b2 ?l2)))))
    :geom-effect (and
      (not (at-pose ?b ?p))
      (not (located ?b ?l))
      (in-grasp ?b ?g)))
  (:geom-action Place
    :parameters (?b - block ?l - gridloc)
    :inputs (?g - grasp)
    :outputs (?p - pose ?t - traj)
    :geom-precondition (and
      (in-grasp ?b ?g)
      (sample-place ?b ?l ?p)
      (sample-ik ?b ?p ?g ?t)
      (forall ?b2 - block
        (forall ?l2 - gridloc
          (when
            (and
              (located ?b2 ?l2)
              (not (= ?b2 ?b)))
            (check-block-collision ?t ?l ?b2 ?l2)))))
    :geom-effect (and
      (not (in-grasp ?b ?g))
      (at-pose ?b ?p)
      (located ?b ?l))))
)";

constexpr double kJitter = 0.2;
constexpr double kFront = -0.5;

bool in_cell(const Value& p, Cell c, double margin) {
  return p.size() == 2 && p[0] >= c.c + margin && p[0] <= c.c + 1 - margin && p[1] >= c.r + margin &&
         p[1] <= c.r + 1 - margin;
}

Value pose_in(Cell c, Rng& rng) {
  return {c.c + 0.5 + detail::uniform(rng, -kJitter, kJitter), c.r + 0.5 + detail::uniform(rng, -kJitter, kJitter)};
}

// Straight approach from the front edge, parallel to the y axis.
Value approach(const Value& p) { return {p[0], kFront, p[0], p[1]}; }

bool traj_hits(const Value& t, Cell c) {
  for (Cell x : supercover(t[0], t[1], t[2], t[3]))
    if (x == c) return true;
  return false;
}

SamplerRegistry samplers() {
  using detail::value;
  SamplerRegistry reg;
  reg.samplers["sample-grasp"] = [](std::span<const SamplerArg>, Rng& rng) -> std::optional<std::vector<Value>> {
    return std::vector<Value>{{detail::uniform(rng, -kJitter, kJitter)}};
  };
  reg.checkers["sample-grasp"] = [](std::span<const SamplerArg> a) {
    const Value& g = value(a[2]);
    return g.size() == 1 && std::abs(g[0]) <= kJitter;
  };
  reg.samplers["sample-place"] = [](std::span<const SamplerArg> in, Rng& rng) -> std::optional<std::vector<Value>> {
    auto c = BlocksWorld::loc_cell(in[1].name);
    if (!c) return std::nullopt;
    return std::vector<Value>{pose_in(*c, rng)};
  };
  reg.checkers["sample-place"] = [](std::span<const SamplerArg> a) {
    auto c = BlocksWorld::loc_cell(a[1].name);
    return c && in_cell(value(a[2]), *c, 0.5 - kJitter - 1e-9);
  };
  reg.samplers["sample-ik"] = [](std::span<const SamplerArg> in, Rng&) -> std::optional<std::vector<Value>> {
    return std::vector<Value>{approach(value(in[1]))};
  };
  reg.checkers["sample-ik"] = [](std::span<const SamplerArg> a) {
    const Value& p = value(a[1]);
    return p.size() == 2 && value(a[3]) == approach(p);
  };
  auto collision_free = [](std::span<const SamplerArg> a) {
    auto other = BlocksWorld::loc_cell(a[3].name);
    const Value& t = value(a[0]);
    return other && t.size() == 4 && !traj_hits(t, *other);
  };
  reg.samplers["check-block-collision"] = [collision_free](std::span<const SamplerArg> in,
                                                           Rng&) -> std::optional<std::vector<Value>> {
    if (!collision_free(in)) return std::nullopt;
    return std::vector<Value>{};
  };
  reg.checkers["check-block-collision"] = collision_free;
  return reg;
}

}  // namespace

std::optional<Cell> BlocksWorld::loc_cell(const std::string& name) {
  if (name.size() < 2 || name[0] != 'l') return std::nullopt;
  int k = 0;
  for (size_t i = 1; i < name.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return std::nullopt;
    k = k * 10 + (name[i] - '0');
  }
  if (k < 1 || k > kRows * kCols) return std::nullopt;
  return Cell{(k - 1) / kCols, (k - 1) % kCols};
}

BlocksWorld make_blocks_world(int n_obstacles, std::uint64_t seed) {
  if (n_obstacles < 0 || n_obstacles > 6) throw std::invalid_argument("blocks: obstacles must be in 0..6");
  BlocksWorld w;
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(detail::mix(seed, attempt));
    std::vector<Cell> cells;
    for (int r = 0; r < BlocksWorld::kRows; ++r)
      for (int c = 0; c < BlocksWorld::kCols; ++c) cells.push_back({r, c});
    std::shuffle(cells.begin(), cells.end(), rng);
    auto red = std::find_if(cells.begin(), cells.end(), [&](Cell c) { return c != w.goal; });
    std::iter_swap(cells.begin(), red);
    w.blocks.clear();
    w.blocks["red"] = cells[0];
    for (int i = 0; i < n_obstacles; ++i) w.blocks["b" + std::to_string(i + 1)] = cells[static_cast<size_t>(i + 1)];
    if (blocks_oracle_plan_length(w) || attempt >= 100) return w;
  }
}

std::optional<int> blocks_oracle_plan_length(const BlocksWorld& w) {
  constexpr int N = BlocksWorld::kRows * BlocksWorld::kCols;
  std::vector<std::string> names;
  // State: one char per cell ('.' or block index) plus the held block.
  std::string start(N + 1, '.');
  for (const auto& [name, c] : w.blocks) {
    start[static_cast<size_t>(c.r * BlocksWorld::kCols + c.c)] = static_cast<char>('a' + names.size());
    names.push_back(name);
  }
  const char red = static_cast<char>('a' + std::distance(w.blocks.begin(), w.blocks.find("red")));
  const size_t goal = static_cast<size_t>(w.goal.r * BlocksWorld::kCols + w.goal.c);
  auto reachable = [](const std::string& s, int k) {
    for (int r = 0; r < k / BlocksWorld::kCols; ++r)
      if (s[static_cast<size_t>(r * BlocksWorld::kCols + k % BlocksWorld::kCols)] != '.') return false;
    return true;
  };
  std::unordered_map<std::string, int> dist{{start, 0}};
  std::deque<std::string> q{start};
  while (!q.empty()) {
    std::string s = q.front();
    q.pop_front();
    int d = dist[s];
    if (s[goal] == red) return d;
    for (int k = 0; k < N; ++k) {
      std::string n = s;
      const size_t i = static_cast<size_t>(k);
      if (s[N] == '.' && s[i] != '.' && reachable(s, k)) {
        n[N] = s[i];
        n[i] = '.';
      } else if (s[N] != '.' && s[i] == '.' && reachable(s, k)) {
        n[i] = s[N];
        n[N] = '.';
      } else {
        continue;
      }
      if (dist.emplace(n, d + 1).second) q.push_back(n);
    }
  }
  return std::nullopt;
}

TampProblem blocks_instance(int n_obstacles, std::uint64_t seed) {
  BlocksWorld w = make_blocks_world(n_obstacles, seed);
  std::ostringstream p;
  p << "(define (problem blocks-" << n_obstacles << "-" << seed << ")\n  (:domain blocks)\n  (:objects";
  for (const auto& [name, c] : w.blocks) p << ' ' << name;
  p << " - block";
  for (int k = 1; k <= BlocksWorld::kRows * BlocksWorld::kCols; ++k) p << " l" << k;
  p << " - gridloc)\n  (:init (handempty)";
  std::set<Cell> occupied;
  for (const auto& [name, c] : w.blocks) {
    p << " (at " << name << ' ' << BlocksWorld::loc_name(c) << ')';
    occupied.insert(c);
  }
  for (int r = 0; r < BlocksWorld::kRows; ++r)
    for (int c = 0; c < BlocksWorld::kCols; ++c)
      if (!occupied.count({r, c})) p << " (clear " << BlocksWorld::loc_name({r, c}) << ')';
  p << ")\n  (:goal (at red " << BlocksWorld::loc_name(w.goal) << ")))\n";

  InstanceInfo info{"blocks", n_obstacles, seed, blocks_oracle_plan_length(w).has_value()};
  TampProblem tp = detail::assemble(info, kDomain, p.str(), kStreams, kGeom);
  Rng rng(detail::mix(seed, 1000));
  for (const auto& [name, c] : w.blocks) {
    std::string pose = "p_" + name;
    tp.initial_objects.push_back({pose, "pose"});
    tp.init_values[pose] = pose_in(c, rng);
    tp.init_geom.add({"at-pose", {name, pose}});
    tp.init_geom.add({"located", {name, BlocksWorld::loc_name(c)}});
  }
  tp.samplers = samplers();
  tp.mode = ConstraintMode::Collision;
  tp.cache_probability = 0.0;
  return tp;
}

}  // namespace coast::domains
