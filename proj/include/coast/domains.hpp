#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coast/engine.hpp"

namespace coast::domains {

struct Cell {
  int r = 0;
  int c = 0;
  auto operator<=>(const Cell&) const = default;
};

/// Unit cells; cell (r, c) covers [c, c+1) x [r, r+1).
inline Cell cell_of(double x, double y) { return {static_cast<int>(std::floor(y)), static_cast<int>(std::floor(x))}; }

/// Every cell the segment touches, in order (supercover walk; both cells are
/// reported when the segment passes exactly through a corner).
std::vector<Cell> supercover(double x0, double y0, double x1, double y1);

class Grid {
 public:
  Grid(int rows, int cols) : rows_(rows), cols_(cols), blocked_(static_cast<size_t>(rows * cols), 0) {}
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool inside(Cell c) const { return c.r >= 0 && c.c >= 0 && c.r < rows_ && c.c < cols_; }
  bool blocked(Cell c) const { return !inside(c) || blocked_[index(c)]; }
  bool free(Cell c) const { return !blocked(c); }
  void set_blocked(Cell c, bool b = true) { blocked_[index(c)] = b ? 1 : 0; }

  /// Ray cast between cell centers; true when no blocked cell is crossed.
  bool line_of_sight(Cell a, Cell b) const;
  /// 4-connected shortest path over free cells, empty when unreachable.
  std::vector<Cell> path(Cell from, Cell to) const;
  /// Component id per cell (-1 for blocked cells).
  std::vector<int> components() const;
  int component(const std::vector<int>& comps, Cell c) const { return inside(c) ? comps[index(c)] : -1; }

 private:
  size_t index(Cell c) const { return static_cast<size_t>(c.r * cols_ + c.c); }
  int rows_;
  int cols_;
  std::vector<char> blocked_;
};

// Blocks: 3x3 grid, row 0 is the front edge the gripper approaches from.

struct BlocksWorld {
  static constexpr int kRows = 3;
  static constexpr int kCols = 3;
  /// Block name -> cell; "red" plus "b1".."bn".
  std::map<std::string, Cell> blocks;
  Cell goal{1, 1};

  static std::string loc_name(Cell c) { return "l" + std::to_string(c.r * kCols + c.c + 1); }
  static std::optional<Cell> loc_cell(const std::string& name);
};

BlocksWorld make_blocks_world(int n_obstacles, std::uint64_t seed);
/// Exact search over occupancy states with the front-grasp rule; length of
/// the shortest plan that puts the red block on the goal, nullopt if none.
std::optional<int> blocks_oracle_plan_length(const BlocksWorld& w);
TampProblem blocks_instance(int n_obstacles, std::uint64_t seed);

// Kitchen: 1D surfaces, table with four slots, sink and stove hold one item.

struct KitchenWorld {
  std::vector<std::string> items;
  /// Initial table slot per item.
  std::map<std::string, int> slot;
  /// Goal atoms, e.g. (cooked i2).
  std::vector<Atom> goals;
};

struct Surface {
  double lo;
  double hi;
  int capacity;
};
const std::map<std::string, Surface>& kitchen_surfaces();
inline constexpr double kItemWidth = 0.8;

KitchenWorld make_kitchen_world(int n_goals, std::uint64_t seed);
/// Breadth-first optimum over the symbolic kitchen model.
std::optional<int> kitchen_oracle_plan_length(const KitchenWorld& w);
TampProblem kitchen_instance(int n_goals, std::uint64_t seed);

// Rover: grid arena with wall obstacles, two rovers and a lander.

struct RoverWorld {
  Grid grid{12, 12};
  std::map<std::string, Cell> rovers;
  Cell lander;
  std::map<std::string, Cell> rocks;
  std::map<std::string, Cell> objectives;
  double range = 5.0;
};

struct RoverOptions {
  /// Keep regenerating until the arena is a single component.
  bool connected = false;
  /// Place the objectives where no cell can see them.
  bool occlude_objectives = false;
};

RoverWorld make_rover_world(int n_goals, std::uint64_t seed, const RoverOptions& opt = {});
bool rover_sees(const RoverWorld& w, Cell from, Cell target);
/// Per-rover reachability argument: every rock and objective can be served
/// and reported by one rover inside its own component.
bool rover_feasible(const RoverWorld& w);
TampProblem rover_instance(int n_goals, std::uint64_t seed, const RoverOptions& opt = {});

// Registry.

std::vector<std::string> kinds();
/// Inclusive parameter range of a domain kind.
std::pair<int, int> parameter_range(const std::string& kind);
TampProblem make_instance(const std::string& kind, int parameter, std::uint64_t seed);

/// Wraps every sampler so it first fails with probability 1 - p.
SamplerRegistry with_success_probability(SamplerRegistry reg, double p);

/// Writes domain.pddl, problem.pddl, streams.pddl, geometric.pddl,
/// domain-certified.pddl and instance.txt.
void export_instance(const TampProblem& tp, const std::filesystem::path& dir);
/// Reads an exported directory: PDDL from the files, geometry and samplers
/// regenerated from instance.txt.
TampProblem load_instance(const std::filesystem::path& dir);

}  // namespace coast::domains
