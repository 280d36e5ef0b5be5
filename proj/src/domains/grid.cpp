#include <cmath>
#include <deque>

#include "coast/domains.hpp"

namespace coast::domains {

std::vector<Cell> supercover(double x0, double y0, double x1, double y1) {
  std::vector<Cell> out;
  Cell cur = cell_of(x0, y0);
  const Cell end = cell_of(x1, y1);
  out.push_back(cur);
  const double dx = x1 - x0, dy = y1 - y0;
  const int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  const double inf = std::numeric_limits<double>::infinity();
  // Parametric distance to the next vertical / horizontal grid line.
  double tx = dx == 0 ? inf : ((sx > 0 ? std::floor(x0) + 1 : std::floor(x0)) - x0) / dx;
  double ty = dy == 0 ? inf : ((sy > 0 ? std::floor(y0) + 1 : std::floor(y0)) - y0) / dy;
  const double step_x = dx == 0 ? inf : sx / dx, step_y = dy == 0 ? inf : sy / dy;
  while (cur != end) {
    if (std::abs(tx - ty) < 1e-12) {
      if (tx > 1) break;
      out.push_back({cur.r, cur.c + sx});
      out.push_back({cur.r + sy, cur.c});
      cur = {cur.r + sy, cur.c + sx};
      tx += step_x;
      ty += step_y;
    } else if (tx < ty) {
      if (tx > 1) break;
      cur.c += sx;
      tx += step_x;
    } else {
      if (ty > 1) break;
      cur.r += sy;
      ty += step_y;
    }
    out.push_back(cur);
  }
  return out;
}

bool Grid::line_of_sight(Cell a, Cell b) const {
  for (Cell c : supercover(a.c + 0.5, a.r + 0.5, b.c + 0.5, b.r + 0.5))
    if (blocked(c)) return false;
  return true;
}

std::vector<Cell> Grid::path(Cell from, Cell to) const {
  if (blocked(from) || blocked(to)) return {};
  std::vector<int> prev(blocked_.size(), -2);
  std::deque<Cell> q{from};
  prev[index(from)] = -1;
  const Cell moves[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (!q.empty()) {
    Cell c = q.front();
    q.pop_front();
    if (c == to) break;
    for (Cell m : moves) {
      Cell n{c.r + m.r, c.c + m.c};
      if (blocked(n) || prev[index(n)] != -2) continue;
      prev[index(n)] = static_cast<int>(index(c));
      q.push_back(n);
    }
  }
  if (prev[index(to)] == -2) return {};
  std::vector<Cell> out;
  for (int i = static_cast<int>(index(to)); i != -1; i = prev[static_cast<size_t>(i)])
    out.push_back({i / cols_, i % cols_});
  return {out.rbegin(), out.rend()};
}

std::vector<int> Grid::components() const {
  std::vector<int> comp(blocked_.size(), -1);
  int next = 0;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) {
      if (blocked({r, c}) || comp[index({r, c})] != -1) continue;
      std::deque<Cell> q{{r, c}};
      comp[index({r, c})] = next;
      while (!q.empty()) {
        Cell x = q.front();
        q.pop_front();
        for (Cell m : {Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}}) {
          Cell n{x.r + m.r, x.c + m.c};
          if (blocked(n) || comp[index(n)] != -1) continue;
          comp[index(n)] = next;
          q.push_back(n);
        }
      }
      ++next;
    }
  return comp;
}

SamplerRegistry with_success_probability(SamplerRegistry reg, double p) {
  for (auto& [name, fn] : reg.samplers) {
    fn = [inner = fn, p](std::span<const SamplerArg> in, Rng& rng) -> std::optional<std::vector<Value>> {
      if (!std::bernoulli_distribution(p)(rng)) return std::nullopt;
      return inner(in, rng);
    };
  }
  return reg;
}

}  // namespace coast::domains
