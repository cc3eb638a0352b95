#include "roughstep/chain_curve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace roughstep {

namespace {

using Cell = std::pair<int, int>;

Side rotate_ccw(Side s) { return static_cast<Side>((static_cast<int>(s) + 1) % 4); }
Side flip_x(Side s) {
  if (s == Side::Left) return Side::Right;
  if (s == Side::Right) return Side::Left;
  return s;
}
bool opposite(Side a, Side b) { return (static_cast<int>(a) + 2) % 4 == static_cast<int>(b); }

// Element of the symmetry group of the square: rotate q times, then flip.
struct Symmetry {
  int q = 0;
  bool flip = false;

  Side apply(Side s) const {
    for (int i = 0; i < q; ++i) s = rotate_ccw(s);
    return flip ? flip_x(s) : s;
  }
  Cell apply(Cell c, int n) const {
    for (int i = 0; i < q; ++i) c = {n - 1 - c.second, c.first};
    if (flip) c.first = n - 1 - c.first;
    return c;
  }
};

Symmetry symmetry_for(Side entry, Side exit) {
  const Side ref_exit = opposite(entry, exit) ? Side::Right : Side::Top;
  for (int q = 0; q < 4; ++q) {
    for (bool f : {false, true}) {
      Symmetry g{q, f};
      if (g.apply(Side::Left) == entry && g.apply(ref_exit) == exit) return g;
    }
  }
  throw ContractError("chain curve: entry and exit sides must differ");
}

Side side_towards(Cell from, Cell to) {
  if (to.first < from.first) return Side::Left;
  if (to.first > from.first) return Side::Right;
  if (to.second < from.second) return Side::Bottom;
  return Side::Top;
}

std::vector<Cell> base_chain(int k, bool turn) {
  std::vector<Cell> cells;
  if (!turn) {
    for (int i = 0; i <= 2 * k; ++i) cells.push_back({i, k});
  } else {
    for (int i = 0; i <= k; ++i) cells.push_back({i, k});
    for (int j = k + 1; j <= 2 * k; ++j) cells.push_back({k, j});
  }
  return cells;
}

std::string check_cells(const std::vector<Cell>& cells, int k, bool turn) {
  const int n = 2 * k + 1;
  if (cells.empty()) return "empty chain";
  if (cells.front() != Cell{0, k}) return "chain does not start at the middle of the entry side";
  const Cell last = turn ? Cell{k, 2 * k} : Cell{2 * k, k};
  if (cells.back() != last) return "chain does not end at the middle of the exit side";
  std::vector<int> index(static_cast<std::size_t>(n * n), -1);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto [x, y] = cells[i];
    if (x < 0 || y < 0 || x >= n || y >= n) return "cell outside the grid";
    auto& slot = index[static_cast<std::size_t>(y * n + x)];
    if (slot >= 0) return "cell visited twice";
    slot = static_cast<int>(i);
    const bool edge = x == 0 || y == 0 || x == n - 1 || y == n - 1;
    if (edge && i != 0 && i + 1 != cells.size()) return "chain touches the boundary";
    if (i > 0) {
      const auto [px, py] = cells[i - 1];
      if (std::abs(px - x) + std::abs(py - y) != 1) return "consecutive cells do not share a side";
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto [x, y] = cells[i];
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= n || ny >= n) continue;
        const int j = index[static_cast<std::size_t>(ny * n + nx)];
        if (j < 0) continue;
        const int gap = std::abs(j - static_cast<int>(i));
        const bool edge_contact = dx == 0 || dy == 0;
        if (gap == 2 && edge_contact) return "cells two apart share a side";
        if (gap > 2) return "non-neighbouring cells touch";
      }
    }
  }
  return {};
}

// Pushes the middle of three collinear cells out sideways, adding two cells.
// Repeats from the start of the chain until the target length is reached or
// no push is valid.
std::vector<Cell> grow_chain(int k, bool turn, int target) {
  std::vector<Cell> cells = base_chain(k, turn);
  while (static_cast<int>(cells.size()) < target) {
    bool grown = false;
    for (std::size_t i = 1; i + 1 < cells.size() && !grown; ++i) {
      const Cell a = cells[i - 1], b = cells[i], c = cells[i + 1];
      const int dx = c.first - a.first, dy = c.second - a.second;
      if (!((std::abs(dx) == 2 && dy == 0) || (std::abs(dy) == 2 && dx == 0))) continue;
      const std::array<Cell, 2> normals = {dx != 0 ? Cell{0, 1} : Cell{1, 0},
                                           dx != 0 ? Cell{0, -1} : Cell{-1, 0}};
      for (const Cell& w : normals) {
        std::vector<Cell> next(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(i));
        next.push_back({a.first + w.first, a.second + w.second});
        next.push_back({b.first + w.first, b.second + w.second});
        next.push_back({c.first + w.first, c.second + w.second});
        next.insert(next.end(), cells.begin() + static_cast<std::ptrdiff_t>(i) + 1, cells.end());
        if (check_cells(next, k, turn).empty()) {
          cells = std::move(next);
          grown = true;
          break;
        }
      }
    }
    if (!grown) break;
  }
  return cells;
}

ChainTemplate make_template(int k, bool turn, std::vector<Cell> cells) {
  ChainTemplate t;
  t.k = k;
  t.n = 2 * k + 1;
  t.turn = turn;
  t.cells = std::move(cells);
  const std::size_t m = t.cells.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Side in = i == 0 ? Side::Left : side_towards(t.cells[i], t.cells[i - 1]);
    const Side out = i + 1 == m ? (turn ? Side::Top : Side::Right) : side_towards(t.cells[i], t.cells[i + 1]);
    t.sides.push_back({in, out});
  }
  return t;
}

std::mutex capacity_mutex;
std::map<int, int> capacity_cache;

}  // namespace

ChainTemplate build_chain_template(int k, int m, bool turn) {
  if (k < 1) throw ContractError("chain template needs k >= 1");
  if (m % 2 == 0 || m < 2 * k + 1) throw ContractError("chain template needs odd m >= 2k+1");
  auto cells = grow_chain(k, turn, m);
  if (static_cast<int>(cells.size()) != m) return {};
  return make_template(k, turn, std::move(cells));
}

int chain_capacity(int k) {
  {
    std::lock_guard<std::mutex> lock(capacity_mutex);
    auto it = capacity_cache.find(k);
    if (it != capacity_cache.end()) return it->second;
  }
  const int huge = (2 * k + 1) * (2 * k + 1);
  const int cap = static_cast<int>(std::min(grow_chain(k, false, huge).size(), grow_chain(k, true, huge).size()));
  std::lock_guard<std::mutex> lock(capacity_mutex);
  capacity_cache[k] = cap;
  return cap;
}

std::string check_chain_template(const ChainTemplate& t) {
  if (static_cast<int>(t.sides.size()) != static_cast<int>(t.cells.size())) return "side table size mismatch";
  return check_cells(t.cells, t.k, t.turn);
}

// --------------------------------------------------------------- ChainCurve

ChainCurve::ChainCurve(double alpha, std::vector<int> k, std::vector<int> m)
    : alpha_(alpha), k_(std::move(k)), m_(std::move(m)) {
  if (k_.size() != m_.size() || k_.empty()) throw ContractError("chain curve needs matching non-empty k and m");
  for (std::size_t r = 0; r < k_.size(); ++r) {
    std::array<ChainTemplate, 2> pair;
    for (int turn = 0; turn < 2; ++turn) {
      pair[static_cast<std::size_t>(turn)] = build_chain_template(k_[r], m_[r], turn == 1);
      if (pair[static_cast<std::size_t>(turn)].cells.empty()) {
        std::ostringstream os;
        os << "chain curve: no chain of " << m_[r] << " cells for k = " << k_[r];
        throw ContractError(os.str());
      }
    }
    templates_.push_back(std::move(pair));
  }
}

double ChainCurve::epsilon(int r) const {
  double e = 1.0;
  for (int i = 0; i < r; ++i) e /= (2 * k_[static_cast<std::size_t>(i)] + 1);
  return e;
}

double ChainCurve::delta(int r) const {
  double d = 1.0;
  for (int i = 0; i < r; ++i) d /= m_[static_cast<std::size_t>(i)];
  return d;
}

const ChainTemplate& ChainCurve::tmpl(int level, bool turn) const {
  return templates_[static_cast<std::size_t>(level)][turn ? 1 : 0];
}

Vec ChainCurve::point(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  double ox = 0.0, oy = 0.0, size = 1.0;
  Side entry = Side::Left, exit = Side::Right;
  for (int r = 0; r < depth(); ++r) {
    const bool turn = !opposite(entry, exit);
    const ChainTemplate& tp = tmpl(r, turn);
    const Symmetry g = symmetry_for(entry, exit);
    const int m = static_cast<int>(tp.cells.size());
    int idx = static_cast<int>(std::floor(t * m));
    idx = std::clamp(idx, 0, m - 1);
    t = std::clamp(t * m - idx, 0.0, 1.0);
    const Cell c = g.apply(tp.cells[static_cast<std::size_t>(idx)], tp.n);
    entry = g.apply(tp.sides[static_cast<std::size_t>(idx)].first);
    exit = g.apply(tp.sides[static_cast<std::size_t>(idx)].second);
    size /= tp.n;
    ox += size * c.first;
    oy += size * c.second;
  }
  auto midpoint = [&](Side s) {
    switch (s) {
      case Side::Left: return std::pair{ox, oy + 0.5 * size};
      case Side::Right: return std::pair{ox + size, oy + 0.5 * size};
      case Side::Bottom: return std::pair{ox + 0.5 * size, oy};
      case Side::Top: return std::pair{ox + 0.5 * size, oy + size};
    }
    return std::pair{ox, oy};
  };
  const auto centre = std::pair{ox + 0.5 * size, oy + 0.5 * size};
  std::pair<double, double> a, b;
  double w;
  if (t < 0.5) {
    a = midpoint(entry);
    b = centre;
    w = 2.0 * t;
  } else {
    a = centre;
    b = midpoint(exit);
    w = 2.0 * t - 1.0;
  }
  Vec u(2);
  u[0] = (1.0 - w) * a.first + w * b.first;
  u[1] = (1.0 - w) * a.second + w * b.second;
  return u;
}

DriverPath ChainCurve::sample(std::size_t N) const {
  if (N < 1) throw ContractError("chain curve sample needs N >= 1");
  std::vector<Vec> values;
  values.reserve(N + 1);
  for (std::size_t i = 0; i <= N; ++i) values.push_back(point(static_cast<double>(i) / static_cast<double>(N)));
  return DriverPath(Partition::uniform(0.0, 1.0, N), std::move(values), alpha_);
}

DriverPath ChainCurve::path(std::size_t max_points) const {
  std::size_t N = 1;
  for (int r = 0; r < depth(); ++r) {
    const std::size_t next = N * static_cast<std::size_t>(m_[static_cast<std::size_t>(r)]);
    if (next > max_points) break;
    N = next;
  }
  return sample(N);
}

ChainCurve holder_chain_curve(double alpha, int depth) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw ContractError("holder_chain_curve: need 1/2 < alpha < 1");
  if (depth < 1 || depth > 8) throw ContractError("holder_chain_curve: need 1 <= depth <= 8");
  constexpr int k_limit = 40;
  std::vector<int> ks, ms;
  double log_ratio = 0.0;  // log(ε_r / δ_r^α)
  const double band = std::log(3.0);
  for (int r = 0; r < depth; ++r) {
    bool found = false;
    for (int k = 2; k <= k_limit && !found; ++k) {
      const int n = 2 * k + 1;
      const int hi = std::min(k * k, chain_capacity(k));
      int best_m = 0;
      double best = 0.0;
      for (int m = n; m <= hi; m += 2) {
        const double next = log_ratio + alpha * std::log(m) - std::log(n);
        if (std::abs(next) > band) continue;
        if (best_m == 0 || std::abs(next) < std::abs(best)) {
          best_m = m;
          best = next;
        }
      }
      if (best_m != 0) {
        ks.push_back(k);
        ms.push_back(best_m);
        log_ratio = best;
        found = true;
      }
    }
    if (!found) {
      std::ostringstream os;
      os << "holder_chain_curve: no k <= " << k_limit << " keeps eps/delta^alpha in [1/3, 3] at level "
         << r + 1;
      throw ContractError(os.str());
    }
  }
  return ChainCurve(alpha, std::move(ks), std::move(ms));
}

}  // namespace roughstep
