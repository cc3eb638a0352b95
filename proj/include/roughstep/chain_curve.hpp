/**
 * @file chain_curve.hpp
 * @brief Planar curve with two-sided Hölder bounds built from nested chains
 * of squares.
 *
 * Level r refines every square of the previous chain into an n_r × n_r grid
 * (n_r = 2k_r + 1) and threads a chain of m_r subsquares through it, from
 * the middle square of the entry side to the middle square of the exit
 * side, touching no other boundary square. The curve spends time
 * δ_r = 1/(m_1···m_r) in each level-r square and is evaluated lazily, so
 * deep levels never need to be materialised.
 */
#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "roughstep/core.hpp"

namespace roughstep {

enum class Side { Left = 0, Bottom = 1, Right = 2, Top = 3 };

/// One chain through an n×n grid, in the reference orientation (entry Left;
/// exit Right when straight, Top when turning).
struct ChainTemplate {
  int k = 0;
  int n = 0;
  bool turn = false;
  std::vector<std::pair<int, int>> cells;          ///< (column, row)
  std::vector<std::pair<Side, Side>> sides;        ///< entry/exit side of each cell
};

/// Chain of exactly m cells, or an empty template when the builder cannot
/// reach m. m must be odd and at least n.
ChainTemplate build_chain_template(int k, int m, bool turn);

/// Largest m reachable by the builder for both orientations.
int chain_capacity(int k);

/// Empty string when the template is a valid chain with the boundary rule,
/// otherwise a description of the first violation.
std::string check_chain_template(const ChainTemplate& t);

class ChainCurve {
 public:
  ChainCurve(double alpha, std::vector<int> k, std::vector<int> m);

  int depth() const { return static_cast<int>(k_.size()); }
  double alpha() const { return alpha_; }
  const std::vector<int>& k() const { return k_; }
  const std::vector<int>& m() const { return m_; }
  /// Square side after r levels.
  double epsilon(int r) const;
  /// Time spent in each square after r levels.
  double delta(int r) const;

  /// u(t) for t in [0,1].
  Vec point(double t) const;
  /// N+1 equally spaced samples on [0,1].
  DriverPath sample(std::size_t N) const;
  /// Samples at δ_r resolution for the deepest r whose square count does not
  /// exceed max_points.
  DriverPath path(std::size_t max_points = std::size_t{1} << 20) const;

 private:
  const ChainTemplate& tmpl(int level, bool turn) const;

  double alpha_;
  std::vector<int> k_;
  std::vector<int> m_;
  std::vector<std::array<ChainTemplate, 2>> templates_;
};

/// Sequence search: at each level the smallest k whose admissible odd m
/// (n ≤ m ≤ min(k², capacity)) keeps ε_r/δ_r^α in [1/3, 3], with m chosen to
/// keep the log of that ratio nearest zero.
ChainCurve holder_chain_curve(double alpha, int depth);

}  // namespace roughstep
