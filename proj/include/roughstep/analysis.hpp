/**
 * @file analysis.hpp
 * @brief Convergence studies, the window-sum area statistic, Riemann-sum
 * recovery of areas, the integral growth criterion and the nonuniqueness
 * demonstration.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "roughstep/chain_curve.hpp"
#include "roughstep/core.hpp"
#include "roughstep/drivers.hpp"
#include "roughstep/schemes.hpp"

namespace roughstep {

struct RateReport {
  std::vector<std::size_t> K;
  std::vector<double> errors;
  double slope = 0.0;       ///< least squares on log2 e vs log2 K
  double intercept = 0.0;
  std::size_t dropped = 2;  ///< coarsest entries excluded from the fit
  bool exact = false;       ///< every error was zero
  std::string oracle;
  std::vector<std::string> notes;
};

/// Fits the rate after dropping the `drop` coarsest meshes; zero errors are
/// excluded with a note.
RateReport fit_rate(std::vector<std::size_t> K, std::vector<double> errors, std::string oracle,
                    std::size_t drop = 2);

struct Oracle {
  std::string description;
  std::function<Vec()> terminal;
};

namespace oracles {
/// y0·exp(W(T) − T/2) for dy = y dW read in the Itô sense (scalar).
Oracle gbm_ito(const DriverPath& path, double y0);
/// y0·exp(W(T)) for the Stratonovich reading.
Oracle gbm_stratonovich(const DriverPath& path, double y0);
/// Corrected scheme on the full driver grid, which must be at least 16× the
/// finest mesh studied.
Oracle fine_corrected(const VectorField& f, const DriverPath& path, const AreaProcess& area, const Vec& y0);
}  // namespace oracles

struct ConvergenceProblem {
  VectorField f;
  DriverPath path;
  std::optional<AreaProcess> area;
  Vec y0;
};

/// Runs the scheme on nested uniform coarsenings of the driver grid with K
/// steps each and regresses the terminal error against the oracle.
RateReport convergence_study(const ConvergenceProblem& problem, SchemeKind scheme, const std::vector<std::size_t>& K,
                             const Oracle& oracle, std::size_t drop = 2);

struct ConditionStat {
  double alpha = 0.0;
  double beta = 0.0;
  double value = 0.0;
  int level = -1;            ///< argmax: h = T / 2^level
  std::size_t k = 0, m = 0;  ///< argmax window [k, m)
  std::size_t i = 0, j = 0;  ///< argmax entry
  std::vector<int> levels;
  std::vector<double> per_level;   ///< max over windows at each level
  std::size_t window_cap = 4096;   ///< longest window m − k examined
};

/// max over dyadic levels, windows 0 ≤ k < m ≤ 2^level with m − k ≤ cap and
/// entries (i, j) of |Σ_{l=k}^{m-1} A^{ij}(lh, (l+1)h)| / ((m−k)^β h^{2α}).
ConditionStat condition21_stat(const AreaProcess& area, double alpha, double beta, int level_min, int level_max,
                               std::size_t window_cap = 4096);

/// The ratio for a single window, computed exactly as the statistic does.
double condition21_window(const AreaProcess& area, double alpha, double beta, int level, std::size_t k,
                          std::size_t m, std::size_t i, std::size_t j);

/// max-entry error of Σ x^i(t_k)Δx^j − x^i(s)(x^j(t) − x^j(s)) against A(s,t)
/// using N equal sub-steps between grid indices s and t.
std::vector<double> riemann_area_recovery(const DriverPath& path, const AreaProcess& area, std::size_t s,
                                          std::size_t t, const std::vector<std::size_t>& N);
std::vector<double> riemann_area_recovery(const PolynomialPath& poly, double s, double t,
                                          const std::vector<std::size_t>& N);

/// Largest max-entry residual of A(s,u) − [A(s,t) + A(t,u) + Δx_st ⊗ Δx_tu]
/// over random grid triples s < t < u, scaled by max(1, |A(s,u)|_∞).
double chen_consistency(const AreaProcess& area, std::size_t triples, std::uint64_t seed);

struct CriterionReport {
  bool converges = false;
  double tail_slope = 0.0;                  ///< slope of log2 dyadic contributions
  std::vector<double> edges;                ///< 1, 2, 4, ...
  std::vector<double> partial;              ///< ∫ over [edges[j], edges[j+1]]
};

/// ∫_1^∞ {A^{1−p} D^{p−1−βp}}^{1/β} dR classified from dyadic contributions
/// on [1, R_max]: a non-negative tail slope means divergence.
CriterionReport explosion_criterion(const GrowthEnvelope& env, double p, double gamma, double R_max = 1e6);

/// Closed-form exponent of the criterion integrand for D = R^d, A = R^a.
double power_law_criterion_exponent(double a, double d, double beta, double p);

struct NonuniquenessReport {
  Trajectory traj_a;        ///< y¹ ≡ 0
  Trajectory traj_b;        ///< y¹ = ∫ (x²)^γ dx¹
  DefectReport defect_a{};
  DefectReport defect_b{};
  ControlModulus omega = ControlModulus::linear(0.0);
  double separation = 0.0;
  double defect_scale = 0.0;  ///< max M · ω(0, t_max)^{γ/p}
  std::size_t window = 0;
};

/// Builds both solutions of the counterexample system, checks the lower bound
/// y¹ ≥ 3t^β on the grid, and fits I-defects on windows of at most W steps.
NonuniquenessReport nonuniqueness_demo(const CounterexampleConfig& cfg, std::size_t window = 2);

/// ∫_0^{t} (x²)^γ dx¹ on the example grid: asymptotic head on [0, t_min],
/// Gauss-Legendre on every later cell.
std::vector<double> example1_second_solution(const CounterexampleConfig& cfg, const DriverPath& path);

struct HolderSandwich {
  double c1 = 0.0;  ///< min |u(s) − u(t)| / |s − t|^α over the sample
  double c2 = 0.0;  ///< max of the same ratio
  double ratio = 0.0;
  std::size_t pairs = 0;
  double min_gap = 0.0;
};

/// Samples pairs uniformly on [0,1]², keeping those with |s − t| ≥ min_gap
/// (δ at the deepest level when min_gap ≤ 0).
HolderSandwich holder_sandwich(const ChainCurve& curve, std::size_t pairs, std::uint64_t seed, double min_gap = 0.0);

/// Slope of log sup_k |x(t_{k+L}) − x(t_k)| against log lag over dyadic L;
/// +∞ for a constant path.
double holder_estimate(const DriverPath& path);

}  // namespace roughstep
