/**
 * @file explosion_driver.hpp
 * @brief Driver and scalar field (n = 1, d = 2) whose solution blows up at a
 * computable time t_*, built from growth envelopes D and A whose integral
 * criterion converges.
 *
 * The envelopes are regularised as D̃(y) = inf_{u≥1} u^r D(y/u), then
 * mollified, D*(y) = 2^{-r} ∫ D̃(yu) φ(u) du with a bump φ on [1,2]. With
 *   λ(y)  = ∫_1^y (A* / D*)^{1/β},
 *   a(y)  = (D*^{1-β} / A*)^{1/β},
 *   F*(y) = A*^{-(p-1)/β} D*^{-(βp+1-p)/β},
 * the field is f(y) = D*(y)(−sin λ, cos λ), the path is
 * x(t) = a(y(t))(cos λ, sin λ) where t = ∫_1^{y(t)} F*, and x = 0 after t_*.
 * Since D*·a·λ' = 1, y(t) solves dy = f(y)·dx classically.
 */
#pragma once

#include <memory>
#include <vector>

#include "roughstep/core.hpp"

namespace roughstep {

struct ExplosionOptions {
  double points_per_efold = 64.0;  ///< log-grid density of the envelope tables
  double y_max = 1e8;              ///< last tabulated state value
  double r_factor = 1.5;           ///< regularisation exponent r = r_factor / min(ρ', ρ'')
  int inf_points = 512;            ///< geometric u-grid for the infimum
  double inf_span = 1e4;           ///< u ranges over [1, inf_span]
  int tail_points = 8;             ///< partition points after t_*
};

/// Tabulated envelopes and the maps y ↦ λ, a, t.
class ExplosionModel {
 public:
  ExplosionModel(const GrowthEnvelope& env, double p, double gamma, const ExplosionOptions& opts);

  double beta() const { return beta_; }
  double p() const { return p_; }
  double r() const { return r_; }
  double t_star() const { return t_star_; }
  /// Local log-slope of F* at the end of the table (must be < −1).
  double tail_exponent() const { return tail_exponent_; }

  double D_star(double y) const;
  double A_star(double y) const;
  double D_tilde(double y) const;
  double F_star(double y) const;
  double lambda(double y) const;
  double amplitude(double y) const;
  double time_of(double y) const;
  double state_at(double t) const;
  Vec x_of_state(double y) const;
  Mat field(double y) const;

  const std::vector<double>& nodes() const { return y_; }
  const std::vector<double>& node_times() const { return time_; }

 private:
  std::size_t cell(double y) const;
  double loglog(const std::vector<double>& table, double y) const;

  double beta_, p_, rho1_, rho2_, r_;
  double h_;  // log-grid step
  std::vector<double> tilde_log_y_, D_tilde_, A_tilde_;
  std::vector<double> y_, D_, A_, lambda_, time_;
  double t_star_ = 0.0;
  double tail_exponent_ = 0.0;
};

struct ExplosionDriver {
  std::shared_ptr<const ExplosionModel> model;
  VectorField field;
  DriverPath path;
  double t_star;
};

/// Refuses (ContractError) when the criterion integral does not converge
/// numerically or the envelope violates D(R) ≤ R^β A(R).
ExplosionDriver explosion_driver(const GrowthEnvelope& env, double p, double gamma,
                                 const ExplosionOptions& opts = {});

}  // namespace roughstep
