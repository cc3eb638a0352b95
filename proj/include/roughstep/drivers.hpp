/**
 * @file drivers.hpp
 * @brief Driving paths and their second-level area data.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "roughstep/core.hpp"

namespace roughstep {

struct BrownianConfig {
  std::size_t d = 1;
  double T = 1.0;
  int levels = 10;             ///< grid has 2^levels steps
  std::uint64_t seed = 0;
  int substeps = 16;           ///< bridge refinement R for off-diagonal areas

  void validate() const;
  std::size_t steps() const { return std::size_t{1} << levels; }
};

/// Standard Brownian motion on a uniform dyadic grid; W(0) = 0.
DriverPath brownian_path(const BrownianConfig& cfg);

/// Itô areas on the fine intervals. The diagonal is ½ΔW² − ½h. Off the
/// diagonal the symmetric part is ½ΔW^rΔW^j and the antisymmetric (Lévy)
/// part comes from a left-point sum over R Brownian-bridge substeps.
AreaProcess ito_area(const DriverPath& path, const BrownianConfig& cfg);

/// Adds (t−s)/2 to the fine diagonal of an Itô area process.
AreaProcess stratonovich_area(const AreaProcess& ito);

/// Inverse of stratonovich_area.
AreaProcess ito_from_stratonovich(const AreaProcess& strat);

/// Path whose components are polynomials in t (ascending coefficients).
class PolynomialPath {
 public:
  explicit PolynomialPath(std::vector<std::vector<double>> coeffs);

  std::size_t dim() const { return coeffs_.size(); }
  Vec value(double t) const;
  /// ∫_s^t (x^i(u) − x^i(s)) dx^j(u), in closed form.
  Mat area(double s, double t) const;
  DriverPath sample(const Partition& grid) const;

 private:
  std::vector<std::vector<double>> coeffs_;
};

AreaProcess analytic_area(const PolynomialPath& poly, const Partition& grid);

/// A^{ij}(s,t) = −x^i(s)(x^j(t) − x^j(s)).
AreaProcess degenerate_area(const DriverPath& path);

/// A + ρ(t) − ρ(s) for a d×d valued function ρ; Chen-consistent for any ρ.
AreaProcess perturbed_area(const AreaProcess& area, const std::function<Mat(double)>& rho);

/// Oscillating two-dimensional path and C^1-smoothed vector field for which
/// the system dy¹ = f dx¹, dy² = dx² has two solutions from the origin.
struct CounterexampleConfig {
  double p = 1.6;
  double gamma = 1.2;
  double beta_exp = 10.0;
  double rho_exp = 14.9;
  double tau = 0.5;
  double t_max = 0.7;
  double cycles = 20000.0;        ///< oscillations resolved below t_max
  int points_per_cycle = 96;

  void validate() const;
  /// Smallest positive grid time; [0, t_min] is a single interval.
  double t_min() const;
};

Vec example1_value(const CounterexampleConfig& cfg, double t);
/// dx/dt at t > 0.
Vec example1_velocity(const CounterexampleConfig& cfg, double t);
/// Path sampled on 0 followed by a grid uniform in the phase t^{-ρ}.
DriverPath example1_path(const CounterexampleConfig& cfg);
/// f = [[c·s(y)·(y²)₊^γ, 0], [0, 1]] with the smoothstep collar s.
VectorField example1_field(const CounterexampleConfig& cfg, double coefficient = 1.0);

struct Example1 {
  DriverPath path;
  VectorField field;
};
Example1 example1_driver(const CounterexampleConfig& cfg);

/// The same field with the literal coefficient (1 − ρ_exp) on dy¹.
VectorField example2_field(const CounterexampleConfig& cfg);

}  // namespace roughstep
