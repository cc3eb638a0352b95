/**
 * @file schemes.hpp
 * @brief Euler and area-corrected one-step schemes, the derivative flow and
 * the extended system carrying B, C, D.
 *
 * Partition points must be grid points of the driver. Euler alone accepts
 * off-grid points, reading x by piecewise-linear interpolation.
 */
#pragma once

#include <utility>
#include <vector>

#include "roughstep/core.hpp"

namespace roughstep {

struct SchemeConfig {
  SchemeKind scheme = SchemeKind::Euler;
  double threshold = 1e6;  ///< |y| above this halts the run and sets exploded_at
  double gamma = 3.0;
  double p = 2.5;
};

/// y_{k+1} = y_k + f(y_k)(x_{k+1} − x_k).
Trajectory euler_solve(const VectorField& f, const DriverPath& path, const Partition& part, const Vec& y0,
                       const SchemeConfig& cfg = {});

/// y_{k+1} = y_k + f(y_k)Δx + g(y_k)A(t_k, t_{k+1}) with g^i_{rj} = f^h_r ∂_h f^i_j.
Trajectory corrected_solve(const VectorField& f, const DriverPath& path, const AreaProcess& area,
                           const Partition& part, const Vec& y0, const SchemeConfig& cfg = {});

/// z_k = ∂y_k/∂y_0 along the run, z_0 = I.
struct JacobianTrajectory {
  std::vector<Mat> z;
};

/// Runs Euler (area == nullptr or cfg.scheme == Euler) or the corrected
/// scheme together with its exact derivative recurrence.
std::pair<Trajectory, JacobianTrajectory> augmented_solve(const VectorField& f, const DriverPath& path,
                                                          const AreaProcess* area, const Partition& part,
                                                          const Vec& y0, const SchemeConfig& cfg = {});

/// The system in (x, y, B, C, D) with dB^{il} = x^i f^l_j dx^j, dC^{kj} = y^k dx^j,
/// dD^{kl} = y^k f^l_j dx^j. State layout: x (d), y (n), B (d×n row-major),
/// C (n×d), D (n×n).
VectorField extended_field(const VectorField& f);

class ExtendedSolution {
 public:
  ExtendedSolution(Trajectory full, std::size_t n, std::size_t d);

  const Trajectory& full() const { return full_; }
  /// The y component alone.
  Trajectory trajectory() const;
  Vec x(std::size_t k) const;
  Vec y(std::size_t k) const;

  /// Second-level increments over partition indices k ≤ l:
  /// B = ΔB − x(t_k)⊗Δy, C = ΔC − y(t_k)⊗Δx, D = ΔD − y(t_k)⊗Δy.
  Mat B(std::size_t k, std::size_t l) const;
  Mat C(std::size_t k, std::size_t l) const;
  Mat D(std::size_t k, std::size_t l) const;

 private:
  Mat block(std::size_t k, std::size_t offset, std::size_t rows, std::size_t cols) const;

  Trajectory full_;
  std::size_t n_, d_;
};

ExtendedSolution extended_solve(const VectorField& f, const DriverPath& path, const AreaProcess& area,
                                const Partition& part, const Vec& y0, const SchemeConfig& cfg = {});

/// All pairs (k, l) with 0 ≤ k < l ≤ K and l − k ≤ W.
std::vector<std::pair<std::size_t, std::size_t>> window_pairs(std::size_t K, std::size_t W);

/// I_{kl} (area == nullptr) or J_{kl} per pair, with M = sup |defect|_∞ / ω^{γ/p}.
/// Requires an area when γ > 2.
DefectReport defect(const Trajectory& traj, const VectorField& f, const DriverPath& path, const AreaProcess* area,
                    const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const ControlModulus& omega,
                    double gamma, double p);

}  // namespace roughstep
