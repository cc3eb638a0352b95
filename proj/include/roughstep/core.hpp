/**
 * @file core.hpp
 * @brief Domain types shared by the drivers, schemes and analysis modules.
 *
 * A rough differential equation dy^i = f^i_j(y) dx^j is described by a
 * sampled driving path x (DriverPath), optionally its second-level data
 * A^{rj}(s,t) (AreaProcess), a vector field f (VectorField) and a partition
 * on which a discrete scheme produces a Trajectory.
 *
 * All types are immutable after construction.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "roughstep/errors.hpp"

namespace roughstep {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Strictly increasing times t_0 < t_1 < ... < t_K with K >= 1.
class Partition {
 public:
  explicit Partition(std::vector<double> times);

  /// K equal steps on [t0, t1]; the last point is exactly t1.
  static Partition uniform(double t0, double t1, std::size_t steps);

  std::size_t steps() const { return times_.size() - 1; }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t k) const { return times_[k]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }

  /// Largest step, recomputed on every call.
  double mesh() const;
  /// True when all steps agree to a relative 1e-9.
  bool uniform() const;

  /// Every stride-th point; stride must divide steps().
  Partition coarsen(std::size_t stride) const;
  /// Points first..last inclusive.
  Partition slice(std::size_t first, std::size_t last) const;

  /// Index of a point equal to t within 1e-12 of the span, if any.
  std::optional<std::size_t> index_of(double t) const;

 private:
  std::vector<double> times_;
};

/// Continuous path x: [0,T] -> R^d sampled on a grid. Off-grid evaluation is
/// piecewise linear.
class DriverPath {
 public:
  DriverPath(Partition grid, std::vector<Vec> values, double holder_alpha = 0.5,
             std::optional<double> p = std::nullopt);

  std::size_t dim() const { return dim_; }
  const Partition& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  const Vec& operator[](std::size_t k) const { return values_[k]; }
  const std::vector<Vec>& values() const { return values_; }
  Vec increment(std::size_t k, std::size_t l) const { return values_[l] - values_[k]; }
  Vec at(double t) const;

  double holder_alpha() const { return holder_alpha_; }
  double p() const { return p_; }

 private:
  Partition grid_;
  std::vector<Vec> values_;
  std::size_t dim_;
  double holder_alpha_;
  double p_;
};

/// Control ω(s,t): either c·(t-s) or a tabulated increasing ω(t) with
/// ω(s,t) = ω(t) - ω(s) (linear interpolation between nodes).
class ControlModulus {
 public:
  static ControlModulus linear(double c);
  static ControlModulus tabulated(std::vector<double> times, std::vector<double> omega);

  double operator()(double s, double t) const;
  bool is_linear() const { return times_.empty(); }
  double constant() const { return c_; }

 private:
  ControlModulus() = default;
  double at(double t) const;

  double c_ = 0.0;
  std::vector<double> times_;
  std::vector<double> omega_;
};

enum class AreaKind { Ito, Stratonovich, Degenerate, Analytic, Perturbed };

std::string to_string(AreaKind kind);
AreaKind area_kind_from_string(const std::string& name);

/// A(s,u) = A(s,t) + A(t,u) + dx_st ⊗ dx_tu.
Mat chen_combine(const Mat& a_st, const Mat& a_tu, const Vec& dx_st, const Vec& dx_tu);

/// Second-level data A^{rj}(t_k, t_{k+1}) on the fine intervals of a driver's
/// grid. Areas over longer grid intervals are left folds of chen_combine, so
/// the consistency relation holds by construction.
class AreaProcess {
 public:
  AreaProcess(DriverPath path, std::vector<Mat> fine, AreaKind kind);

  std::size_t dim() const { return path_->dim(); }
  AreaKind kind() const { return kind_; }
  const DriverPath& path() const { return *path_; }
  std::size_t intervals() const { return fine_.size(); }
  const Mat& fine(std::size_t k) const { return fine_[k]; }
  const std::vector<Mat>& fine_areas() const { return fine_; }

  /// A(t_k, t_l) for grid indices k <= l.
  Mat between(std::size_t k, std::size_t l) const;
  /// Areas between consecutive entries of an increasing list of grid indices.
  std::vector<Mat> over(const std::vector<std::size_t>& indices) const;

 private:
  std::shared_ptr<const DriverPath> path_;
  std::vector<Mat> fine_;
  AreaKind kind_;
};

/// f^i_j(y) as an n×d matrix, with optional derivatives.
///
/// deriv1(y)[j](i,h) = ∂_h f^i_j(y)          (d matrices, each n×n)
/// deriv2(y)[j*n+q](i,h) = ∂_q ∂_h f^i_j(y)  (d·n matrices, each n×n)
class VectorField {
 public:
  using Eval = std::function<Mat(const Vec&)>;
  using Derivs = std::function<std::vector<Mat>(const Vec&)>;

  VectorField(std::size_t n, std::size_t d, Eval eval, Derivs deriv1 = {}, Derivs deriv2 = {},
              double gamma = 3.0);

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  double gamma() const { return gamma_; }
  bool has_deriv1() const { return static_cast<bool>(deriv1_); }
  bool has_deriv2() const { return static_cast<bool>(deriv2_); }

  Mat operator()(const Vec& y) const;
  std::vector<Mat> jacobians(const Vec& y) const;
  std::vector<Mat> hessians(const Vec& y) const;

  /// Copy with missing derivatives filled in by central differences.
  VectorField with_finite_differences(double step = 1e-5) const;

 private:
  std::size_t n_;
  std::size_t d_;
  Eval eval_;
  Derivs deriv1_;
  Derivs deriv2_;
  double gamma_;
};

namespace fields {
VectorField zero(std::size_t n, std::size_t d);
VectorField constant(const Mat& value);
/// f_j(y) = M_j y + b_j (column j); offsets may be empty.
VectorField linear(std::vector<Mat> matrices, Mat offsets = Mat());
}  // namespace fields

/// Largest relative mismatch between supplied derivatives and central
/// differences of the next-lower order at the given probe points.
double derivative_mismatch(const VectorField& f, const std::vector<Vec>& probes,
                           double step = 1e-5);

enum class SchemeKind { Euler, Corrected, Extended, Augmented };

std::string to_string(SchemeKind kind);

/// Discrete solution y_k on a partition. When exploded_at is set, states are
/// truncated after that index.
struct Trajectory {
  Partition partition;
  std::vector<Vec> states;
  std::optional<std::size_t> exploded_at;
  SchemeKind scheme = SchemeKind::Euler;

  double time(std::size_t k) const { return partition[k]; }
  bool complete() const { return states.size() == partition.size(); }
};

/// Defect I_{kl} (no area) or J_{kl} (with area) per pair, with the fitted
/// constant M = sup |defect|_inf / ω_{kl}^{γ/p}.
struct DefectReport {
  std::vector<std::pair<std::size_t, std::size_t>> intervals;
  std::vector<Vec> defect;
  std::vector<double> omega_pow;
  double fitted_M = 0.0;
  double gamma = 0.0;
  double p = 0.0;
  bool with_area = false;
};

/// Growth bounds |f| <= D(R) and Hölder seminorm <= A(R) on |y| <= R.
struct GrowthEnvelope {
  std::function<double(double)> D;
  std::function<double(double)> A;
  double beta = 0.5;
  double p = 1.5;

  /// D(R) = cD R^aD, A(R) = cA R^aA.
  static GrowthEnvelope power_law(double cD, double aD, double cA, double aA, double beta,
                                  double p);
  /// Throws ContractError when D(R) > R^β A(R) at some sampled R in [1, r_max].
  void validate(double r_max = 1e6) const;
};

/// Smallest c such that |x(t)-x(s)|_inf^p <= c (t-s) over all grid pairs.
ControlModulus control_fit(const DriverPath& path, double p);

/// As control_fit, additionally requiring |A(s,t)|_inf^{p/2} <= c (t-s).
ControlModulus control_fit(const DriverPath& path, const AreaProcess& area, double p);

}  // namespace roughstep
