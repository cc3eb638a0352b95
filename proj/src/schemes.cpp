#include "roughstep/schemes.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace roughstep {

namespace {

// Partition points resolved against the driver grid.
struct Alignment {
  std::vector<std::optional<std::size_t>> index;
  bool on_grid = true;
};

Alignment align(const DriverPath& path, const Partition& part) {
  Alignment a;
  a.index.reserve(part.size());
  for (double t : part.times()) {
    auto idx = path.grid().index_of(t);
    if (!idx) a.on_grid = false;
    a.index.push_back(idx);
  }
  return a;
}

void check_dims(const VectorField& f, const DriverPath& path, const Vec& y0) {
  if (f.d() != path.dim()) throw ContractError("vector field and driver dimensions differ");
  if (static_cast<std::size_t>(y0.size()) != f.n()) throw ContractError("initial state has the wrong dimension");
}

Vec driver_at(const DriverPath& path, const Alignment& al, const Partition& part, std::size_t k) {
  return al.index[k] ? path[*al.index[k]] : path.at(part[k]);
}

// Σ_j J_j (F a_j): the area correction g(y)A.
Vec area_term(const Mat& F, const std::vector<Mat>& J, const Mat& A) {
  Vec out = Vec::Zero(F.rows());
  for (std::size_t j = 0; j < J.size(); ++j) out += J[j] * (F * A.col(static_cast<Eigen::Index>(j)));
  return out;
}

// Returns true when the run must halt at this state.
bool record(Trajectory& traj, Vec next, const SchemeConfig& cfg, std::size_t k) {
  if (!next.allFinite()) {
    std::ostringstream os;
    os << "non-finite state at step " << k << " (t = " << traj.partition[k] << ")";
    throw NumericalError(os.str());
  }
  const bool blown = next.norm() > cfg.threshold;
  traj.states.push_back(std::move(next));
  if (blown) traj.exploded_at = k;
  return blown;
}

void validate_cfg(const SchemeConfig& cfg) {
  if (!(cfg.threshold > 0.0)) throw ContractError("explosion threshold must be positive");
}

struct Stepper {
  const VectorField& f;
  const DriverPath& path;
  const AreaProcess* area;
  const Partition& part;
  Alignment al;

  Stepper(const VectorField& f_, const DriverPath& path_, const AreaProcess* area_, const Partition& part_)
      : f(f_), path(path_), area(area_), part(part_), al(align(path_, part_)) {
    if (area) {
      if (&area->path() != &path && (area->path().size() != path.size() || area->dim() != path.dim())) {
        throw ContractError("area process is not aligned with the driver");
      }
      if (!al.on_grid) throw ContractError("corrected scheme needs partition points on the driver grid");
    }
  }

  Vec dx(std::size_t k) const { return driver_at(path, al, part, k + 1) - driver_at(path, al, part, k); }
  Mat A(std::size_t k) const { return area->between(*al.index[k], *al.index[k + 1]); }
};

}  // namespace

Trajectory euler_solve(const VectorField& f, const DriverPath& path, const Partition& part, const Vec& y0,
                       const SchemeConfig& cfg) {
  validate_cfg(cfg);
  check_dims(f, path, y0);
  Stepper st(f, path, nullptr, part);
  Trajectory traj{part, {y0}, std::nullopt, SchemeKind::Euler};
  for (std::size_t k = 0; k < part.steps(); ++k) {
    const Vec& y = traj.states.back();
    if (record(traj, y + f(y) * st.dx(k), cfg, k + 1)) break;
  }
  return traj;
}

Trajectory corrected_solve(const VectorField& f, const DriverPath& path, const AreaProcess& area,
                           const Partition& part, const Vec& y0, const SchemeConfig& cfg) {
  validate_cfg(cfg);
  check_dims(f, path, y0);
  if (!f.has_deriv1()) throw CapabilityError("corrected scheme needs the first derivative of f");
  Stepper st(f, path, &area, part);
  Trajectory traj{part, {y0}, std::nullopt, SchemeKind::Corrected};
  for (std::size_t k = 0; k < part.steps(); ++k) {
    const Vec& y = traj.states.back();
    const Mat F = f(y);
    Vec next = y + F * st.dx(k);
    next += area_term(F, f.jacobians(y), st.A(k));
    if (record(traj, next, cfg, k + 1)) break;
  }
  return traj;
}

std::pair<Trajectory, JacobianTrajectory> augmented_solve(const VectorField& f, const DriverPath& path,
                                                          const AreaProcess* area, const Partition& part,
                                                          const Vec& y0, const SchemeConfig& cfg) {
  validate_cfg(cfg);
  check_dims(f, path, y0);
  const bool corrected = area != nullptr && cfg.scheme != SchemeKind::Euler;
  if (!f.has_deriv1()) throw CapabilityError("derivative flow needs the first derivative of f");
  if (corrected && !f.has_deriv2()) throw CapabilityError("corrected derivative flow needs the second derivative of f");
  Stepper st(f, path, corrected ? area : nullptr, part);
  const auto n = static_cast<Eigen::Index>(f.n());
  const std::size_t d = f.d();
  Trajectory traj{part, {y0}, std::nullopt, SchemeKind::Augmented};
  JacobianTrajectory jac{{Mat::Identity(n, n)}};
  for (std::size_t k = 0; k < part.steps(); ++k) {
    const Vec y = traj.states.back();
    const Mat F = f(y);
    const auto J = f.jacobians(y);
    const Vec dx = st.dx(k);
    Vec next = y + F * dx;
    Mat phi = Mat::Identity(n, n);
    for (std::size_t j = 0; j < d; ++j) phi += dx[static_cast<Eigen::Index>(j)] * J[j];
    if (corrected) {
      const Mat A = st.A(k);
      next += area_term(F, J, A);
      const auto H = f.hessians(y);
      for (std::size_t j = 0; j < d; ++j) {
        const Vec fa = F * A.col(static_cast<Eigen::Index>(j));
        for (std::size_t r = 0; r < d; ++r) {
          phi += A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) * (J[j] * J[r]);
        }
        for (Eigen::Index q = 0; q < n; ++q) phi.col(q) += H[j * f.n() + static_cast<std::size_t>(q)] * fa;
      }
    }
    jac.z.push_back(phi * jac.z.back());
    if (!jac.z.back().allFinite()) throw NumericalError("non-finite derivative flow");
    if (record(traj, next, cfg, k + 1)) break;
  }
  return {std::move(traj), std::move(jac)};
}

// ------------------------------------------------------------ extended system

VectorField extended_field(const VectorField& f) {
  if (!f.has_deriv1()) throw CapabilityError("extended system needs the first derivative of f");
  const std::size_t n = f.n(), d = f.d();
  const std::size_t oy = d, oB = d + n, oC = oB + d * n, oD = oC + n * d, N = oD + n * n;
  const auto Ni = static_cast<Eigen::Index>(N);
  auto I = [](std::size_t v) { return static_cast<Eigen::Index>(v); };
  auto eval = [f, n, d, oy, oB, oC, oD, Ni, I](const Vec& Y) {
    const Vec x = Y.segment(0, I(d));
    const Vec y = Y.segment(I(oy), I(n));
    const Mat F = f(y);
    Mat out = Mat::Zero(Ni, I(d));
    for (std::size_t j = 0; j < d; ++j) {
      out(I(j), I(j)) = 1.0;
      for (std::size_t l = 0; l < n; ++l) out(I(oy + l), I(j)) = F(I(l), I(j));
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t l = 0; l < n; ++l) out(I(oB + i * n + l), I(j)) = x[I(i)] * F(I(l), I(j));
      for (std::size_t k = 0; k < n; ++k) out(I(oC + k * d + j), I(j)) = y[I(k)];
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) out(I(oD + k * n + l), I(j)) = y[I(k)] * F(I(l), I(j));
    }
    return out;
  };
  auto jac = [f, n, d, oy, oB, oC, oD, Ni, I](const Vec& Y) {
    const Vec x = Y.segment(0, I(d));
    const Vec y = Y.segment(I(oy), I(n));
    const Mat F = f(y);
    const auto J = f.jacobians(y);
    std::vector<Mat> out(d, Mat::Zero(Ni, Ni));
    for (std::size_t j = 0; j < d; ++j) {
      Mat& G = out[j];
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t h = 0; h < n; ++h) G(I(oy + l), I(oy + h)) = J[j](I(l), I(h));
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t l = 0; l < n; ++l) {
          const auto row = I(oB + i * n + l);
          G(row, I(i)) += F(I(l), I(j));
          for (std::size_t h = 0; h < n; ++h) G(row, I(oy + h)) += x[I(i)] * J[j](I(l), I(h));
        }
      }
      for (std::size_t k = 0; k < n; ++k) G(I(oC + k * d + j), I(oy + k)) = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
          const auto row = I(oD + k * n + l);
          G(row, I(oy + k)) += F(I(l), I(j));
          for (std::size_t h = 0; h < n; ++h) G(row, I(oy + h)) += y[I(k)] * J[j](I(l), I(h));
        }
      }
    }
    return out;
  };
  return VectorField(N, d, eval, jac, {}, f.gamma());
}

ExtendedSolution::ExtendedSolution(Trajectory full, std::size_t n, std::size_t d)
    : full_(std::move(full)), n_(n), d_(d) {}

Mat ExtendedSolution::block(std::size_t k, std::size_t offset, std::size_t rows, std::size_t cols) const {
  Mat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const Vec& s = full_.states.at(k);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s[static_cast<Eigen::Index>(offset + r * cols + c)];
  return out;
}

Vec ExtendedSolution::x(std::size_t k) const {
  return full_.states.at(k).segment(0, static_cast<Eigen::Index>(d_));
}

Vec ExtendedSolution::y(std::size_t k) const {
  return full_.states.at(k).segment(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(n_));
}

Trajectory ExtendedSolution::trajectory() const {
  Trajectory t{full_.partition, {}, full_.exploded_at, SchemeKind::Extended};
  for (std::size_t k = 0; k < full_.states.size(); ++k) t.states.push_back(y(k));
  return t;
}

Mat ExtendedSolution::B(std::size_t k, std::size_t l) const {
  const std::size_t off = d_ + n_;
  return block(l, off, d_, n_) - block(k, off, d_, n_) - x(k) * (y(l) - y(k)).transpose();
}

Mat ExtendedSolution::C(std::size_t k, std::size_t l) const {
  const std::size_t off = d_ + n_ + d_ * n_;
  return block(l, off, n_, d_) - block(k, off, n_, d_) - y(k) * (x(l) - x(k)).transpose();
}

Mat ExtendedSolution::D(std::size_t k, std::size_t l) const {
  const std::size_t off = d_ + n_ + 2 * d_ * n_;
  return block(l, off, n_, n_) - block(k, off, n_, n_) - y(k) * (y(l) - y(k)).transpose();
}

ExtendedSolution extended_solve(const VectorField& f, const DriverPath& path, const AreaProcess& area,
                                const Partition& part, const Vec& y0, const SchemeConfig& cfg) {
  check_dims(f, path, y0);
  const VectorField F = extended_field(f);
  const auto al = align(path, part);
  if (!al.on_grid) throw ContractError("extended scheme needs partition points on the driver grid");
  Vec Y0 = Vec::Zero(static_cast<Eigen::Index>(F.n()));
  Y0.segment(0, static_cast<Eigen::Index>(f.d())) = path[*al.index[0]];
  Y0.segment(static_cast<Eigen::Index>(f.d()), static_cast<Eigen::Index>(f.n())) = y0;
  SchemeConfig ext = cfg;
  ext.threshold = std::numeric_limits<double>::infinity();
  Trajectory full = corrected_solve(F, path, area, part, Y0, ext);
  full.scheme = SchemeKind::Extended;
  ExtendedSolution sol(std::move(full), f.n(), f.d());
  // Explosion is judged on the y component only.
  for (std::size_t k = 0; k < sol.full().states.size(); ++k) {
    if (sol.y(k).norm() > cfg.threshold) {
      Trajectory cut = sol.full();
      cut.states.resize(k + 1);
      cut.exploded_at = k;
      return ExtendedSolution(std::move(cut), f.n(), f.d());
    }
  }
  return sol;
}

// -------------------------------------------------------------------- defects

std::vector<std::pair<std::size_t, std::size_t>> window_pairs(std::size_t K, std::size_t W) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = k + 1; l <= K && l - k <= W; ++l) out.emplace_back(k, l);
  return out;
}

DefectReport defect(const Trajectory& traj, const VectorField& f, const DriverPath& path, const AreaProcess* area,
                    const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const ControlModulus& omega,
                    double gamma, double p) {
  if (gamma > 2.0 && area == nullptr) throw ContractError("defect: an area process is required when gamma > 2");
  if (!(p >= 1.0) || !(gamma > 0.0)) throw ContractError("defect: invalid exponents");
  if (f.d() != path.dim()) throw ContractError("defect: vector field and driver dimensions differ");
  if (area != nullptr && !f.has_deriv1()) throw CapabilityError("defect with area needs the first derivative of f");
  const Alignment al = align(path, traj.partition);
  if (area != nullptr && !al.on_grid) throw ContractError("defect: partition points must lie on the driver grid");

  DefectReport rep;
  rep.gamma = gamma;
  rep.p = p;
  rep.with_area = area != nullptr;
  const double expo = gamma / p;
  for (const auto& [k, l] : pairs) {
    if (!(k < l) || l >= traj.states.size()) throw ContractError("defect: pair outside the trajectory");
    const Vec& yk = traj.states[k];
    const Mat F = f(yk);
    // One step from y_k, evaluated as the schemes do, so adjacent pairs cancel exactly.
    Vec pred = yk + F * (driver_at(path, al, traj.partition, l) - driver_at(path, al, traj.partition, k));
    if (area != nullptr) pred += area_term(F, f.jacobians(yk), area->between(*al.index[k], *al.index[l]));
    Vec def = traj.states[l] - pred;
    const double w = std::pow(omega(traj.partition[k], traj.partition[l]), expo);
    const double mag = def.cwiseAbs().maxCoeff();
    if (mag > 0.0) {
      rep.fitted_M = std::max(rep.fitted_M, w > 0.0 ? mag / w : std::numeric_limits<double>::infinity());
    }
    rep.intervals.emplace_back(k, l);
    rep.defect.push_back(std::move(def));
    rep.omega_pow.push_back(w);
  }
  return rep;
}

}  // namespace roughstep
