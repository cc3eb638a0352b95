#include "roughstep/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace roughstep {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

}  // namespace

// ---------------------------------------------------------------- Partition

Partition::Partition(std::vector<double> times) : times_(std::move(times)) {
  require(times_.size() >= 2, "partition needs at least two points");
  for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
    if (!(times_[k] < times_[k + 1])) {
      std::ostringstream os;
      os << "partition not strictly increasing at index " << k;
      throw ContractError(os.str());
    }
  }
  require(std::isfinite(times_.front()) && std::isfinite(times_.back()),
          "partition times must be finite");
}

Partition Partition::uniform(double t0, double t1, std::size_t steps) {
  require(steps >= 1, "uniform partition needs at least one step");
  require(t1 > t0, "uniform partition needs t1 > t0");
  std::vector<double> t(steps + 1);
  const double h = (t1 - t0) / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) t[k] = t0 + h * static_cast<double>(k);
  t[steps] = t1;
  return Partition(std::move(t));
}

double Partition::mesh() const {
  double m = 0.0;
  for (std::size_t k = 0; k + 1 < times_.size(); ++k) m = std::max(m, times_[k + 1] - times_[k]);
  return m;
}

bool Partition::uniform() const {
  const double h0 = times_[1] - times_[0];
  for (std::size_t k = 1; k + 1 < times_.size(); ++k) {
    if (std::abs((times_[k + 1] - times_[k]) - h0) > 1e-9 * h0) return false;
  }
  return true;
}

Partition Partition::coarsen(std::size_t stride) const {
  require(stride >= 1 && steps() % stride == 0, "coarsening stride must divide the step count");
  std::vector<double> t;
  t.reserve(steps() / stride + 1);
  for (std::size_t k = 0; k < times_.size(); k += stride) t.push_back(times_[k]);
  return Partition(std::move(t));
}

Partition Partition::slice(std::size_t first, std::size_t last) const {
  require(first < last && last < times_.size(), "invalid partition slice");
  return Partition(std::vector<double>(times_.begin() + static_cast<std::ptrdiff_t>(first),
                                       times_.begin() + static_cast<std::ptrdiff_t>(last) + 1));
}

std::optional<std::size_t> Partition::index_of(double t) const {
  const double tol = 1e-12 * std::max(1.0, back() - front());
  auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
  if (it == times_.end() || std::abs(*it - t) > tol) return std::nullopt;
  return static_cast<std::size_t>(it - times_.begin());
}

// --------------------------------------------------------------- DriverPath

DriverPath::DriverPath(Partition grid, std::vector<Vec> values, double holder_alpha,
                       std::optional<double> p)
    : grid_(std::move(grid)), values_(std::move(values)), holder_alpha_(holder_alpha) {
  require(values_.size() == grid_.size(), "path values must match grid length");
  dim_ = static_cast<std::size_t>(values_.front().size());
  require(dim_ >= 1, "path dimension must be positive");
  for (const auto& v : values_) {
    require(static_cast<std::size_t>(v.size()) == dim_, "path values have inconsistent dimension");
  }
  require(holder_alpha_ > 0.0 && holder_alpha_ <= 1.0, "holder exponent must lie in (0,1]");
  p_ = p.value_or(1.0 / holder_alpha_);
}

Vec DriverPath::at(double t) const {
  const auto& ts = grid_.times();
  if (t <= ts.front()) return values_.front();
  if (t >= ts.back()) return values_.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - ts.begin()) - 1;
  const double w = (t - ts[k]) / (ts[k + 1] - ts[k]);
  return (1.0 - w) * values_[k] + w * values_[k + 1];
}

// ----------------------------------------------------------- ControlModulus

ControlModulus ControlModulus::linear(double c) {
  require(c >= 0.0 && std::isfinite(c), "control constant must be finite and non-negative");
  ControlModulus m;
  m.c_ = c;
  return m;
}

ControlModulus ControlModulus::tabulated(std::vector<double> times, std::vector<double> omega) {
  require(times.size() == omega.size() && times.size() >= 2, "tabulated control needs matching nodes");
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    require(times[k] < times[k + 1], "tabulated control times must increase");
    require(omega[k] <= omega[k + 1], "tabulated control must be non-decreasing");
  }
  ControlModulus m;
  m.times_ = std::move(times);
  m.omega_ = std::move(omega);
  return m;
}

double ControlModulus::at(double t) const {
  if (t <= times_.front()) return omega_.front();
  if (t >= times_.back()) return omega_.back();
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
  return (1.0 - w) * omega_[k] + w * omega_[k + 1];
}

double ControlModulus::operator()(double s, double t) const {
  if (is_linear()) return c_ * (t - s);
  return at(t) - at(s);
}

// --------------------------------------------------------------------- Areas

std::string to_string(AreaKind kind) {
  switch (kind) {
    case AreaKind::Ito: return "ito";
    case AreaKind::Stratonovich: return "stratonovich";
    case AreaKind::Degenerate: return "degenerate";
    case AreaKind::Analytic: return "analytic";
    case AreaKind::Perturbed: return "perturbed";
  }
  return "unknown";
}

AreaKind area_kind_from_string(const std::string& name) {
  for (AreaKind k : {AreaKind::Ito, AreaKind::Stratonovich, AreaKind::Degenerate,
                     AreaKind::Analytic, AreaKind::Perturbed}) {
    if (to_string(k) == name) return k;
  }
  throw ContractError("unknown area kind '" + name + "'");
}

Mat chen_combine(const Mat& a_st, const Mat& a_tu, const Vec& dx_st, const Vec& dx_tu) {
  const auto d = dx_st.size();
  if (dx_tu.size() != d || a_st.rows() != d || a_st.cols() != d || a_tu.rows() != d ||
      a_tu.cols() != d) {
    throw ContractError("chen_combine: dimension mismatch");
  }
  return a_st + a_tu + dx_st * dx_tu.transpose();
}

AreaProcess::AreaProcess(DriverPath path, std::vector<Mat> fine, AreaKind kind)
    : path_(std::make_shared<const DriverPath>(std::move(path))),
      fine_(std::move(fine)),
      kind_(kind) {
  require(fine_.size() + 1 == path_->size(), "one area matrix per fine interval required");
  const auto d = static_cast<Eigen::Index>(path_->dim());
  for (const auto& a : fine_) {
    require(a.rows() == d && a.cols() == d, "area matrices must be d x d");
  }
}

Mat AreaProcess::between(std::size_t k, std::size_t l) const {
  require(k <= l && l < path_->size(), "area indices out of range");
  const auto d = static_cast<Eigen::Index>(dim());
  Mat acc = Mat::Zero(d, d);
  for (std::size_t m = k; m < l; ++m) {
    acc = chen_combine(acc, fine_[m], path_->increment(k, m), path_->increment(m, m + 1));
  }
  return acc;
}

std::vector<Mat> AreaProcess::over(const std::vector<std::size_t>& indices) const {
  std::vector<Mat> out;
  if (indices.size() < 2) return out;
  out.reserve(indices.size() - 1);
  for (std::size_t i = 0; i + 1 < indices.size(); ++i) out.push_back(between(indices[i], indices[i + 1]));
  return out;
}

// -------------------------------------------------------------- VectorField

VectorField::VectorField(std::size_t n, std::size_t d, Eval eval, Derivs deriv1, Derivs deriv2,
                         double gamma)
    : n_(n), d_(d), eval_(std::move(eval)), deriv1_(std::move(deriv1)), deriv2_(std::move(deriv2)),
      gamma_(gamma) {
  require(n_ >= 1 && d_ >= 1, "vector field dimensions must be positive");
  require(static_cast<bool>(eval_), "vector field needs an evaluator");
}

Mat VectorField::operator()(const Vec& y) const {
  if (static_cast<std::size_t>(y.size()) != n_) throw ContractError("vector field: state dimension mismatch");
  Mat out = eval_(y);
  if (static_cast<std::size_t>(out.rows()) != n_ || static_cast<std::size_t>(out.cols()) != d_) {
    throw ContractError("vector field returned a matrix of the wrong shape");
  }
  return out;
}

std::vector<Mat> VectorField::jacobians(const Vec& y) const {
  if (!deriv1_) throw CapabilityError("vector field has no first derivative");
  if (static_cast<std::size_t>(y.size()) != n_) throw ContractError("vector field: state dimension mismatch");
  auto out = deriv1_(y);
  if (out.size() != d_) throw ContractError("first derivative must return d matrices");
  return out;
}

std::vector<Mat> VectorField::hessians(const Vec& y) const {
  if (!deriv2_) throw CapabilityError("vector field has no second derivative");
  if (static_cast<std::size_t>(y.size()) != n_) throw ContractError("vector field: state dimension mismatch");
  auto out = deriv2_(y);
  if (out.size() != d_ * n_) throw ContractError("second derivative must return d*n matrices");
  return out;
}

namespace {

std::vector<Mat> fd_jacobians(const VectorField::Eval& eval, std::size_t n, std::size_t d,
                              const Vec& y, double step) {
  std::vector<Mat> out(d, Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
  for (std::size_t h = 0; h < n; ++h) {
    Vec yp = y, ym = y;
    const double e = step * std::max(1.0, std::abs(y[static_cast<Eigen::Index>(h)]));
    yp[static_cast<Eigen::Index>(h)] += e;
    ym[static_cast<Eigen::Index>(h)] -= e;
    const Mat diff = (eval(yp) - eval(ym)) / (2.0 * e);
    for (std::size_t j = 0; j < d; ++j) out[j].col(static_cast<Eigen::Index>(h)) = diff.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

std::vector<Mat> fd_hessians(const VectorField::Derivs& jac, std::size_t n, std::size_t d,
                             const Vec& y, double step) {
  const auto ni = static_cast<Eigen::Index>(n);
  std::vector<Mat> out(d * n, Mat::Zero(ni, ni));
  for (std::size_t q = 0; q < n; ++q) {
    Vec yp = y, ym = y;
    const double e = step * std::max(1.0, std::abs(y[static_cast<Eigen::Index>(q)]));
    yp[static_cast<Eigen::Index>(q)] += e;
    ym[static_cast<Eigen::Index>(q)] -= e;
    const auto jp = jac(yp);
    const auto jm = jac(ym);
    for (std::size_t j = 0; j < d; ++j) out[j * n + q] = (jp[j] - jm[j]) / (2.0 * e);
  }
  return out;
}

}  // namespace

VectorField VectorField::with_finite_differences(double step) const {
  Derivs d1 = deriv1_;
  if (!d1) {
    d1 = [eval = eval_, n = n_, d = d_, step](const Vec& y) { return fd_jacobians(eval, n, d, y, step); };
  }
  Derivs d2 = deriv2_;
  if (!d2) {
    d2 = [d1, n = n_, d = d_, step](const Vec& y) { return fd_hessians(d1, n, d, y, step); };
  }
  return VectorField(n_, d_, eval_, std::move(d1), std::move(d2), gamma_);
}

namespace fields {

VectorField zero(std::size_t n, std::size_t d) {
  const auto ni = static_cast<Eigen::Index>(n), di = static_cast<Eigen::Index>(d);
  return VectorField(
      n, d, [ni, di](const Vec&) { return Mat::Zero(ni, di); },
      [ni, d](const Vec&) { return std::vector<Mat>(d, Mat::Zero(ni, ni)); },
      [ni, n, d](const Vec&) { return std::vector<Mat>(d * n, Mat::Zero(ni, ni)); });
}

VectorField constant(const Mat& value) {
  const std::size_t n = static_cast<std::size_t>(value.rows());
  const std::size_t d = static_cast<std::size_t>(value.cols());
  const auto ni = value.rows();
  return VectorField(
      n, d, [value](const Vec&) { return value; },
      [ni, d](const Vec&) { return std::vector<Mat>(d, Mat::Zero(ni, ni)); },
      [ni, n, d](const Vec&) { return std::vector<Mat>(d * n, Mat::Zero(ni, ni)); });
}

VectorField linear(std::vector<Mat> matrices, Mat offsets) {
  require(!matrices.empty(), "linear field needs at least one matrix");
  const auto ni = matrices.front().rows();
  const std::size_t n = static_cast<std::size_t>(ni);
  const std::size_t d = matrices.size();
  for (const auto& m : matrices) require(m.rows() == ni && m.cols() == ni, "linear field matrices must be n x n");
  if (offsets.size() == 0) offsets = Mat::Zero(ni, static_cast<Eigen::Index>(d));
  require(offsets.rows() == ni && offsets.cols() == static_cast<Eigen::Index>(d), "linear field offsets must be n x d");
  auto eval = [matrices, offsets](const Vec& y) {
    Mat out(offsets.rows(), offsets.cols());
    for (std::size_t j = 0; j < matrices.size(); ++j) {
      out.col(static_cast<Eigen::Index>(j)) = matrices[j] * y + offsets.col(static_cast<Eigen::Index>(j));
    }
    return out;
  };
  auto d1 = [matrices](const Vec&) { return matrices; };
  auto d2 = [ni, n, d](const Vec&) { return std::vector<Mat>(d * n, Mat::Zero(ni, ni)); };
  return VectorField(n, d, eval, d1, d2);
}

}  // namespace fields

double derivative_mismatch(const VectorField& f, const std::vector<Vec>& probes, double step) {
  double worst = 0.0;
  auto rel = [](const Mat& a, const Mat& b) {
    const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
    return (a - b).cwiseAbs().maxCoeff() / scale;
  };
  const VectorField::Eval eval = [&f](const Vec& y) { return f(y); };
  const VectorField::Derivs jac = [&f](const Vec& y) { return f.jacobians(y); };
  for (const auto& y : probes) {
    if (f.has_deriv1()) {
      const auto exact = f.jacobians(y);
      const auto approx = fd_jacobians(eval, f.n(), f.d(), y, step);
      for (std::size_t j = 0; j < f.d(); ++j) worst = std::max(worst, rel(exact[j], approx[j]));
    }
    if (f.has_deriv1() && f.has_deriv2()) {
      const auto exact = f.hessians(y);
      const auto approx = fd_hessians(jac, f.n(), f.d(), y, step);
      for (std::size_t m = 0; m < exact.size(); ++m) worst = std::max(worst, rel(exact[m], approx[m]));
    }
  }
  return worst;
}

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Euler: return "euler";
    case SchemeKind::Corrected: return "corrected";
    case SchemeKind::Extended: return "extended";
    case SchemeKind::Augmented: return "augmented";
  }
  return "unknown";
}

// ------------------------------------------------------------ GrowthEnvelope

GrowthEnvelope GrowthEnvelope::power_law(double cD, double aD, double cA, double aA, double beta,
                                         double p) {
  require(cD > 0.0 && cA > 0.0, "envelope constants must be positive");
  require(aD >= 0.0 && aA >= 0.0, "envelopes must be non-decreasing");
  GrowthEnvelope env;
  env.D = [cD, aD](double r) { return cD * std::pow(r, aD); };
  env.A = [cA, aA](double r) { return cA * std::pow(r, aA); };
  env.beta = beta;
  env.p = p;
  return env;
}

void GrowthEnvelope::validate(double r_max) const {
  require(static_cast<bool>(D) && static_cast<bool>(A), "envelope functions missing");
  require(beta > 0.0 && beta < 2.0, "envelope beta must lie in (0,2)");
  const int samples = 400;
  const double lmax = std::log(r_max);
  double prev_d = 0.0, prev_a = 0.0;
  for (int s = 0; s <= samples; ++s) {
    const double r = std::exp(lmax * s / samples);
    const double d = D(r), a = A(r);
    if (!(d > 0.0) || !(a > 0.0)) throw ContractError("envelopes must be positive");
    if (d < prev_d * (1.0 - 1e-12) || a < prev_a * (1.0 - 1e-12)) {
      throw ContractError("envelopes must be non-decreasing");
    }
    if (d > std::pow(r, beta) * a * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "envelope violates D(R) <= R^beta A(R) at R = " << r;
      throw ContractError(os.str());
    }
    prev_d = d;
    prev_a = a;
  }
}

// ---------------------------------------------------------------- control fit

ControlModulus control_fit(const DriverPath& path, double p) {
  require(p >= 1.0, "control_fit needs p >= 1");
  require(path.size() >= 2, "control_fit needs at least two samples");
  const auto& t = path.grid().times();
  const std::size_t N = path.size();
  const auto d = static_cast<std::size_t>(path.dim());
  // Branch and bound over a segment tree of componentwise extremes: a block
  // of later points is skipped when even its widest possible increment,
  // taken at its earliest time, cannot beat the running maximum. The result
  // equals the exhaustive maximum.
  std::size_t P = 1;
  while (P < N) P *= 2;
  std::vector<double> hi(2 * P * d, -std::numeric_limits<double>::infinity());
  std::vector<double> lo(2 * P * d, std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < N; ++k) {
    for (std::size_t i = 0; i < d; ++i) hi[(P + k) * d + i] = lo[(P + k) * d + i] = path[k][static_cast<Eigen::Index>(i)];
  }
  for (std::size_t v = P; v-- > 1;) {
    for (std::size_t i = 0; i < d; ++i) {
      hi[v * d + i] = std::max(hi[2 * v * d + i], hi[(2 * v + 1) * d + i]);
      lo[v * d + i] = std::min(lo[2 * v * d + i], lo[(2 * v + 1) * d + i]);
    }
  }
  auto ratio = [&](std::size_t k, std::size_t l) {
    const double inc = (path[l] - path[k]).cwiseAbs().maxCoeff();
    return inc == 0.0 ? 0.0 : std::pow(inc, p) / (t[l] - t[k]);
  };
  double c = 0.0;
  for (std::size_t k = 0; k + 1 < N; ++k) c = std::max(c, ratio(k, k + 1));
  struct Node {
    std::size_t v, a, b;
  };
  std::vector<Node> stack;
  for (std::size_t k = 0; k + 2 < N; ++k) {
    stack.assign(1, Node{1, 0, P});
    while (!stack.empty()) {
      const Node nd = stack.back();
      stack.pop_back();
      const std::size_t first = std::max(nd.a, k + 2);
      if (first >= nd.b || first >= N) continue;
      if (nd.v >= P) {
        c = std::max(c, ratio(k, nd.a));
        continue;
      }
      double reach = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double x = path[k][static_cast<Eigen::Index>(i)];
        reach = std::max({reach, hi[nd.v * d + i] - x, x - lo[nd.v * d + i]});
      }
      if (std::pow(reach, p) <= c * (t[first] - t[k])) continue;
      const std::size_t mid = (nd.a + nd.b) / 2;
      stack.push_back(Node{2 * nd.v + 1, mid, nd.b});
      stack.push_back(Node{2 * nd.v, nd.a, mid});
    }
  }
  return ControlModulus::linear(c);
}

ControlModulus control_fit(const DriverPath& path, const AreaProcess& area, double p) {
  double c = control_fit(path, p).constant();
  const auto& t = path.grid().times();
  const auto d = static_cast<Eigen::Index>(path.dim());
  for (std::size_t k = 0; k < path.size(); ++k) {
    Mat acc = Mat::Zero(d, d);
    for (std::size_t l = k + 1; l < path.size(); ++l) {
      acc = chen_combine(acc, area.fine(l - 1), path.increment(k, l - 1), path.increment(l - 1, l));
      const double a = acc.cwiseAbs().maxCoeff();
      if (a == 0.0) continue;
      c = std::max(c, std::pow(a, 0.5 * p) / (t[l] - t[k]));
    }
  }
  return ControlModulus::linear(c);
}

}  // namespace roughstep
