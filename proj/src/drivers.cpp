#include "roughstep/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace roughstep {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

// Returns a with fl(fl(a + c) - c) == a, so the Itô/Stratonovich diagonal
// shift is exactly invertible in floating point.
double shift_stable(double a, double c) {
  for (int it = 0; it < 16; ++it) {
    const double next = (a + c) - c;
    if (next == a) return a;
    a = next;
  }
  return a;
}

}  // namespace

// ----------------------------------------------------------------- Brownian

void BrownianConfig::validate() const {
  require(d >= 1, "brownian: d must be >= 1");
  require(levels >= 1 && levels <= 24, "brownian: levels must lie in [1, 24]");
  require(substeps >= 1, "brownian: substeps must be >= 1");
  require(T > 0.0 && std::isfinite(T), "brownian: T must be positive");
}

DriverPath brownian_path(const BrownianConfig& cfg) {
  cfg.validate();
  const std::size_t K = cfg.steps();
  const auto d = static_cast<Eigen::Index>(cfg.d);
  const double h = cfg.T / static_cast<double>(K);
  const double sd = std::sqrt(h);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> values(K + 1, Vec::Zero(d));
  for (std::size_t k = 0; k < K; ++k) {
    values[k + 1] = values[k];
    for (Eigen::Index j = 0; j < d; ++j) values[k + 1][j] += sd * normal(rng);
  }
  return DriverPath(Partition::uniform(0.0, cfg.T, K), std::move(values), 0.5, 2.0);
}

AreaProcess ito_area(const DriverPath& path, const BrownianConfig& cfg) {
  cfg.validate();
  const std::size_t K = cfg.steps();
  if (path.size() != K + 1 || path.dim() != cfg.d || std::abs(path.grid().back() - cfg.T) > 1e-12 * cfg.T ||
      path.grid().front() != 0.0) {
    throw ContractError("ito_area: path does not match the Brownian configuration");
  }
  const auto d = static_cast<Eigen::Index>(cfg.d);
  const int R = cfg.substeps;
  const double h = cfg.T / static_cast<double>(K);
  const double sub_sd = std::sqrt(h / R);
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    0x6272u, 0x6964u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Mat> fine;
  fine.reserve(K);
  Mat xi(R, d);
  for (std::size_t k = 0; k < K; ++k) {
    const Vec dw = path.increment(k, k + 1);
    Mat a(d, d);
    for (Eigen::Index j = 0; j < d; ++j) a(j, j) = shift_stable(0.5 * dw[j] * dw[j] - 0.5 * h, 0.5 * h);
    if (d > 1) {
      for (int i = 0; i < R; ++i)
        for (Eigen::Index j = 0; j < d; ++j) xi(i, j) = sub_sd * normal(rng);
      // Bridge increments pinned to the fine increment.
      const Eigen::RowVectorXd shift = dw.transpose() / R - xi.colwise().mean();
      Mat inc = xi.rowwise() + shift;
      Mat left_sum = Mat::Zero(d, d);
      Vec pos = Vec::Zero(d);
      for (int i = 0; i < R; ++i) {
        left_sum += pos * inc.row(i);
        pos += inc.row(i).transpose();
      }
      for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index j = 0; j < d; ++j) {
          if (r == j) continue;
          a(r, j) = 0.5 * dw[r] * dw[j] + 0.5 * (left_sum(r, j) - left_sum(j, r));
        }
      }
    }
    fine.push_back(std::move(a));
  }
  return AreaProcess(path, std::move(fine), AreaKind::Ito);
}

namespace {

AreaProcess diagonal_shift(const AreaProcess& in, double sign, AreaKind out_kind) {
  const auto& t = in.path().grid().times();
  std::vector<Mat> fine = in.fine_areas();
  for (std::size_t k = 0; k < fine.size(); ++k) {
    const double half = 0.5 * (t[k + 1] - t[k]);
    for (Eigen::Index j = 0; j < fine[k].rows(); ++j) fine[k](j, j) += sign * half;
  }
  return AreaProcess(in.path(), std::move(fine), out_kind);
}

}  // namespace

AreaProcess stratonovich_area(const AreaProcess& ito) {
  if (ito.kind() != AreaKind::Ito) throw ContractError("stratonovich_area expects an Ito area process");
  return diagonal_shift(ito, 1.0, AreaKind::Stratonovich);
}

AreaProcess ito_from_stratonovich(const AreaProcess& strat) {
  if (strat.kind() != AreaKind::Stratonovich) {
    throw ContractError("ito_from_stratonovich expects a Stratonovich area process");
  }
  return diagonal_shift(strat, -1.0, AreaKind::Ito);
}

// --------------------------------------------------------------- polynomial

namespace {

using Poly = std::vector<double>;

double horner(const Poly& c, double t) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
  return v;
}

// Coefficients of q(v) = c(s + v).
Poly taylor_shift(Poly c, double s) {
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = n - 1; j > i; --j) c[j - 1] += s * c[j];
  return c;
}

Poly derivative(const Poly& c) {
  Poly out;
  for (std::size_t i = 1; i < c.size(); ++i) out.push_back(static_cast<double>(i) * c[i]);
  return out;
}

Poly multiply(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// ∫_0^w q(v) dv.
double integrate0(const Poly& q, double w) {
  double v = 0.0;
  for (std::size_t i = q.size(); i-- > 0;) v = v * w + q[i] / static_cast<double>(i + 1);
  return v * w;
}

}  // namespace

PolynomialPath::PolynomialPath(std::vector<std::vector<double>> coeffs) : coeffs_(std::move(coeffs)) {
  require(!coeffs_.empty(), "polynomial path needs at least one component");
  for (auto& c : coeffs_) {
    if (c.empty()) c.push_back(0.0);
    for (double v : c) require(std::isfinite(v), "polynomial coefficients must be finite");
  }
}

Vec PolynomialPath::value(double t) const {
  Vec v(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) v[static_cast<Eigen::Index>(i)] = horner(coeffs_[i], t);
  return v;
}

Mat PolynomialPath::area(double s, double t) const {
  require(s <= t, "polynomial area needs s <= t");
  const auto d = static_cast<Eigen::Index>(dim());
  std::vector<Poly> shifted(dim()), dshifted(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    shifted[i] = taylor_shift(coeffs_[i], s);
    shifted[i][0] = 0.0;  // x^i(s + v) − x^i(s)
    dshifted[i] = derivative(taylor_shift(coeffs_[i], s));
  }
  Mat a(d, d);
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          integrate0(multiply(shifted[i], dshifted[j]), t - s);
  return a;
}

DriverPath PolynomialPath::sample(const Partition& grid) const {
  std::vector<Vec> values;
  values.reserve(grid.size());
  for (double t : grid.times()) values.push_back(value(t));
  return DriverPath(grid, std::move(values), 1.0, 1.0);
}

AreaProcess analytic_area(const PolynomialPath& poly, const Partition& grid) {
  std::vector<Mat> fine;
  fine.reserve(grid.steps());
  for (std::size_t k = 0; k < grid.steps(); ++k) fine.push_back(poly.area(grid[k], grid[k + 1]));
  return AreaProcess(poly.sample(grid), std::move(fine), AreaKind::Analytic);
}

AreaProcess degenerate_area(const DriverPath& path) {
  std::vector<Mat> fine;
  fine.reserve(path.size() - 1);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    fine.push_back(-path[k] * path.increment(k, k + 1).transpose());
  }
  return AreaProcess(path, std::move(fine), AreaKind::Degenerate);
}

AreaProcess perturbed_area(const AreaProcess& area, const std::function<Mat(double)>& rho) {
  const auto& t = area.path().grid().times();
  std::vector<Mat> fine = area.fine_areas();
  Mat prev = rho(t[0]);
  const auto d = static_cast<Eigen::Index>(area.dim());
  require(prev.rows() == d && prev.cols() == d, "perturbation must be d x d");
  for (std::size_t k = 0; k < fine.size(); ++k) {
    Mat next = rho(t[k + 1]);
    fine[k] += next - prev;
    prev = std::move(next);
  }
  return AreaProcess(area.path(), std::move(fine), AreaKind::Perturbed);
}

// ---------------------------------------------------------- counterexample

void CounterexampleConfig::validate() const {
  const bool low = 1.0 < gamma && gamma < p && p < 2.0;
  const bool high = 2.0 < gamma && gamma < p && p < 3.0;
  if (!low && !high) {
    throw ContractError("counterexample: need 1 < gamma < p < 2 or 2 < gamma < p < 3");
  }
  require(beta_exp > 0.0 && rho_exp > 0.0, "counterexample: beta and rho must be positive");
  const double lo = rho_exp / beta_exp, hi = (rho_exp + 1.0) / beta_exp;
  if (!(gamma < lo && hi < p)) {
    std::ostringstream os;
    os << "counterexample: need gamma < rho/beta < (rho+1)/beta < p, got rho/beta = " << lo
       << ", (rho+1)/beta = " << hi;
    throw ContractError(os.str());
  }
  require(tau > 0.0, "counterexample: tau must be positive");
  require(t_max > 0.0 && cycles >= 1.0 && points_per_cycle >= 4, "counterexample: invalid sampling");
}

double CounterexampleConfig::t_min() const {
  const double phase = std::pow(t_max, -rho_exp) + 2.0 * std::numbers::pi * cycles;
  return std::pow(phase, -1.0 / rho_exp);
}

Vec example1_value(const CounterexampleConfig& cfg, double t) {
  Vec v = Vec::Zero(2);
  if (t <= 0.0) return v;
  const double amp = std::pow(t, cfg.beta_exp);
  const double ph = std::pow(t, -cfg.rho_exp);
  v[0] = amp * std::cos(ph);
  v[1] = amp * (2.0 + std::sin(ph));
  return v;
}

Vec example1_velocity(const CounterexampleConfig& cfg, double t) {
  const double b = cfg.beta_exp, r = cfg.rho_exp;
  const double amp = std::pow(t, b);
  const double ph = std::pow(t, -r);
  const double dph = -r * ph / t;
  Vec v(2);
  v[0] = b * amp / t * std::cos(ph) - amp * std::sin(ph) * dph;
  v[1] = b * amp / t * (2.0 + std::sin(ph)) + amp * std::cos(ph) * dph;
  return v;
}

DriverPath example1_path(const CounterexampleConfig& cfg) {
  cfg.validate();
  const double ph_lo = std::pow(cfg.t_max, -cfg.rho_exp);
  const double ph_hi = std::pow(cfg.t_min(), -cfg.rho_exp);
  const auto n = static_cast<std::size_t>(std::llround(cfg.cycles * cfg.points_per_cycle));
  std::vector<double> times;
  times.reserve(n + 2);
  times.push_back(0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    const double ph = ph_hi + (ph_lo - ph_hi) * static_cast<double>(i) / static_cast<double>(n);
    times.push_back(i == n ? cfg.t_max : std::pow(ph, -1.0 / cfg.rho_exp));
  }
  std::vector<Vec> values;
  values.reserve(times.size());
  for (double t : times) values.push_back(example1_value(cfg, t));
  return DriverPath(Partition(std::move(times)), std::move(values), 1.0 / cfg.p, cfg.p);
}

VectorField example1_field(const CounterexampleConfig& cfg, double coefficient) {
  const double g = cfg.gamma, two_tau = 2.0 * cfg.tau, c = coefficient;
  auto eval = [g, two_tau, c](const Vec& y) {
    Mat f = Mat::Zero(2, 2);
    f(1, 1) = 1.0;
    if (y[1] > 0.0) {
      const double r = std::min(std::abs(y[0]) / (two_tau * y[1]), 1.0);
      f(0, 0) = c * r * r * (3.0 - 2.0 * r) * std::pow(y[1], g);
    }
    return f;
  };
  auto jac = [g, two_tau, c](const Vec& y) {
    std::vector<Mat> out(2, Mat::Zero(2, 2));
    if (y[1] > 0.0) {
      const double raw = std::abs(y[0]) / (two_tau * y[1]);
      const double pw = std::pow(y[1], g);
      if (raw < 1.0) {
        const double s = raw * raw * (3.0 - 2.0 * raw);
        const double ds = 6.0 * raw * (1.0 - raw);
        const double sgn = y[0] > 0.0 ? 1.0 : (y[0] < 0.0 ? -1.0 : 0.0);
        out[0](0, 0) = c * ds * sgn / (two_tau * y[1]) * pw;
        out[0](0, 1) = c * (-ds * raw / y[1] * pw + s * g * pw / y[1]);
      } else {
        out[0](0, 1) = c * g * pw / y[1];
      }
    }
    return out;
  };
  return VectorField(2, 2, eval, jac, {}, cfg.gamma);
}

Example1 example1_driver(const CounterexampleConfig& cfg) {
  cfg.validate();
  return Example1{example1_path(cfg), example1_field(cfg)};
}

VectorField example2_field(const CounterexampleConfig& cfg) {
  cfg.validate();
  return example1_field(cfg, 1.0 - cfg.rho_exp);
}

}  // namespace roughstep
