#include "roughstep/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "roughstep/numerics.hpp"

namespace roughstep {

// ---------------------------------------------------------------- rates

RateReport fit_rate(std::vector<std::size_t> K, std::vector<double> errors, std::string oracle, std::size_t drop) {
  if (K.size() != errors.size() || K.empty()) throw ContractError("fit_rate: K and errors must match");
  for (std::size_t i = 1; i < K.size(); ++i) {
    if (K[i] <= K[i - 1]) throw ContractError("fit_rate: K must be strictly increasing");
  }
  RateReport rep;
  rep.K = std::move(K);
  rep.errors = std::move(errors);
  rep.oracle = std::move(oracle);
  rep.dropped = drop;
  std::vector<double> lx, ly;
  bool any_nonzero = false;
  for (std::size_t i = 0; i < rep.K.size(); ++i) {
    const double e = rep.errors[i];
    if (!(e >= 0.0) || !std::isfinite(e)) throw ContractError("fit_rate: errors must be finite and non-negative");
    if (e > 0.0) any_nonzero = true;
    if (i < drop) continue;
    if (e == 0.0) {
      rep.notes.push_back("zero error at K = " + std::to_string(rep.K[i]) + " excluded");
      continue;
    }
    lx.push_back(std::log2(static_cast<double>(rep.K[i])));
    ly.push_back(std::log2(e));
  }
  if (!any_nonzero) {
    rep.exact = true;
    rep.notes.push_back("exact: every error is zero");
    return rep;
  }
  if (lx.size() < 2) throw ContractError("fit_rate: fewer than two usable meshes after dropping");
  const auto fit = numerics::least_squares(lx, ly);
  rep.slope = fit.slope;
  rep.intercept = fit.intercept;
  return rep;
}

namespace oracles {

Oracle gbm_ito(const DriverPath& path, double y0) {
  if (path.dim() != 1) throw ContractError("gbm oracle needs a scalar driver");
  const double w = path.values().back()[0] - path.values().front()[0];
  const double T = path.grid().back() - path.grid().front();
  return Oracle{"closed form y0*exp(W(T) - T/2)", [w, T, y0] { return Vec::Constant(1, y0 * std::exp(w - 0.5 * T)); }};
}

Oracle gbm_stratonovich(const DriverPath& path, double y0) {
  if (path.dim() != 1) throw ContractError("gbm oracle needs a scalar driver");
  const double w = path.values().back()[0] - path.values().front()[0];
  return Oracle{"closed form y0*exp(W(T))", [w, y0] { return Vec::Constant(1, y0 * std::exp(w)); }};
}

Oracle fine_corrected(const VectorField& f, const DriverPath& path, const AreaProcess& area, const Vec& y0) {
  const Vec terminal = corrected_solve(f, path, area, path.grid(), y0).states.back();
  return Oracle{"corrected scheme on the full driver grid", [terminal] { return terminal; }};
}

}  // namespace oracles

RateReport convergence_study(const ConvergenceProblem& problem, SchemeKind scheme, const std::vector<std::size_t>& K,
                             const Oracle& oracle, std::size_t drop) {
  if (scheme != SchemeKind::Euler && scheme != SchemeKind::Corrected) {
    throw ContractError("convergence_study supports the euler and corrected schemes");
  }
  if (scheme == SchemeKind::Corrected && !problem.area) throw ContractError("corrected scheme needs an area process");
  const Vec target = oracle.terminal();
  const std::size_t steps = problem.path.grid().steps();
  std::vector<double> errors;
  for (std::size_t k : K) {
    if (k == 0 || steps % k != 0) throw ContractError("convergence_study: every K must divide the driver grid");
    const Partition part = problem.path.grid().coarsen(steps / k);
    const Trajectory tr = scheme == SchemeKind::Euler
                              ? euler_solve(problem.f, problem.path, part, problem.y0)
                              : corrected_solve(problem.f, problem.path, *problem.area, part, problem.y0);
    if (tr.exploded_at) throw NumericalError("convergence_study: trajectory exploded at K = " + std::to_string(k));
    errors.push_back((tr.states.back() - target).norm());
  }
  return fit_rate(K, std::move(errors), oracle.description, drop);
}

// ------------------------------------------------------------ condition (21)

namespace {

struct LevelData {
  double h = 0.0;
  std::vector<Mat> prefix;  // prefix[m] = Σ_{l<m} A(lh, (l+1)h)
};

LevelData level_data(const AreaProcess& area, int level) {
  const Partition& grid = area.path().grid();
  if (!grid.uniform()) throw ContractError("condition21: area must live on a uniform grid");
  const std::size_t steps = grid.steps();
  if (level < 0 || level > 62 || (std::size_t{1} << level) > steps || steps % (std::size_t{1} << level) != 0) {
    throw ContractError("condition21: level not supported by the area grid");
  }
  const std::size_t count = std::size_t{1} << level;
  const std::size_t stride = steps / count;
  LevelData out;
  out.h = (grid.back() - grid.front()) / static_cast<double>(count);
  const auto d = static_cast<Eigen::Index>(area.dim());
  out.prefix.reserve(count + 1);
  out.prefix.push_back(Mat::Zero(d, d));
  for (std::size_t l = 0; l < count; ++l) {
    out.prefix.push_back(out.prefix.back() + area.between(l * stride, (l + 1) * stride));
  }
  return out;
}

double window_ratio(const LevelData& ld, double alpha, double beta, std::size_t k, std::size_t m, std::size_t i,
                    std::size_t j) {
  const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
  const double sum = ld.prefix[m](ii, jj) - ld.prefix[k](ii, jj);
  return std::abs(sum) / (std::pow(static_cast<double>(m - k), beta) * std::pow(ld.h, 2.0 * alpha));
}

}  // namespace

ConditionStat condition21_stat(const AreaProcess& area, double alpha, double beta, int level_min, int level_max,
                               std::size_t window_cap) {
  if (level_min > level_max || level_min < 0) throw ContractError("condition21: invalid level range");
  if (window_cap < 1) throw ContractError("condition21: window cap must be positive");
  ConditionStat st;
  st.alpha = alpha;
  st.beta = beta;
  st.window_cap = window_cap;
  const std::size_t d = area.dim();
  for (int level = level_min; level <= level_max; ++level) {
    const LevelData ld = level_data(area, level);
    const std::size_t count = ld.prefix.size() - 1;
    const double h2a = std::pow(ld.h, 2.0 * alpha);
    std::vector<double> norm(std::min(count, window_cap) + 1);
    for (std::size_t w = 1; w < norm.size(); ++w) norm[w] = std::pow(static_cast<double>(w), beta) * h2a;
    double best = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        std::vector<double> pre(count + 1);
        for (std::size_t m = 0; m <= count; ++m) pre[m] = ld.prefix[m](ii, jj);
        for (std::size_t m = 1; m <= count; ++m) {
          const std::size_t k0 = m > window_cap ? m - window_cap : 0;
          for (std::size_t k = k0; k < m; ++k) {
            const double v = std::abs(pre[m] - pre[k]) / norm[m - k];
            if (v > best) best = v;
            if (v > st.value) {
              st.value = v;
              st.level = level;
              st.k = k;
              st.m = m;
              st.i = i;
              st.j = j;
            }
          }
        }
      }
    }
    st.levels.push_back(level);
    st.per_level.push_back(best);
  }
  return st;
}

double condition21_window(const AreaProcess& area, double alpha, double beta, int level, std::size_t k, std::size_t m,
                          std::size_t i, std::size_t j) {
  const LevelData ld = level_data(area, level);
  if (!(k < m) || m >= ld.prefix.size() || i >= area.dim() || j >= area.dim()) {
    throw ContractError("condition21: window out of range");
  }
  return window_ratio(ld, alpha, beta, k, m, i, j);
}

// ------------------------------------------------------- Riemann recovery

std::vector<double> riemann_area_recovery(const DriverPath& path, const AreaProcess& area, std::size_t s,
                                          std::size_t t, const std::vector<std::size_t>& N) {
  if (s > t || t >= path.size()) throw ContractError("riemann_area_recovery: invalid grid indices");
  std::vector<double> out;
  if (s == t) {
    out.assign(N.size(), 0.0);
    return out;
  }
  const Mat target = area.between(s, t);
  const Vec xs = path[s];
  const Vec dx_total = path.increment(s, t);
  for (std::size_t n : N) {
    if (n == 0 || (t - s) % n != 0) throw ContractError("riemann_area_recovery: N must divide the index span");
    const std::size_t stride = (t - s) / n;
    Mat sum = Mat::Zero(target.rows(), target.cols());
    for (std::size_t q = 0; q < n; ++q) {
      const std::size_t a = s + q * stride;
      sum += path[a] * path.increment(a, a + stride).transpose();
    }
    sum -= xs * dx_total.transpose();
    out.push_back((sum - target).cwiseAbs().maxCoeff());
  }
  return out;
}

std::vector<double> riemann_area_recovery(const PolynomialPath& poly, double s, double t,
                                          const std::vector<std::size_t>& N) {
  if (s > t) throw ContractError("riemann_area_recovery: need s <= t");
  std::vector<double> out;
  const Mat target = poly.area(s, t);
  const Vec xs = poly.value(s), xt = poly.value(t);
  for (std::size_t n : N) {
    if (n == 0) throw ContractError("riemann_area_recovery: N must be positive");
    if (s == t) {
      out.push_back(0.0);
      continue;
    }
    Mat sum = Mat::Zero(target.rows(), target.cols());
    Vec prev = xs;
    for (std::size_t q = 0; q < n; ++q) {
      const double u = q + 1 == n ? t : s + (t - s) * static_cast<double>(q + 1) / static_cast<double>(n);
      const Vec next = poly.value(u);
      sum += prev * (next - prev).transpose();
      prev = next;
    }
    sum -= xs * (xt - xs).transpose();
    out.push_back((sum - target).cwiseAbs().maxCoeff());
  }
  return out;
}

double chen_consistency(const AreaProcess& area, std::size_t triples, std::uint64_t seed) {
  const std::size_t N = area.intervals();
  if (N < 2) throw ContractError("chen_consistency: need at least two intervals");
  const DriverPath& path = area.path();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, N);
  double worst = 0.0;
  for (std::size_t q = 0; q < triples; ++q) {
    std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    if (a == b || b == c) {
      --q;
      continue;
    }
    const Mat whole = area.between(a, c);
    const Mat split = chen_combine(area.between(a, b), area.between(b, c), path.increment(a, b), path.increment(b, c));
    const double scale = std::max(1.0, whole.cwiseAbs().maxCoeff());
    worst = std::max(worst, (whole - split).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

// ----------------------------------------------------- explosion criterion

double power_law_criterion_exponent(double a, double d, double beta, double p) {
  return (a * (1.0 - p) + d * (p - 1.0 - beta * p)) / beta;
}

CriterionReport explosion_criterion(const GrowthEnvelope& env, double p, double gamma, double R_max) {
  const double beta = gamma - 1.0;
  if (!(p >= 1.0) || !(beta > 0.0)) throw ContractError("explosion_criterion: invalid exponents");
  if (std::abs(env.beta - beta) > 1e-12) throw ContractError("explosion_criterion: envelope beta must equal gamma - 1");
  if (!(R_max >= 1e3)) throw ContractError("explosion_criterion: R_max must be at least 1e3");
  GrowthEnvelope checked = env;
  checked.p = p;
  checked.validate(R_max);
  auto integrand = [&](double R) {
    return std::pow(std::pow(env.A(R), 1.0 - p) * std::pow(env.D(R), p - 1.0 - beta * p), 1.0 / beta);
  };
  CriterionReport rep;
  rep.edges.push_back(1.0);
  while (rep.edges.back() * 2.0 <= R_max) {
    const double lo = rep.edges.back(), hi = 2.0 * lo;
    rep.partial.push_back(numerics::adaptive_simpson(integrand, lo, hi, 1e-10));
    rep.edges.push_back(hi);
  }
  // Tail trend over the upper half of the dyadic ranges.
  const std::size_t J = rep.partial.size();
  const std::size_t first = J / 2;
  std::vector<double> xs, ys;
  for (std::size_t j = first; j < J; ++j) {
    if (!(rep.partial[j] > 0.0)) throw NumericalError("explosion_criterion: non-positive contribution");
    xs.push_back(static_cast<double>(j));
    ys.push_back(std::log2(rep.partial[j]));
  }
  rep.tail_slope = numerics::least_squares(xs, ys).slope;
  rep.converges = rep.tail_slope < -1e-6;
  return rep;
}

// ----------------------------------------------------------- nonuniqueness

std::vector<double> example1_second_solution(const CounterexampleConfig& cfg, const DriverPath& path) {
  const double g = cfg.gamma, b = cfg.beta_exp, r = cfg.rho_exp;
  const auto& t = path.grid().times();
  // Phase average of (2 + sin θ)^γ sin θ sets the leading term on [0, t_min].
  const double mean = numerics::adaptive_simpson(
                          [g](double th) { return std::pow(2.0 + std::sin(th), g) * std::sin(th); }, 0.0,
                          2.0 * std::numbers::pi, 1e-12) /
                      (2.0 * std::numbers::pi);
  const double e1 = b * (g + 1.0) - r;
  std::vector<double> y(t.size(), 0.0);
  if (t.size() < 2) return y;
  y[1] = r * mean * std::pow(t[1], e1) / e1;
  auto integrand = [&](double u) {
    const Vec x = example1_value(cfg, u);
    const Vec v = example1_velocity(cfg, u);
    return std::pow(x[1], g) * v[0];
  };
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    y[k + 1] = y[k] + numerics::gauss_legendre(integrand, t[k], t[k + 1], 2);
  }
  return y;
}

NonuniquenessReport nonuniqueness_demo(const CounterexampleConfig& cfg, std::size_t window) {
  if (window < 1) throw ContractError("nonuniqueness_demo: window must be positive");
  const Example1 ex = example1_driver(cfg);
  const auto& times = ex.path.grid().times();
  const std::vector<double> y1 = example1_second_solution(cfg, ex.path);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double bound = 3.0 * std::pow(times[k], cfg.beta_exp);
    if (!(y1[k] >= bound)) {
      std::ostringstream os;
      os << "nonuniqueness_demo: y1 >= 3 t^beta fails at t = " << times[k] << " (y1 = " << y1[k]
         << ", 3 t^beta = " << bound << ")";
      throw ContractError(os.str());
    }
    if (!(bound >= ex.path[k][1])) {
      std::ostringstream os;
      os << "nonuniqueness_demo: 3 t^beta >= x2 fails at t = " << times[k];
      throw ContractError(os.str());
    }
  }
  Trajectory traj_a{ex.path.grid(), {}, std::nullopt, SchemeKind::Euler};
  Trajectory traj_b{ex.path.grid(), {}, std::nullopt, SchemeKind::Euler};
  for (std::size_t k = 0; k < times.size(); ++k) {
    Vec a(2), b(2);
    a << 0.0, ex.path[k][1];
    b << y1[k], ex.path[k][1];
    traj_a.states.push_back(a);
    traj_b.states.push_back(b);
  }
  NonuniquenessReport rep{std::move(traj_a), std::move(traj_b)};
  rep.window = window;
  rep.omega = control_fit(ex.path, cfg.p);
  const auto pairs = window_pairs(ex.path.grid().steps(), window);
  rep.defect_a = defect(rep.traj_a, ex.field, ex.path, nullptr, pairs, rep.omega, cfg.gamma, cfg.p);
  rep.defect_b = defect(rep.traj_b, ex.field, ex.path, nullptr, pairs, rep.omega, cfg.gamma, cfg.p);
  rep.separation = std::abs(rep.traj_b.states.back()[0] - rep.traj_a.states.back()[0]);
  const double M = std::max(rep.defect_a.fitted_M, rep.defect_b.fitted_M);
  rep.defect_scale = M * std::pow(rep.omega(times.front(), times.back()), cfg.gamma / cfg.p);
  return rep;
}

// ---------------------------------------------------------- Hölder estimates

HolderSandwich holder_sandwich(const ChainCurve& curve, std::size_t pairs, std::uint64_t seed, double min_gap) {
  if (pairs == 0) throw ContractError("holder_sandwich: need at least one pair");
  HolderSandwich out;
  out.min_gap = min_gap > 0.0 ? min_gap : curve.delta(curve.depth());
  if (out.min_gap >= 0.5) throw ContractError("holder_sandwich: min_gap too large");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.c1 = std::numeric_limits<double>::infinity();
  while (out.pairs < pairs) {
    double s = unit(rng), t = unit(rng);
    if (s > t) std::swap(s, t);
    if (t - s < out.min_gap) continue;
    const double r = (curve.point(t) - curve.point(s)).norm() / std::pow(t - s, curve.alpha());
    out.c1 = std::min(out.c1, r);
    out.c2 = std::max(out.c2, r);
    ++out.pairs;
  }
  out.ratio = out.c1 > 0.0 ? out.c2 / out.c1 : std::numeric_limits<double>::infinity();
  return out;
}

double holder_estimate(const DriverPath& path) {
  if (path.size() < 64) throw ContractError("holder_estimate needs at least 64 samples");
  const double mean_step = (path.grid().back() - path.grid().front()) / static_cast<double>(path.grid().steps());
  std::vector<double> xs, ys;
  for (std::size_t lag = 1; lag <= path.grid().steps() / 4; lag *= 2) {
    double sup = 0.0;
    for (std::size_t k = 0; k + lag < path.size(); ++k) sup = std::max(sup, path.increment(k, k + lag).norm());
    if (sup == 0.0) continue;
    xs.push_back(std::log(mean_step * static_cast<double>(lag)));
    ys.push_back(std::log(sup));
  }
  if (xs.empty()) return std::numeric_limits<double>::infinity();
  if (xs.size() < 2) throw ContractError("holder_estimate: too few lags with non-zero increments");
  return numerics::least_squares(xs, ys).slope;
}

}  // namespace roughstep
