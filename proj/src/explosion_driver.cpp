#include "roughstep/explosion_driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "roughstep/numerics.hpp"

namespace roughstep {

namespace {

double bump(double u) {
  if (u <= 1.0 || u >= 2.0) return 0.0;
  return std::exp(-1.0 / ((u - 1.0) * (2.0 - u)));
}

constexpr double kQuadTol = 1e-8;

}  // namespace

ExplosionModel::ExplosionModel(const GrowthEnvelope& env, double p, double gamma,
                               const ExplosionOptions& opts)
    : beta_(gamma - 1.0), p_(p) {
  const bool case_i = 1.0 < p && p < gamma && gamma < 2.0;
  const bool case_ii = 2.0 <= p && p < gamma && gamma < 3.0;
  if (!case_i && !case_ii) throw ContractError("explosion_driver: need 1 < p < gamma < 2 or 2 <= p < gamma < 3");
  if (std::abs(env.beta - beta_) > 1e-12) throw ContractError("explosion_driver: envelope beta must equal gamma - 1");
  if (opts.points_per_efold < 4.0 || opts.y_max < 10.0 || opts.inf_points < 2 || opts.inf_span <= 1.0) {
    throw ContractError("explosion_driver: invalid options");
  }
  GrowthEnvelope checked = env;
  checked.p = p;
  checked.validate(opts.y_max);

  rho1_ = (beta_ * p + 1.0 - p) / beta_;
  rho2_ = (p - 1.0) / beta_;
  r_ = opts.r_factor / std::min(rho1_, rho2_);
  h_ = 1.0 / opts.points_per_efold;

  // Infimum regularisation on a finer log grid covering the mollifier reach.
  const double tilde_h = h_ / 4.0;
  const double log_top = std::log(opts.y_max) + 2.0 * std::log(2.0) + h_;
  const auto n_tilde = static_cast<std::size_t>(std::ceil(log_top / tilde_h)) + 1;
  std::vector<double> us(static_cast<std::size_t>(opts.inf_points));
  for (int j = 0; j < opts.inf_points; ++j) {
    us[static_cast<std::size_t>(j)] = std::pow(opts.inf_span, static_cast<double>(j) / (opts.inf_points - 1));
  }
  auto regularise = [&](const std::function<double(double)>& g, double y) {
    double best = std::numeric_limits<double>::infinity();
    for (double u : us) best = std::min(best, std::pow(u, r_) * g(std::max(y / u, 1.0)));
    return best;
  };
  for (std::size_t i = 0; i < n_tilde; ++i) {
    const double y = std::exp(tilde_h * static_cast<double>(i));
    tilde_log_y_.push_back(tilde_h * static_cast<double>(i));
    D_tilde_.push_back(regularise(env.D, y));
    A_tilde_.push_back(regularise(env.A, y));
  }
  auto tilde_at = [&](const std::vector<double>& tab, double y) {
    const double ly = std::max(std::log(y), 0.0) / tilde_h;
    auto i = static_cast<std::size_t>(ly);
    if (i + 1 >= tab.size()) i = tab.size() - 2;
    const double w = ly - static_cast<double>(i);
    return std::exp((1.0 - w) * std::log(tab[i]) + w * std::log(tab[i + 1]));
  };

  const double z = numerics::adaptive_simpson(bump, 1.0, 2.0, 1e-12);
  const double scale = std::pow(2.0, -r_) / z;
  const auto n_nodes = static_cast<std::size_t>(std::ceil(std::log(opts.y_max) / h_)) + 1;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double y = std::exp(h_ * static_cast<double>(i));
    y_.push_back(y);
    D_.push_back(scale * numerics::adaptive_simpson(
                             [&](double u) { return tilde_at(D_tilde_, y * u) * bump(u); }, 1.0, 2.0, kQuadTol));
    A_.push_back(scale * numerics::adaptive_simpson(
                             [&](double u) { return tilde_at(A_tilde_, y * u) * bump(u); }, 1.0, 2.0, kQuadTol));
  }

  lambda_.assign(y_.size(), 0.0);
  time_.assign(y_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < y_.size(); ++i) {
    lambda_[i + 1] = lambda_[i] + numerics::adaptive_simpson(
                                      [&](double y) { return std::pow(A_star(y) / D_star(y), 1.0 / beta_); },
                                      y_[i], y_[i + 1], kQuadTol);
    time_[i + 1] = time_[i] + numerics::adaptive_simpson([&](double y) { return F_star(y); }, y_[i], y_[i + 1],
                                                         kQuadTol);
  }
  const std::size_t last = y_.size() - 1;
  tail_exponent_ = std::log(F_star(y_[last]) / F_star(y_[last - 1])) / h_;
  if (!(tail_exponent_ < -1.0 - 1e-9)) {
    std::ostringstream os;
    os << "explosion_driver: criterion integral does not converge (tail exponent " << tail_exponent_ << ")";
    throw ContractError(os.str());
  }
  t_star_ = time_[last] + F_star(y_[last]) * y_[last] / (-tail_exponent_ - 1.0);
}

std::size_t ExplosionModel::cell(double y) const {
  const double ly = std::max(std::log(y), 0.0) / h_;
  auto i = static_cast<std::size_t>(ly);
  return std::min(i, y_.size() - 2);
}

double ExplosionModel::loglog(const std::vector<double>& table, double y) const {
  y = std::max(y, 1.0);
  const std::size_t i = cell(y);
  const double w = (std::log(y) - std::log(y_[i])) / h_;
  return std::exp((1.0 - w) * std::log(table[i]) + w * std::log(table[i + 1]));
}

double ExplosionModel::D_star(double y) const { return loglog(D_, y); }
double ExplosionModel::A_star(double y) const { return loglog(A_, y); }

double ExplosionModel::D_tilde(double y) const {
  const double step = tilde_log_y_[1];
  const double ly = std::max(std::log(y), 0.0) / step;
  auto i = std::min(static_cast<std::size_t>(ly), D_tilde_.size() - 2);
  const double w = ly - static_cast<double>(i);
  return std::exp((1.0 - w) * std::log(D_tilde_[i]) + w * std::log(D_tilde_[i + 1]));
}

double ExplosionModel::F_star(double y) const {
  return std::pow(A_star(y), -rho2_) * std::pow(D_star(y), -rho1_);
}

double ExplosionModel::amplitude(double y) const {
  return std::pow(std::pow(D_star(y), 1.0 - beta_) / A_star(y), 1.0 / beta_);
}

double ExplosionModel::lambda(double y) const {
  if (y <= 1.0) return 0.0;
  const std::size_t i = std::min(cell(y), y_.size() - 1);
  const double base = y >= y_.back() ? y_.back() : y_[i];
  const double start = y >= y_.back() ? lambda_.back() : lambda_[i];
  return start + numerics::adaptive_simpson([&](double u) { return std::pow(A_star(u) / D_star(u), 1.0 / beta_); },
                                            base, y, 1e-10);
}

double ExplosionModel::time_of(double y) const {
  if (y <= 1.0) return 0.0;
  if (y >= y_.back()) {
    const double fy = F_star(y);
    return t_star_ - fy * y / (-tail_exponent_ - 1.0);
  }
  const std::size_t i = cell(y);
  return time_[i] + numerics::adaptive_simpson([&](double u) { return F_star(u); }, y_[i], y, 1e-10);
}

double ExplosionModel::state_at(double t) const {
  if (t <= 0.0) return 1.0;
  if (t >= t_star_) return std::numeric_limits<double>::infinity();
  if (t >= time_.back()) {
    // Tail: t_* − t = F*(y) y / (−e − 1) with F* a power law of exponent e.
    const double rem = t_star_ - t;
    const double c = F_star(y_.back()) * y_.back() / (-tail_exponent_ - 1.0);
    return y_.back() * std::pow(rem / c, 1.0 / (tail_exponent_ + 1.0));
  }
  const auto it = std::upper_bound(time_.begin(), time_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - time_.begin()) - 1;
  double lo = y_[i], hi = y_[i + 1];
  double y = lo + (hi - lo) * (t - time_[i]) / (time_[i + 1] - time_[i]);
  for (int iter = 0; iter < 60; ++iter) {
    const double g = time_of(y) - t;
    if (g > 0.0) hi = y; else lo = y;
    double next = y - g / F_star(y);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 1e-15 * y) return next;
    y = next;
  }
  return y;
}

Vec ExplosionModel::x_of_state(double y) const {
  Vec x = Vec::Zero(2);
  if (!std::isfinite(y)) return x;
  const double a = amplitude(y), l = lambda(y);
  x[0] = a * std::cos(l);
  x[1] = a * std::sin(l);
  return x;
}

Mat ExplosionModel::field(double y) const {
  const double yy = std::max(y, 1.0);
  const double d = D_star(yy), l = lambda(yy);
  Mat f(1, 2);
  f(0, 0) = -d * std::sin(l);
  f(0, 1) = d * std::cos(l);
  return f;
}

ExplosionDriver explosion_driver(const GrowthEnvelope& env, double p, double gamma, const ExplosionOptions& opts) {
  auto model = std::make_shared<const ExplosionModel>(env, p, gamma, opts);
  const double t_star = model->t_star();
  std::vector<double> times;
  std::vector<Vec> values;
  const auto& ys = model->nodes();
  const auto& ts = model->node_times();
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (!times.empty() && !(ts[i] > times.back())) continue;
    if (!(ts[i] < t_star)) break;
    times.push_back(ts[i]);
    values.push_back(model->x_of_state(ys[i]));
  }
  times.push_back(t_star);
  values.push_back(Vec::Zero(2));
  for (int j = 1; j <= opts.tail_points; ++j) {
    times.push_back(t_star * (1.0 + 0.25 * j / opts.tail_points));
    values.push_back(Vec::Zero(2));
  }
  const double alpha = 1.0 / p;
  auto m = model;
  VectorField field(1, 2, [m](const Vec& y) { return m->field(y[0]); }, {}, {}, gamma);
  DriverPath path(Partition(std::move(times)), std::move(values), alpha, p);
  return ExplosionDriver{std::move(model), field.with_finite_differences(), std::move(path), t_star};
}

}  // namespace roughstep
