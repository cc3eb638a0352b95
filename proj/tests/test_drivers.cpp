#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "roughstep/analysis.hpp"
#include "roughstep/chain_curve.hpp"
#include "roughstep/drivers.hpp"
#include "roughstep/explosion_driver.hpp"

using namespace roughstep;

namespace {

BrownianConfig bm(std::size_t d, int levels, std::uint64_t seed, int substeps = 16) {
  BrownianConfig cfg;
  cfg.d = d;
  cfg.levels = levels;
  cfg.seed = seed;
  cfg.substeps = substeps;
  return cfg;
}

double max_chen_residual(const AreaProcess& a, std::size_t triples, std::uint64_t seed) {
  testkit::Gen g(seed);
  const DriverPath& x = a.path();
  double worst = 0.0;
  for (std::size_t q = 0; q < triples; ++q) {
    std::size_t s, t, u;
    g.triple(a.intervals(), s, t, u);
    const Mat lhs = a.between(s, u);
    const Mat rhs = a.between(s, t) + a.between(t, u) + x.increment(s, t) * x.increment(t, u).transpose();
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, lhs.cwiseAbs().maxCoeff()));
  }
  return worst;
}

}  // namespace

TEST_CASE("brownian paths are deterministic and start at zero") {
  const auto cfg = bm(2, 8, 99);
  const DriverPath a = brownian_path(cfg), b = brownian_path(cfg);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k] - b[k]).norm() == 0.0);
  CHECK(a[0].isZero(0.0));
  CHECK(a.grid().back() == 1.0);
  const DriverPath c = brownian_path(bm(2, 8, 100));
  CHECK((a[a.size() - 1] - c[c.size() - 1]).norm() > 0.0);
  CHECK_THROWS_AS(brownian_path(bm(1, 0, 1)), ContractError);
  CHECK_THROWS_AS(brownian_path(bm(1, 4, 1, 0)), ContractError);
}

TEST_CASE("brownian increments have unit normalised variance") {
  for (std::uint64_t seed : {1u, 42u, 777u}) {
    const auto cfg = bm(1, 10, seed);
    const DriverPath x = brownian_path(cfg);
    const double h = 1.0 / 1024;
    double mean = 0.0;
    for (std::size_t k = 0; k < 1024; ++k) mean += x.increment(k, k + 1).squaredNorm() / h;
    mean /= 1024;
    CHECK(mean >= 0.85);
    CHECK(mean <= 1.15);
  }
}

TEST_CASE("ito areas: diagonal, zero increment and mismatch") {
  const auto cfg = bm(1, 6, 3);
  const DriverPath x = brownian_path(cfg);
  const AreaProcess a = ito_area(x, cfg);
  const double h = 1.0 / 64;
  for (std::size_t k = 0; k < a.intervals(); ++k) {
    const double dw = x.increment(k, k + 1)[0];
    CHECK(a.fine(k)(0, 0) == doctest::Approx(0.5 * dw * dw - 0.5 * h).epsilon(1e-15).scale(h));
  }
  const DriverPath flat(Partition::uniform(0.0, 1.0, 64), std::vector<Vec>(65, Vec::Zero(1)));
  const AreaProcess z = ito_area(flat, cfg);
  CHECK(z.fine(10)(0, 0) == -h / 2);
  CHECK_THROWS_AS(ito_area(x, bm(1, 7, 3)), ContractError);
  CHECK_THROWS_AS(ito_area(x, bm(2, 6, 3)), ContractError);
}

TEST_CASE("ito off-diagonal symmetric part matches the increment product") {
  const auto cfg = bm(2, 8, 42, 256);
  const DriverPath x = brownian_path(cfg);
  const AreaProcess a = ito_area(x, cfg);
  const double h = 1.0 / 256;
  double worst = 0.0;
  for (std::size_t k = 0; k < a.intervals(); ++k) {
    const Vec dw = x.increment(k, k + 1);
    worst = std::max(worst, std::abs(a.fine(k)(0, 1) + a.fine(k)(1, 0) - dw[0] * dw[1]));
  }
  CHECK(worst <= 0.05 * h);
}

TEST_CASE("brownian Levy area variance refines with substeps") {
  // Var of the Lévy area over a step of length h is h²/4 (per unit-variance
  // components); check the sample variance over many fine intervals.
  const auto cfg = bm(2, 12, 5, 64);
  const AreaProcess a = ito_area(brownian_path(cfg), cfg);
  const double h = 1.0 / 4096;
  double var = 0.0;
  for (std::size_t k = 0; k < a.intervals(); ++k) {
    const double levy = 0.5 * (a.fine(k)(0, 1) - a.fine(k)(1, 0));
    var += levy * levy;
  }
  var /= static_cast<double>(a.intervals());
  CHECK(var / (h * h / 4) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("stratonovich shift: diagonal, off-diagonal and inverse") {
  const auto cfg = bm(3, 7, 11);
  const DriverPath x = brownian_path(cfg);
  const AreaProcess ito = ito_area(x, cfg);
  const AreaProcess strat = stratonovich_area(ito);
  CHECK(strat.kind() == AreaKind::Stratonovich);
  for (std::size_t k = 0; k < ito.intervals(); ++k) {
    const Vec dw = x.increment(k, k + 1);
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK(strat.fine(k)(i, i) == doctest::Approx(0.5 * dw[i] * dw[i]).epsilon(1e-14).scale(1e-3));
      for (Eigen::Index j = 0; j < 3; ++j)
        if (i != j) CHECK(strat.fine(k)(i, j) == ito.fine(k)(i, j));
    }
  }
  const AreaProcess back = ito_from_stratonovich(strat);
  for (std::size_t k = 0; k < ito.intervals(); ++k) CHECK((back.fine(k).array() == ito.fine(k).array()).all());
  CHECK_THROWS_AS(stratonovich_area(strat), ContractError);
  CHECK_THROWS_AS(ito_from_stratonovich(ito), ContractError);
}

TEST_CASE("brownian area processes satisfy the Chen identity") {
  const auto cfg = bm(2, 10, 42);
  const AreaProcess ito = ito_area(brownian_path(cfg), cfg);
  CHECK(max_chen_residual(ito, 1000, 1) <= 1e-12);
  CHECK(max_chen_residual(stratonovich_area(ito), 1000, 2) <= 1e-12);
}

TEST_CASE("analytic polynomial areas") {
  const PolynomialPath diag({{0.0, 1.0}, {0.0, 1.0}});
  for (double t : {0.25, 0.5, 1.0, 3.0}) CHECK(diag.area(0.0, t)(0, 1) == doctest::Approx(t * t / 2));
  const PolynomialPath par({{0.0, 1.0}, {0.0, 0.0, 1.0}});
  CHECK(par.area(0.0, 1.0)(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  // Riemann cross-check with a million left-point steps.
  const std::size_t N = 1000000;
  double riemann = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double u = static_cast<double>(k) / N, v = static_cast<double>(k + 1) / N;
    riemann += u * (v * v - u * u);
  }
  CHECK(std::abs(riemann - par.area(0.0, 1.0)(0, 1)) <= 1e-6);
  testkit::Gen g(4);
  for (int q = 0; q < 50; ++q) {
    const double s = g.uniform(-2.0, 2.0);
    CHECK(par.area(s, s).isZero(0.0));
  }
  CHECK_THROWS_AS(par.area(1.0, 0.5), ContractError);
  const AreaProcess grid_area = analytic_area(par, Partition::uniform(0.0, 1.0, 64));
  CHECK(grid_area.kind() == AreaKind::Analytic);
  CHECK(grid_area.between(0, 64)(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(max_chen_residual(grid_area, 1000, 3) <= 1e-12);
}

TEST_CASE("degenerate areas") {
  const PolynomialPath line({{0.0, 1.0}});
  const DriverPath x = line.sample(Partition::uniform(0.0, 1.0, 32));
  const AreaProcess a = degenerate_area(x);
  CHECK(a.kind() == AreaKind::Degenerate);
  for (std::size_t l = 1; l <= 32; ++l) CHECK(a.between(0, l)(0, 0) == doctest::Approx(0.0).scale(1e-15));
  testkit::Gen g(8);
  for (int q = 0; q < 100; ++q) {
    const std::size_t k = g.index(0, 31), l = g.index(k + 1, 32);
    const double s = x.grid()[k], t = x.grid()[l];
    CHECK(a.between(k, l)(0, 0) == doctest::Approx(-s * (t - s)).epsilon(1e-12).scale(1e-12));
  }
  const auto cfg = bm(2, 9, 17);
  CHECK(max_chen_residual(degenerate_area(brownian_path(cfg)), 100, 4) <= 1e-12);
}

TEST_CASE("perturbed areas stay Chen consistent") {
  const auto cfg = bm(2, 8, 23);
  const AreaProcess ito = ito_area(brownian_path(cfg), cfg);
  const AreaProcess pert = perturbed_area(ito, [](double t) {
    Mat r(2, 2);
    r << std::sin(t), t * t, -t, std::sqrt(t);
    return r;
  });
  CHECK(pert.kind() == AreaKind::Perturbed);
  CHECK(max_chen_residual(pert, 1000, 5) <= 1e-12);
  const Mat diff = pert.between(0, 256) - ito.between(0, 256);
  CHECK(diff(0, 0) == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
}

TEST_CASE("counterexample field and path") {
  CounterexampleConfig cfg;
  cfg.cycles = 200;
  const VectorField f = example1_field(cfg);
  for (double y2 : {1e-3, 0.5, 2.0, 10.0}) {
    CHECK(f((Vec(2) << 0.0, y2).finished())(0, 0) == 0.0);
    const double y1 = 2.0 * cfg.tau * y2 * 1.01;
    CHECK(f((Vec(2) << y1, y2).finished())(0, 0) == doctest::Approx(std::pow(y2, cfg.gamma)).epsilon(1e-14));
    CHECK(f((Vec(2) << -y1, y2).finished())(0, 0) == doctest::Approx(std::pow(y2, cfg.gamma)).epsilon(1e-14));
  }
  CHECK(f((Vec(2) << 1.0, -1.0).finished())(0, 0) == 0.0);
  CHECK(f((Vec(2) << 0.3, 0.7).finished())(1, 1) == 1.0);
  std::vector<Vec> probes;
  testkit::Gen g(6);
  for (int q = 0; q < 50; ++q) probes.push_back((Vec(2) << g.uniform(-1.0, 1.0), g.uniform(0.05, 1.0)).finished());
  CHECK(derivative_mismatch(f, probes) <= 1e-4);

  const DriverPath x = example1_path(cfg);
  CHECK(x[0].isZero(0.0));
  CHECK(x.grid().back() == cfg.t_max);
  CHECK(x.grid()[1] == doctest::Approx(cfg.t_min()).epsilon(1e-12));
  for (std::size_t k = 1; k < x.size(); k += 97) {
    const double t = x.grid()[k];
    const double a = std::pow(t, cfg.beta_exp), ph = std::pow(t, -cfg.rho_exp);
    CHECK(x[k][0] == doctest::Approx(a * std::cos(ph)).scale(1e-300));
    CHECK(x[k][1] == doctest::Approx(a * (2.0 + std::sin(ph))).scale(1e-300));
  }
  CounterexampleConfig bad = cfg;
  bad.rho_exp = 20.0;
  CHECK_THROWS_AS(example1_path(bad), ContractError);
  bad = cfg;
  bad.gamma = 1.7;
  CHECK_THROWS_AS(example1_driver(bad), ContractError);
  CHECK(example2_field(cfg)((Vec(2) << 1.0, 0.1).finished())(0, 0) ==
        doctest::Approx((1.0 - cfg.rho_exp) * std::pow(0.1, cfg.gamma)));
}

TEST_CASE("counterexample velocity matches finite differences") {
  CounterexampleConfig cfg;
  for (double t : {0.55, 0.6, 0.65, 0.69}) {
    const double e = 1e-9 * t;
    const Vec fd = (example1_value(cfg, t + e) - example1_value(cfg, t - e)) / (2 * e);
    const Vec v = example1_velocity(cfg, t);
    CHECK((fd - v).norm() <= 1e-5 * std::max(1.0, v.norm()));
  }
}

TEST_CASE("counterexample path has a bounded p-variation control") {
  const CounterexampleConfig cfg;
  const double c = control_fit(example1_path(cfg), cfg.p).constant();
  CHECK(std::isfinite(c));
  CHECK(c <= 16.7368);
}

TEST_CASE("chain templates are valid chains") {
  for (int k = 2; k <= 8; ++k) {
    const int cap = chain_capacity(k);
    CHECK(cap >= 2 * k + 1);
    for (bool turn : {false, true}) {
      for (int m = 2 * k + 1; m <= std::min(k * k, cap); m += 2) {
        const ChainTemplate t = build_chain_template(k, m, turn);
        REQUIRE(static_cast<int>(t.cells.size()) == m);
        CHECK(check_chain_template(t).empty());
      }
    }
  }
  ChainTemplate broken = build_chain_template(3, 9, false);
  std::swap(broken.cells[2], broken.cells[5]);
  CHECK_FALSE(check_chain_template(broken).empty());
}

TEST_CASE("chain curve sampling") {
  const ChainCurve curve = holder_chain_curve(0.7, 3);
  CHECK(curve.depth() == 3);
  for (int r = 0; r < 3; ++r) {
    const double ratio = curve.epsilon(r + 1) / std::pow(curve.delta(r + 1), 0.7);
    CHECK(ratio >= 1.0 / 3.0);
    CHECK(ratio <= 3.0);
  }
  const DriverPath x = curve.path();
  std::size_t squares = 1;
  for (int m : curve.m()) squares *= static_cast<std::size_t>(m);
  REQUIRE(x.size() == squares + 1);
  for (std::size_t k = 0; k < x.size(); ++k) {
    CHECK(x[k].minCoeff() >= 0.0);
    CHECK(x[k].maxCoeff() <= 1.0);
  }
  CHECK(x[0][0] == 0.0);
  CHECK(x[x.size() - 1][0] == 1.0);
  const double eps = curve.epsilon(3);
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) worst = std::max(worst, (x[k + 1] - x[k]).norm());
  CHECK(worst <= 3.0 * eps);
  CHECK_THROWS_AS(holder_chain_curve(0.4, 3), ContractError);
  CHECK_THROWS_AS(holder_chain_curve(0.7, 9), ContractError);
}

TEST_CASE("chain curve two-sided bound") {
  const ChainCurve curve = holder_chain_curve(0.7, 6);
  const HolderSandwich s = holder_sandwich(curve, 10000, 42);
  CHECK(s.pairs == 10000);
  CHECK(s.c1 > 0.0);
  CHECK(s.ratio <= 50.0);
}

TEST_CASE("explosion driver: blow-up time and classical ODE") {
  const GrowthEnvelope env = GrowthEnvelope::power_law(1.0, 1.8, 1.0, 1.0, 0.8, 1.5);
  const ExplosionDriver drv = explosion_driver(env, 1.5, 1.8);
  const ExplosionModel& m = *drv.model;
  CHECK(drv.t_star == m.t_star());

  // t* by Gauss-Legendre in log y over every table cell plus the power tail.
  const auto& ys = m.nodes();
  double t_oracle = 0.0;
  for (std::size_t i = 0; i + 1 < ys.size(); ++i)
    t_oracle += testkit::gl5([&](double s) { return m.F_star(std::exp(s)) * std::exp(s); }, std::log(ys[i]),
                             std::log(ys[i + 1]), 2);
  t_oracle += m.F_star(ys.back()) * ys.back() / (-m.tail_exponent() - 1.0);
  CHECK(std::abs(t_oracle - m.t_star()) <= 1e-6 * m.t_star());

  // y(t2) − y(t1) = ∫ f(y)·dx along the reconstructed path, integrated in y.
  const double t1 = m.t_star() / 10, t2 = 0.9 * m.t_star();
  const double y1 = m.state_at(t1), y2 = m.state_at(t2);
  const std::size_t N = 400000;
  double integral = 0.0;
  Vec xprev = m.x_of_state(y1);
  for (std::size_t i = 0; i < N; ++i) {
    const double ya = y1 * std::pow(y2 / y1, static_cast<double>(i) / N);
    const double yb = y1 * std::pow(y2 / y1, static_cast<double>(i + 1) / N);
    const Vec xnext = m.x_of_state(yb);
    integral += (m.field(std::sqrt(ya * yb)) * (xnext - xprev))(0, 0);
    xprev = xnext;
  }
  CHECK(std::abs(y2 - y1 - integral) <= 1e-4 * std::abs(y2 - y1));

  // Blow-up before t*.
  double t_big = m.time_of(1e6);
  CHECK(t_big < m.t_star());
  CHECK(m.state_at(0.5 * (t_big + m.t_star())) > 1e6);
  CHECK(std::isinf(m.state_at(m.t_star())));
  CHECK(drv.path[drv.path.size() - 1].isZero(0.0));
}

TEST_CASE("explosion driver refuses divergent or invalid envelopes") {
  // D = R^0.8, A = 1: exponent of the criterion integrand is non-negative.
  CHECK_THROWS_AS(explosion_driver(GrowthEnvelope::power_law(1.0, 0.8, 1.0, 0.0, 0.8, 1.5), 1.5, 1.8),
                  ContractError);
  CHECK_THROWS_AS(explosion_driver(GrowthEnvelope::power_law(1.0, 2.5, 1.0, 1.0, 0.8, 1.5), 1.5, 1.8),
                  ContractError);
}
