#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "roughstep/core.hpp"
#include "roughstep/drivers.hpp"

using namespace roughstep;

namespace {

DriverPath line_path(std::size_t K, double T = 1.0) {
  const Partition grid = Partition::uniform(0.0, T, K);
  std::vector<Vec> values;
  for (double t : grid.times()) values.push_back(Vec::Constant(1, t));
  return DriverPath(grid, values);
}

Mat random_mat(testkit::Gen& g, Eigen::Index d) {
  Mat m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = g.normal();
  return m;
}

Vec random_vec(testkit::Gen& g, Eigen::Index d) {
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = g.normal();
  return v;
}

}  // namespace

TEST_CASE("partition validates and recomputes mesh") {
  CHECK_THROWS_AS(Partition({0.0}), ContractError);
  CHECK_THROWS_AS(Partition({0.0, 0.5, 0.5}), ContractError);
  CHECK_THROWS_AS(Partition({0.0, 0.6, 0.4}), ContractError);
  const Partition p({0.0, 0.1, 0.4, 1.0});
  CHECK(p.steps() == 3);
  CHECK(p.mesh() == doctest::Approx(0.6));
  CHECK_FALSE(p.uniform());
  const Partition u = Partition::uniform(0.0, 1.0, 1 << 10);
  CHECK(u.back() == 1.0);
  CHECK(u.uniform());
  CHECK(u.mesh() == doctest::Approx(1.0 / 1024).epsilon(1e-12));
  const Partition c = u.coarsen(4);
  CHECK(c.steps() == 256);
  CHECK(c[1] == u[4]);
  CHECK_THROWS_AS(u.coarsen(3), ContractError);
  CHECK(u.index_of(0.5).value() == 512);
  CHECK_FALSE(u.index_of(0.5 + 1e-4).has_value());
  const Partition s = u.slice(10, 20);
  CHECK(s.steps() == 10);
  CHECK(s.front() == u[10]);
}

TEST_CASE("driver path interpolates linearly off the grid") {
  const Partition grid({0.0, 1.0, 3.0});
  DriverPath x(grid, {Vec::Constant(1, 0.0), Vec::Constant(1, 2.0), Vec::Constant(1, -2.0)});
  CHECK(x.p() == doctest::Approx(2.0));
  CHECK(x.at(0.5)[0] == doctest::Approx(1.0));
  CHECK(x.at(2.0)[0] == doctest::Approx(0.0));
  CHECK(x.increment(0, 2)[0] == -2.0);
  CHECK_THROWS_AS(DriverPath(grid, {Vec::Zero(1), Vec::Zero(1)}), ContractError);
}

TEST_CASE("chen_combine on the stated examples") {
  const Mat z = Mat::Zero(2, 2);
  CHECK(chen_combine(z, z, Vec::Zero(2), Vec::Ones(2)).isZero(0.0));
  const Mat r = chen_combine(Mat::Constant(1, 1, 0.3), Mat::Constant(1, 1, 0.1), Vec::Constant(1, 2.0),
                             Vec::Constant(1, 0.5));
  CHECK(r(0, 0) == doctest::Approx(1.4));
  CHECK_THROWS_AS(chen_combine(z, z, Vec::Zero(3), Vec::Zero(2)), ContractError);
}

TEST_CASE("chen_combine is associative on random data") {
  testkit::Gen g(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(g.index(0, 3));
    const Mat a1 = random_mat(g, d), a2 = random_mat(g, d), a3 = random_mat(g, d);
    const Vec x1 = random_vec(g, d), x2 = random_vec(g, d), x3 = random_vec(g, d);
    const Mat left = chen_combine(chen_combine(a1, a2, x1, x2), a3, x1 + x2, x3);
    const Mat right = chen_combine(a1, chen_combine(a2, a3, x2, x3), x1, x2 + x3);
    CHECK((left - right).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("polynomial half-interval areas combine to the full area") {
  // x(u) = (u, u²); oracle: Gauss-Legendre of ∫ (x^i(u) − x^i(s)) x^j'(u) du.
  const PolynomialPath poly({{0.0, 1.0}, {0.0, 0.0, 1.0}});
  auto oracle = [](double s, double t) {
    auto x = [](int i, double u) { return i == 0 ? u : u * u; };
    auto dx = [](int j, double u) { return j == 0 ? 1.0 : 2.0 * u; };
    Mat a(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        a(i, j) = testkit::gl5([&](double u) { return (x(i, u) - x(i, s)) * dx(j, u); }, s, t, 4);
    return a;
  };
  const Mat first = poly.area(0.0, 0.5), second = poly.area(0.5, 1.0), whole = poly.area(0.0, 1.0);
  CHECK((first - oracle(0.0, 0.5)).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((whole - oracle(0.0, 1.0)).cwiseAbs().maxCoeff() <= 1e-13);
  const Mat combined = chen_combine(first, second, poly.value(0.5) - poly.value(0.0), poly.value(1.0) - poly.value(0.5));
  CHECK((combined - whole).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("area process folds are grouping independent") {
  BrownianConfig cfg;
  cfg.d = 2;
  cfg.levels = 8;
  cfg.seed = 3;
  const DriverPath x = brownian_path(cfg);
  const AreaProcess a = ito_area(x, cfg);
  CHECK(a.between(5, 5).isZero(0.0));
  testkit::Gen g(11);
  for (int q = 0; q < 200; ++q) {
    std::size_t s, t, u;
    g.triple(cfg.steps(), s, t, u);
    const Mat grouped = chen_combine(a.between(s, t), a.between(t, u), x.increment(s, t), x.increment(t, u));
    CHECK((grouped - a.between(s, u)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const auto coarse = a.over({0, 64, 128, 256});
  REQUIRE(coarse.size() == 3);
  CHECK((coarse[2] - a.between(128, 256)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(a.between(3, 2), ContractError);
}

TEST_CASE("control_fit on trivial paths") {
  const Partition grid = Partition::uniform(0.0, 1.0, 64);
  const DriverPath flat(grid, std::vector<Vec>(65, Vec::Constant(2, 3.0)));
  CHECK(control_fit(flat, 2.0).constant() == 0.0);
  CHECK(control_fit(line_path(64), 1.0).constant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(control_fit(line_path(8), 0.5), ContractError);
}

TEST_CASE("control_fit equals the exhaustive maximum") {
  testkit::Gen g(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t K = 50 + g.index(0, 150);
    std::vector<double> times{0.0};
    for (std::size_t k = 0; k < K; ++k) times.push_back(times.back() + g.uniform(0.001, 0.02));
    std::vector<Vec> values{Vec::Zero(2)};
    for (std::size_t k = 0; k < K; ++k) values.push_back(values.back() + 0.1 * random_vec(g, 2));
    const DriverPath x(Partition(times), values);
    const double p = g.uniform(1.0, 3.0);
    double brute = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
      for (std::size_t l = k + 1; l < x.size(); ++l)
        brute = std::max(brute, std::pow((x[l] - x[k]).cwiseAbs().maxCoeff(), p) / (times[l] - times[k]));
    CHECK(control_fit(x, p).constant() == doctest::Approx(brute).epsilon(1e-14));
  }
}

TEST_CASE("control_fit golden constant for the seed 42 Brownian sample") {
  BrownianConfig cfg;
  cfg.levels = 12;
  cfg.seed = 42;
  const double c = control_fit(brownian_path(cfg), 2.5).constant();
  CHECK(std::isfinite(c));
  CHECK(c == doctest::Approx(22.651110528220389).epsilon(1e-12));
}

TEST_CASE("control moduli are superadditive") {
  testkit::Gen g(13);
  const ControlModulus lin = ControlModulus::linear(2.5);
  std::vector<double> ts{0.0}, om{0.0};
  for (int k = 0; k < 50; ++k) {
    ts.push_back(ts.back() + g.uniform(0.01, 0.1));
    om.push_back(om.back() + g.uniform(0.0, 1.0));
  }
  const ControlModulus tab = ControlModulus::tabulated(ts, om);
  for (int q = 0; q < 1000; ++q) {
    double v[3] = {g.uniform(0.0, ts.back()), g.uniform(0.0, ts.back()), g.uniform(0.0, ts.back())};
    std::sort(v, v + 3);
    for (const ControlModulus* w : {&lin, &tab}) {
      CHECK((*w)(v[0], v[2]) >= (*w)(v[0], v[1]) + (*w)(v[1], v[2]) - 1e-12);
      CHECK((*w)(v[1], v[1]) == 0.0);
    }
  }
  CHECK_THROWS_AS(ControlModulus::tabulated({0.0, 1.0}, {1.0, 0.5}), ContractError);
}

TEST_CASE("vector field derivative checks") {
  auto eval = [](const Vec& y) {
    Mat f(2, 2);
    f << std::sin(y[0]), y[0] * y[1], std::cos(y[1]), 1.0 + y[0] * y[0];
    return f;
  };
  auto good = [](const Vec& y) {
    std::vector<Mat> J(2, Mat::Zero(2, 2));
    J[0] << std::cos(y[0]), 0.0, 0.0, -std::sin(y[1]);
    J[1] << y[1], y[0], 2.0 * y[0], 0.0;
    return J;
  };
  auto bad = [&](const Vec& y) {
    auto J = good(y);
    J[1](0, 0) += 0.1;
    return J;
  };
  const std::vector<Vec> probes{Vec::Constant(2, 0.3), (Vec(2) << -1.0, 2.0).finished()};
  CHECK(derivative_mismatch(VectorField(2, 2, eval, good), probes) <= 1e-5);
  CHECK(derivative_mismatch(VectorField(2, 2, eval, bad), probes) > 1e-2);
  const VectorField fd = VectorField(2, 2, eval).with_finite_differences();
  CHECK(fd.has_deriv1());
  const auto J = fd.jacobians(probes[1]);
  const auto G = good(probes[1]);
  for (int j = 0; j < 2; ++j) CHECK((J[j] - G[j]).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_THROWS_AS(VectorField(2, 2, eval).jacobians(probes[0]), CapabilityError);
  CHECK_THROWS_AS(VectorField(2, 2, eval)(Vec::Zero(3)), ContractError);
}

TEST_CASE("linear field derivatives and shapes") {
  Mat m0(2, 2), m1(2, 2);
  m0 << 1, 2, 3, 4;
  m1 << 0, -1, 1, 0;
  const VectorField f = fields::linear({m0, m1});
  const Vec y = (Vec(2) << 0.5, -0.25).finished();
  const Mat F = f(y);
  CHECK((F.col(0) - m0 * y).norm() == 0.0);
  CHECK((F.col(1) - m1 * y).norm() == 0.0);
  CHECK(f.hessians(y).size() == 4);
  CHECK(fields::zero(3, 2)(Vec::Ones(3)).isZero(0.0));
}

TEST_CASE("growth envelopes enforce D <= R^beta A") {
  CHECK_NOTHROW(GrowthEnvelope::power_law(1.0, 1.8, 1.0, 1.0, 0.8, 1.5).validate());
  CHECK_THROWS_AS(GrowthEnvelope::power_law(1.0, 2.0, 1.0, 1.0, 0.8, 1.5).validate(), ContractError);
  CHECK_THROWS_AS(GrowthEnvelope::power_law(1.0, 0.5, 1.0, 1.0, 2.5, 1.5).validate(), ContractError);
}

TEST_CASE("area kind names round trip") {
  for (AreaKind k : {AreaKind::Ito, AreaKind::Stratonovich, AreaKind::Degenerate, AreaKind::Analytic,
                     AreaKind::Perturbed}) {
    CHECK(area_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(area_kind_from_string("levy"), ContractError);
}
