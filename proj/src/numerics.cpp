#include "roughstep/numerics.hpp"

#include <array>
#include <cmath>

#include "roughstep/errors.hpp"

namespace roughstep::numerics {

namespace {

struct Simpson {
  const std::function<double(double)>& f;
  double abs_tol;
  int max_depth;

  double eval(double x) const {
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericalError("adaptive_simpson: non-finite integrand");
    return v;
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = eval(lm), frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }
};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  Simpson s{f, abs_tol, max_depth};
  // A coarse composite pass sets the scale for the relative tolerance.
  const int n0 = 16;
  std::array<double, n0 + 1> fx{};
  const double h = (b - a) / n0;
  for (int i = 0; i <= n0; ++i) fx[static_cast<std::size_t>(i)] = s.eval(a + h * i);
  double scale = 0.0;
  for (int i = 0; i < n0; i += 2) {
    scale += h / 3.0 * std::abs(fx[static_cast<std::size_t>(i)] + 4.0 * fx[static_cast<std::size_t>(i + 1)] +
                                fx[static_cast<std::size_t>(i + 2)]);
  }
  const double tol = std::max(abs_tol, rel_tol * scale);
  double total = 0.0;
  for (int i = 0; i < n0; i += 2) {
    const double lo = a + h * i, hi = a + h * (i + 2);
    const double whole = (hi - lo) / 6.0 *
                         (fx[static_cast<std::size_t>(i)] + 4.0 * fx[static_cast<std::size_t>(i + 1)] +
                          fx[static_cast<std::size_t>(i + 2)]);
    total += s.recurse(lo, hi, fx[static_cast<std::size_t>(i)], fx[static_cast<std::size_t>(i + 1)],
                       fx[static_cast<std::size_t>(i + 2)], whole, tol / (n0 / 2), max_depth);
  }
  return total;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
  static constexpr std::array<double, 8> x = {-0.9602898564975363, -0.7966664774136267,
                                              -0.5255324099163290, -0.1834346424956498,
                                              0.1834346424956498,  0.5255324099163290,
                                              0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> w = {0.1012285362903763, 0.2223810344533745,
                                              0.3137066458778873, 0.3626837833783620,
                                              0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};
  if (panels < 1) throw ContractError("gauss_legendre needs at least one panel");
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + h * (p + 0.5);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(mid + 0.5 * h * x[i]);
    total += 0.5 * h * acc;
  }
  return total;
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractError("least_squares needs >= 2 matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ContractError("least_squares needs two distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace roughstep::numerics
