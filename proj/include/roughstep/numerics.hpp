#pragma once

#include <functional>
#include <vector>

namespace roughstep::numerics {

/// Adaptive Simpson on [a,b] with relative tolerance rel_tol (absolute floor
/// abs_tol). Throws NumericalError on a non-finite integrand value.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-8, double abs_tol = 1e-300, int max_depth = 48);

/// Composite Gauss-Legendre (8 nodes) on `panels` equal panels.
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y ≈ slope·x + intercept; needs two distinct x.
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace roughstep::numerics
