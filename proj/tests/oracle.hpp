// Independent reference computations for the tests. Nothing here calls into the
// library; the integrals go through Boost quadrature.
#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

template <class F>
double gk(F f, double a, double b, double tol = 1e-13, unsigned depth = 20) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, depth, tol);
}

template <class F>
double ts(F f, double a, double b, double tol = 1e-13) {
  boost::math::quadrature::tanh_sinh<double> q;
  auto g = [&f](double x) -> double { return f(x); };
  return q.integrate(g, a, b, tol);
}

inline double heat2(double t, double x, double y) {
  if (t <= 0.0) return 0.0;
  return std::exp(-(x * x + y * y) / (4.0 * t)) / (4.0 * pi * t);
}

// int over the disc |y| < R of the 2D heat kernel, nested polar quadrature
inline double disk_mass(double t, std::array<double, 2> x, double R = 1.0) {
  return gk(
      [&](double rho) {
        return rho * gk([&](double th) { return heat2(t, x[0] - rho * std::cos(th), x[1] - rho * std::sin(th)); },
                        0.0, 2.0 * pi, 1e-14);
      },
      0.0, R, 1e-13);
}

}  // namespace oracle
