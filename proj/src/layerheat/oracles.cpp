#include "layerheat/oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "layerheat/error.hpp"

namespace layerheat::oracles {

double disk_heat_mass(double t, const Point2& x, double R) {
  require(t > 0.0 && R > 0.0, "disk_heat_mass: need t > 0 and R > 0");
  const double r = std::hypot(x[0], x[1]);
  auto f = [&](double rho) {
    const double z = r * rho / (2.0 * t);
    // e^{-(r - rho)^2/4t} e^{-z} I0(z), the scaled Bessel keeps large z finite
    double i0e;
    if (z < 500.0)
      i0e = std::exp(-z) * boost::math::cyl_bessel_i(0, z);
    else
      i0e = (1.0 + 1.0 / (8.0 * z) + 9.0 / (128.0 * z * z)) / std::sqrt(2.0 * 3.14159265358979323846 * z);
    return rho / (2.0 * t) * std::exp(-(r - rho) * (r - rho) / (4.0 * t)) * i0e;
  };
  double err = 0.0;
  // split at |x| where the integrand peaks when the point sits over the disk
  if (r > 0.0 && r < R) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, r, 20, 1e-14, &err) +
           boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, r, R, 20, 1e-14, &err);
  }
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, R, 20, 1e-14, &err);
}

}  // namespace layerheat::oracles
