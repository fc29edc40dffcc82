#include "layerheat/special_functions.hpp"

#include <cmath>
#include <limits>

#include "layerheat/error.hpp"

namespace layerheat {

namespace {

// sum_{k>=1} (-1)^{k+1} z^k / (k k!), converges quickly for z < 2
double ein_series(double z) {
  double term = z;
  double sum = z;
  for (int k = 2; k < 200; ++k) {
    term *= -z / k;
    const double add = term / k;
    sum += add;
    if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// modified Lentz on the even-form continued fraction for e^z E1(z)
double e1_continued_fraction(double z) {
  constexpr double tiny = 1e-300;
  double b = z + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 4e-16) break;
  }
  return h * std::exp(-z);
}

}  // namespace

double expint_e1(double z) {
  require(z > 0.0, "expint_e1: argument must be positive");
  if (z > 740.0) return 0.0;
  if (z < 1.0) return ein_series(z) - kEulerGamma - std::log(z);
  return e1_continued_fraction(z);
}

double expint_ein(double z) {
  require(z >= 0.0, "expint_ein: argument must be nonnegative");
  if (z == 0.0) return 0.0;
  if (z < 1.0) return ein_series(z);
  return expint_e1(z) + kEulerGamma + std::log(z);
}

double expint_e1_diff(double zb, double za) {
  if (std::isinf(za)) return expint_e1(zb);
  if (za < 0.5) return std::log(za / zb) + ein_series(zb) - ein_series(za);
  return expint_e1(zb) - expint_e1(za);
}

}  // namespace layerheat
