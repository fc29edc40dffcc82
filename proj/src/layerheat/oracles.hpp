#pragma once

#include "layerheat/kernels.hpp"

namespace layerheat::oracles {

// G(t, x) = int_{|y| < R} S_2(t, x - y) dy by radial adaptive quadrature:
//   G = int_0^R (rho / 2t) e^{-(|x|^2 + rho^2)/4t} I0(|x| rho / 2t) drho.
// The double layer of the constant density 1 on the circle of radius R equals
// G - 1 inside, G outside and G - 1/2 on the circle.
double disk_heat_mass(double t, const Point2& x, double R = 1.0);

}  // namespace layerheat::oracles
