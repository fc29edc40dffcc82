#pragma once

namespace layerheat {

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr double kPi = 3.14159265358979323846;

// Exponential integral E1(z) for z > 0. Returns 0 once e^{-z} underflows.
double expint_e1(double z);

// Ein(z) = E1(z) + gamma + ln z, the entire part of E1. Defined for z >= 0.
double expint_ein(double z);

// E1(zb) - E1(za) for 0 < zb <= za, stable when both arguments are small.
// Pass za = +inf for the a = 0 slab.
double expint_e1_diff(double zb, double za);

}  // namespace layerheat
