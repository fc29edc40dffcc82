#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "layerheat/kernels.hpp"

namespace layerheat::geometry {

struct ReferenceCircle {
  double radius = 1.0;
  Point2 point(double theta) const;
  Point2 normal(double theta) const;
  Point2 tangent(double theta) const;
};

struct BoundaryDiagnostics {
  double min_speed = 0.0;
  double injectivity_witness = 0.0;
  double signed_area = 0.0;
};

// Trigonometric polynomial embedding of the reference circle:
//   phi(theta) = sum_k (cx[k] cos k theta + sx[k] sin k theta,
//                       cy[k] cos k theta + sy[k] sin k theta).
class BoundaryMap {
 public:
  BoundaryMap() = default;
  BoundaryMap(double radius, std::vector<double> cos_x, std::vector<double> sin_x, std::vector<double> cos_y,
              std::vector<double> sin_y);

  static BoundaryMap identity(double radius = 1.0);
  static BoundaryMap dilation(double lambda, double radius = 1.0);
  // rho(theta) = 1 + eps cos(m theta) on the unit circle, expanded into Fourier terms
  static BoundaryMap star(double eps, int m, double radius = 1.0);

  double radius() const { return radius_; }
  int degree() const { return static_cast<int>(cx_.size()) - 1; }
  const std::vector<double>& cos_x() const { return cx_; }
  const std::vector<double>& sin_x() const { return sx_; }
  const std::vector<double>& cos_y() const { return cy_; }
  const std::vector<double>& sin_y() const { return sy_; }

  Point2 position(double theta) const;
  Point2 derivative(double theta) const;
  Point2 second_derivative(double theta) const;
  // phi(t1) - phi(t2) from the non-constant terms only, so translations drop out exactly
  Point2 chord(double t1, double t2) const;
  // phi(theta) minus its constant term
  Point2 varying_part(double theta) const;
  Point2 center() const { return {cx_[0], cy_[0]}; }

  double speed(double theta) const;
  double sigma_tilde(double theta) const { return speed(theta) / radius_; }
  Point2 normal(double theta) const;

  // coefficient-wise a + s b; radii must agree
  BoundaryMap axpy(double s, const BoundaryMap& direction) const;
  BoundaryMap rotated(double angle) const;
  BoundaryMap translated(const Point2& shift) const;

  BoundaryDiagnostics diagnostics(int samples = 256) const;
  // Throws Error(geometry) if the sampled invariants fail.
  void validate(int samples = 256) const;

  std::uint64_t hash() const;

 private:
  double radius_ = 1.0;
  std::vector<double> cx_, sx_, cy_, sy_;
};

double sigma_tilde(const BoundaryMap& phi, double theta);
Point2 normal_of_map(const BoundaryMap& phi, double theta);

struct NearestPoint {
  double theta = 0.0;
  double distance = 0.0;
};
NearestPoint nearest_point(const BoundaryMap& phi, const Point2& y, int samples = 1024);

enum class Region { interior, exterior };
// Throws if y lies within 1e-9 of the curve.
Region classify_point(const BoundaryMap& phi, const Point2& y);

enum class ExtensionKind { normal_offset, homothetic, automatic };

// Chart (theta, s) -> Phi(x(theta) + s nu(theta)), s in [-delta, delta].
// s < 0 is the inner shell, s > 0 the outer shell.
class TubularExtension {
 public:
  TubularExtension(BoundaryMap base, double delta, ExtensionKind kind);

  const BoundaryMap& base() const { return base_; }
  double delta() const { return delta_; }
  ExtensionKind kind() const { return kind_; }
  double radius() const { return base_.radius(); }

  Point2 map(double theta, double s) const;
  Point2 d_theta(double theta, double s) const;
  Point2 d_s(double theta, double s) const;
  // DPhi in reference Cartesian coordinates, row-major {a11, a12, a21, a22}
  std::array<double, 4> jacobian(double theta, double s) const;
  double det(double theta, double s) const;

  // reference point x(theta) + s nu(theta)
  Point2 reference_point(double theta, double s) const;

 private:
  BoundaryMap base_;
  double delta_;
  ExtensionKind kind_;
};

// Builds the extension and certifies it on a chart grid; automatic tries the
// normal offset first and falls back to the homothetic map for star-shaped curves.
TubularExtension extend(const BoundaryMap& phi, double delta, ExtensionKind kind = ExtensionKind::normal_offset,
                        int n_theta = 512, int n_s = 64);

Point2 pullback_normal(const TubularExtension& ext, double theta);

BoundaryMap parse_shape(const std::string& text);
BoundaryMap load_shape(const std::string& path);
std::string format_shape(const BoundaryMap& phi);

}  // namespace layerheat::geometry
