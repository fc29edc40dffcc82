#include "layerheat/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "layerheat/error.hpp"
#include "layerheat/special_functions.hpp"

namespace layerheat::geometry {

Point2 ReferenceCircle::point(double theta) const {
  return {radius * std::cos(theta), radius * std::sin(theta)};
}
Point2 ReferenceCircle::normal(double theta) const { return {std::cos(theta), std::sin(theta)}; }
Point2 ReferenceCircle::tangent(double theta) const { return {-std::sin(theta), std::cos(theta)}; }

namespace {

void pad(std::vector<double>& v, std::size_t n) {
  if (v.size() < n) v.resize(n, 0.0);
}

double cross(const Point2& a, const Point2& b) { return a[0] * b[1] - a[1] * b[0]; }
double dot(const Point2& a, const Point2& b) { return a[0] * b[0] + a[1] * b[1]; }
double norm(const Point2& a) { return std::hypot(a[0], a[1]); }

// sum_k c[k] f_k(theta) with derivative order d applied to cos/sin
Point2 evaluate(const BoundaryMap& m, double theta, int d, int kmin) {
  Point2 p{0.0, 0.0};
  const int K = m.degree();
  for (int k = kmin; k <= K; ++k) {
    const double c = std::cos(k * theta), s = std::sin(k * theta);
    const double kd = std::pow(static_cast<double>(k), d);
    double fc, fs;  // d-th derivatives of cos(k t), sin(k t)
    switch (d % 4) {
      case 0: fc = c; fs = s; break;
      case 1: fc = -s; fs = c; break;
      case 2: fc = -c; fs = -s; break;
      default: fc = s; fs = -c; break;
    }
    p[0] += kd * (m.cos_x()[k] * fc + m.sin_x()[k] * fs);
    p[1] += kd * (m.cos_y()[k] * fc + m.sin_y()[k] * fs);
  }
  return p;
}

}  // namespace

BoundaryMap::BoundaryMap(double radius, std::vector<double> cos_x, std::vector<double> sin_x,
                         std::vector<double> cos_y, std::vector<double> sin_y)
    : radius_(radius), cx_(std::move(cos_x)), sx_(std::move(sin_x)), cy_(std::move(cos_y)), sy_(std::move(sin_y)) {
  require(radius_ > 0.0, "reference radius must be positive");
  const std::size_t n = std::max({cx_.size(), sx_.size(), cy_.size(), sy_.size(), std::size_t{1}});
  pad(cx_, n);
  pad(sx_, n);
  pad(cy_, n);
  pad(sy_, n);
}

BoundaryMap BoundaryMap::identity(double radius) { return dilation(1.0, radius); }

BoundaryMap BoundaryMap::dilation(double lambda, double radius) {
  return BoundaryMap(radius, {0.0, lambda * radius}, {0.0, 0.0}, {0.0, 0.0}, {0.0, lambda * radius});
}

BoundaryMap BoundaryMap::star(double eps, int m, double radius) {
  require(m >= 1, "star shape needs m >= 1");
  std::vector<double> cx(m + 2, 0.0), sx(m + 2, 0.0), cy(m + 2, 0.0), sy(m + 2, 0.0);
  cx[1] = radius;
  sy[1] = radius;
  // eps cos(m t) (cos t, sin t) = eps/2 (cos(m+1)t + cos(m-1)t, sin(m+1)t - sin(m-1)t)
  const double h = 0.5 * eps * radius;
  cx[m + 1] += h;
  cx[m - 1] += h;
  sy[m + 1] += h;
  sy[m - 1] -= h;
  sy[0] = 0.0;
  return BoundaryMap(radius, cx, sx, cy, sy);
}

Point2 BoundaryMap::position(double theta) const { return evaluate(*this, theta, 0, 0); }
Point2 BoundaryMap::derivative(double theta) const { return evaluate(*this, theta, 1, 1); }
Point2 BoundaryMap::second_derivative(double theta) const { return evaluate(*this, theta, 2, 1); }

Point2 BoundaryMap::varying_part(double theta) const { return evaluate(*this, theta, 0, 1); }

Point2 BoundaryMap::chord(double t1, double t2) const {
  const Point2 a = evaluate(*this, t1, 0, 1);
  const Point2 b = evaluate(*this, t2, 0, 1);
  return {a[0] - b[0], a[1] - b[1]};
}

double BoundaryMap::speed(double theta) const { return norm(derivative(theta)); }

Point2 BoundaryMap::normal(double theta) const {
  const Point2 d = derivative(theta);
  const double n = norm(d);
  return {d[1] / n, -d[0] / n};
}

BoundaryMap BoundaryMap::axpy(double s, const BoundaryMap& dir) const {
  require(dir.radius_ == radius_, "shape path direction must share the reference radius");
  const std::size_t n = std::max(cx_.size(), dir.cx_.size());
  auto comb = [&](std::vector<double> a, std::vector<double> b) {
    pad(a, n);
    pad(b, n);
    for (std::size_t k = 0; k < n; ++k) a[k] += s * b[k];
    return a;
  };
  return BoundaryMap(radius_, comb(cx_, dir.cx_), comb(sx_, dir.sx_), comb(cy_, dir.cy_), comb(sy_, dir.sy_));
}

BoundaryMap BoundaryMap::rotated(double angle) const {
  const double c = std::cos(angle), s = std::sin(angle);
  std::vector<double> cx(cx_.size()), sx(cx_.size()), cy(cx_.size()), sy(cx_.size());
  for (std::size_t k = 0; k < cx_.size(); ++k) {
    cx[k] = c * cx_[k] - s * cy_[k];
    cy[k] = s * cx_[k] + c * cy_[k];
    sx[k] = c * sx_[k] - s * sy_[k];
    sy[k] = s * sx_[k] + c * sy_[k];
  }
  return BoundaryMap(radius_, cx, sx, cy, sy);
}

BoundaryMap BoundaryMap::translated(const Point2& shift) const {
  auto cx = cx_;
  auto cy = cy_;
  cx[0] += shift[0];
  cy[0] += shift[1];
  return BoundaryMap(radius_, cx, sx_, cy, sy_);
}

BoundaryDiagnostics BoundaryMap::diagnostics(int samples) const {
  BoundaryDiagnostics d;
  std::vector<Point2> pts(samples);
  d.min_speed = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double th = 2.0 * kPi * i / samples;
    pts[i] = position(th);
    d.min_speed = std::min(d.min_speed, speed(th));
  }
  // exact area of the trigonometric curve: (1/2) int phi x phi' dtheta, trapezoid is exact here
  // once samples exceed twice the degree
  double area = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double th = 2.0 * kPi * i / samples;
    area += cross(position(th), derivative(th));
  }
  d.signed_area = 0.5 * area * 2.0 * kPi / samples;
  d.injectivity_witness = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    for (int j = i + 1; j < samples; ++j) {
      const double dist = norm({pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]});
      const double ref = 2.0 * radius_ * std::abs(std::sin(kPi * (j - i) / samples));
      d.injectivity_witness = std::min(d.injectivity_witness, dist / ref);
    }
  }
  return d;
}

void BoundaryMap::validate(int samples) const {
  const auto d = diagnostics(std::max(samples, 4 * degree() + 8));
  if (!(d.min_speed > 1e-12)) fail(ErrorCode::geometry, "shape has a vanishing derivative (not an immersion)");
  if (!(d.injectivity_witness > 1e-8)) fail(ErrorCode::geometry, "shape is not injective on sampled pairs");
  if (!(d.signed_area > 0.0)) fail(ErrorCode::geometry, "shape must be positively oriented");
}

std::uint64_t BoundaryMap::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](double v) {
    if (v == 0.0) v = 0.0;  // fold -0
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(radius_);
  // trailing zero degrees do not change the shape
  std::size_t n = cx_.size();
  while (n > 1 && cx_[n - 1] == 0.0 && sx_[n - 1] == 0.0 && cy_[n - 1] == 0.0 && sy_[n - 1] == 0.0) --n;
  for (std::size_t k = 0; k < n; ++k) {
    mix(cx_[k]);
    mix(sx_[k]);
    mix(cy_[k]);
    mix(sy_[k]);
  }
  return h;
}

double sigma_tilde(const BoundaryMap& phi, double theta) { return phi.sigma_tilde(theta); }
Point2 normal_of_map(const BoundaryMap& phi, double theta) { return phi.normal(theta); }

NearestPoint nearest_point(const BoundaryMap& phi, const Point2& y, int samples) {
  // coarse scan, then Newton on g(theta) = (phi - y) . phi' from the three best seeds
  std::vector<std::pair<double, int>> d2(samples);
  for (int i = 0; i < samples; ++i) {
    const Point2 p = phi.position(2.0 * kPi * i / samples);
    d2[i] = {(p[0] - y[0]) * (p[0] - y[0]) + (p[1] - y[1]) * (p[1] - y[1]), i};
  }
  std::partial_sort(d2.begin(), d2.begin() + 3, d2.end());
  NearestPoint best{0.0, std::numeric_limits<double>::infinity()};
  const double step = 2.0 * kPi / samples;
  for (int c = 0; c < 3; ++c) {
    const double t0 = d2[c].second * step;
    double t = t0;
    for (int it = 0; it < 30; ++it) {
      const Point2 p = phi.position(t), d1 = phi.derivative(t), dd = phi.second_derivative(t);
      const Point2 e{p[0] - y[0], p[1] - y[1]};
      const double g = dot(e, d1);
      const double gp = dot(d1, d1) + dot(e, dd);
      if (gp <= 0.0) break;
      double dt = -g / gp;
      dt = std::clamp(dt, -step, step);
      t += dt;
      if (std::abs(dt) < 1e-15) break;
    }
    if (std::abs(t - t0) > 2.0 * step) t = t0;
    const Point2 p = phi.position(t);
    const double dist = std::hypot(p[0] - y[0], p[1] - y[1]);
    if (dist < best.distance) best = {std::fmod(t + 2.0 * kPi, 2.0 * kPi), dist};
  }
  return best;
}

Region classify_point(const BoundaryMap& phi, const Point2& y) {
  const NearestPoint np = nearest_point(phi, y);
  if (np.distance < 1e-9) fail(ErrorCode::geometry, "point lies on the curve (within 1e-9)");
  if (np.distance < 1e-3) {
    // polygon chords could misplace such points; use the side of the nearest normal instead
    const Point2 p = phi.position(np.theta), n = phi.normal(np.theta);
    return dot({y[0] - p[0], y[1] - p[1]}, n) < 0.0 ? Region::interior : Region::exterior;
  }
  const int samples = 4096;
  double winding = 0.0;
  Point2 prev = phi.position(0.0);
  double aprev = std::atan2(prev[1] - y[1], prev[0] - y[0]);
  for (int i = 1; i <= samples; ++i) {
    const Point2 p = phi.position(2.0 * kPi * i / samples);
    const double a = std::atan2(p[1] - y[1], p[0] - y[0]);
    double da = a - aprev;
    if (da > kPi) da -= 2.0 * kPi;
    if (da < -kPi) da += 2.0 * kPi;
    winding += da;
    aprev = a;
  }
  return std::lround(winding / (2.0 * kPi)) == 1 ? Region::interior : Region::exterior;
}

TubularExtension::TubularExtension(BoundaryMap base, double delta, ExtensionKind kind)
    : base_(std::move(base)), delta_(delta), kind_(kind) {
  require(delta_ > 0.0, "extension width delta must be positive");
  require(kind_ != ExtensionKind::automatic, "resolve automatic extension kind through extend()");
}

Point2 TubularExtension::reference_point(double theta, double s) const {
  const double r = radius() + s;
  return {r * std::cos(theta), r * std::sin(theta)};
}

Point2 TubularExtension::map(double theta, double s) const {
  const Point2 p = base_.position(theta);
  if (kind_ == ExtensionKind::homothetic) {
    const double f = 1.0 + s / radius();
    return {f * p[0], f * p[1]};
  }
  const Point2 n = base_.normal(theta);
  return {p[0] + s * n[0], p[1] + s * n[1]};
}

Point2 TubularExtension::d_theta(double theta, double s) const {
  const Point2 d1 = base_.derivative(theta);
  if (kind_ == ExtensionKind::homothetic) {
    const double f = 1.0 + s / radius();
    return {f * d1[0], f * d1[1]};
  }
  // nu = rot(u), u = phi'/|phi'|, u' = (phi'' - (u . phi'') u) / |phi'|
  const Point2 d2 = base_.second_derivative(theta);
  const double sp = norm(d1);
  const Point2 u{d1[0] / sp, d1[1] / sp};
  const double c = dot(u, d2);
  const Point2 du{(d2[0] - c * u[0]) / sp, (d2[1] - c * u[1]) / sp};
  return {d1[0] + s * du[1], d1[1] - s * du[0]};
}

Point2 TubularExtension::d_s(double theta, double s) const {
  (void)s;
  if (kind_ == ExtensionKind::homothetic) {
    const Point2 p = base_.position(theta);
    return {p[0] / radius(), p[1] / radius()};
  }
  return base_.normal(theta);
}

std::array<double, 4> TubularExtension::jacobian(double theta, double s) const {
  // DPhi tau = dPhi/dtheta / (R + s), DPhi nu = dPhi/ds
  const Point2 a = d_theta(theta, s), b = d_s(theta, s);
  const double r = radius() + s;
  const Point2 tau{-std::sin(theta), std::cos(theta)}, nu{std::cos(theta), std::sin(theta)};
  std::array<double, 4> J{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) J[2 * i + j] = a[i] / r * tau[j] + b[i] * nu[j];
  return J;
}

double TubularExtension::det(double theta, double s) const {
  const auto J = jacobian(theta, s);
  return J[0] * J[3] - J[1] * J[2];
}

namespace {

// empty string on success, otherwise the first failed invariant
std::string certify(const TubularExtension& ext, int n_theta, int n_s) {
  const BoundaryMap& phi = ext.base();
  const double delta = ext.delta();
  if (ext.radius() - delta <= 0.0) return "delta exceeds the reference radius";
  for (int i = 0; i < n_theta; ++i) {
    const double th = 2.0 * kPi * i / n_theta;
    const Point2 p0 = ext.map(th, 0.0), q = phi.position(th);
    if (std::abs(p0[0] - q[0]) + std::abs(p0[1] - q[1]) > 1e-13 * (1.0 + norm(q)))
      return "extension does not restrict to phi";
    for (int k = 0; k <= n_s; ++k) {
      const double s = -delta + 2.0 * delta * k / n_s;
      if (!(ext.det(th, s) > 0.0)) return "Jacobian determinant changes sign";
    }
  }
  // edge curves must stay simple
  for (double s : {-delta, delta}) {
    const int m = std::min(n_theta, 256);
    std::vector<Point2> e(m);
    for (int i = 0; i < m; ++i) e[i] = ext.map(2.0 * kPi * i / m, s);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const double dist = norm({e[i][0] - e[j][0], e[i][1] - e[j][1]});
        const double ref = 2.0 * std::abs(std::sin(kPi * (j - i) / m));
        if (!(dist / ref > 1e-8)) return "shell edge curve is not injective";
      }
  }
  // inner shell lands inside phi, outer shell outside (checked at sample points)
  const int step_t = std::max(1, n_theta / 64);
  const int step_s = std::max(1, n_s / 8);
  for (int i = 0; i < n_theta; i += step_t) {
    const double th = 2.0 * kPi * i / n_theta;
    for (int k = step_s; k <= n_s / 2; k += step_s) {
      const double s = delta * 2.0 * k / n_s;
      if (classify_point(phi, ext.map(th, -s)) != Region::interior) return "inner shell leaves the interior";
      if (classify_point(phi, ext.map(th, s)) != Region::exterior) return "outer shell leaves the exterior";
    }
  }
  return {};
}

}  // namespace

TubularExtension extend(const BoundaryMap& phi, double delta, ExtensionKind kind, int n_theta, int n_s) {
  phi.validate();
  if (kind == ExtensionKind::automatic) {
    TubularExtension normal(phi, delta, ExtensionKind::normal_offset);
    if (certify(normal, n_theta, n_s).empty()) return normal;
    kind = ExtensionKind::homothetic;
  }
  TubularExtension ext(phi, delta, kind);
  if (kind == ExtensionKind::homothetic) {
    for (int i = 0; i < n_theta; ++i) {
      const double th = 2.0 * kPi * i / n_theta;
      if (!(cross(phi.position(th), phi.derivative(th)) > 0.0))
        fail(ErrorCode::geometry, "homothetic extension needs a curve star-shaped about the origin");
    }
  }
  const std::string why = certify(ext, n_theta, n_s);
  if (!why.empty()) fail(ErrorCode::geometry, "delta too large for this shape: " + why);
  return ext;
}

Point2 pullback_normal(const TubularExtension& ext, double theta) {
  const auto J = ext.jacobian(theta, 0.0);
  const double det = J[0] * J[3] - J[1] * J[2];
  if (!(std::abs(det) > 1e-14)) fail(ErrorCode::geometry, "singular extension Jacobian");
  // (DPhi)^{-T} nu
  const Point2 nu{std::cos(theta), std::sin(theta)};
  const Point2 v{(J[3] * nu[0] - J[2] * nu[1]) / det, (-J[1] * nu[0] + J[0] * nu[1]) / det};
  const double n = norm(v);
  return {v[0] / n, v[1] / n};
}

BoundaryMap parse_shape(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  double radius = 1.0;
  std::map<int, double> cx, sx, cy, sy;
  bool any = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::parse, "shape line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    double v = 0.0;
    {
      std::istringstream vs(val);
      vs.imbue(std::locale::classic());
      vs >> v;
      if (vs.fail() || !vs.eof() || !std::isfinite(v))
        fail(ErrorCode::parse, "shape key '" + key + "': invalid number '" + val + "'");
    }
    if (key == "radius") {
      radius = v;
      continue;
    }
    std::map<int, double>* target = nullptr;
    std::string prefix;
    for (auto [p, t] : {std::pair{"cos_x_", &cx}, {"sin_x_", &sx}, {"cos_y_", &cy}, {"sin_y_", &sy}}) {
      if (key.rfind(p, 0) == 0) {
        target = t;
        prefix = p;
      }
    }
    const std::string idx = target ? key.substr(prefix.size()) : std::string();
    if (!target || idx.empty() || idx.size() > 3 || idx.find_first_not_of("0123456789") != std::string::npos)
      fail(ErrorCode::parse, "unknown shape key '" + key + "'");
    (*target)[std::stoi(idx)] = v;
    any = true;
  }
  if (!any) fail(ErrorCode::parse, "shape file defines no coefficients");
  if (!(radius > 0.0)) fail(ErrorCode::parse, "shape key 'radius' must be positive");
  int K = 0;
  for (auto* m : {&cx, &sx, &cy, &sy})
    if (!m->empty()) K = std::max(K, m->rbegin()->first);
  auto vec = [&](const std::map<int, double>& m) {
    std::vector<double> v(K + 1, 0.0);
    for (auto [k, c] : m) v[k] = c;
    return v;
  };
  return BoundaryMap(radius, vec(cx), vec(sx), vec(cy), vec(sy));
}

BoundaryMap load_shape(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::io, "cannot open shape file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_shape(ss.str());
}

std::string format_shape(const BoundaryMap& phi) {
  std::ostringstream o;
  o.imbue(std::locale::classic());
  o.precision(17);
  o << "radius=" << phi.radius() << "\n";
  for (int k = 0; k <= phi.degree(); ++k) {
    if (phi.cos_x()[k] != 0.0) o << "cos_x_" << k << "=" << phi.cos_x()[k] << "\n";
    if (phi.sin_x()[k] != 0.0) o << "sin_x_" << k << "=" << phi.sin_x()[k] << "\n";
    if (phi.cos_y()[k] != 0.0) o << "cos_y_" << k << "=" << phi.cos_y()[k] << "\n";
    if (phi.sin_y()[k] != 0.0) o << "sin_y_" << k << "=" << phi.sin_y()[k] << "\n";
  }
  return o.str();
}

}  // namespace layerheat::geometry
