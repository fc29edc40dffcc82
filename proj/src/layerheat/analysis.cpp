#include "layerheat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "layerheat/error.hpp"
#include "layerheat/special_functions.hpp"

namespace layerheat::analysis {

namespace {

struct PairSet {
  // (fixed index, a, b) with a < b along the varying axis
  std::vector<std::array<int, 3>> pairs;
};

// Pairs (a < b) among n nodes along one axis, for each of m fixed indices,
// stratified by the gap b - a.
PairSet select_pairs(int n, int m, const PairSampling& sp, std::uint64_t salt) {
  PairSet ps;
  if (n < 2 || m < 1) return ps;
  const std::size_t total = static_cast<std::size_t>(m) * n * (n - 1) / 2;
  if (total <= sp.max_pairs) {
    ps.pairs.reserve(total);
    for (int f = 0; f < m; ++f)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) ps.pairs.push_back({f, a, b});
    return ps;
  }
  std::mt19937_64 rng(sp.seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
  const std::size_t strata = static_cast<std::size_t>(n - 1);
  const std::size_t quota = (sp.max_pairs + strata - 1) / strata;
  for (int gap = 1; gap < n; ++gap) {
    const std::size_t size = static_cast<std::size_t>(n - gap) * m;
    if (size <= quota) {
      for (std::size_t id = 0; id < size; ++id)
        ps.pairs.push_back({static_cast<int>(id % m), static_cast<int>(id / m), static_cast<int>(id / m) + gap});
      continue;
    }
    for (std::size_t q = 0; q < quota; ++q) {
      const std::size_t id = rng() % size;
      ps.pairs.push_back({static_cast<int>(id % m), static_cast<int>(id / m), static_cast<int>(id / m) + gap});
    }
  }
  return ps;
}

struct Seminorms {
  double time = 0.0, space = 0.0;
};

Seminorms seminorms(const SampledField& f, const GridSamples& v, double et, double ex, const PairSet& tp,
                    const PairSet& xp) {
  Seminorms s;
  for (const auto& [j, a, b] : tp.pairs) {
    const double d = std::abs(v(a, j) - v(b, j));
    if (d > 0.0) s.time = std::max(s.time, d / std::pow(std::abs(f.t[b] - f.t[a]), et));
  }
  for (const auto& [i, a, b] : xp.pairs) {
    const double d = std::abs(v(i, a) - v(i, b));
    if (d > 0.0) {
      const double r = std::hypot(f.x[a][0] - f.x[b][0], f.x[a][1] - f.x[b][1]);
      s.space = std::max(s.space, d / std::pow(r, ex));
    }
  }
  return s;
}

double sup_abs(const GridSamples& v) {
  double m = 0.0;
  for (double x : v.values) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void check_domain(const Domain& domain, const Point2& y) {
  if (domain && !domain(y))
    fail(ErrorCode::invalid_argument,
         "superposition range violation at (" + std::to_string(y[0]) + ", " + std::to_string(y[1]) + ")");
}

// central stencils with second-order accuracy: {offset, weight}
std::vector<std::pair<int, double>> stencil(int k) {
  switch (k) {
    case 1: return {{-1, -0.5}, {1, 0.5}};
    case 2: return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
    case 3: return {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
    case 4: return {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}};
    default: fail(ErrorCode::invalid_argument, "derivative order must lie in 1..4");
  }
}

std::vector<double> difference_quotient(PathAssembly& pa, OperatorKind kind, int comp, int k, double h) {
  // the weights sum to zero, so differencing against s = 0 first keeps entries that
  // do not move along the path exactly zero
  const std::vector<double> E0 = pa.entries(kind, comp, 0.0);
  std::vector<double> out(E0.size(), 0.0);
  for (const auto& [m, w] : stencil(k)) {
    if (m == 0) continue;
    const auto& E = pa.entries(kind, comp, m * h);
    for (std::size_t i = 0; i < E.size(); ++i) out[i] += w * (E[i] - E0[i]);
  }
  const double scale = std::pow(h, k);
  for (double& v : out) v /= scale;
  return out;
}

}  // namespace

SampledField SampledField::on_grid(const TimeGrid& time, const SpaceGrid& space, GridSamples values, double radius) {
  require(values.rows == time.M + 1 && values.cols == space.N, "samples do not match the grids");
  require(radius > 0.0, "radius must be positive");
  SampledField f;
  f.t = time.nodes();
  f.x.resize(space.N);
  for (int j = 0; j < space.N; ++j) f.x[j] = {radius * std::cos(space.theta(j)), radius * std::sin(space.theta(j))};
  f.values = std::move(values);
  f.periodic_radius = radius;
  return f;
}

double HolderEstimate::total() const {
  return sup_part + time_seminorm + space_seminorm + gradient_sup + gradient_time_seminorm + gradient_space_seminorm;
}

HolderEstimate parabolic_norm(const SampledField& f, double alpha, int order, const PairSampling& sampling) {
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in ]0, 1]");
  require(order == 0 || order == 1, "order must be 0 or 1");
  const int R = static_cast<int>(f.t.size()), P = static_cast<int>(f.x.size());
  require(f.values.rows == R && f.values.cols == P, "samples do not match the nodes");
  if (order == 1) require(f.periodic_radius > 0.0, "order 1 needs samples on a periodic circle grid");

  const PairSet tp = select_pairs(R, P, sampling, 1);
  const PairSet xp = select_pairs(P, R, sampling, 2);
  HolderEstimate h;
  h.order = order;
  h.time_exponent = order == 0 ? alpha / 2.0 : (1.0 + alpha) / 2.0;
  h.space_exponent = alpha;
  h.sup_part = sup_abs(f.values);
  // the space seminorm of f enters only at order 0; at order 1 it is replaced by Df
  const Seminorms s0 = seminorms(f, f.values, h.time_exponent, alpha, tp, order == 0 ? xp : PairSet{});
  h.time_seminorm = s0.time;
  h.space_seminorm = s0.space;
  if (order == 1) {
    GridSamples g(R, P);
    for (int i = 0; i < R; ++i) {
      const auto d = quadrature::spectral_derivative(f.values.row(i));
      for (int j = 0; j < P; ++j) g(i, j) = d[j] / f.periodic_radius;
    }
    h.gradient_sup = sup_abs(g);
    const Seminorms s1 = seminorms(f, g, alpha / 2.0, alpha, tp, xp);
    h.gradient_time_seminorm = s1.time;
    h.gradient_space_seminorm = s1.space;
  }
  return h;
}

GridSamples superpose(const CausalField& F, const BoundaryMap& phi, const TimeGrid& time, const SpaceGrid& space,
                      const Domain& domain) {
  GridSamples out(time.M + 1, space.N);
  for (int j = 0; j < space.N; ++j) {
    const Point2 y = phi.position(space.theta(j));
    check_domain(domain, y);
    for (int i = 1; i <= time.M; ++i) out(i, j) = F(time.node(i), y);
  }
  return out;
}

std::vector<double> superpose_pair(const CausalField& F, const BoundaryMap& phi, const TimeGrid& time,
                                   const SpaceGrid& space, const Domain& domain) {
  const int N = space.N;
  const std::size_t slice = static_cast<std::size_t>(N) * N;
  std::vector<double> out((time.M + 1) * slice, 0.0);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) {
      const Point2 a = phi.position(space.theta(j)), b = phi.position(space.theta(k));
      const Point2 y{a[0] - b[0], a[1] - b[1]};
      check_domain(domain, y);
        for (int i = 1; i <= time.M; ++i) out[i * slice + static_cast<std::size_t>(j) * N + k] = F(time.node(i), y);
    }
  return out;
}

void ShapePath::certify(double s_max, int samples) const {
  require(samples >= 2, "certification needs at least two samples");
  for (int k = 0; k < samples; ++k) at(-s_max + 2.0 * s_max * k / (samples - 1)).validate();
}

ShapePath radial_path(const BoundaryMap& base, double eps, int m) {
  require(m >= 1, "radial path needs m >= 1");
  const int deg = base.degree();
  const int n = deg + m + 1;
  std::vector<double> cx(n, 0.0), sx(n, 0.0), cy(n, 0.0), sy(n, 0.0);
  // cos(m t) cos(k t) = (cos((k + m) t) + cos((k - m) t)) / 2, same for sin(k t)
  auto spread = [&](const std::vector<double>& c, const std::vector<double>& s, std::vector<double>& oc,
                    std::vector<double>& os) {
    for (int k = 1; k <= deg; ++k) {
      const double a = 0.5 * eps * c[k], b = 0.5 * eps * s[k];
      oc[k + m] += a;
      os[k + m] += b;
      const int d = k - m;
      if (d == 0) {
        oc[0] += a;
      } else {
        oc[std::abs(d)] += a;
        os[std::abs(d)] += d > 0 ? b : -b;
      }
    }
  };
  spread(base.cos_x(), base.sin_x(), cx, sx);
  spread(base.cos_y(), base.sin_y(), cy, sy);
  return {base, BoundaryMap(base.radius(), cx, sx, cy, sy), "radial"};
}

ShapePath translation_path(const BoundaryMap& base, const Point2& shift) {
  return {base, BoundaryMap(base.radius(), {shift[0]}, {0.0}, {shift[1]}, {0.0}), "translation"};
}

PathAssembly::PathAssembly(ShapePath path, TimeGrid time, SpaceGrid space)
    : path_(std::move(path)), time_(time), space_(space) {}

const std::vector<double>& PathAssembly::entries(OperatorKind kind, int component, double s) {
  const int key = static_cast<int>(kind) * 4 + component;
  auto it = cache_.find({s, key});
  if (it != cache_.end()) return it->second;
  const auto op = potentials::assemble(kind, path_.at(s), time_, space_, component);
  std::vector<double> e = op.lag_data();
  e.insert(e.end(), op.initial_data().begin(), op.initial_data().end());
  return cache_.emplace(std::make_pair(s, key), std::move(e)).first->second;
}

ShapeDerivative shape_derivative(PathAssembly& pa, OperatorKind kind, int component, int order, double h) {
  require(h > 0.0, "step must be positive");
  ShapeDerivative d;
  d.order = order;
  d.h = h;
  d.estimate = difference_quotient(pa, kind, component, order, h);
  const auto half = difference_quotient(pa, kind, component, order, h / 2.0);
  const auto quarter = difference_quotient(pa, kind, component, order, h / 4.0);
  d.norm = max_abs(d.estimate);
  const double e1 = max_abs_diff(d.estimate, half), e2 = max_abs_diff(half, quarter);
  if (e1 == 0.0 && e2 == 0.0)
    d.observed_order = std::numeric_limits<double>::quiet_NaN();
  else if (e2 == 0.0)
    d.observed_order = std::numeric_limits<double>::infinity();
  else
    d.observed_order = std::log2(e1 / e2);
  const double nh = max_abs(half);
  d.stabilization_ratio = (d.norm == 0.0 && nh == 0.0) ? 1.0 : d.norm / nh;
  d.flagged = !(d.stabilization_ratio >= 0.5 && d.stabilization_ratio <= 2.0) ||
              (order <= 2 && std::isfinite(d.observed_order) && d.observed_order < 1.5);
  return d;
}

report::Table smoothness_report(std::vector<PathAssembly*> paths, const std::vector<KindSpec>& kinds, int max_order,
                                double h) {
  report::Table t;
  t.header = {"path", "kind", "order", "h", "estimate_norm", "observed_order", "stabilization_ratio", "flagged"};
  for (PathAssembly* pa : paths)
    for (const auto& k : kinds)
      for (int order = 1; order <= max_order; ++order) {
        const auto d = shape_derivative(*pa, k.kind, k.component, order, h);
        t.add({pa->path().name, potentials::kind_name(k.kind, k.component), report::num(static_cast<long long>(order)),
               report::num(h), report::num(d.norm), report::num(d.observed_order),
               report::num(d.stabilization_ratio), d.flagged ? "1" : "0"});
      }
  return t;
}

double operator_norm_ratio(const potentials::BoundaryOperatorMatrix& op, const potentials::SpaceTimeDensity& mu,
                           double alpha, const PairSampling& sampling) {
  const GridSamples out = op.apply(mu);
  const auto num = parabolic_norm(SampledField::on_grid(op.time(), op.space(), out), alpha, 1, sampling);
  const auto den = parabolic_norm(SampledField::on_grid(mu.time(), mu.space(), mu.values()), alpha, 0, sampling);
  require(den.total() > 0.0, "density has zero norm");
  return num.total() / den.total();
}

std::function<double(double, double)> random_density(std::uint64_t seed, int index) {
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(index));
  auto uni = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };
  const double c1 = 0.5 * uni();
  std::array<double, 5> a{}, b{};
  for (int k = 0; k <= 4; ++k) {
    a[k] = uni() / ((k + 1.0) * (k + 1.0));
    b[k] = k == 0 ? 0.0 : uni() / ((k + 1.0) * (k + 1.0));
  }
  a[0] += 1.0;
  return [=](double t, double th) {
    double s = 0.0;
    for (int k = 0; k <= 4; ++k) s += a[k] * std::cos(k * th) + b[k] * std::sin(k * th);
    return t * (1.0 + c1 * t) * s;
  };
}

}  // namespace layerheat::analysis
