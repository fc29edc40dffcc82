#include "layerheat/pullback.hpp"

#include <algorithm>
#include <cmath>

#include "layerheat/error.hpp"
#include "layerheat/kernels.hpp"
#include "layerheat/special_functions.hpp"

namespace layerheat::pullback {

namespace {

using potentials::LayerKind;

double dot(const Point2& a, const Point2& b) { return a[0] * b[0] + a[1] * b[1]; }

double rel(double num, double den) { return den > 0.0 ? num / den : num; }

// chart-invariant geometry at (theta_j, s_k)
struct Frame {
  std::array<double, 4> jinv;  // (DPhi)^{-1}, row-major
  double det = 0.0;
  double rs = 1.0;  // R + s
  Point2 er{1.0, 0.0}, et{0.0, 1.0};
};

std::vector<Frame> frames(const TubularExtension& ext, const ChartGrid& g) {
  std::vector<Frame> out(static_cast<std::size_t>(g.n_s) * g.n_theta);
  for (int k = 0; k < g.n_s; ++k)
    for (int j = 0; j < g.n_theta; ++j) {
      const double th = g.theta(j), s = g.s(k);
      const auto J = ext.jacobian(th, s);
      const double det = J[0] * J[3] - J[1] * J[2];
      if (!(std::abs(det) > 1e-13)) fail(ErrorCode::geometry, "singular extension Jacobian on the chart grid");
      Frame& f = out[static_cast<std::size_t>(k) * g.n_theta + j];
      f.jinv = {J[3] / det, -J[1] / det, -J[2] / det, J[0] / det};
      f.det = det;
      f.rs = g.radius + s;
      f.er = {std::cos(th), std::sin(th)};
      f.et = {-std::sin(th), std::cos(th)};
    }
  return out;
}

// chart derivatives of one time slice: (u_theta, u_s) at every (k, j)
void chart_gradient(const AnnulusField& u, int i, std::vector<double>& ut, std::vector<double>& us) {
  const ChartGrid& g = u.grid();
  const int nt = g.n_theta, ns = g.n_s;
  const double hs = g.hs();
  ut.assign(static_cast<std::size_t>(ns) * nt, 0.0);
  us.assign(ut.size(), 0.0);
  std::vector<double> row(nt);
  for (int k = 0; k < ns; ++k) {
    for (int j = 0; j < nt; ++j) row[j] = u(i, k, j);
    const auto d = quadrature::spectral_derivative(row);
    std::copy(d.begin(), d.end(), ut.begin() + static_cast<std::ptrdiff_t>(k) * nt);
  }
  for (int k = 0; k < ns; ++k)
    for (int j = 0; j < nt; ++j) {
      double v;
      if (k == 0)
        v = (-3.0 * u(i, 0, j) + 4.0 * u(i, 1, j) - u(i, 2, j)) / (2.0 * hs);
      else if (k == ns - 1)
        v = (3.0 * u(i, k, j) - 4.0 * u(i, k - 1, j) + u(i, k - 2, j)) / (2.0 * hs);
      else
        v = (u(i, k + 1, j) - u(i, k - 1, j)) / (2.0 * hs);
      us[static_cast<std::size_t>(k) * nt + j] = v;
    }
}

Point2 reference_gradient(const Frame& f, double ut, double us) {
  const double a = ut / f.rs;
  return {us * f.er[0] + a * f.et[0], us * f.er[1] + a * f.et[1]};
}

// (DPhi)^{-T} g
Point2 physical_gradient(const Frame& f, const Point2& g) {
  return {f.jinv[0] * g[0] + f.jinv[2] * g[1], f.jinv[1] * g[0] + f.jinv[3] * g[1]};
}

// sin^6 bump on [lo, hi] (C^5 across the ends) and its derivative. The C^infty
// exp(-1/(1-u^2)) bump aliases badly under the trapezoid rule at these widths.
std::pair<double, double> bump(double x, double lo, double hi) {
  if (x <= lo || x >= hi) return {0.0, 0.0};
  const double w = hi - lo;
  const double a = kPi * (x - lo) / w;
  const double sn = std::sin(a), cs = std::cos(a);
  const double s5 = sn * sn * sn * sn * sn;
  return {s5 * sn, 6.0 * s5 * cs * kPi / w};
}

class ShellKernel final : public quadrature::SlabKernel {
 public:
  ShellKernel(ShellKind kind, std::vector<Point2> targets, std::vector<Point2> sources, std::vector<Point2> normals)
      : kind_(kind), x_(std::move(targets)), y_(std::move(sources)), n_(std::move(normals)) {}
  std::array<double, 2> moments(double a, double b, int target, int source) const override {
    const Point2 D{x_[target][0] - y_[source][0], x_[target][1] - y_[source][1]};
    const auto m = kernels::heat_moments_2d(dot(D, D), a, b);
    if (kind_ == ShellKind::V_shell) return {m.m0, m.m1};
    const double dn = 0.5 * dot(D, n_[source]);
    return {dn * m.mm1, dn * m.m0};
  }

 private:
  ShellKind kind_;
  std::vector<Point2> x_, y_, n_;
};

// physical point of the reference point x(theta) + s nu displaced by v
Point2 displaced(const TubularExtension& ext, double theta, const Point2& v) {
  const Point2 X = ext.reference_point(theta, 0.0);
  const Point2 Y{X[0] + v[0], X[1] + v[1]};
  return ext.map(std::atan2(Y[1], Y[0]), std::hypot(Y[0], Y[1]) - ext.radius());
}

}  // namespace

ChartGrid::ChartGrid(int nt, int ns, double d, Side sd, double r)
    : n_theta(nt), n_s(ns), delta(d), side(sd), radius(r) {
  require(nt >= 8 && nt % 2 == 0, "chart grid needs an even theta count >= 8");
  require(ns >= 3, "chart grid needs at least 3 s rows");
  require(d > 0.0 && d < r, "shell width must lie in ]0, R[");
}

ChartGrid ChartGrid::of(const TubularExtension& ext, int nt, int ns, Side sd) {
  return ChartGrid(nt, ns, ext.delta(), sd, ext.radius());
}

double ChartGrid::theta(int j) const { return 2.0 * kPi * j / n_theta; }

double ChartGrid::s(int k) const {
  const double s0 = side == Side::plus ? -delta : 0.0;
  return s0 + k * hs();
}

AnnulusField::AnnulusField(TimeGrid time, ChartGrid grid)
    : time_(time), grid_(grid), v_(static_cast<std::size_t>(time.M + 1) * grid.n_s * grid.n_theta, 0.0) {}

AnnulusField AnnulusField::from_function(const TubularExtension& ext, const TimeGrid& time, const ChartGrid& grid,
                                         const std::function<double(double, const Point2&)>& f) {
  AnnulusField u(time, grid);
  for (int k = 0; k < grid.n_s; ++k)
    for (int j = 0; j < grid.n_theta; ++j) {
      const Point2 y = ext.map(grid.theta(j), grid.s(k));
      for (int i = 0; i <= time.M; ++i) u(i, k, j) = f(time.node(i), y);
    }
  return u;
}

double AnnulusField::max_abs() const {
  double m = 0.0;
  for (double v : v_) m = std::max(m, std::abs(v));
  return m;
}

bool AnnulusField::satisfies_c0() const {
  const std::size_t slice = static_cast<std::size_t>(grid_.n_s) * grid_.n_theta;
  return std::all_of(v_.begin(), v_.begin() + static_cast<std::ptrdiff_t>(slice), [](double v) { return v == 0.0; });
}

WeakPair WeakPair::zero(const TimeGrid& time, const ChartGrid& grid) {
  WeakPair p{time, grid, {}, {}};
  const std::size_t n = static_cast<std::size_t>(time.M + 1) * grid.n_s * grid.n_theta;
  p.w0.assign(n, 0.0);
  p.w1.assign(n, {0.0, 0.0});
  return p;
}

WeakPair b_omega(const TubularExtension& ext, const AnnulusField& u) {
  const ChartGrid& g = u.grid();
  const auto fr = frames(ext, g);
  WeakPair p = WeakPair::zero(u.time(), g);
  std::vector<double> ut, us;
  const std::size_t slice = static_cast<std::size_t>(g.n_s) * g.n_theta;
  for (int i = 0; i <= u.time().M; ++i) {
    chart_gradient(u, i, ut, us);
    for (int k = 0; k < g.n_s; ++k)
      for (int j = 0; j < g.n_theta; ++j) {
        const std::size_t c = static_cast<std::size_t>(k) * g.n_theta + j;
        const Frame& f = fr[c];
        const double ad = std::abs(f.det);
        const Point2 q = physical_gradient(f, reference_gradient(f, ut[c], us[c]));
        // (DPhi)^{-1} q
        p.w0[i * slice + c] = -ad * u(i, k, j);
        p.w1[i * slice + c] = {ad * (f.jinv[0] * q[0] + f.jinv[1] * q[1]), ad * (f.jinv[2] * q[0] + f.jinv[3] * q[1])};
      }
  }
  return p;
}

std::vector<TestFunction> default_test_family() {
  std::vector<TestFunction> fam;
  for (int m = 0; m <= 3; ++m) {
    fam.push_back({0.15, 0.95, 0.15, 0.85, m, false});
    if (m > 0) fam.push_back({0.15, 0.95, 0.15, 0.85, m, true});
  }
  fam.push_back({0.15, 0.55, 0.15, 0.85, 0, false});
  fam.push_back({0.55, 0.95, 0.15, 0.85, 1, false});
  fam.push_back({0.15, 0.95, 0.30, 0.70, 2, true});
  return fam;
}

double weak_heat_residual(const WeakPair& pair, const WeakPair& rhs, const std::vector<TestFunction>& family) {
  const ChartGrid& g = pair.grid;
  const TimeGrid& tg = pair.time;
  require(pair.w0.size() == rhs.w0.size() && pair.w1.size() == rhs.w1.size() && rhs.grid.n_s == g.n_s &&
              rhs.grid.n_theta == g.n_theta && rhs.time.M == tg.M,
          "weak pairs live on different grids");
  const std::size_t slice = static_cast<std::size_t>(g.n_s) * g.n_theta;
  const double wth = 2.0 * kPi / g.n_theta, hs = g.hs(), dt = tg.dt();
  const double s0 = g.s(0);
  double worst = 0.0;
  for (const auto& tf : family) {
    double pairing = 0.0, absolute = 0.0;
    for (int i = 0; i <= tg.M; ++i) {
      const auto [bt, dbt] = bump(tg.node(i) / tg.T, tf.t_lo, tf.t_hi);
      if (bt == 0.0 && dbt == 0.0) continue;
      const double wt = (i == 0 || i == tg.M ? 0.5 : 1.0) * dt;
      for (int k = 0; k < g.n_s; ++k) {
        const double s = g.s(k);
        const auto [bs, dbs] = bump((s - s0) / g.delta, tf.s_lo, tf.s_hi);
        if (bs == 0.0 && dbs == 0.0) continue;
        const double ws = (k == 0 || k == g.n_s - 1 ? 0.5 : 1.0) * hs;
        const double rs = g.radius + s;
        for (int j = 0; j < g.n_theta; ++j) {
          const double th = g.theta(j);
          double tr = 1.0, dtr = 0.0;
          if (tf.mode > 0) {
            tr = tf.sine ? std::sin(tf.mode * th) : std::cos(tf.mode * th);
            dtr = tf.sine ? tf.mode * std::cos(tf.mode * th) : -tf.mode * std::sin(tf.mode * th);
          }
          const double phi_t = dbt / tg.T * bs * tr;
          const double phi_s = bt * dbs / g.delta * tr;
          const double phi_th = bt * bs * dtr;
          const Point2 er{std::cos(th), std::sin(th)}, et{-std::sin(th), std::cos(th)};
          const Point2 Dphi{phi_s * er[0] + phi_th / rs * et[0], phi_s * er[1] + phi_th / rs * et[1]};
          const std::size_t c = i * slice + static_cast<std::size_t>(k) * g.n_theta + j;
          const double w = wt * ws * wth * rs;
          const Point2 d1{pair.w1[c][0] - rhs.w1[c][0], pair.w1[c][1] - rhs.w1[c][1]};
          pairing += w * ((pair.w0[c] - rhs.w0[c]) * phi_t + dot(Dphi, d1));
          absolute += w * (std::abs(pair.w0[c] * phi_t) + std::abs(dot(Dphi, pair.w1[c])) +
                           std::abs(rhs.w0[c] * phi_t) + std::abs(dot(Dphi, rhs.w1[c])));
        }
      }
    }
    worst = std::max(worst, absolute > 0.0 ? std::abs(pairing) / absolute : 0.0);
  }
  return worst;
}

quadrature::GridSamples shell_operator(ShellKind kind, const TubularExtension& ext, const SpaceTimeDensity& mu,
                                       Side side) {
  const auto& phi = ext.base();
  const int N = mu.space().N;
  const double s = side == Side::plus ? -ext.delta() : ext.delta();
  std::vector<Point2> x(N), y(N), n(N);
  std::vector<double> w(N);
  for (int j = 0; j < N; ++j) {
    const double th = mu.space().theta(j);
    x[j] = ext.map(th, s);
    y[j] = phi.position(th);
    n[j] = phi.normal(th);
    w[j] = 2.0 * kPi / N * phi.speed(th);
  }
  const ShellKernel K(kind, std::move(x), std::move(y), std::move(n));
  return quadrature::convolve(K, mu.values(), w, N, mu.time()).values;
}

LayerFields layer_fields(const TubularExtension& ext, const LayerEvaluator& ev, LayerKind kind, int n_s) {
  const TimeGrid& tg = ev.density().time();
  const int nt = ev.density().space().N;
  LayerFields out;
  const auto q = kind == LayerKind::single ? potentials::JumpQuantity::single_value
                                           : potentials::JumpQuantity::double_value;
  for (Side side : {Side::plus, Side::minus}) {
    const ChartGrid g = ChartGrid::of(ext, nt, n_s, side);
    AnnulusField u(tg, g);
    for (int k = 0; k < n_s; ++k)
      for (int j = 0; j < nt; ++j) {
        if (k == g.interface_row()) {
          const auto jp = potentials::jump_probe(ev, q, side, g.theta(j));
          if (!jp.converged && out.interface_converged) {
            out.interface_converged = false;
            out.diagnostic = "interface limit at theta index " + std::to_string(j) + ": " + jp.diagnostic;
          }
          for (int i = 0; i <= tg.M; ++i) u(i, k, j) = jp.limit[i];
        } else {
          const auto h = ev.history(kind, ext.map(g.theta(j), g.s(k)));
          for (int i = 0; i <= tg.M; ++i) u(i, k, j) = h.value[i];
        }
      }
    (side == Side::plus ? out.plus : out.minus) = std::move(u);
  }
  return out;
}

double TransmissionResiduals::max() const {
  const auto v = as_vector();
  return *std::max_element(v.begin(), v.end());
}

std::vector<std::string> TransmissionResiduals::labels() {
  return {"interface_value", "conormal_jump", "shell_trace_plus", "shell_trace_minus",
          "weak_plus",       "weak_minus",    "initial"};
}

std::vector<double> TransmissionResiduals::as_vector() const {
  return {interface_value_residual, conormal_jump_residual, shell_trace_residual_plus, shell_trace_residual_minus,
          weak_residual_plus,       weak_residual_minus,    initial_residual};
}

TransmissionResiduals transmission_verify(const TubularExtension& ext, const SpaceTimeDensity& mu, LayerKind kind,
                                          const TransmissionOptions& opt) {
  require(opt.conormal_stride >= 1, "conormal stride must be positive");
  const LayerEvaluator ev(ext.base(), mu);
  const TimeGrid& tg = mu.time();
  const int M = tg.M, N = mu.space().N;
  const bool single = kind == LayerKind::single;
  TransmissionResiduals r;

  const LayerFields F = layer_fields(ext, ev, kind, opt.n_s);
  r.interface_converged = F.interface_converged;
  if (!F.interface_converged) r.diagnostic = F.diagnostic;
  const double scale = std::max(F.plus.max_abs(), F.minus.max_abs());
  double mu_max = 0.0;
  for (double v : mu.values().values) mu_max = std::max(mu_max, std::abs(v));

  // (a) value jump minus g
  {
    const int kp = F.plus.grid().interface_row(), km = F.minus.grid().interface_row();
    double worst = 0.0;
    for (int i = 0; i <= M; ++i)
      for (int j = 0; j < N; ++j) {
        const double g = single ? 0.0 : -mu(i, j);
        worst = std::max(worst, std::abs(F.plus(i, kp, j) - F.minus(i, km, j) - g));
      }
    r.interface_value_residual = rel(worst, single ? scale : std::max(scale, mu_max));
  }

  // (b) conormal jump minus g1 along d = (DPhi)^{-1} n
  {
    const std::array<double, 4> off{2.5e-3, 5e-3, 1e-2, 2e-2};
    double worst = 0.0, dscale = 0.0;
    for (int j = 0; j < N; j += opt.conormal_stride) {
      const double th = mu.space().theta(j);
      const Point2 n = geometry::pullback_normal(ext, th);
      const auto J = ext.jacobian(th, 0.0);
      const double det = J[0] * J[3] - J[1] * J[2];
      const Point2 d{(J[3] * n[0] - J[1] * n[1]) / det, (-J[2] * n[0] + J[0] * n[1]) / det};
      std::array<std::vector<double>, 2> dn;  // plus, minus
      for (int sd = 0; sd < 2; ++sd) {
        const double sgn = sd == 0 ? -1.0 : 1.0;
        std::array<std::vector<double>, 4> f;
        for (int e = 0; e < 4; ++e)
          f[e] = ev.history(kind, displaced(ext, th, {sgn * off[e] * d[0], sgn * off[e] * d[1]})).value;
        dn[sd].resize(M + 1);
        for (int i = 0; i <= M; ++i) {
          // D(h) = (f(2h) - f(h)) / h on h = 1e-2, 5e-3, 2.5e-3
          const double D1 = (f[3][i] - f[2][i]) / off[2], D2 = (f[2][i] - f[1][i]) / off[1],
                       D3 = (f[1][i] - f[0][i]) / off[0];
          const double lim = 2.0 * D3 - D2;
          const double d1 = D1 - D2, d2 = D2 - D3;
          if (std::abs(d1) + std::abs(d2) > 2e-3 * std::abs(D3) + 1e-8 * (1.0 + std::abs(D3))) {
            const double ratio = d1 / d2;
            if (!(ratio >= 1.4 && ratio <= 4.6) && r.conormal_converged) {
              r.conormal_converged = false;
              r.diagnostic += (r.diagnostic.empty() ? "" : "; ") + std::string("conormal ladder ratio ") +
                              std::to_string(ratio) + (sd == 0 ? " (plus)" : " (minus)") + " at theta index " +
                              std::to_string(j) + ", time index " + std::to_string(i);
            }
          }
          dn[sd][i] = sgn * lim;  // dv/dn with n pointing out of the inner shell
          dscale = std::max(dscale, std::abs(dn[sd][i]));
        }
      }
      for (int i = 0; i <= M; ++i) {
        const double g1 = single ? mu(i, j) : 0.0;
        worst = std::max(worst, std::abs(dn[0][i] - dn[1][i] - g1));
        dscale = std::max(dscale, std::abs(g1));
      }
    }
    r.conormal_jump_residual = rel(worst, dscale);
  }

  // (c) shell traces
  {
    const ShellKind sk = single ? ShellKind::V_shell : ShellKind::W_shell;
    for (Side side : {Side::plus, Side::minus}) {
      const AnnulusField& U = side == Side::plus ? F.plus : F.minus;
      const auto S = shell_operator(sk, ext, mu, side);
      const int k = U.grid().edge_row();
      double worst = 0.0;
      for (int i = 0; i <= M; ++i)
        for (int j = 0; j < N; ++j) worst = std::max(worst, std::abs(U(i, k, j) - S(i, j)));
      (side == Side::plus ? r.shell_trace_residual_plus : r.shell_trace_residual_minus) = rel(worst, scale);
    }
  }

  // (d) weak residuals against zero data
  r.weak_residual_plus = weak_heat_residual(b_omega(ext, F.plus), WeakPair::zero(tg, F.plus.grid()));
  r.weak_residual_minus = weak_heat_residual(b_omega(ext, F.minus), WeakPair::zero(tg, F.minus.grid()));

  // (e) initial values
  {
    double worst = 0.0;
    for (const AnnulusField* U : {&F.plus, &F.minus})
      for (int k = 0; k < U->grid().n_s; ++k)
        for (int j = 0; j < N; ++j) worst = std::max(worst, std::abs((*U)(0, k, j)));
    r.initial_residual = rel(worst, scale);
  }
  return r;
}

double EnergyReport::max_relative(double t_from) const {
  double m = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t_from - 1e-12) m = std::max(m, relative[i]);
  return m;
}

EnergyReport energy_monitor(const TubularExtension& ext, const AnnulusField& plus, const AnnulusField& minus) {
  const TimeGrid& tg = plus.time();
  require(minus.time().M == tg.M && minus.time().T == tg.T, "shell fields on different time grids");
  require(plus.grid().side == Side::plus && minus.grid().side == Side::minus, "fields must be (plus, minus)");
  const int M = tg.M;
  EnergyReport rep;
  rep.t = tg.nodes();
  rep.e.assign(M + 1, 0.0);
  rep.dissipation.assign(M + 1, 0.0);
  rep.boundary.assign(M + 1, 0.0);

  std::vector<double> ut, us;
  for (const AnnulusField* U : {&plus, &minus}) {
    const ChartGrid& g = U->grid();
    const auto fr = frames(ext, g);
    const double wth = 2.0 * kPi / g.n_theta, hs = g.hs();
    // outward unit normals and line elements on the two edge rows (k = 0: -, k = n_s - 1: +)
    std::array<std::vector<Point2>, 2> nout;
    std::array<std::vector<double>, 2> dl;
    for (int e = 0; e < 2; ++e) {
      const int k = e == 0 ? 0 : g.n_s - 1;
      nout[e].resize(g.n_theta);
      dl[e].resize(g.n_theta);
      for (int j = 0; j < g.n_theta; ++j) {
        const Point2 T = ext.d_theta(g.theta(j), g.s(k)), S = ext.d_s(g.theta(j), g.s(k));
        const double len = std::hypot(T[0], T[1]);
        Point2 n{T[1] / len, -T[0] / len};
        if (dot(n, S) < 0.0) n = {-n[0], -n[1]};  // toward increasing s
        if (e == 0) n = {-n[0], -n[1]};
        nout[e][j] = n;
        dl[e][j] = wth * len;
      }
    }
    for (int i = 0; i <= M; ++i) {
      chart_gradient(*U, i, ut, us);
      double e = 0.0, D = 0.0, B = 0.0;
      for (int k = 0; k < g.n_s; ++k) {
        const double ws = (k == 0 || k == g.n_s - 1 ? 0.5 : 1.0) * hs;
        for (int j = 0; j < g.n_theta; ++j) {
          const std::size_t c = static_cast<std::size_t>(k) * g.n_theta + j;
          const Frame& f = fr[c];
          const double v = (*U)(i, k, j);
          const Point2 gv = physical_gradient(f, reference_gradient(f, ut[c], us[c]));
          const double w = ws * wth * f.rs * std::abs(f.det);
          e += w * v * v;
          D += w * dot(gv, gv);
          if (k == 0 || k == g.n_s - 1) {
            const int ed = k == 0 ? 0 : 1;
            B += dl[ed][j] * v * dot(gv, nout[ed][j]);
          }
        }
      }
      rep.e[i] += e;
      rep.dissipation[i] += D;
      rep.boundary[i] += B;
    }
  }

  const double dt = tg.dt();
  rep.dedt.assign(M + 1, 0.0);
  for (int i = 0; i <= M; ++i) {
    if (i == 0)
      rep.dedt[i] = (-3.0 * rep.e[0] + 4.0 * rep.e[1] - rep.e[2]) / (2.0 * dt);
    else if (i == M)
      rep.dedt[i] = (3.0 * rep.e[M] - 4.0 * rep.e[M - 1] + rep.e[M - 2]) / (2.0 * dt);
    else
      rep.dedt[i] = (rep.e[i + 1] - rep.e[i - 1]) / (2.0 * dt);
  }
  rep.residual.resize(M + 1);
  rep.relative.resize(M + 1);
  for (int i = 0; i <= M; ++i) {
    rep.residual[i] = std::abs(rep.dedt[i] + 2.0 * rep.dissipation[i] - 2.0 * rep.boundary[i]);
    const double s = std::max(std::abs(rep.dedt[i]), 2.0 * rep.dissipation[i]);
    rep.relative[i] = s > 0.0 ? rep.residual[i] / s : 0.0;
  }
  return rep;
}

}  // namespace layerheat::pullback
