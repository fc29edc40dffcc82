#include "layerheat/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "layerheat/error.hpp"
#include "layerheat/special_functions.hpp"

namespace layerheat::quadrature {

TimeGrid::TimeGrid(double horizon, int steps) : T(horizon), M(steps) {
  require(T > 0.0, "time horizon must be positive");
  require(M >= 2, "time grid needs at least 2 steps");
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> t(M + 1);
  for (int i = 0; i <= M; ++i) t[i] = node(i);
  return t;
}

SpaceGrid::SpaceGrid(int n) : N(n) { require(N >= 8 && N % 2 == 0, "space grid needs an even N >= 8"); }
double SpaceGrid::h() const { return 2.0 * kPi / N; }
double SpaceGrid::theta(int j) const { return 2.0 * kPi * j / N; }

TrigInterpolant::TrigInterpolant(std::span<const double> f) : n_(static_cast<int>(f.size()) / 2) {
  const int N = static_cast<int>(f.size());
  require(N >= 2 && N % 2 == 0, "trigonometric interpolation needs an even sample count");
  a_.assign(n_ + 1, 0.0);
  b_.assign(n_ + 1, 0.0);
  for (int m = 0; m <= n_; ++m) {
    double sa = 0.0, sb = 0.0;
    for (int j = 0; j < N; ++j) {
      // exact node angle reduction keeps the coefficients symmetric
      const long idx = (static_cast<long>(m) * j) % N;
      const double th = 2.0 * kPi * idx / N;
      sa += f[j] * std::cos(th);
      sb += f[j] * std::sin(th);
    }
    const double w = (m == 0 || m == n_) ? 1.0 / N : 2.0 / N;
    a_[m] = w * sa;
    b_[m] = (m == 0 || m == n_) ? 0.0 : w * sb;
  }
}

double TrigInterpolant::operator()(double theta) const {
  double s = a_[0];
  for (int m = 1; m <= n_; ++m) s += a_[m] * std::cos(m * theta) + b_[m] * std::sin(m * theta);
  return s;
}

double TrigInterpolant::derivative(double theta) const {
  double s = 0.0;
  for (int m = 1; m < n_; ++m) s += m * (b_[m] * std::cos(m * theta) - a_[m] * std::sin(m * theta));
  return s;
}

std::vector<double> TrigInterpolant::upsample(int factor) const {
  require(factor >= 1, "upsampling factor must be positive");
  const int N = 2 * n_;
  const int Nf = N * factor;
  std::vector<double> ct(Nf), st(Nf);
  for (int f = 0; f < Nf; ++f) {
    ct[f] = std::cos(2.0 * kPi * f / Nf);
    st[f] = std::sin(2.0 * kPi * f / Nf);
  }
  std::vector<double> out(Nf, a_[0]);
  for (int m = 1; m <= n_; ++m) {
    if (a_[m] == 0.0 && b_[m] == 0.0) continue;
    int idx = 0;
    for (int f = 0; f < Nf; ++f) {
      out[f] += a_[m] * ct[idx] + b_[m] * st[idx];
      idx += m;
      if (idx >= Nf) idx -= Nf;
    }
  }
  return out;
}

std::vector<double> spectral_derivative(std::span<const double> f) {
  const int N = static_cast<int>(f.size());
  require(N >= 2 && N % 2 == 0, "spectral derivative needs an even sample count");
  std::vector<double> cot(N, 0.0);
  for (int k = 1; k < N; ++k) cot[k] = 0.5 / std::tan(kPi * k / N) * ((k % 2) ? -1.0 : 1.0);
  std::vector<double> d(N, 0.0);
  // D_{jl} = (1/2) (-1)^{j-l} cot((t_j - t_l)/2)
  for (int j = 0; j < N; ++j) {
    double s = 0.0;
    for (int l = 0; l < N; ++l) {
      if (l == j) continue;
      s += cot[(j - l + N) % N] * f[l];
    }
    d[j] = s;
  }
  return d;
}

std::vector<double> log_weights(int N) {
  require(N >= 2 && N % 2 == 0, "log weights need an even N");
  const int n = N / 2;
  std::vector<double> w(N);
  for (int k = 0; k < N; ++k) {
    double s = 0.0;
    for (int m = 1; m < n; ++m) {
      const double th = 2.0 * kPi * ((static_cast<long>(m) * k) % N) / N;
      s += std::cos(th) / m;
    }
    w[k] = -2.0 * kPi / n * s - kPi / (static_cast<double>(n) * n) * ((k % 2) ? -1.0 : 1.0);
  }
  return w;
}

std::vector<double> hilbert_weights(int N) {
  require(N >= 2 && N % 2 == 0, "Hilbert weights need an even N");
  std::vector<double> w(N, 0.0);
  for (int k = 1; k < N; k += 2) w[k] = 2.0 * kPi / N / std::tan(kPi * k / N);
  return w;
}

namespace {

class SmoothKernel final : public SlabKernel {
 public:
  explicit SmoothKernel(LagFunction g) : g_(std::move(g)) {}
  std::array<double, 2> moments(double a, double b, int i, int j) const override {
    const double ga = g_(a, i, j), gb = g_(b, i, j);
    const double h = 0.5 * (b - a);
    return {h * (ga + gb), h * (a * ga + b * gb)};
  }

 private:
  LagFunction g_;
};

class InverseSqrtKernel final : public SlabKernel {
 public:
  explicit InverseSqrtKernel(LagFunction g) : g_(std::move(g)) {}
  std::array<double, 2> moments(double a, double b, int i, int j) const override {
    const double g = g_(0.5 * (a + b), i, j);
    const double sa = std::sqrt(a), sb = std::sqrt(b);
    return {g * 2.0 * (sb - sa), g * (2.0 / 3.0) * (b * sb - a * sa)};
  }

 private:
  LagFunction g_;
};

}  // namespace

std::unique_ptr<SlabKernel> make_kernel(SingularityClass cls, LagFunction g) {
  if (cls == SingularityClass::smooth) return std::make_unique<SmoothKernel>(std::move(g));
  return std::make_unique<InverseSqrtKernel>(std::move(g));
}

ConvolveResult convolve(const SlabKernel& kernel, const GridSamples& f, std::span<const double> w,
                        int n_targets, const TimeGrid& grid) {
  const int M = grid.M;
  const int ns = f.cols;
  require(f.rows == M + 1, "density rows must match the time grid");
  require(static_cast<int>(w.size()) == ns, "space weights must match the density columns");
  require(n_targets >= 0, "target count must be nonnegative");
  ConvolveResult res;
  res.values = GridSamples(M + 1, n_targets);
  for (int j = 0; j < ns; ++j)
    if (f(0, j) != 0.0) res.nonzero_initial = true;
  const double dt = grid.dt();
  for (int q = 0; q < M; ++q) {
    const double a = q * dt, b = (q + 1) * dt;
    for (int x = 0; x < n_targets; ++x) {
      for (int y = 0; y < ns; ++y) {
        const auto m = kernel.moments(a, b, x, y);
        // slab tau in [t_{i-q-1}, t_{i-q}]: rising hat of f_{i-q}, falling hat of f_{i-q-1}
        const double rise = w[y] * ((q + 1) * m[0] - m[1] / dt);
        const double fall = w[y] * (-q * m[0] + m[1] / dt);
        for (int i = q + 1; i <= M; ++i) res.values(i, x) += rise * f(i - q, y) + fall * f(i - q - 1, y);
      }
    }
  }
  return res;
}

ToeplitzReport toeplitz_check(std::span<const double> t, const SlabKernel& kernel, int nt, int ns,
                              double tolerance) {
  ToeplitzReport rep;
  const int M = static_cast<int>(t.size()) - 1;
  if (M < 2) return rep;
  const double dt = (t[M] - t[0]) / M;
  for (int i = 0; i <= M; ++i)
    if (std::abs(t[i] - (t[0] + i * dt)) > 1e-12 * std::abs(t[M] - t[0])) return rep;
  rep.applicable = true;

  // lag blocks from l dt
  std::vector<double> rise(static_cast<std::size_t>(M) * nt * ns), fall(rise.size());
  for (int q = 0; q < M; ++q) {
    const double a = q * dt, b = (q + 1) * dt;
    for (int x = 0; x < nt; ++x)
      for (int y = 0; y < ns; ++y) {
        const auto m = kernel.moments(a, b, x, y);
        const std::size_t id = (static_cast<std::size_t>(q) * nt + x) * ns + y;
        rise[id] = (q + 1) * m[0] - m[1] / dt;
        fall[id] = -q * m[0] + m[1] / dt;
      }
  }
  // direct blocks from the node values themselves
  for (int i = 1; i <= M; ++i) {
    for (int k = 0; k <= i; ++k) {
      const int l = i - k;
      for (int x = 0; x < nt; ++x)
        for (int y = 0; y < ns; ++y) {
          double direct = 0.0, lag = 0.0;
          if (k >= 1) {
            const double h = t[k] - t[k - 1];
            const auto m = kernel.moments(t[i] - t[k], t[i] - t[k - 1], x, y);
            direct += (t[i] - t[k - 1]) / h * m[0] - m[1] / h;
            lag += rise[(static_cast<std::size_t>(l) * nt + x) * ns + y];
          }
          if (k + 1 <= i) {
            const double h = t[k + 1] - t[k];
            const auto m = kernel.moments(t[i] - t[k + 1], t[i] - t[k], x, y);
            direct += (t[k + 1] - t[i]) / h * m[0] + m[1] / h;
            lag += fall[(static_cast<std::size_t>(l - 1) * nt + x) * ns + y];
          }
          rep.max_deviation = std::max(rep.max_deviation, std::abs(direct - lag));
        }
    }
  }
  rep.toeplitz = rep.max_deviation <= tolerance;
  return rep;
}

NormBound norm_bound_probe(const LagFunction& G, const GridSamples& f, std::span<const double> w, int nt,
                           const TimeGrid& grid, int lag_samples) {
  NormBound nb;
  const auto K = make_kernel(SingularityClass::smooth, G);
  const auto res = convolve(*K, f, w, nt, grid);
  for (double v : res.values.values) nb.convolution_sup = std::max(nb.convolution_sup, std::abs(v));
  double gsup = 0.0;
  for (int s = 0; s <= lag_samples; ++s) {
    const double lag = grid.T * s / lag_samples;
    for (int x = 0; x < nt; ++x)
      for (int y = 0; y < f.cols; ++y) gsup = std::max(gsup, std::abs(G(lag, x, y)));
  }
  double l1 = 0.0;
  for (int i = 0; i <= grid.M; ++i) {
    double row = 0.0;
    for (int y = 0; y < f.cols; ++y) row += w[y] * std::abs(f(i, y));
    l1 += ((i == 0 || i == grid.M) ? 0.5 : 1.0) * row;
  }
  nb.bound = gsup * l1 * grid.dt();
  return nb;
}

}  // namespace layerheat::quadrature
