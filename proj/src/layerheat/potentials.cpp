#include "layerheat/potentials.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "layerheat/error.hpp"
#include "layerheat/kernels.hpp"
#include "layerheat/special_functions.hpp"

namespace layerheat::potentials {

namespace {

constexpr double kResolve = 36.0;       // trapezoid resolution threshold for Gaussian widths
constexpr double kResolveNear = 40.0;   // same for the distance to the curve
constexpr int kMaxFineNodes = 32768;

double dot(const Point2& a, const Point2& b) { return a[0] * b[0] + a[1] * b[1]; }

}  // namespace

SpaceTimeDensity::SpaceTimeDensity(TimeGrid time, SpaceGrid space)
    : time_(time), space_(space), values_(time.M + 1, space.N) {}

SpaceTimeDensity::SpaceTimeDensity(TimeGrid time, SpaceGrid space, GridSamples values)
    : time_(time), space_(space), values_(std::move(values)) {
  require(values_.rows == time_.M + 1 && values_.cols == space_.N, "density samples do not match the grids");
}

SpaceTimeDensity SpaceTimeDensity::from_function(const TimeGrid& time, const SpaceGrid& space,
                                                 const std::function<double(double, double)>& f) {
  SpaceTimeDensity mu(time, space);
  for (int i = 0; i <= time.M; ++i)
    for (int j = 0; j < space.N; ++j) mu.values_(i, j) = f(time.node(i), space.theta(j));
  return mu;
}

bool SpaceTimeDensity::satisfies_c0() const {
  for (double v : values_.row(0))
    if (v != 0.0) return false;
  return true;
}

std::string kind_name(OperatorKind kind, int component) {
  switch (kind) {
    case OperatorKind::V: return "V";
    case OperatorKind::V_l: return "V_" + std::to_string(component);
    case OperatorKind::W_star: return "W_star";
    case OperatorKind::W: return "W";
  }
  return "?";
}

BoundaryOperatorMatrix::BoundaryOperatorMatrix(OperatorKind kind, int component, TimeGrid time, SpaceGrid space,
                                               std::uint64_t shape_hash)
    : kind_(kind), component_(component), time_(time), space_(space), hash_(shape_hash) {
  const std::size_t n = static_cast<std::size_t>(time_.M) * space_.N * space_.N;
  lag_.assign(n, 0.0);
  init_.assign(n, 0.0);
}

GridSamples BoundaryOperatorMatrix::apply(const SpaceTimeDensity& mu) const {
  const int M = time_.M, N = space_.N;
  require(mu.time().M == M && mu.space().N == N, "density grids do not match the operator");
  require(std::abs(mu.time().T - time_.T) <= 1e-12 * time_.T, "density horizon does not match the operator");
  GridSamples out(M + 1, N);
  const bool has_initial = !mu.satisfies_c0();
  auto gemv = [&](const double* B, std::span<const double> x, std::span<double> y) {
    for (int r = 0; r < N; ++r) {
      const double* row = B + static_cast<std::size_t>(r) * N;
      double s = 0.0;
      for (int c = 0; c < N; ++c) s += row[c] * x[c];
      y[r] += s;
    }
  };
  for (int i = 1; i <= M; ++i) {
    auto y = out.row(i);
    for (int l = 0; l < i; ++l) gemv(lag(l), mu.values().row(i - l), y);
    if (has_initial) gemv(initial(i - 1), mu.values().row(0), y);
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'L', 'H', 'O', 'P', 'M', 'A', 'T', '1'};

void put_u64(std::ostream& o, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  o.write(b, 8);
}
void put_u32(std::ostream& o, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  o.write(b, 4);
}
std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) fail(ErrorCode::io, "truncated operator matrix file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) fail(ErrorCode::io, "truncated operator matrix file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

// Layout (little-endian): magic[8] "LHOPMAT1", u32 kind, u32 component, u32 N, u32 M,
// f64 T, u64 shape hash, then M lag blocks and M initial blocks, N*N f64 row-major each.
void BoundaryOperatorMatrix::write(const std::string& path) const {
  std::ofstream o(path, std::ios::binary);
  if (!o) fail(ErrorCode::io, "cannot write operator matrix to '" + path + "'");
  o.write(kMagic, 8);
  put_u32(o, static_cast<std::uint32_t>(kind_));
  put_u32(o, static_cast<std::uint32_t>(component_));
  put_u32(o, static_cast<std::uint32_t>(space_.N));
  put_u32(o, static_cast<std::uint32_t>(time_.M));
  put_u64(o, std::bit_cast<std::uint64_t>(time_.T));
  put_u64(o, hash_);
  for (double v : lag_) put_u64(o, std::bit_cast<std::uint64_t>(v));
  for (double v : init_) put_u64(o, std::bit_cast<std::uint64_t>(v));
  if (!o) fail(ErrorCode::io, "failed writing operator matrix to '" + path + "'");
}

BoundaryOperatorMatrix BoundaryOperatorMatrix::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open operator matrix '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) fail(ErrorCode::parse, "not an operator matrix file: '" + path + "'");
  const auto kind = get_u32(in);
  const auto comp = get_u32(in);
  const auto N = get_u32(in);
  const auto M = get_u32(in);
  const double T = std::bit_cast<double>(get_u64(in));
  const auto hash = get_u64(in);
  if (kind > 3) fail(ErrorCode::parse, "operator matrix file has an unknown kind");
  BoundaryOperatorMatrix m(static_cast<OperatorKind>(kind), static_cast<int>(comp), TimeGrid(T, static_cast<int>(M)),
                           SpaceGrid(static_cast<int>(N)), hash);
  for (double& v : m.lag_) v = std::bit_cast<double>(get_u64(in));
  for (double& v : m.init_) v = std::bit_cast<double>(get_u64(in));
  return m;
}

const BoundaryOperatorMatrix& OperatorSet::get(OperatorKind kind, int component) const {
  switch (kind) {
    case OperatorKind::V: return V;
    case OperatorKind::V_l: return component == 2 ? V2 : V1;
    case OperatorKind::W_star: return W_star;
    case OperatorKind::W: return W;
  }
  return V;
}

namespace {

// bit flags for the operators to build
enum : unsigned { kV = 1, kV1 = 2, kV2 = 4, kWs = 8, kW = 16 };
constexpr int kKinds = 5;

struct NodeGeometry {
  int n = 0;
  std::vector<Point2> pos, d1, d2, normal;
  std::vector<double> speed;
};

NodeGeometry node_geometry(const BoundaryMap& phi, int n) {
  NodeGeometry g;
  g.n = n;
  g.pos.resize(n);
  g.d1.resize(n);
  g.d2.resize(n);
  g.normal.resize(n);
  g.speed.resize(n);
  for (int j = 0; j < n; ++j) {
    const double th = 2.0 * kPi * j / n;
    g.pos[j] = phi.varying_part(th);
    g.d1[j] = phi.derivative(th);
    g.d2[j] = phi.second_derivative(th);
    g.speed[j] = std::hypot(g.d1[j][0], g.d1[j][1]);
    g.normal[j] = {g.d1[j][1] / g.speed[j], -g.d1[j][0] / g.speed[j]};
  }
  return g;
}

// Kernel of each operator against the time weight c0 + c1 s on a slab, up to the
// space weight: V: sp (c0 m0 + c1 m1); gradient kinds: kappa sp (c0 mm1 + c1 m0)
// with kappa = -D_1/2, -D_2/2, -D.nu_target/2, +D.nu_source/2, D = phi(target) - phi(source).
void regular_kernels(const kernels::SlabMoments& m, double c0, double c1, const Point2& D, const Point2& nu_t,
                     const Point2& nu_s, double sp, double* out) {
  const double v = sp * (c0 * m.m0 + c1 * m.m1);
  const double g = sp * (c0 * m.mm1 + c1 * m.m0);
  out[0] = v;
  out[1] = -0.5 * D[0] * g;
  out[2] = -0.5 * D[1] * g;
  out[3] = -0.5 * dot(D, nu_t) * g;
  out[4] = 0.5 * dot(D, nu_s) * g;
}

struct Blocks {
  int N;
  std::vector<double> F, E;  // kKinds blocks of N*N each
  explicit Blocks(int n) : N(n), F(static_cast<std::size_t>(kKinds) * n * n), E(F.size()) {}
  double& f(int k, int i, int l) { return F[(static_cast<std::size_t>(k) * N + i) * N + l]; }
  double& e(int k, int i, int l) { return E[(static_cast<std::size_t>(k) * N + i) * N + l]; }
  void clear() {
    std::fill(F.begin(), F.end(), 0.0);
    std::fill(E.begin(), E.end(), 0.0);
  }
};

// lag 0 slab [0, b]: K = P cot(d/2)/2 + L ln(4 sin^2(d/2)) + Q, d = theta_source - theta_target,
// with the cot part on the Hilbert weights, the log part on the periodic log weights
// and Q on the trapezoid rule.
void singular_slab(const NodeGeometry& g, double b, Blocks& out) {
  const int N = g.n;
  const double w = 2.0 * kPi / N;
  const auto R = quadrature::log_weights(N);
  const auto H = quadrature::hilbert_weights(N);
  constexpr double inv4pi = 1.0 / (4.0 * kPi);
  const double ln4b = std::log(4.0 * b);
  // (c0, c1) for the rising (F) and falling (E) hats
  const double cF[2] = {1.0, -1.0 / b};
  const double cE[2] = {0.0, 1.0 / b};
  for (int i = 0; i < N; ++i) {
    const double sp_i = g.speed[i];
    for (int l = 0; l < N; ++l) {
      const int k = (l - i + N) % N;
      const double sp = g.speed[l];
      double L[2][kKinds], Q[2][kKinds], P[2][kKinds] = {};
      if (l == i) {
        const double lam = -std::log(sp * sp) + ln4b - kEulerGamma;
        const double curv = dot(g.d2[i], g.normal[i]) / (4.0 * kPi * sp);
        for (int h = 0; h < 2; ++h) {
          const double* c = h == 0 ? cF : cE;
          L[h][0] = -sp * c[0] * inv4pi;
          Q[h][0] = sp * inv4pi * (c[0] * lam + c[1] * b);
          L[h][1] = L[h][2] = L[h][3] = L[h][4] = 0.0;
          Q[h][1] = c[0] * g.d2[i][0] / (4.0 * kPi * sp);
          Q[h][2] = c[0] * g.d2[i][1] / (4.0 * kPi * sp);
          Q[h][3] = c[0] * curv;
          Q[h][4] = c[0] * curv;
        }
      } else {
        const double d = 2.0 * kPi * k / N;
        const double s2 = 4.0 * std::sin(0.5 * d) * std::sin(0.5 * d);
        const double ls2 = std::log(s2);
        const double cot2 = 0.5 / std::tan(0.5 * d);
        const Point2 D{g.pos[i][0] - g.pos[l][0], g.pos[i][1] - g.pos[l][1]};
        const double r2 = dot(D, D);
        const double z = r2 / (4.0 * b);
        // lam = E1(z) + ln(4 sin^2(d/2)), the smooth remainder of E1
        double lam;
        if (z < 1.0)
          lam = -std::log(r2 / s2) + ln4b - kEulerGamma + expint_ein(z);
        else
          lam = expint_e1(z) + ls2;
        const double ez = z > 740.0 ? 0.0 : std::exp(-z);
        const double kap[kKinds] = {0.0, -0.5 * D[0], -0.5 * D[1], -0.5 * dot(D, g.normal[i]), 0.5 * dot(D, g.normal[l])};
        for (int h = 0; h < 2; ++h) {
          const double* c = h == 0 ? cF : cE;
          const double cv = c[0] - c[1] * 0.25 * r2;
          L[h][0] = -sp * cv * inv4pi;
          Q[h][0] = sp * inv4pi * (cv * lam + c[1] * b * ez);
          for (int kd = 1; kd < kKinds; ++kd) {
            L[h][kd] = -kap[kd] * sp * c[1] * inv4pi;
            Q[h][kd] = kap[kd] * sp * (c[0] * ez / (kPi * r2) + c[1] * lam * inv4pi);
          }
          // V_l carries the 1/d singularity with residue c0 phi'_l / (2 pi |phi'|) at the target
          P[h][1] = c[0] * g.d1[i][0] / (2.0 * kPi * sp_i);
          P[h][2] = c[0] * g.d1[i][1] / (2.0 * kPi * sp_i);
          Q[h][1] -= P[h][1] * cot2;
          Q[h][2] -= P[h][2] * cot2;
        }
      }
      for (int kd = 0; kd < kKinds; ++kd) {
        out.f(kd, i, l) = R[k] * L[0][kd] + w * Q[0][kd];
        out.e(kd, i, l) = R[k] * L[1][kd] + w * Q[1][kd];
      }
    }
    // Hilbert part, residues belong to the target row
    for (int kd = 1; kd <= 2; ++kd) {
      const double pf = cF[0] * g.d1[i][kd - 1] / (2.0 * kPi * sp_i);
      const double pe = cE[0] * g.d1[i][kd - 1] / (2.0 * kPi * sp_i);
      for (int l = 0; l < N; ++l) {
        const int k = (l - i + N) % N;
        out.f(kd, i, l) += pf * H[k];
        out.e(kd, i, l) += pe * H[k];
      }
    }
  }
}

// lag slab [a, b] with a > 0, trapezoid rule on the nodes
// edges[i * N + l] holds the slab end values at b for the next lag when reuse is on
void regular_slab(const NodeGeometry& g, double a, double b, double c0F, double c0E, double dt, Blocks& out,
                  std::vector<kernels::HeatEdge>& edges, bool reuse) {
  const int N = g.n;
  const double w = 2.0 * kPi / N;
  double kf[kKinds], ke[kKinds];
  for (int i = 0; i < N; ++i) {
    for (int l = i; l < N; ++l) {
      const Point2 D{g.pos[i][0] - g.pos[l][0], g.pos[i][1] - g.pos[l][1]};
      const double r2 = l == i ? 0.0 : dot(D, D);
      kernels::SlabMoments m;
      if (r2 == 0.0) {
        m = kernels::heat_moments_2d(r2, a, b);
      } else {
        auto& e = edges[static_cast<std::size_t>(i) * N + l];
        const kernels::HeatEdge ea = reuse ? e : kernels::heat_edge(r2, a);
        e = kernels::heat_edge(r2, b);
        m = kernels::heat_moments_2d(r2, a, b, ea, e);
      }
      regular_kernels(m, c0F, -1.0 / dt, D, g.normal[i], g.normal[l], g.speed[l], kf);
      regular_kernels(m, c0E, 1.0 / dt, D, g.normal[i], g.normal[l], g.speed[l], ke);
      for (int kd = 0; kd < kKinds; ++kd) {
        out.f(kd, i, l) = w * kf[kd];
        out.e(kd, i, l) = w * ke[kd];
      }
      if (l == i) continue;
      const Point2 Dm{-D[0], -D[1]};
      regular_kernels(m, c0F, -1.0 / dt, Dm, g.normal[l], g.normal[i], g.speed[i], kf);
      regular_kernels(m, c0E, 1.0 / dt, Dm, g.normal[l], g.normal[i], g.speed[i], ke);
      for (int kd = 0; kd < kKinds; ++kd) {
        out.f(kd, l, i) = w * kf[kd];
        out.e(kd, l, i) = w * ke[kd];
      }
    }
  }
}

// under-resolved lag slab: trapezoid on a finer copy of the curve, densities
// carried there by trigonometric interpolation (cardinal functions)
void upsampled_slab(const NodeGeometry& g, const NodeGeometry& fine, double a, double b, double c0F, double c0E,
                    double dt, Blocks& out) {
  const int N = g.n, Nf = fine.n;
  const int factor = Nf / N;
  const int n = N / 2;
  const double w = 2.0 * kPi / Nf;
  // cardinal function of node l at fine node f depends on f - factor l only
  std::vector<double> card(Nf);
  for (int f = 0; f < Nf; ++f) {
    const double x = 2.0 * kPi * f / Nf;
    double s = 1.0;
    for (int m = 1; m < n; ++m) s += 2.0 * std::cos(m * x);
    s += std::cos(n * x);
    card[f] = s / N;
  }
  std::vector<double> kf(static_cast<std::size_t>(kKinds) * Nf), ke(kf.size());
  double tf[kKinds], te[kKinds];
  for (int i = 0; i < N; ++i) {
    for (int f = 0; f < Nf; ++f) {
      const Point2 D{g.pos[i][0] - fine.pos[f][0], g.pos[i][1] - fine.pos[f][1]};
      const double r2 = f == factor * i ? 0.0 : dot(D, D);
      const auto m = kernels::heat_moments_2d(r2, a, b);
      regular_kernels(m, c0F, -1.0 / dt, D, g.normal[i], fine.normal[f], fine.speed[f], tf);
      regular_kernels(m, c0E, 1.0 / dt, D, g.normal[i], fine.normal[f], fine.speed[f], te);
      for (int kd = 0; kd < kKinds; ++kd) {
        kf[static_cast<std::size_t>(kd) * Nf + f] = w * tf[kd];
        ke[static_cast<std::size_t>(kd) * Nf + f] = w * te[kd];
      }
    }
    for (int l = 0; l < N; ++l) {
      for (int kd = 0; kd < kKinds; ++kd) {
        double sf = 0.0, se = 0.0;
        for (int f = 0; f < Nf; ++f) {
          const double c = card[(f - factor * l + Nf) % Nf];
          sf += kf[static_cast<std::size_t>(kd) * Nf + f] * c;
          se += ke[static_cast<std::size_t>(kd) * Nf + f] * c;
        }
        out.f(kd, i, l) = sf;
        out.e(kd, i, l) = se;
      }
    }
  }
}

double max_speed(const NodeGeometry& g) { return *std::max_element(g.speed.begin(), g.speed.end()); }

OperatorSet assemble_mask(const BoundaryMap& phi, const TimeGrid& time, const SpaceGrid& space, unsigned mask) {
  phi.validate();
  const int N = space.N, M = time.M;
  const double dt = time.dt();
  const std::uint64_t hash = phi.hash();
  OperatorSet set;
  BoundaryOperatorMatrix* mats[kKinds] = {&set.V, &set.V1, &set.V2, &set.W_star, &set.W};
  const OperatorKind kinds[kKinds] = {OperatorKind::V, OperatorKind::V_l, OperatorKind::V_l, OperatorKind::W_star,
                                      OperatorKind::W};
  const int comps[kKinds] = {0, 1, 2, 0, 0};
  for (int kd = 0; kd < kKinds; ++kd)
    if (mask & (1u << kd)) *mats[kd] = BoundaryOperatorMatrix(kinds[kd], comps[kd], time, space, hash);

  const NodeGeometry g = node_geometry(phi, N);
  const double h0 = max_speed(g) * 2.0 * kPi / N;
  std::map<int, NodeGeometry> fine;
  const std::size_t nn = static_cast<std::size_t>(N) * N;
  Blocks cur(N);
  std::vector<double> prevE(static_cast<std::size_t>(kKinds) * nn, 0.0);
  std::vector<kernels::HeatEdge> edges(nn);
  bool edges_valid = false;
  for (int q = 0; q < M; ++q) {
    const double a = q * dt, b = (q + 1) * dt;
    cur.clear();
    if (q == 0) {
      singular_slab(g, b, cur);
    } else {
      int p = 0;
      while (4.0 * kPi * kPi * a / std::pow(h0 / (1 << p), 2) < kResolve && N * (2 << p) <= kMaxFineNodes) ++p;
      if (p == 0) {
        regular_slab(g, a, b, q + 1.0, -q, dt, cur, edges, edges_valid);
        edges_valid = true;
      } else {
        edges_valid = false;
        auto it = fine.find(p);
        if (it == fine.end()) it = fine.emplace(p, node_geometry(phi, N << p)).first;
        upsampled_slab(g, it->second, a, b, q + 1.0, -q, dt, cur);
      }
    }
    for (int kd = 0; kd < kKinds; ++kd) {
      if (!(mask & (1u << kd))) continue;
      double* lag = mats[kd]->lag(q);
      double* init = mats[kd]->initial(q);
      const double* F = cur.F.data() + kd * nn;
      const double* E = cur.E.data() + kd * nn;
      const double* Ep = prevE.data() + kd * nn;
      for (std::size_t e = 0; e < nn; ++e) {
        lag[e] = F[e] + (q > 0 ? Ep[e] : 0.0);
        init[e] = E[e];
      }
    }
    prevE.swap(cur.E);
  }
  return set;
}

unsigned mask_of(OperatorKind kind, int component) {
  switch (kind) {
    case OperatorKind::V: return kV;
    case OperatorKind::V_l:
      require(component == 1 || component == 2, "V_l needs component 1 or 2");
      return component == 1 ? kV1 : kV2;
    case OperatorKind::W_star: return kWs;
    case OperatorKind::W: return kW;
  }
  return 0;
}

}  // namespace

BoundaryOperatorMatrix assemble(OperatorKind kind, const BoundaryMap& phi, const TimeGrid& time,
                                const SpaceGrid& space, int component) {
  const unsigned m = mask_of(kind, component);
  OperatorSet set = assemble_mask(phi, time, space, m);
  switch (m) {
    case kV: return std::move(set.V);
    case kV1: return std::move(set.V1);
    case kV2: return std::move(set.V2);
    case kWs: return std::move(set.W_star);
    default: return std::move(set.W);
  }
}

OperatorSet assemble_all(const BoundaryMap& phi, const TimeGrid& time, const SpaceGrid& space) {
  return assemble_mask(phi, time, space, kV | kV1 | kV2 | kWs | kW);
}

OperatorSet assemble_some(const BoundaryMap& phi, const TimeGrid& time, const SpaceGrid& space,
                          std::initializer_list<std::pair<OperatorKind, int>> kinds) {
  unsigned m = 0;
  for (auto [k, c] : kinds) m |= mask_of(k, c);
  return assemble_mask(phi, time, space, m);
}

// ---------------------------------------------------------------------------
// off-boundary evaluation

LayerEvaluator::LayerEvaluator(BoundaryMap phi, SpaceTimeDensity mu) : phi_(std::move(phi)), mu_(std::move(mu)) {
  phi_.validate();
  center_ = phi_.center();
  const int N = mu_.space().N;
  double smax = 0.0;
  for (int j = 0; j < 4 * N; ++j) smax = std::max(smax, phi_.speed(2.0 * kPi * j / (4 * N)));
  h0_ = smax * 2.0 * kPi / N;
  max_level_ = 0;
  while (max_level_ < 10 && (N << (max_level_ + 1)) <= kMaxFineNodes) ++max_level_;
}

const LayerEvaluator::Level& LayerEvaluator::level(int p) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = levels_.find(p);
  if (it != levels_.end()) return *it->second;
  auto lv = std::make_unique<Level>();
  const int N = mu_.space().N, M = mu_.time().M;
  lv->nf = N << p;
  const NodeGeometry g = node_geometry(phi_, lv->nf);
  lv->pos = g.pos;
  lv->normal = g.normal;
  lv->speed = g.speed;
  lv->mu = GridSamples(M + 1, lv->nf);
  for (int i = 0; i <= M; ++i) {
    const auto row = mu_.values().row(i);
    if (p == 0) {
      std::copy(row.begin(), row.end(), lv->mu.row(i).begin());
      continue;
    }
    bool zero = std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; });
    if (zero) continue;
    const auto up = quadrature::TrigInterpolant(row).upsample(1 << p);
    std::copy(up.begin(), up.end(), lv->mu.row(i).begin());
  }
  return *levels_.emplace(p, std::move(lv)).first->second;
}

int LayerEvaluator::choose_level(double dist, double a) const {
  for (int p = 0; p <= max_level_; ++p) {
    const double h = h0_ / (1 << p);
    if (2.0 * kPi * dist / h >= kResolveNear) return p;
    if (a > 0.0 && 4.0 * kPi * kPi * a / (h * h) >= kResolve) return p;
  }
  return max_level_ + 1;
}

double LayerEvaluator::distance(const Point2& x) const {
  return geometry::nearest_point(phi_, x, std::max(1024, 4 * mu_.space().N)).distance;
}

History LayerEvaluator::history(LayerKind kind, const Point2& x, bool with_gradient) const {
  const int M = mu_.time().M;
  const double dt = mu_.time().dt();
  History h;
  h.value.assign(M + 1, 0.0);
  if (with_gradient) h.gradient.assign(M + 1, {0.0, 0.0});
  const double dist = distance(x);
  if (!(dist > 1e-12)) fail(ErrorCode::invalid_argument, "evaluation point lies on the curve");
  h.near_boundary = dist < 3.0 * h0_;
  const Point2 xc{x[0] - center_[0], x[1] - center_[1]};
  const bool single = kind == LayerKind::single;
  std::vector<double> kr, kf;
  std::vector<Point2> gr, gf;
  std::vector<kernels::HeatEdge> edges;  // slab end values at the previous b
  int edge_level = -1;
  for (int q = 0; q < M; ++q) {
    const double a = q * dt, b = (q + 1) * dt;
    int p = choose_level(dist, a);
    if (p > max_level_) {
      p = max_level_;
      h.degraded = true;
    }
    const Level& lv = level(p);
    const int nf = lv.nf;
    const double w = 2.0 * kPi / nf;
    kr.assign(nf, 0.0);
    kf.assign(nf, 0.0);
    if (with_gradient) {
      gr.assign(nf, {0.0, 0.0});
      gf.assign(nf, {0.0, 0.0});
    }
    bool any = false;
    const bool reuse = edge_level == p;
    if (!reuse) edges.assign(nf, kernels::HeatEdge{});
    edge_level = p;
    for (int f = 0; f < nf; ++f) {
      const Point2 D{xc[0] - lv.pos[f][0], xc[1] - lv.pos[f][1]};
      const double r2 = dot(D, D);
      const kernels::HeatEdge ea = reuse ? edges[f] : kernels::heat_edge(r2, a);
      edges[f] = kernels::heat_edge(r2, b);
      const auto m = kernels::heat_moments_2d(r2, a, b, ea, edges[f]);
      if (m.m0 == 0.0 && m.m1 == 0.0 && m.mm1 == 0.0) continue;
      any = true;
      const double sw = w * lv.speed[f];
      const double c0r = q + 1.0, c1r = -1.0 / dt, c0f = -q, c1f = 1.0 / dt;
      const double gr_s = sw * (c0r * m.mm1 + c1r * m.m0);
      const double gf_s = sw * (c0f * m.mm1 + c1f * m.m0);
      if (single) {
        kr[f] = sw * (c0r * m.m0 + c1r * m.m1);
        kf[f] = sw * (c0f * m.m0 + c1f * m.m1);
        if (with_gradient) {
          gr[f] = {-0.5 * D[0] * gr_s, -0.5 * D[1] * gr_s};
          gf[f] = {-0.5 * D[0] * gf_s, -0.5 * D[1] * gf_s};
        }
      } else {
        const double dn = 0.5 * dot(D, lv.normal[f]);
        kr[f] = dn * gr_s;
        kf[f] = dn * gf_s;
      }
    }
    if (!any) continue;
    for (int i = q + 1; i <= M; ++i) {
      const auto mr = lv.mu.row(i - q);
      const auto mf = lv.mu.row(i - q - 1);
      double s = 0.0;
      Point2 g{0.0, 0.0};
      for (int f = 0; f < nf; ++f) {
        s += kr[f] * mr[f] + kf[f] * mf[f];
        if (with_gradient && single) {
          g[0] += gr[f][0] * mr[f] + gf[f][0] * mf[f];
          g[1] += gr[f][1] * mr[f] + gf[f][1] * mf[f];
        }
      }
      h.value[i] += s;
      if (with_gradient) {
        h.gradient[i][0] += g[0];
        h.gradient[i][1] += g[1];
      }
    }
  }
  return h;
}

EvalResult LayerEvaluator::eval(LayerKind kind, double t, const Point2& x, bool with_gradient) const {
  const auto& tg = mu_.time();
  require(t >= 0.0 && t <= tg.T * (1.0 + 1e-12), "evaluation time outside the grid range");
  EvalResult r;
  const double dist = distance(x);
  if (!(dist > 1e-12)) fail(ErrorCode::invalid_argument, "evaluation point lies on the curve");
  r.near_boundary = dist < 3.0 * h0_;
  const Point2 xc{x[0] - center_[0], x[1] - center_[1]};
  const double dt = tg.dt();
  const bool single = kind == LayerKind::single;
  for (int m = 0; m < tg.M && tg.node(m) < t; ++m) {
    const double tm = tg.node(m), tm1 = tg.node(m + 1);
    const double a = std::max(t - tm1, 0.0), b = t - tm;
    int p = choose_level(dist, a);
    if (p > max_level_) {
      p = max_level_;
      r.degraded = true;
    }
    const Level& lv = level(p);
    const double w = 2.0 * kPi / lv.nf;
    // rising hat of mu_{m+1}, falling hat of mu_m
    const double c0r = (t - tm) / dt, c1r = -1.0 / dt, c0f = (tm1 - t) / dt, c1f = 1.0 / dt;
    const auto mr = lv.mu.row(m + 1);
    const auto mf = lv.mu.row(m);
    for (int f = 0; f < lv.nf; ++f) {
      const Point2 D{xc[0] - lv.pos[f][0], xc[1] - lv.pos[f][1]};
      const auto mo = kernels::heat_moments_2d(dot(D, D), a, b);
      const double sw = w * lv.speed[f];
      const double g = sw * ((c0r * mo.mm1 + c1r * mo.m0) * mr[f] + (c0f * mo.mm1 + c1f * mo.m0) * mf[f]);
      if (single) {
        r.value += sw * ((c0r * mo.m0 + c1r * mo.m1) * mr[f] + (c0f * mo.m0 + c1f * mo.m1) * mf[f]);
        if (with_gradient) {
          r.gradient[0] -= 0.5 * D[0] * g;
          r.gradient[1] -= 0.5 * D[1] * g;
        }
      } else {
        r.value += 0.5 * dot(D, lv.normal[f]) * g;
      }
    }
  }
  return r;
}

EvalResult single_layer_eval(const LayerEvaluator& ev, double t, const Point2& x) {
  return ev.eval(LayerKind::single, t, x);
}

EvalResult double_layer_eval(const LayerEvaluator& ev, double t, const Point2& x) {
  return ev.eval(LayerKind::double_layer, t, x);
}

JumpProbe jump_probe(const LayerEvaluator& ev, JumpQuantity quantity, Side side, double theta, int component,
                     std::array<double, 3> eps) {
  const auto& phi = ev.shape();
  const Point2 p = phi.position(theta), nu = phi.normal(theta);
  const double sgn = side == Side::plus ? -1.0 : 1.0;
  const int M = ev.density().time().M;
  std::array<std::vector<double>, 3> f;
  for (int e = 0; e < 3; ++e) {
    const Point2 x{p[0] + sgn * eps[e] * nu[0], p[1] + sgn * eps[e] * nu[1]};
    if (quantity == JumpQuantity::double_value) {
      f[e] = ev.history(LayerKind::double_layer, x).value;
    } else if (quantity == JumpQuantity::single_value) {
      f[e] = ev.history(LayerKind::single, x).value;
    } else {
      const History h = ev.history(LayerKind::single, x, true);
      f[e].resize(M + 1);
      for (int i = 0; i <= M; ++i)
        f[e][i] = quantity == JumpQuantity::single_normal ? dot(h.gradient[i], nu) : h.gradient[i][component - 1];
    }
  }
  JumpProbe jp;
  jp.limit.resize(M + 1);
  jp.ratio.assign(M + 1, 0.0);
  double scale = 0.0;
  for (int i = 0; i <= M; ++i) scale = std::max(scale, std::abs(f[2][i]));
  // eps halves each level, so the order-1 model predicts a ratio of 2
  const double r01 = eps[0] / eps[1];
  for (int i = 0; i <= M; ++i) {
    jp.limit[i] = (r01 * f[2][i] - f[1][i]) / (r01 - 1.0);
    const double d1 = f[0][i] - f[1][i], d2 = f[1][i] - f[2][i];
    // below the noise floor the correction itself is negligible and the ratio says
    // nothing (the O(eps) coefficient may cross zero in time)
    if (std::abs(d1) + std::abs(d2) <= 2e-3 * std::abs(f[2][i]) + 1e-8 * scale) {
      jp.ratio[i] = r01;
      continue;
    }
    jp.ratio[i] = d1 / d2;
    if (!(jp.ratio[i] >= 1.4 && jp.ratio[i] <= 4.6)) {
      jp.converged = false;
      if (jp.diagnostic.empty())
        jp.diagnostic = "Richardson ratio " + std::to_string(jp.ratio[i]) + " at time index " + std::to_string(i);
    }
  }
  return jp;
}

CrosscheckReport identity_crosscheck(const BoundaryMap& phi, const TimeGrid& time, const SpaceGrid& space,
                                     const SpaceTimeDensity& mu, double hs) {
  const auto ext = geometry::extend(phi, 4.0 * hs, geometry::ExtensionKind::automatic);
  const OperatorSet ops = assemble_some(phi, time, space,
                                        {{OperatorKind::V, 0}, {OperatorKind::V_l, 1}, {OperatorKind::V_l, 2},
                                         {OperatorKind::W_star, 0}});
  const GridSamples U0 = ops.V.apply(mu);
  const GridSamples L1 = ops.V1.apply(mu), L2 = ops.V2.apply(mu), Ls = ops.W_star.apply(mu);
  const LayerEvaluator ev(phi, mu);
  const int M = time.M, N = space.N;
  const double R = phi.radius();
  GridSamples R1(M + 1, N), R2(M + 1, N), Rs(M + 1, N);
  std::vector<std::vector<double>> dtheta(M + 1);
  for (int i = 0; i <= M; ++i) dtheta[i] = quadrature::spectral_derivative(U0.row(i));
  for (int j = 0; j < N; ++j) {
    const double th = space.theta(j);
    const auto U1 = ev.history(LayerKind::single, ext.map(th, -hs)).value;
    const auto U2 = ev.history(LayerKind::single, ext.map(th, -2.0 * hs)).value;
    const auto J = ext.jacobian(th, 0.0);
    const double det = J[0] * J[3] - J[1] * J[2];
    const Point2 n = geometry::pullback_normal(ext, th);
    const Point2 tau{-std::sin(th), std::cos(th)}, nu{std::cos(th), std::sin(th)};
    for (int i = 0; i <= M; ++i) {
      const double us = (3.0 * U0(i, j) - 4.0 * U1[i] + U2[i]) / (2.0 * hs);
      const double ut = dtheta[i][j] / R;
      const Point2 gref{us * nu[0] + ut * tau[0], us * nu[1] + ut * tau[1]};
      // physical gradient = (DPhi)^{-T} gref
      const Point2 g{(J[3] * gref[0] - J[2] * gref[1]) / det, (-J[1] * gref[0] + J[0] * gref[1]) / det};
      const double m = mu(i, j);
      R1(i, j) = -0.5 * n[0] * m + g[0];
      R2(i, j) = -0.5 * n[1] * m + g[1];
      Rs(i, j) = -0.5 * m + dot(g, n);
    }
  }
  auto rel = [](const GridSamples& a, const GridSamples& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t e = 0; e < a.values.size(); ++e) {
      num = std::max(num, std::abs(a.values[e] - b.values[e]));
      den = std::max(den, std::abs(a.values[e]));
    }
    return den > 0.0 ? num / den : num;
  };
  CrosscheckReport rep;
  rep.v1_discrepancy = rel(L1, R1);
  rep.v2_discrepancy = rel(L2, R2);
  rep.w_star_discrepancy = rel(Ls, Rs);
  return rep;
}

}  // namespace layerheat::potentials
