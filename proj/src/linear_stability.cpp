#include "couette/linear_stability.hpp"

#include <lapacke.h>

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "couette/error.hpp"
#include "parallel.hpp"

namespace couette {

namespace {

bool is_zero_k(double k) { return std::abs(k) < 1e-12; }

std::string kstr(double k) {
  std::ostringstream os;
  os << "k=" << k;
  return os.str();
}

void dirichlet_rows(Pencil& p, int n) {
  for (int comp = 0; comp < 3; ++comp) {
    for (int idx : {0, n - 1}) {
      const int row = comp * n + idx;
      p.J.row(row).setZero();
      p.J(row, row) = 1.0;
      p.M(row, row) = 0.0;
    }
  }
}

// Solution of (J - sigma M) x = 0 with c.x = 1, refined by Newton on (x, sigma).
void newton_refine(const Pencil& p, Vec& x, double& sigma) {
  const Eigen::Index N = x.size();
  const Vec c = x / x.squaredNorm();
  Mat A(N + 1, N + 1);
  Vec rhs(N + 1);
  for (int it = 0; it < 12; ++it) {
    A.topLeftCorner(N, N) = p.J - sigma * p.M;
    A.topRightCorner(N, 1) = -(p.M * x);
    A.bottomLeftCorner(1, N) = c.transpose();
    A(N, N) = 0.0;
    rhs.head(N) = -(A.topLeftCorner(N, N) * x);
    rhs(N) = 1.0 - c.dot(x);
    const Vec d = A.partialPivLu().solve(rhs);
    x += d.head(N);
    sigma += d(N);
    if (std::abs(d(N)) < 1e-13 * (1.0 + std::abs(sigma)) && d.head(N).norm() < 1e-12 * x.norm()) {
      return;
    }
  }
}

// Mid-gap value of the azimuthal profile.
double midgap_v(const RadialGrid& grid, const Vec& state) {
  const int n = grid.n_points;
  return grid.interpolate(state.segment(n, n), 0.5 * (grid.r_inner + grid.r_outer));
}

void normalize_and_phase(const RadialGrid& grid, EigenMode& m) {
  m.state /= std::sqrt(energy_norm(grid, m.state));
  const double vm = midgap_v(grid, m.state);
  // k = 0 uses the opposite orientation (negative mid-gap v, which lowers the
  // wall shear of the base flow when multiplied by a positive amplitude).
  const bool flip = is_zero_k(m.k) ? (vm > 0.0) : (vm < 0.0);
  if (flip) m.state = -m.state;
}

}  // namespace

Pencil assemble_pencil(const FlowConfig& cfg, const RadialGrid& grid, double k) {
  const int n = grid.n_points;
  const Vec& r = grid.nodes;
  const Vec inv_r = r.cwiseInverse();
  const Vec inv_r2 = inv_r.cwiseProduct(inv_r);
  const double R = cfg.reynolds;

  Mat L = grid.d2 + inv_r.asDiagonal() * grid.d1;
  L.diagonal().array() -= k * k;
  Mat Lr = L;
  Lr.diagonal() -= inv_r2;

  Pencil p{Mat::Zero(4 * n, 4 * n), Mat::Zero(4 * n, 4 * n)};
  if (is_zero_k(k)) {
    p.J.block(n, n, n, n) = Lr;
    for (int b : {kU, kW, kP}) p.J.block(b * n, b * n, n, n).setIdentity();
    p.M.block(n, n, n, n).setIdentity();
    dirichlet_rows(p, n);
    return p;
  }

  Vec V(n);
  for (int j = 0; j < n; ++j) V(j) = cfg.a0 * r(j) + cfg.b0 / r(j);

  p.J.block(0, 0, n, n) = Lr;
  p.J.block(0, n, n, n).diagonal() = 2.0 * R * V.cwiseProduct(inv_r);
  p.J.block(0, 3 * n, n, n) = -R * grid.d1;

  p.J.block(n, 0, n, n).diagonal().setConstant(-2.0 * R * cfg.a0);
  p.J.block(n, n, n, n) = Lr;

  p.J.block(2 * n, 2 * n, n, n) = L;
  p.J.block(2 * n, 3 * n, n, n).diagonal().setConstant(-k * R);

  p.J.block(3 * n, 0, n, n) = grid.d1;
  p.J.block(3 * n, 0, n, n).diagonal() += inv_r;
  p.J.block(3 * n, 2 * n, n, n).diagonal().setConstant(-k);

  p.M.topLeftCorner(3 * n, 3 * n).setIdentity();
  dirichlet_rows(p, n);
  return p;
}

std::vector<std::complex<double>> eigen_spectrum(const FlowConfig& cfg, const RadialGrid& grid,
                                                 double k) {
  const Pencil p = assemble_pencil(cfg, grid, k);
  const lapack_int N = static_cast<lapack_int>(p.J.rows());
  Mat A = p.J;  // column-major copies, overwritten by dggev
  Mat B = p.M;
  Vec alphar(N), alphai(N), beta(N);
  const lapack_int info = LAPACKE_dggev(LAPACK_COL_MAJOR, 'N', 'N', N, A.data(), N, B.data(), N,
                                        alphar.data(), alphai.data(), beta.data(), nullptr, 1, nullptr, 1);
  if (info != 0) {
    std::ostringstream os;
    os << "QZ iteration failed at " << kstr(k) << " (dggev info " << info << ")";
    fail(ErrorKind::Numerical, os.str());
  }
  std::vector<std::complex<double>> out;
  for (lapack_int i = 0; i < N; ++i) {
    const double b = beta(i);
    const double amag = std::hypot(alphar(i), alphai(i));
    if (b == 0.0 || std::abs(b) < 1e-8 * amag) continue;
    const std::complex<double> ev(alphar(i) / b, alphai(i) / b);
    if (std::isfinite(ev.real()) && std::isfinite(ev.imag())) out.push_back(ev);
  }
  std::sort(out.begin(), out.end(),
            [](auto a, auto b) { return a.real() > b.real() || (a.real() == b.real() && a.imag() > b.imag()); });
  return out;
}

double energy_inner(const RadialGrid& grid, const Vec& a, const Vec& b) {
  const int n = grid.n_points;
  const Vec wr = grid.quad_weights.cwiseProduct(grid.nodes);
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    s += (wr.array() * a.segment(c * n, n).array() * b.segment(c * n, n).array()).sum();
  }
  return s;
}

double energy_norm(const RadialGrid& grid, const Vec& state) { return energy_inner(grid, state, state); }

EigenMode mode_for_eigenvalue(const FlowConfig& cfg, const RadialGrid& grid, double k,
                              double sigma) {
  const Pencil p = assemble_pencil(cfg, grid, k);
  const Eigen::Index N = p.J.rows();
  const double shift = sigma + 1e-9 * (1.0 + std::abs(sigma));
  Eigen::PartialPivLU<Mat> lu(p.J - shift * p.M);
  Vec x = p.M * Vec::Ones(N);
  for (int it = 0; it < 3; ++it) {
    x = lu.solve(p.M * x);
    x /= x.norm();
  }
  if (!x.allFinite()) fail(ErrorKind::Numerical, "inverse iteration diverged at " + kstr(k));
  newton_refine(p, x, sigma);
  EigenMode m;
  m.k = k;
  m.sigma = sigma;
  m.state = x;
  normalize_and_phase(grid, m);
  return m;
}

double leading_eigenvalue(const FlowConfig& cfg, const RadialGrid& grid, double k) {
  const auto spec = eigen_spectrum(cfg, grid, k);
  if (spec.empty()) fail(ErrorKind::Numerical, "no finite eigenvalues at " + kstr(k));
  if (std::abs(spec.front().imag()) > 1e-8) {
    std::ostringstream os;
    os << "leading eigenvalue is complex at " << kstr(k) << ": " << spec.front().real() << " + "
       << spec.front().imag() << "i (oscillatory regime is not supported)";
    fail(ErrorKind::Regime, os.str());
  }
  return spec.front().real();
}

EigenMode leading_mode(const FlowConfig& cfg, double k, const RadialGrid& grid) {
  return mode_for_eigenvalue(cfg, grid, k, leading_eigenvalue(cfg, grid, k));
}

AdjointMode adjoint_mode(const FlowConfig& cfg, double k, const RadialGrid& grid,
                         const EigenMode& direct) {
  const Pencil p = assemble_pencil(cfg, grid, k);
  const int n = grid.n_points;
  const Vec Mx = p.M * direct.state;
  const Mat Aop = (p.J - direct.sigma * p.M).transpose();
  // Solve [[A^T, Mx], [Mx^T, 0]] [y; lam] = [0; 1].
  Mat B = Mat::Zero(4 * n + 1, 4 * n + 1);
  B.topLeftCorner(4 * n, 4 * n) = Aop;
  B.topRightCorner(4 * n, 1) = Mx;
  B.bottomLeftCorner(1, 4 * n) = Mx.transpose();
  Vec b = Vec::Zero(4 * n + 1);
  b(4 * n) = 1.0;
  const Vec s = B.partialPivLu().solve(b);
  AdjointMode adj;
  adj.k = k;
  adj.left = s.head(4 * n);
  if (!adj.left.allFinite()) fail(ErrorKind::Numerical, "adjoint solve failed at " + kstr(k));
  // Rayleigh quotient as an independent eigenvalue of the transposed pencil.
  adj.sigma = adj.left.dot(p.J * direct.state) / adj.left.dot(Mx);
  if (std::abs(adj.sigma - direct.sigma) > 1e-6 * (1.0 + std::abs(direct.sigma))) {
    std::ostringstream os;
    os << "adjoint eigenvalue " << adj.sigma << " disagrees with direct " << direct.sigma << " at "
       << kstr(k);
    fail(ErrorKind::Numerical, os.str());
  }
  adj.profiles = Vec::Zero(4 * n);
  for (int c = 0; c < 4; ++c) {
    for (int j = 1; j < n - 1; ++j) adj.profiles(c * n + j) = adj.left(c * n + j) / grid.quad_weights(j);
  }
  return adj;
}

EigenMode mirror(const EigenMode& m) {
  EigenMode out = m;
  const int n = m.n();
  out.k = -m.k;
  out.state.segment(2 * n, n) = -m.state.segment(2 * n, n);
  return out;
}

AdjointMode mirror(const AdjointMode& m) {
  AdjointMode out = m;
  const int n = m.n();
  out.k = -m.k;
  out.left.segment(2 * n, n) = -m.left.segment(2 * n, n);
  out.profiles.segment(2 * n, n) = -m.profiles.segment(2 * n, n);
  return out;
}

double biorthogonal_product(const RadialGrid& grid, const AdjointMode& adj, const Vec& direct) {
  const int n = grid.n_points;
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    s += (grid.quad_weights.array() * adj.profiles.segment(c * n, n).array() *
          direct.segment(c * n, n).array())
             .sum();
  }
  return s;
}

ModeResiduals mode_residuals(const FlowConfig& cfg, const RadialGrid& grid, const EigenMode& m) {
  const int n = grid.n_points;
  const Pencil p = assemble_pencil(cfg, grid, m.k);
  const Vec res = (p.J - m.sigma * p.M) * m.state;
  ModeResiduals out;
  for (int c = 0; c < 3; ++c) {
    out.eigen = std::max(out.eigen, res.segment(c * n + 1, n - 2).cwiseAbs().maxCoeff());
    out.boundary = std::max({out.boundary, std::abs(m.state(c * n)), std::abs(m.state(c * n + n - 1))});
  }
  const Vec u = m.u();
  const Vec cont = grid.d1 * u + u.cwiseQuotient(grid.nodes) - m.k * m.w();
  out.continuity = cont.cwiseAbs().maxCoeff();
  return out;
}

std::vector<EigenMode> tracked_leading_modes(const FlowConfig& cfg, const std::vector<double>& ks,
                                             const RadialGrid& grid, int threads) {
  const int m = static_cast<int>(ks.size());
  for (int i = 0; i < m; ++i) {
    if (ks[i] < 0.0 || (i > 0 && !(ks[i] > ks[i - 1]))) {
      fail(ErrorKind::Domain, "tracked_leading_modes expects ascending non-negative wavenumbers");
    }
  }
  // Up to three rightmost real modes per k, leading first.
  std::vector<std::vector<EigenMode>> cand(m);
  detail::parallel_for(m, threads, [&](int i) {
    const auto spec = eigen_spectrum(cfg, grid, ks[i]);
    if (spec.empty()) fail(ErrorKind::Numerical, "no finite eigenvalues at " + kstr(ks[i]));
    if (std::abs(spec.front().imag()) > 1e-8) {
      std::ostringstream os;
      os << "leading eigenvalue is complex at " << kstr(ks[i]) << ": " << spec.front().real() << " + "
         << spec.front().imag() << "i (oscillatory regime is not supported)";
      fail(ErrorKind::Regime, os.str());
    }
    const std::size_t want = is_zero_k(ks[i]) ? 1 : 3;
    for (const auto& ev : spec) {
      if (cand[i].size() == want) break;
      if (std::abs(ev.imag()) > 1e-8) continue;
      cand[i].push_back(mode_for_eigenvalue(cfg, grid, ks[i], ev.real()));
    }
  });

  // March outward from the most unstable nonzero k; the rightmost mode must be
  // the continuation (largest overlap) of its neighbour.
  int start = -1;
  for (int i = 0; i < m; ++i) {
    if (is_zero_k(ks[i])) continue;
    if (start < 0 || cand[i].front().sigma > cand[start].front().sigma) start = i;
  }
  auto check = [&](int from, int to) {
    const EigenMode& prev = cand[from].front();
    int best = 0;
    double best_overlap = -1.0;
    for (std::size_t c = 0; c < cand[to].size(); ++c) {
      const double o = std::abs(energy_inner(grid, prev.state, cand[to][c].state));
      if (o > best_overlap) {
        best_overlap = o;
        best = static_cast<int>(c);
      }
    }
    if (best != 0) {
      std::ostringstream os;
      os << "branch tracking broke between k=" << ks[from] << " and k=" << ks[to]
         << ": the rightmost eigenvalue is not the continuation of the leading branch";
      fail(ErrorKind::Numerical, os.str());
    }
  };
  if (start >= 0) {
    for (int i = start + 1; i < m; ++i) check(i - 1, i);
    for (int i = start - 1; i >= 0 && !is_zero_k(ks[i]); --i) check(i + 1, i);
  }
  std::vector<EigenMode> out;
  out.reserve(m);
  for (auto& c : cand) out.push_back(std::move(c.front()));
  return out;
}

std::vector<GrowthSample> growth_curve(const FlowConfig& cfg, const std::vector<double>& k_grid,
                                       const RadialGrid& grid, int threads) {
  std::vector<double> ks;
  for (double k : k_grid) ks.push_back(std::abs(k));
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           ks.end());
  const auto modes = tracked_leading_modes(cfg, ks, grid, threads);
  std::vector<GrowthSample> out;
  out.reserve(k_grid.size());
  for (double k : k_grid) {
    const auto it = std::lower_bound(ks.begin(), ks.end(), std::abs(k) - 1e-12);
    out.push_back({k, modes[it - ks.begin()].sigma});
  }
  return out;
}

namespace {

double neutral_reynolds(double eta, double mu, const RadialGrid& grid, double k, double r_lo,
                        double r_hi) {
  auto f = [&](double R) { return leading_eigenvalue(FlowConfig::make(eta, mu, R), grid, k); };
  const double f_lo = f(r_lo);
  const double f_hi = f(r_hi);
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    std::ostringstream os;
    os << "no neutral Reynolds number bracketed in [" << r_lo << ", " << r_hi << "] at " << kstr(k);
    fail(ErrorKind::Numerical, os.str());
  }
  boost::uintmax_t iters = 100;
  auto tol = boost::math::tools::eps_tolerance<double>(40);
  const auto br = boost::math::tools::toms748_solve(f, r_lo, r_hi, f_lo, f_hi, tol, iters);
  return 0.5 * (br.first + br.second);
}

}  // namespace

CriticalPoint critical_point(double eta, double mu, const RadialGrid& grid, double k_lo, double k_hi,
                             double r_lo, double r_hi) {
  // Coarse scan for a bracket, then Brent minimization of the neutral curve.
  const int coarse = 15;
  double best_k = k_lo;
  double best_R = INFINITY;
  for (int i = 0; i < coarse; ++i) {
    const double k = k_lo + (k_hi - k_lo) * i / (coarse - 1);
    double R;
    try {
      R = neutral_reynolds(eta, mu, grid, k, r_lo, r_hi);
    } catch (const Error&) {
      continue;
    }
    if (R < best_R) {
      best_R = R;
      best_k = k;
    }
  }
  if (!std::isfinite(best_R)) fail(ErrorKind::Numerical, "neutral curve not found in search range");
  const double h = (k_hi - k_lo) / (coarse - 1);
  const double a = std::max(k_lo, best_k - h);
  const double b = std::min(k_hi, best_k + h);
  boost::uintmax_t iters = 60;
  const auto res = boost::math::tools::brent_find_minima(
      [&](double k) { return neutral_reynolds(eta, mu, grid, k, r_lo, r_hi); }, a, b, 30, iters);
  return {res.second, res.first};
}

std::pair<double, double> neutral_band(const FlowConfig& cfg, const RadialGrid& grid, double k_lo,
                                       double k_hi) {
  auto f = [&](double k) { return leading_eigenvalue(cfg, grid, k); };
  const int coarse = 60;
  std::vector<double> ks(coarse), fs(coarse);
  for (int i = 0; i < coarse; ++i) {
    ks[i] = k_lo + (k_hi - k_lo) * i / (coarse - 1);
    fs[i] = f(ks[i]);
  }
  auto refine = [&](int i) {
    boost::uintmax_t iters = 100;
    auto tol = boost::math::tools::eps_tolerance<double>(40);
    const auto br = boost::math::tools::toms748_solve(f, ks[i], ks[i + 1], fs[i], fs[i + 1], tol, iters);
    return 0.5 * (br.first + br.second);
  };
  int lo = -1, hi = -1;
  for (int i = 0; i + 1 < coarse; ++i) {
    if (fs[i] < 0.0 && fs[i + 1] >= 0.0 && lo < 0) lo = i;
    if (fs[i] >= 0.0 && fs[i + 1] < 0.0) hi = i;
  }
  if (lo < 0 || hi < 0) {
    std::ostringstream os;
    os << "no unstable band bracketed in [" << k_lo << ", " << k_hi << "] at R=" << cfg.reynolds;
    fail(ErrorKind::Numerical, os.str());
  }
  return {refine(lo), refine(hi)};
}

GrowthSample max_growth(const FlowConfig& cfg, const RadialGrid& grid, double k_lo, double k_hi) {
  const int coarse = 30;
  int best = 0;
  double best_s = -INFINITY;
  for (int i = 0; i < coarse; ++i) {
    const double k = k_lo + (k_hi - k_lo) * i / (coarse - 1);
    const double s = leading_eigenvalue(cfg, grid, k);
    if (s > best_s) {
      best_s = s;
      best = i;
    }
  }
  const double h = (k_hi - k_lo) / (coarse - 1);
  const double a = std::max(k_lo, k_lo + (best - 1) * h);
  const double b = std::min(k_hi, k_lo + (best + 1) * h);
  boost::uintmax_t iters = 60;
  const auto res = boost::math::tools::brent_find_minima(
      [&](double k) { return -leading_eigenvalue(cfg, grid, k); }, a, b, 30, iters);
  return {res.first, -res.second};
}

}  // namespace couette
