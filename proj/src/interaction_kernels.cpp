#include "couette/interaction_kernels.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "couette/error.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace couette {

namespace {

std::string pair_str(int j1, int j2, double dk) {
  std::ostringstream os;
  os << "(k1=" << j1 * dk << ", k2=" << j2 * dk << ")";
  return os.str();
}

// -R (X.grad)Y with precomputed radial derivative DY; all blocks of length n.
void advect(double R, const Vec& r, int n, const double* X, const double* Y, const double* DY, double kb,
            double* out) {
  const double* Xu = X;
  const double* Xv = X + n;
  const double* Xw = X + 2 * n;
  const double* Yu = Y;
  const double* Yv = Y + n;
  const double* Yw = Y + 2 * n;
  const double* DYu = DY;
  const double* DYv = DY + n;
  const double* DYw = DY + 2 * n;
  for (int j = 0; j < n; ++j) {
    const double ir = 1.0 / r(j);
    out[j] = -R * (Xu[j] * DYu[j] - kb * Xw[j] * Yu[j] - Xv[j] * Yv[j] * ir);
    out[n + j] = -R * (Xu[j] * DYv[j] - kb * Xw[j] * Yv[j] + Xu[j] * Yv[j] * ir);
    out[2 * n + j] = -R * (Xu[j] * DYw[j] - kb * Xw[j] * Yw[j]);
  }
}

Vec radial_derivative(const RadialGrid& g, const Vec& X) {
  const int n = g.n_points;
  Vec D(3 * n);
  for (int c = 0; c < 3; ++c) D.segment(c * n, n) = g.d1 * X.segment(c * n, n);
  return D;
}

void zero_walls(Vec& F, int n) {
  for (int c = 0; c < 3; ++c) {
    F(c * n) = 0.0;
    F(c * n + n - 1) = 0.0;
  }
}

Vec symmetric_forcing(const FlowConfig& cfg, const RadialGrid& g, const Vec& xa, double ka, const Vec& xb,
                      double kb) {
  const int n = g.n_points;
  const Vec Da = radial_derivative(g, xa);
  const Vec Db = radial_derivative(g, xb);
  Vec f1(3 * n), f2(3 * n);
  advect(cfg.reynolds, g.nodes, n, xa.data(), xb.data(), Db.data(), kb, f1.data());
  advect(cfg.reynolds, g.nodes, n, xb.data(), xa.data(), Da.data(), ka, f2.data());
  return 0.5 * (f1 + f2);
}

}  // namespace

const char* to_string(Pin pin) { return pin == Pin::Adjoint ? "adjoint" : "energy"; }

Pin pin_from_string(const std::string& s) {
  if (s == "adjoint") return Pin::Adjoint;
  if (s == "energy") return Pin::Energy;
  fail(ErrorKind::Config, "unknown pin '" + s + "' (expected adjoint or energy)");
}

Vec advective_term(const FlowConfig& cfg, const RadialGrid& grid, const Vec& X, const Vec& Y, double kb) {
  const int n = grid.n_points;
  if (X.size() < 3 * n || Y.size() < 3 * n) fail(ErrorKind::Domain, "advective_term: state size mismatch");
  const Vec Yv = Y.head(3 * n);
  const Vec DY = radial_derivative(grid, Yv);
  Vec out(3 * n);
  advect(cfg.reynolds, grid.nodes, n, X.data(), Yv.data(), DY.data(), kb, out.data());
  return out;
}

ForcingProfile quadratic_forcing(const FlowConfig& cfg, const RadialGrid& grid, const EigenMode& a,
                                 const EigenMode& b) {
  const int n = grid.n_points;
  if (a.n() != n || b.n() != n) fail(ErrorKind::Domain, "quadratic_forcing: mode/grid size mismatch");
  const Vec F = symmetric_forcing(cfg, grid, a.state, a.k, b.state, b.k);
  return {a.k, b.k, F.segment(0, n), F.segment(n, n), F.segment(2 * n, n)};
}

// ---------------------------------------------------------------- ModeBank

ModeBank::ModeBank(const FlowConfig& cfg, const RadialGrid& grid, double dk, int j_max, Pin pin,
                   bool flip_phase, int threads)
    : cfg_(cfg), grid_(grid), dk_(dk), j_max_(j_max), pin_(pin) {
  if (!(dk > 0.0) || j_max < 1) fail(ErrorKind::Config, "mode bank needs dk > 0 and j_max >= 1");
  const int n = grid.n_points;
  std::vector<double> ks(j_max + 1);
  for (int j = 0; j <= j_max; ++j) ks[j] = j * dk;
  auto pos = tracked_leading_modes(cfg, ks, grid, threads);
  if (flip_phase) {
    for (int j = 1; j <= j_max; ++j) pos[j].state = -pos[j].state;
  }
  std::vector<AdjointMode> adj(j_max + 1);
  detail::parallel_for(j_max + 1, threads, [&](int j) { adj[j] = adjoint_mode(cfg, ks[j], grid, pos[j]); });

  const int total = 2 * j_max + 1;
  modes_.resize(total);
  adjoints_.resize(total);
  projectors_.resize(total);
  for (int j = 0; j <= j_max; ++j) {
    modes_[j_max + j] = pos[j];
    adjoints_[j_max + j] = adj[j];
    if (j > 0) {
      modes_[j_max - j] = mirror(pos[j]);
      adjoints_[j_max - j] = mirror(adj[j]);
    }
  }
  for (int q = 0; q < total; ++q) {
    Vec y = adjoints_[q].left;
    y.segment(3 * n, n).setZero();
    zero_walls(y, n);
    projectors_[q] = y;
  }

  solvers_.resize(total);
  detail::parallel_for(total, threads, [&](int q) {
    const int j = q - j_max_;
    const EigenMode& m = modes_[q];
    const Pencil p = assemble_pencil(cfg_, grid_, j * dk_);
    const Mat op = m.sigma * p.M - p.J;
    const Vec col = p.M * m.state;
    Vec row;
    if (pin_ == Pin::Adjoint) {
      row = p.M.transpose() * adjoints_[q].left;
    } else {
      row = Vec::Zero(4 * n);
      const Vec wr = grid_.quad_weights.cwiseProduct(grid_.nodes);
      for (int c = 0; c < 3; ++c) row.segment(c * n, n) = wr.cwiseProduct(m.state.segment(c * n, n));
    }
    std::ostringstream ctx;
    ctx << "second-order operator at k=" << j * dk_;
    solvers_[q] = BorderedSolver(op, col, row, ctx.str());
  });
}

const EigenMode& ModeBank::mode(int j) const {
  if (j < -j_max_ || j > j_max_) {
    std::ostringstream os;
    os << "no mode at k=" << j * dk_ << " (bank covers |k| <= " << j_max_ * dk_ << ")";
    fail(ErrorKind::Dependency, os.str());
  }
  return modes_[j + j_max_];
}

const AdjointMode& ModeBank::adjoint(int j) const {
  (void)mode(j);
  return adjoints_[j + j_max_];
}

const Vec& ModeBank::projector(int j) const {
  (void)mode(j);
  return projectors_[j + j_max_];
}

Vec ModeBank::second_order(int j1, int j2, double* b0) const {
  const int n = grid_.n_points;
  const int q = j1 + j2;
  const EigenMode& m1 = mode(j1);
  const EigenMode& m2 = mode(j2);
  if (q < -j_max_ || q > j_max_) {
    fail(ErrorKind::Dependency, "sum wavenumber outside mode bank for pair " + pair_str(j1, j2, dk_));
  }
  Vec F = symmetric_forcing(cfg_, grid_, m1.state, m1.k, m2.state, m2.k);
  zero_walls(F, n);
  if (q == 0) {
    // The mean response is purely azimuthal; radial forcing is carried by pressure.
    F.segment(0, n).setZero();
    F.segment(2 * n, n).setZero();
  }
  Vec rhs = Vec::Zero(4 * n);
  rhs.head(3 * n) = F;
  const auto sol = solvers_[q + j_max_].solve(rhs);
  if (!sol.x.allFinite()) fail(ErrorKind::Numerical, "second-order solve failed for " + pair_str(j1, j2, dk_));
  if (b0) *b0 = sol.lambda;
  return sol.x;
}

double triad_kernel_b0(const ModeBank& bank, int j1, int j2) {
  double b0 = 0.0;
  (void)bank.second_order(j1, j2, &b0);
  return b0;
}

SecondOrderField second_order_field(const ModeBank& bank, int j1, int j2) {
  SecondOrderField f;
  f.j1 = j1;
  f.j2 = j2;
  f.k = (j1 + j2) * bank.dk();
  f.state = bank.second_order(j1, j2, &f.b0);
  return f;
}

namespace {

// integral(adjoint(q) . M X) with X the second-order field at q.
double null_component(const ModeBank& bank, int q, const Vec& X) {
  return bank.projector(q).dot(X);
}

double g_term(const ModeBank& bank, int ja, int jb, int jc) {
  const RadialGrid& g = bank.grid();
  const int n = g.n_points;
  const Vec X = bank.second_order(jb, jc).head(3 * n);
  const Vec& x1 = bank.mode(ja).state;
  const Vec G = [&] {
    Vec f1 = advective_term(bank.config(), g, x1, X, (jb + jc) * bank.dk());
    Vec f2 = advective_term(bank.config(), g, X, x1, ja * bank.dk());
    return Vec(f1 + f2);
  }();
  Vec full = Vec::Zero(4 * n);
  full.head(3 * n) = G;
  return bank.projector(ja + jb + jc).dot(full);
}

double h_term(const ModeBank& bank, int jp, int jq, int js) {
  const int u = jp + jq;
  double b0 = 0.0;
  (void)bank.second_order(jp, jq, &b0);
  const Vec X = bank.second_order(u, js);
  return -2.0 * b0 * null_component(bank, u + js, X);
}

}  // namespace

double triad_kernel_b1(const ModeBank& bank, int j1, int j2) {
  const Vec X = bank.second_order(j1, j2);
  const double mismatch = bank.sigma(j1 + j2) - bank.sigma(j1) - bank.sigma(j2);
  return mismatch * null_component(bank, j1 + j2, X);
}

double cubic_kernel_c(const ModeBank& bank, int j1, int j2, int j3) {
  double c = (g_term(bank, j1, j2, j3) + g_term(bank, j2, j1, j3) + g_term(bank, j3, j1, j2)) / 3.0;
  if (bank.pin() == Pin::Energy) {
    c += (h_term(bank, j1, j2, j3) + h_term(bank, j1, j3, j2) + h_term(bank, j2, j3, j1)) / 3.0;
  }
  return c;
}

// ---------------------------------------------------------------- tables

int KernelTables::index(double kk) const {
  const double x = kk / dk;
  const long j = std::lround(x);
  if (std::abs(x - j) > 1e-9) {
    std::ostringstream os;
    os << "wavenumber " << kk << " is not on the grid (dk=" << dk << ")";
    fail(ErrorKind::Domain, os.str());
  }
  if (std::abs(j) > nk) {
    std::ostringstream os;
    os << "wavenumber " << kk << " outside table range [-" << k_max << ", " << k_max << "]";
    fail(ErrorKind::Domain, os.str());
  }
  return static_cast<int>(j + nk);
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string table_config_hash(const FlowConfig& cfg, int n_points, const KernelOptions& opts) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "v%d eta=%.17g mu=%.17g R=%.17g n=%d K=%.17g dk=%.17g pin=%s b1=%d flip=%d",
                KernelTables::kFormatVersion, cfg.eta, cfg.mu, cfg.reynolds, n_points, opts.k_max, opts.dk,
                to_string(opts.pin), int(opts.include_b1), int(opts.flip_phase));
  return hex64(fnv1a(buf, std::strlen(buf)));
}

std::string KernelTables::config_hash() const {
  KernelOptions o;
  o.k_max = k_max;
  o.dk = dk;
  o.pin = pin;
  o.include_b1 = include_b1;
  o.flip_phase = flip_phase;
  return table_config_hash(FlowConfig::make(eta, mu, reynolds), n_points, o);
}

std::string KernelTables::content_hash() const {
  std::uint64_t h = fnv1a(a.data(), a.size() * sizeof(double));
  h = fnv1a(b_store.data(), b_store.size() * sizeof(double), h);
  h = fnv1a(c_store.data(), c_store.size() * sizeof(double), h);
  h = fnv1a(dv2_wall.data(), dv2_wall.size() * sizeof(double), h);
  h = fnv1a(&dv1_wall0, sizeof(double), h);
  return hex64(h);
}

ModeBank make_table_bank(const FlowConfig& cfg, const RadialGrid& grid, const KernelOptions& opts) {
  const double ratio = opts.k_max / opts.dk;
  const int nk = static_cast<int>(std::lround(ratio));
  if (nk < 1 || std::abs(ratio - nk) > 1e-9) {
    fail(ErrorKind::Config, "k_max must be a positive integer multiple of dk");
  }
  return ModeBank(cfg, grid, opts.dk, 2 * nk, opts.pin, opts.flip_phase, opts.threads);
}

KernelTables assemble_tables(const FlowConfig& cfg, const RadialGrid& grid, const KernelOptions& opts) {
  return assemble_tables(make_table_bank(cfg, grid, opts), opts);
}

KernelTables assemble_tables(const ModeBank& bank, const KernelOptions& opts) {
  const FlowConfig& cfg = bank.config();
  const RadialGrid& g = bank.grid();
  const int n = g.n_points;
  const int nk = static_cast<int>(std::lround(opts.k_max / opts.dk));
  if (bank.j_max() < 2 * nk || std::abs(bank.dk() - opts.dk) > 1e-15) {
    fail(ErrorKind::Dependency, "mode bank does not cover twice the table range");
  }
  const int N = 2 * nk + 1;

  KernelTables t;
  t.eta = cfg.eta;
  t.mu = cfg.mu;
  t.reynolds = cfg.reynolds;
  t.n_points = n;
  t.k_max = opts.k_max;
  t.dk = opts.dk;
  t.pin = bank.pin();
  t.include_b1 = opts.include_b1;
  t.flip_phase = opts.flip_phase;
  t.nk = nk;
  t.a.resize(N);
  for (int i = 0; i < N; ++i) t.a[i] = bank.sigma(i - nk);
  t.epsilon = *std::max_element(t.a.begin(), t.a.end());

  // Second-order fields for every unordered pair in the table range.
  struct Pair {
    int j1, j2;
  };
  std::vector<Pair> pairs;
  for (int j1 = -nk; j1 <= nk; ++j1) {
    for (int j2 = j1; j2 <= nk; ++j2) pairs.push_back({j1, j2});
  }
  const int P = static_cast<int>(pairs.size());
  auto pair_index = [&](int j1, int j2) {
    if (j1 > j2) std::swap(j1, j2);
    // Row j1 holds j2 in [j1, nk]; rows before it hold sum_{r<j1} (nk - r + 1).
    const int r = j1 + nk;
    return r * (N) - r * (r - 1) / 2 + (j2 - j1);
  };
  std::vector<Vec> X(P), DX(P);
  std::vector<double> b0(P), ym(P);
  detail::parallel_for(P, opts.threads, [&](int p) {
    const auto [j1, j2] = pairs[p];
    const Vec full = bank.second_order(j1, j2, &b0[p]);
    ym[p] = null_component(bank, j1 + j2, full);
    X[p] = full.head(3 * n);
    DX[p] = radial_derivative(g, X[p]);
  });

  // b table.
  t.b_store.assign(std::size_t(N) * N, 0.0);
  for (int i = 0; i < N; ++i) {
    for (int i1 = 0; i1 < N; ++i1) {
      const int j1 = i1 - nk;
      const int j2 = (i - nk) - j1;
      if (std::abs(j2) > nk) continue;
      const int p = pair_index(j1, j2);
      double v = b0[p];
      if (opts.include_b1) v += (bank.sigma(j1 + j2) - bank.sigma(j1) - bank.sigma(j2)) * ym[p];
      t.b_store[std::size_t(i) * N + i1] = v;
    }
  }

  // Unsymmetrized quartet pieces G[a][b][c] = adjoint(a+b+c) . [N(U1(a), U2(b,c)) + N(U2(b,c), U1(a))].
  std::vector<Vec> U1(N), DU1(N);
  for (int i = 0; i < N; ++i) {
    U1[i] = bank.mode(i - nk).state.head(3 * n);
    DU1[i] = radial_derivative(g, U1[i]);
  }
  std::vector<double> G(std::size_t(N) * N * N, 0.0);
  auto gidx = [N](int a, int b, int c) { return (std::size_t(a) * N + b) * N + c; };
  detail::parallel_for(P, opts.threads, [&](int p) {
    const auto [jb, jc] = pairs[p];
    const double kq = (jb + jc) * opts.dk;
    Vec f1(3 * n), f2(3 * n);
    for (int ia = 0; ia < N; ++ia) {
      const int ja = ia - nk;
      const int s = ja + jb + jc;
      if (std::abs(s) > nk) continue;
      advect(cfg.reynolds, g.nodes, n, U1[ia].data(), X[p].data(), DX[p].data(), kq, f1.data());
      advect(cfg.reynolds, g.nodes, n, X[p].data(), U1[ia].data(), DU1[ia].data(), ja * opts.dk, f2.data());
      const Vec& y = bank.projector(s);
      double v = 0.0;
      for (int j = 0; j < 3 * n; ++j) v += y(j) * (f1(j) + f2(j));
      G[gidx(ia, jb + nk, jc + nk)] = v;
      G[gidx(ia, jc + nk, jb + nk)] = v;
    }
  });

  t.c_store.assign(std::size_t(N) * N * N, 0.0);
  const bool energy_pin = bank.pin() == Pin::Energy;
  auto h = [&](int jp, int jq, int js) {
    const int u = jp + jq;
    if (std::abs(u) > nk) return 0.0;
    return -2.0 * b0[pair_index(jp, jq)] * ym[pair_index(u, js)];
  };
  for (int i = 0; i < N; ++i) {
    for (int i1 = 0; i1 < N; ++i1) {
      for (int i2 = 0; i2 < N; ++i2) {
        const int i3 = i - i1 - i2 + 2 * nk;
        if (i3 < 0 || i3 >= N) continue;
        double v = (G[gidx(i1, i2, i3)] + G[gidx(i2, i1, i3)] + G[gidx(i3, i1, i2)]) / 3.0;
        if (energy_pin) {
          const int k1 = i1 - nk, k2 = i2 - nk, k3 = i3 - nk;
          v += (h(k1, k2, k3) + h(k1, k3, k2) + h(k2, k3, k1)) / 3.0;
        }
        t.c_store[(std::size_t(i) * N + i1) * N + i2] = v;
      }
    }
  }

  // Exact invariance under negation of all wavenumbers.
  for (int i = 0; i < N; ++i) {
    for (int i1 = 0; i1 < N; ++i1) {
      const std::size_t x = std::size_t(i) * N + i1;
      const std::size_t y = std::size_t(N - 1 - i) * N + (N - 1 - i1);
      if (y <= x) continue;
      const double m = 0.5 * (t.b_store[x] + t.b_store[y]);
      t.b_store[x] = t.b_store[y] = m;
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int i1 = 0; i1 < N; ++i1) {
      for (int i2 = 0; i2 < N; ++i2) {
        const std::size_t x = (std::size_t(i) * N + i1) * N + i2;
        const std::size_t y = (std::size_t(N - 1 - i) * N + (N - 1 - i1)) * N + (N - 1 - i2);
        if (y <= x) continue;
        const double m = 0.5 * (t.c_store[x] + t.c_store[y]);
        t.c_store[x] = t.c_store[y] = m;
      }
    }
  }

  // Wall shear of the mean-flow pieces.
  const Vec d1row = g.d1.row(0).transpose();
  t.dv2_wall.assign(N, 0.0);
  for (int i = 0; i < N; ++i) {
    const int j = i - nk;
    t.dv2_wall[i] = d1row.dot(X[pair_index(j, -j)].segment(n, n));
  }
  t.dv1_wall0 = d1row.dot(bank.mode(0).v());

  // Least-stable axial-diffusion eigenvalue at k = 0, reported alongside the
  // azimuthal branch used by the tables.
  {
    Mat L = g.d2 + g.nodes.cwiseInverse().asDiagonal() * g.d1;
    const Mat Li = L.block(1, 1, n - 2, n - 2);
    Eigen::EigenSolver<Mat> es(Li, false);
    double best = -INFINITY;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) best = std::max(best, es.eigenvalues()(i).real());
    t.sigma_w_branch0 = best;
  }
  return t;
}

// ---------------------------------------------------------------- cache

namespace {

constexpr char kMagic[8] = {'C', 'S', 'K', 'T', 'A', 'B', 'L', 'E'};

nlohmann::json header_of(const KernelTables& t) {
  return {{"format_version", KernelTables::kFormatVersion},
          {"eta", t.eta},
          {"mu", t.mu},
          {"reynolds", t.reynolds},
          {"n_points", t.n_points},
          {"k_max", t.k_max},
          {"dk", t.dk},
          {"pin", to_string(t.pin)},
          {"include_b1", t.include_b1},
          {"flip_phase", t.flip_phase},
          {"nk", t.nk},
          {"dv1_wall0", t.dv1_wall0},
          {"epsilon", t.epsilon},
          {"sigma_w_branch0", t.sigma_w_branch0},
          {"config_hash", t.config_hash()},
          {"content_hash", t.content_hash()}};
}

void write_array(std::ostream& os, const std::vector<double>& v) {
  os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
}

void read_array(std::istream& is, std::vector<double>& v, std::size_t count, const std::string& file) {
  v.resize(count);
  is.read(reinterpret_cast<char*>(v.data()), std::streamsize(count * sizeof(double)));
  if (!is) fail(ErrorKind::Cache, "truncated table file " + file);
}

}  // namespace

void save_tables(const KernelTables& t, const std::filesystem::path& file) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
  const fs::path tmp = file.string() + ".tmp" + std::to_string(std::random_device{}());
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) fail(ErrorKind::Cache, "cannot write " + tmp.string());
    const std::string header = header_of(t).dump();
    const std::uint64_t len = header.size();
    os.write(kMagic, sizeof kMagic);
    os.write(reinterpret_cast<const char*>(&len), sizeof len);
    os.write(header.data(), std::streamsize(header.size()));
    write_array(os, t.a);
    write_array(os, t.b_store);
    write_array(os, t.c_store);
    write_array(os, t.dv2_wall);
    if (!os) fail(ErrorKind::Cache, "write failed for " + tmp.string());
  }
  fs::rename(tmp, file, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorKind::Cache, "cannot move table file into place: " + file.string());
  }
}

KernelTables load_tables(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) fail(ErrorKind::Cache, "cannot open table file " + file.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    fail(ErrorKind::Cache, "not a kernel table file: " + file.string());
  }
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!is || len > (1u << 20)) fail(ErrorKind::Cache, "corrupt table header in " + file.string());
  std::string header(len, '\0');
  is.read(header.data(), std::streamsize(len));
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const std::exception& e) {
    fail(ErrorKind::Cache, "corrupt table header in " + file.string() + ": " + e.what());
  }
  if (h.value("format_version", 0) != KernelTables::kFormatVersion) {
    fail(ErrorKind::Cache, "table file " + file.string() + " has an unsupported format version");
  }
  KernelTables t;
  t.eta = h["eta"];
  t.mu = h["mu"];
  t.reynolds = h["reynolds"];
  t.n_points = h["n_points"];
  t.k_max = h["k_max"];
  t.dk = h["dk"];
  t.pin = pin_from_string(h["pin"]);
  t.include_b1 = h["include_b1"];
  t.flip_phase = h["flip_phase"];
  t.nk = h["nk"];
  t.dv1_wall0 = h["dv1_wall0"];
  t.epsilon = h["epsilon"];
  t.sigma_w_branch0 = h["sigma_w_branch0"];
  const std::size_t N = t.size();
  read_array(is, t.a, N, file.string());
  read_array(is, t.b_store, N * N, file.string());
  read_array(is, t.c_store, N * N * N, file.string());
  read_array(is, t.dv2_wall, N, file.string());
  if (t.content_hash() != h.value("content_hash", std::string())) {
    fail(ErrorKind::Cache, "table file " + file.string() + " failed its content hash check");
  }
  return t;
}

KernelTables cached_tables(const FlowConfig& cfg, int n_points, const KernelOptions& opts,
                           const std::filesystem::path& dir, bool force_rebuild, TableBuildInfo* info) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string hash = table_config_hash(cfg, n_points, opts);
  const std::filesystem::path file = dir / ("tables-" + hash + ".bin");
  TableBuildInfo local;
  local.file = file;
  KernelTables t;
  bool loaded = false;
  if (!force_rebuild && std::filesystem::exists(file)) {
    try {
      t = load_tables(file);
      loaded = t.config_hash() == hash;
    } catch (const Error&) {
      loaded = false;
    }
  }
  if (!loaded) {
    const RadialGrid grid = build_grid(n_points, cfg.r_inner, cfg.r_outer);
    t = assemble_tables(cfg, grid, opts);
    save_tables(t, file);
  }
  local.cache_hit = loaded;
  local.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (info) *info = local;
  return t;
}

}  // namespace couette
