#include "couette/spectrum_evolution.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "couette/error.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace couette {

namespace {

void check_grid(const std::vector<cplx>& A, const KernelTables& t) {
  if (static_cast<int>(A.size()) != t.size()) {
    std::ostringstream os;
    os << "state has " << A.size() << " points but tables have " << t.size();
    fail(ErrorKind::Domain, os.str());
  }
}

template <class T>
void triad_impl(const std::vector<T>& A, const KernelTables& t, std::vector<T>& out, int threads) {
  const int N = t.size();
  const int nk = t.nk;
  std::vector<T> wA(A);
  wA.front() *= 0.5;
  wA.back() *= 0.5;
  out.assign(N, T(0));
  detail::parallel_for(N, threads, [&](int i) {
    // partner index i - i1 + nk must lie in [0, N)
    const int lo = std::max(0, i - nk);
    const int hi = std::min(N - 1, i + nk);
    const double* b = &t.b_store[std::size_t(i) * N];
    T s(0);
    for (int i1 = lo; i1 <= hi; ++i1) s += b[i1] * wA[i1] * A[i - i1 + nk];
    out[i] = s * t.dk;
  });
}

template <class T>
void quartet_impl(const std::vector<T>& A, const KernelTables& t, std::vector<T>& out, int threads) {
  const int N = t.size();
  std::vector<T> wA(A);
  wA.front() *= 0.5;
  wA.back() *= 0.5;
  // Reversed copy: A[i3] with i3 = i - i1 - i2 + 2nk equals Ar[i1 + i2 - i].
  std::vector<T> Ar(A.rbegin(), A.rend());
  out.assign(N, T(0));
  const double dk2 = t.dk * t.dk;
  detail::parallel_for(N, threads, [&](int i) {
    T s(0);
    for (int i1 = 0; i1 < N; ++i1) {
      if (wA[i1] == T(0)) continue;
      const int lo = std::max(0, i - i1);
      const int hi = std::min(N - 1, i - i1 + N - 1);
      if (lo > hi) continue;
      const double* c = &t.c_store[(std::size_t(i) * N + i1) * N];
      const T* ar = Ar.data();
      const int off = i1 - i;
      T inner(0);
      for (int i2 = lo; i2 <= hi; ++i2) inner += c[i2] * wA[i2] * ar[i2 + off];
      s += wA[i1] * inner;
    }
    out[i] = s * dk2;
  });
}

bool is_real(const std::vector<cplx>& A) {
  return std::all_of(A.begin(), A.end(), [](const cplx& z) { return z.imag() == 0.0; });
}

std::vector<double> real_part(const std::vector<cplx>& A) {
  std::vector<double> r(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) r[i] = A[i].real();
  return r;
}

template <class T>
double picard(const std::vector<T>& A0, std::vector<T>& An, const KernelTables& t, const EvolutionParams& p,
              int& iterations) {
  const int N = t.size();
  std::vector<T> I1, I2;
  std::vector<double> denom(N);
  for (int i = 0; i < N; ++i) denom[i] = 1.0 / (1.0 - p.dt * t.a[i]);
  double err = INFINITY;
  An = A0;
  for (iterations = 1; iterations <= p.picard_max; ++iterations) {
    if constexpr (std::is_same_v<T, double>) {
      triad_integral_real(An, t, I1, p.threads);
      quartet_integral_real(An, t, I2, p.threads);
    } else {
      triad_impl(An, t, I1, p.threads);
      quartet_impl(An, t, I2, p.threads);
    }
    err = 0.0;
    for (int i = 0; i < N; ++i) {
      T next = (A0[i] + p.dt * (I1[i] + I2[i])) * denom[i];
      if (!p.mask.empty() && !p.mask[i]) next = T(0);
      err = std::max(err, std::abs(next - An[i]));
      An[i] = next;
    }
    if (!std::isfinite(err)) break;
    if (err < p.picard_tol) return err;
  }
  return err;
}

// d(I1 + I2)/dA as a dense N x N matrix.
template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> interaction_jacobian(const std::vector<T>& A,
                                                                       const KernelTables& t) {
  const int N = t.size();
  const int nk = t.nk;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> Jm =
      Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Zero(N, N);
  auto w = [N](int i) { return (i == 0 || i == N - 1) ? 0.5 : 1.0; };
  const double dk = t.dk;
  const double dk2 = dk * dk;
  for (int i = 0; i < N; ++i) {
    for (int i1 = std::max(0, i - nk); i1 <= std::min(N - 1, i + nk); ++i1) {
      const int p = i - i1 + nk;
      const double bw = dk * w(i1) * t.b(i1, i);
      Jm(i, i1) += bw * A[p];
      Jm(i, p) += bw * A[i1];
    }
    for (int i1 = 0; i1 < N; ++i1) {
      for (int i2 = std::max(0, i - i1); i2 <= std::min(N - 1, i - i1 + 2 * nk); ++i2) {
        const int i3 = i - i1 - i2 + 2 * nk;
        const double cw = dk2 * w(i1) * w(i2) * t.c(i1, i2, i);
        Jm(i, i1) += cw * A[i2] * A[i3];
        Jm(i, i2) += cw * A[i1] * A[i3];
        Jm(i, i3) += cw * A[i1] * A[i2];
      }
    }
  }
  return Jm;
}

// Newton iteration for X = A0 + dt (a X + I(X)), started from X.
template <class T>
double newton(const std::vector<T>& A0, std::vector<T>& X, const KernelTables& t, const EvolutionParams& p) {
  using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const int N = t.size();
  std::vector<T> I1, I2;
  double err = INFINITY;
  for (int it = 0; it < p.picard_max; ++it) {
    triad_impl(X, t, I1, p.threads);
    quartet_impl(X, t, I2, p.threads);
    VecT G(N);
    for (int i = 0; i < N; ++i) G(i) = X[i] - A0[i] - p.dt * (t.a[i] * X[i] + I1[i] + I2[i]);
    MatT Jm = -p.dt * interaction_jacobian(X, t);
    for (int i = 0; i < N; ++i) Jm(i, i) += T(1.0 - p.dt * t.a[i]);
    if (!p.mask.empty()) {
      for (int i = 0; i < N; ++i) {
        if (p.mask[i]) continue;
        Jm.row(i).setZero();
        Jm(i, i) = T(1.0);
        G(i) = X[i];
      }
    }
    const VecT d = Jm.partialPivLu().solve(G);
    err = 0.0;
    for (int i = 0; i < N; ++i) {
      X[i] -= d(i);
      err = std::max(err, std::abs(d(i)));
    }
    if (!std::isfinite(err)) return err;
    if (err < p.picard_tol) return err;
  }
  return err;
}

}  // namespace

void EvolutionParams::validate() const {
  if (!(dt > 0.0)) fail(ErrorKind::Config, "time step must be positive");
  if (!(picard_tol > 0.0) || !(equil_tol > 0.0)) fail(ErrorKind::Config, "tolerances must be positive");
  if (picard_max < 1) fail(ErrorKind::Config, "picard_max must be at least 1");
  if (!(t_max >= 0.0)) fail(ErrorKind::Config, "t_max must be non-negative");
  if (sample_every < 0 || snapshot_every < 0) fail(ErrorKind::Config, "cadences must be non-negative");
}

void triad_integral_real(const std::vector<double>& A, const KernelTables& t, std::vector<double>& out,
                         int threads) {
  triad_impl(A, t, out, threads);
}

void quartet_integral_real(const std::vector<double>& A, const KernelTables& t, std::vector<double>& out,
                           int threads) {
  quartet_impl(A, t, out, threads);
}

std::vector<cplx> triad_integral(const SpectrumState& s, const KernelTables& t, int threads) {
  check_grid(s.A, t);
  std::vector<cplx> out;
  triad_impl(s.A, t, out, threads);
  return out;
}

std::vector<cplx> quartet_integral(const SpectrumState& s, const KernelTables& t, int threads) {
  check_grid(s.A, t);
  std::vector<cplx> out;
  quartet_impl(s.A, t, out, threads);
  return out;
}

double rhs_residual(const SpectrumState& s, const KernelTables& t, int threads) {
  const auto I1 = triad_integral(s, t, threads);
  const auto I2 = quartet_integral(s, t, threads);
  double r = 0.0;
  for (int i = 0; i < t.size(); ++i) r = std::max(r, std::abs(t.a[i] * s.A[i] + I1[i] + I2[i]));
  return r * t.dk;
}

double hermitian_drift(const SpectrumState& s) {
  const std::size_t N = s.A.size();
  double d = 0.0;
  for (std::size_t i = 0; i < N; ++i) d = std::max(d, std::abs(s.A[N - 1 - i] - std::conj(s.A[i])));
  return d;
}

SpectrumState step(const SpectrumState& s, const KernelTables& t, const EvolutionParams& p) {
  check_grid(s.A, t);
  const int N = t.size();
  SpectrumState out;
  out.steps = s.steps + 1;
  out.t = s.t + p.dt;
  int iterations = 0;
  double err;
  // Picard first; Newton from the previous state when Picard does not contract.
  if (is_real(s.A)) {
    const std::vector<double> A0 = real_part(s.A);
    std::vector<double> An;
    err = picard(A0, An, t, p, iterations);
    if (!(err < p.picard_tol)) {
      An = A0;
      err = newton(A0, An, t, p);
    }
    out.A.assign(An.begin(), An.end());
  } else {
    std::vector<cplx> An;
    err = picard(s.A, An, t, p, iterations);
    if (!(err < p.picard_tol)) {
      An = s.A;
      err = newton(s.A, An, t, p);
    }
    out.A = std::move(An);
  }
  if (!(err < p.picard_tol)) {
    std::ostringstream os;
    os << "implicit step did not converge at t=" << out.t << " (Picard and Newton, last change " << err
       << "); try a smaller time step";
    fail(ErrorKind::Numerical, os.str());
  }
  const double drift = hermitian_drift(out);
  if (drift > 1e-12) {
    std::ostringstream os;
    os << "Hermitian symmetry drift " << drift << " at t=" << out.t;
    fail(ErrorKind::Numerical, os.str());
  }
  for (int i = 0; i < N / 2; ++i) {
    const cplx m = 0.5 * (out.A[i] + std::conj(out.A[N - 1 - i]));
    out.A[i] = m;
    out.A[N - 1 - i] = std::conj(m);
  }
  out.A[N / 2] = out.A[N / 2].real();
  return out;
}

EquilibriumReport make_report(const SpectrumState& s, const KernelTables& t, double residual,
                              const std::string& reason) {
  check_grid(s.A, t);
  EquilibriumReport r;
  r.residual = residual;
  r.reason = reason;
  r.t = s.t;
  r.steps = s.steps;
  int best = -1;
  double best_abs = -1.0;
  for (int i = t.nk; i < t.size(); ++i) {
    r.k.push_back(t.k(i));
    r.amplitudes.push_back(s.A[i].real() * t.dk);
    r.abs_amplitudes.push_back(std::abs(s.A[i]) * t.dk);
    // Strict comparison keeps the smaller k on ties.
    if (i > t.nk && std::abs(s.A[i]) > best_abs) {
      best_abs = std::abs(s.A[i]);
      best = i;
    }
  }
  r.mean_flow = s.A[t.nk].real() * t.dk;
  if (best >= 0) {
    r.k_f = t.k(best);
    r.amplitude_kf = s.A[best].real() * t.dk;
    const int jf = best - t.nk;
    for (int m = 1; jf > 0 && m * jf <= t.nk; ++m) {
      r.harmonics.emplace_back(m * r.k_f, s.A[t.nk + m * jf].real() * t.dk);
    }
  }
  return r;
}

EvolveResult evolve(const SpectrumState& initial, const KernelTables& t, const EvolutionParams& p,
                    const SampleCallback& on_sample) {
  p.validate();
  check_grid(initial.A, t);
  if (!p.mask.empty() && static_cast<int>(p.mask.size()) != t.size()) {
    fail(ErrorKind::Config, "mask length does not match the wavenumber grid");
  }
  SpectrumState s = initial;
  if (on_sample && p.sample_every > 0 && s.steps % p.sample_every == 0) on_sample(s);
  const long max_steps = std::lround(p.t_max / p.dt);
  // A resumed converged run reports immediately.
  double residual = rhs_residual(s, t, p.threads);
  if (residual <= p.equil_tol) return {s, make_report(s, t, residual, "converged")};
  while (s.steps < max_steps) {
    SpectrumState next = step(s, t, p);
    double change = 0.0;
    for (int i = 0; i < t.size(); ++i) change = std::max(change, std::abs(next.A[i] - s.A[i]));
    s = std::move(next);
    if (on_sample && p.sample_every > 0 && s.steps % p.sample_every == 0) on_sample(s);
    if (p.snapshot_every > 0 && !p.snapshot_file.empty() && s.steps % p.snapshot_every == 0) {
      save_snapshot(s, t, p, p.snapshot_file);
    }
    if (change / p.dt * t.dk <= p.equil_tol) {
      residual = rhs_residual(s, t, p.threads);
      if (residual <= p.equil_tol) {
        if (!p.snapshot_file.empty()) save_snapshot(s, t, p, p.snapshot_file);
        return {s, make_report(s, t, residual, "converged")};
      }
    }
  }
  residual = rhs_residual(s, t, p.threads);
  if (!p.snapshot_file.empty()) save_snapshot(s, t, p, p.snapshot_file);
  return {s, make_report(s, t, residual, residual <= p.equil_tol ? "converged" : "horizon")};
}

SpectrumState seeded_state(const KernelTables& t, const std::vector<std::pair<double, cplx>>& seeds,
                           double background) {
  SpectrumState s;
  s.A.assign(t.size(), cplx(0.0));
  if (background != 0.0) {
    for (int i = 0; i < t.size(); ++i) {
      if (i != t.nk) s.A[i] = background;
    }
  }
  for (const auto& [k, density] : seeds) {
    const int i = t.index(k);
    const int m = t.size() - 1 - i;
    if (i == m) {
      s.A[i] = density.real();
    } else {
      s.A[i] = density;
      s.A[m] = std::conj(density);
    }
  }
  return s;
}

SpectrumState uniform_state(const KernelTables& t, double density, bool include_zero) {
  SpectrumState s;
  s.A.assign(t.size(), cplx(density));
  if (!include_zero) s.A[t.nk] = 0.0;
  return s;
}

void save_snapshot(const SpectrumState& s, const KernelTables& t, const EvolutionParams& p,
                   const std::filesystem::path& file) {
  nlohmann::json j;
  j["format"] = "couette-spectrum-snapshot";
  j["version"] = 1;
  j["tables_content_hash"] = t.content_hash();
  j["tables_config_hash"] = t.config_hash();
  j["t"] = s.t;
  j["steps"] = s.steps;
  j["dt"] = p.dt;
  std::vector<double> re(s.A.size()), im(s.A.size());
  for (std::size_t i = 0; i < s.A.size(); ++i) {
    re[i] = s.A[i].real();
    im[i] = s.A[i].imag();
  }
  j["re"] = re;
  j["im"] = im;
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) fail(ErrorKind::Cache, "cannot write snapshot " + tmp.string());
    // max_digits10 keeps the round trip exact.
    os << j.dump();
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) fail(ErrorKind::Cache, "cannot move snapshot into place: " + file.string());
}

SpectrumState load_snapshot(const std::filesystem::path& file, const KernelTables& t) {
  std::ifstream is(file);
  if (!is) fail(ErrorKind::Cache, "cannot open snapshot " + file.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    fail(ErrorKind::Cache, "corrupt snapshot " + file.string() + ": " + e.what());
  }
  if (j.value("format", std::string()) != "couette-spectrum-snapshot") {
    fail(ErrorKind::Cache, file.string() + " is not a snapshot file");
  }
  if (j.value("tables_content_hash", std::string()) != t.content_hash()) {
    fail(ErrorKind::Cache, "snapshot " + file.string() +
                               " was written with different kernel tables (hash mismatch); refusing to resume");
  }
  SpectrumState s;
  s.t = j["t"];
  s.steps = j["steps"];
  const std::vector<double> re = j["re"];
  const std::vector<double> im = j["im"];
  if (static_cast<int>(re.size()) != t.size() || re.size() != im.size()) {
    fail(ErrorKind::Cache, "snapshot grid does not match the tables");
  }
  s.A.resize(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) s.A[i] = {re[i], im[i]};
  return s;
}

std::string classify_outcome(double seed_k, double k_f, double dk) {
  const double tol = 0.5 * dk;
  if (std::abs(k_f - seed_k) < tol) return "stable as seeded";
  if (std::abs(k_f - 2.0 * seed_k) < tol) return "decayed to harmonic";
  return "decayed to band interior";
}

std::vector<SelectionRow> selection_sweep(const KernelTables& t, const std::vector<double>& seeds,
                                          double seed_density, double background, const EvolutionParams& p) {
  std::vector<SelectionRow> rows;
  for (double k0 : seeds) {
    const SpectrumState init = seeded_state(t, {{k0, cplx(seed_density)}}, background);
    EvolveResult res = evolve(init, t, p);
    SelectionRow row;
    row.seed_k = k0;
    row.k_f = res.report.k_f;
    row.amplitude = res.report.amplitude_kf;
    row.outcome = classify_outcome(k0, row.k_f, t.dk);
    row.report = std::move(res.report);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace couette
