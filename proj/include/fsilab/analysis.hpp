#pragma once

// Numerical experiments on an assembled generator: dissipativity scans,
// shifted (resolvent) solves, implicit time stepping and spectra.

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "fsilab/generator.hpp"

namespace fsilab {

using cplx = std::complex<double>;
using CSpMat = Eigen::SparseMatrix<cplx>;

// ---------------------------------------------------------------------------
// Pseudorandom states.

/// Uniform double in [-1, 1) from the top 53 bits; identical on every platform.
inline double unit_draw(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  return std::mt19937_64(seq);
}

namespace detail {

inline Vec smooth_grid(const Grid& g, const Vec& v) {
  Vec out(v.size());
  for (int j = 0; j < g.nodes_y(); ++j)
    for (int i = 0; i < g.nodes_x(); ++i) {
      double s = 0.0;
      int c = 0;
      if (i > 0) s += v[g.index(i - 1, j)], ++c;
      if (i + 1 < g.nodes_x()) s += v[g.index(i + 1, j)], ++c;
      if (j > 0) s += v[g.index(i, j - 1)], ++c;
      if (j + 1 < g.nodes_y()) s += v[g.index(i, j + 1)], ++c;
      out[g.index(i, j)] = 0.5 * (v[g.index(i, j)] + s / c);
    }
  return out;
}

inline Vec smooth_beam(const Vec& v) {
  Vec out = Vec::Zero(v.size());
  for (int i = 1; i + 1 < v.size(); ++i) out[i] = 0.5 * (v[i] + 0.5 * (v[i - 1] + v[i + 1]));
  return out;
}

}  // namespace detail

/// Smoothed pseudorandom reduced state in the mean-zero subspace.
inline Vec random_state(const Layout& l, std::uint64_t seed, std::uint64_t id) {
  const Grid& g = l.grid;
  auto rng = sample_rng(seed, id);
  auto draw = [&](int n) {
    Vec v(n);
    for (int k = 0; k < n; ++k) v[k] = unit_draw(rng);
    return v;
  };
  RState s;
  s.p = detail::smooth_grid(g, draw(g.node_count()));
  s.u1 = detail::smooth_grid(g, draw(g.node_count()));
  s.u2 = detail::smooth_grid(g, draw(g.node_count()));
  Vec w1 = draw(g.beam_count()), w2 = draw(g.beam_count());
  w1[0] = w1[w1.size() - 1] = 0.0;
  w2[0] = w2[w2.size() - 1] = 0.0;
  s.w1 = detail::smooth_beam(w1);
  s.w2 = detail::smooth_beam(w2);
  return project_H0(l, l.pack(s));
}

inline std::vector<Vec> random_states(const Layout& l, int count, std::uint64_t seed) {
  std::vector<Vec> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(random_state(l, seed, static_cast<std::uint64_t>(k)));
  return out;
}

/// Thread count for sweeps: FSILAB_THREADS if set, else hardware concurrency.
inline int sweep_threads() {
  if (const char* env = std::getenv("FSILAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(k) for k in [0, n) on up to `threads` workers.
template <class F>
void parallel_for(int n, int threads, F&& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Dissipativity.

struct DissipativitySample {
  int sample_id = 0;
  double q_over_norm2 = 0.0;
  double flow_budget = 0.0;            // (sigma(u), eps(u)) + ||u||^2
  double pressure_plate_budget = 0.0;  // xi (||p||^2 + ||D2 w1||^2)
};

struct DissipativityReport {
  std::vector<DissipativitySample> samples;
  double max_q_over_norm2 = 0.0;
  double c_delta = 0.0;  // smallest C_delta making the flow/plate budget bound hold
  double delta = 0.25;
  double c_star = 1.0;
};

inline DissipativityReport dissipativity_scan(const GeneratorMatrices& gm, const WeightedMetric& m,
                                              int samples, std::uint64_t seed, double delta = 0.25,
                                              double c_star = 1.0) {
  if (samples < 1) throw ParameterError("dissipativity scan needs at least one sample");
  const Layout& L = gm.layout;
  const Grid& g = L.grid;
  const FlowOperators ops(g);
  const SpMat kb = beam::stiffness(g);
  DissipativityReport rep;
  rep.delta = delta;
  rep.c_star = c_star;
  rep.max_q_over_norm2 = -std::numeric_limits<double>::infinity();
  rep.samples.resize(samples);
  for (int k = 0; k < samples; ++k) {
    const Vec v = random_state(L, seed, static_cast<std::uint64_t>(k));
    const Vec gv = gm.G * v;
    const double q = gv.dot(m.gram_apply(v));
    const double n2 = m.inner(v, v);
    const Vec full = gm.P * v;
    const Vec u = full.segment(g.node_count(), 2 * g.node_count());
    const Vec h2 = ops.weights.replicate(2, 1);
    const double flow = u.dot(gm.viscous * u) + u.dot(h2.cwiseProduct(u));
    const Vec p = v.segment(L.off_p(), L.np);
    Vec w1 = Vec::Zero(g.beam_count());
    w1.segment(1, L.nw) = v.segment(L.off_w1(), L.nw);
    const double pp = m.xi * (p.dot(ops.weights.cwiseProduct(p)) + w1.dot(kb * w1));
    rep.samples[k] = {k, q / n2, flow, pp};
    rep.max_q_over_norm2 = std::max(rep.max_q_over_norm2, q / n2);
    if (m.r_u > 0.0 && flow > 0.0) {
      const double need = (q + 0.25 * flow + (0.5 - delta * c_star) * pp) / (m.r_u * flow);
      rep.c_delta = std::max(rep.c_delta, need);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Resolvent.

struct ResolventRecord {
  double b = 0.0;
  double a = 0.0;
  int sample_id = 0;
  double residual = 0.0;
  double norm_weighted = 0.0;
  double criterion_value = 0.0;
};

/// Factorization of (a + i b) I - G.
class ShiftedSolver {
 public:
  ShiftedSolver(const GeneratorMatrices& gm, cplx z) : gm_(&gm), z_(z) {
    const int n = gm.layout.size();
    op_ = -gm.G.cast<cplx>();
    CSpMat I(n, n);
    I.setIdentity();
    op_ += z * I;
    lu_.compute(op_);
    if (lu_.info() != Eigen::Success) throw SolveFailed("shifted factorization failed");
  }

  Eigen::VectorXcd solve(const Eigen::VectorXcd& f, double* residual = nullptr) const {
    Eigen::VectorXcd x = lu_.solve(f);
    const double fn = f.norm();
    const double r = fn > 0.0 ? (op_ * x - f).norm() / fn : (op_ * x).norm();
    if (residual) *residual = r;
    return x;
  }

  cplx shift() const { return z_; }

 private:
  const GeneratorMatrices* gm_;
  cplx z_;
  CSpMat op_;
  Eigen::SparseLU<CSpMat> lu_;
};

inline ResolventRecord make_record(const WeightedMetric& m, double a, double b, int id, double residual,
                                   const Eigen::VectorXcd& x) {
  ResolventRecord r;
  r.a = a;
  r.b = b;
  r.sample_id = id;
  r.residual = residual;
  r.norm_weighted = m.norm(x);
  r.criterion_value = std::sqrt(a) * r.norm_weighted;
  return r;
}

inline std::pair<Eigen::VectorXcd, ResolventRecord> resolvent_solve(const GeneratorMatrices& gm,
                                                                   const WeightedMetric& m, double a,
                                                                   double b, const Eigen::VectorXcd& f,
                                                                   double tol = 1e-8) {
  if (!(a > 0.0)) throw ParameterError("resolvent shift a must be positive");
  gm.layout.require_size_any(f.size());
  const ShiftedSolver s(gm, cplx(a, b));
  double res = 0.0;
  Eigen::VectorXcd x = s.solve(f, &res);
  if (!(res <= tol)) throw SolveFailed("resolvent residual " + std::to_string(res) + " above tolerance");
  return {x, make_record(m, a, b, 0, res, x)};
}

struct SweepResult {
  std::vector<ResolventRecord> records;  // ordered by b, then a, then sample
  int failed_cells = 0;
};

inline SweepResult resolvent_sweep(const GeneratorMatrices& gm, const WeightedMetric& m,
                                   const std::vector<double>& b_list, const std::vector<double>& a_list,
                                   const std::vector<Vec>& samples, int threads = 0) {
  for (std::size_t k = 0; k < a_list.size(); ++k) {
    if (!(a_list[k] > 0.0)) throw ParameterError("a_list entries must be positive");
    if (k > 0 && !(a_list[k] < a_list[k - 1])) throw ParameterError("a_list must be strictly decreasing");
  }
  const int nb = static_cast<int>(b_list.size()), na = static_cast<int>(a_list.size());
  const int ns = static_cast<int>(samples.size());
  SweepResult out;
  out.records.resize(static_cast<std::size_t>(nb) * na * ns);
  std::vector<int> failed(static_cast<std::size_t>(nb) * na, 0);
  parallel_for(nb * na, threads > 0 ? threads : sweep_threads(), [&](int cell) {
    const int ib = cell / na, ia = cell % na;
    const double a = a_list[ia], b = b_list[ib];
    auto at = [&](int s) -> ResolventRecord& {
      return out.records[(static_cast<std::size_t>(ib) * na + ia) * ns + s];
    };
    try {
      const ShiftedSolver solver(gm, cplx(a, b));
      for (int s = 0; s < ns; ++s) {
        double res = 0.0;
        const Eigen::VectorXcd x = solver.solve(samples[s].cast<cplx>(), &res);
        at(s) = make_record(m, a, b, s, res, x);
      }
    } catch (const SolveFailed&) {
      failed[cell] = 1;
      for (int s = 0; s < ns; ++s) {
        at(s) = ResolventRecord{b, a, s, std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN()};
      }
    }
  });
  for (int f : failed) out.failed_cells += f;
  return out;
}

/// max ||w2||_Omega / sqrt|Re((f, x))| over resolvent solutions x of data f,
/// together with the largest mismatch of the interface velocity condition.
struct TraceBound {
  double constant = 0.0;
  double interface_residual = 0.0;
};

inline TraceBound w2_trace_bound(const GeneratorMatrices& gm, const WeightedMetric& m,
                                 const std::vector<Eigen::VectorXcd>& data,
                                 const std::vector<Eigen::VectorXcd>& solutions) {
  const Layout& L = gm.layout;
  const Grid& g = L.grid;
  TraceBound tb;
  const SpMat d1 = beam::first_derivative(g);
  for (std::size_t k = 0; k < data.size(); ++k) {
    const CState s = L.unpack(solutions[k]);
    const double w2n = std::sqrt(std::max(0.0, [&] {
      double acc = 0.0;
      for (int i = 0; i < g.beam_count(); ++i) acc += g.weight_x(i) * std::norm(s.w2[i]);
      return acc;
    }()));
    const double pair = std::abs(m.inner(solutions[k], data[k]).real());
    if (pair > 0.0) tb.constant = std::max(tb.constant, w2n / std::sqrt(pair));
    const Eigen::VectorXcd slope = d1.cast<cplx>() * s.w1;
    for (int i = 1; i <= g.nx; ++i) {
      const cplx trace = s.u2[g.index(i, g.top())];
      const cplx expect = trace - L.interface_u1[i] * slope[i];
      const double scale = std::max(1.0, std::abs(trace));
      tb.interface_residual = std::max(tb.interface_residual, std::abs(s.w2[i] - expect) / scale);
    }
  }
  return tb;
}

// ---------------------------------------------------------------------------
// Time stepping.

struct EnergyTrace {
  std::vector<double> t;
  std::vector<double> E_weighted;
  std::vector<double> E_standard;
  std::vector<double> mean_drift;
};

inline std::pair<EnergyTrace, Vec> evolve(const GeneratorMatrices& gm, const WeightedMetric& m, const Vec& x0,
                                          double dt, double T) {
  if (!(dt > 0.0)) throw ParameterError("time step must be positive");
  if (!(T >= 0.0)) throw ParameterError("time horizon must be nonnegative");
  gm.layout.require_size_any(x0.size());
  const int steps = static_cast<int>(std::llround(T / dt));
  EnergyTrace tr;
  Vec x = x0;
  auto record = [&](double t) {
    tr.t.push_back(t);
    tr.E_weighted.push_back(m.inner(x, x));
    tr.E_standard.push_back(x.dot(m.standard() * x));
    tr.mean_drift.push_back(std::abs(gm.mass.dot(x)));
  };
  record(0.0);
  if (steps == 0) return {tr, x};
  const int n = gm.layout.size();
  SpMat op = -gm.G;
  SpMat I(n, n);
  I.setIdentity();
  op += (1.0 / dt) * I;
  Eigen::SparseLU<SpMat> lu;
  lu.compute(op);
  if (lu.info() != Eigen::Success) throw SolveFailed("time-step factorization failed");
  for (int k = 1; k <= steps; ++k) {
    x = lu.solve(Vec(x / dt));
    record(k * dt);
  }
  return {tr, x};
}

// ---------------------------------------------------------------------------
// Spectrum.

struct Eigenpair {
  cplx value;
  double residual = 0.0;
  bool converged = false;
  Eigen::VectorXcd vector;
};

/// Eigenvalues of G nearest a real shift sigma by shift-invert Arnoldi, sorted
/// by decreasing real part. A start vector in the mean-zero subspace keeps
/// the iteration there.
inline std::vector<Eigenpair> spectrum_leading(const GeneratorMatrices& gm, int k, double sigma = 0.05,
                                               bool restrict_H0 = true, std::uint64_t seed = 5,
                                               double tol = 1e-6) {
  if (k < 1) throw ParameterError("spectrum count must be at least 1");
  const Layout& L = gm.layout;
  const int n = L.size();
  const int m = std::min(n - 1, std::max(4 * k, 40));
  SpMat op = gm.G;
  SpMat I(n, n);
  I.setIdentity();
  op -= sigma * I;
  Eigen::SparseLU<SpMat> lu;
  lu.compute(op);
  if (lu.info() != Eigen::Success) throw SolveFailed("shift-invert factorization failed");

  auto rng = sample_rng(seed, 0);
  Vec v0(n);
  for (int i = 0; i < n; ++i) v0[i] = unit_draw(rng);
  if (restrict_H0) v0 = project_H0(L, v0);
  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  V.col(0) = v0.normalized();
  int used = m;
  for (int j = 0; j < m; ++j) {
    Vec w = lu.solve(Vec(V.col(j)));
    // The mean-zero subspace is invariant; re-projecting keeps rounding from
    // growing a kernel component near the shift.
    if (restrict_H0) w = project_H0(L, w);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        const double h = V.col(i).dot(w);
        H(i, j) += h;
        w -= h * V.col(i);
      }
    H(j + 1, j) = w.norm();
    if (H(j + 1, j) < 1e-14) {
      used = j + 1;
      break;
    }
    V.col(j + 1) = w / H(j + 1, j);
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H.topLeftCorner(used, used).cast<cplx>());
  std::vector<Eigenpair> pairs;
  for (int i = 0; i < used; ++i) {
    const cplx theta = es.eigenvalues()[i];
    if (std::abs(theta) < 1e-300) continue;
    Eigenpair e;
    e.value = sigma + 1.0 / theta;
    e.vector = V.leftCols(used).cast<cplx>() * es.eigenvectors().col(i);
    e.vector.normalize();
    e.residual = (gm.G.cast<cplx>() * e.vector - e.value * e.vector).norm();
    e.converged = e.residual <= tol * std::max(1.0, std::abs(e.value));
    pairs.push_back(std::move(e));
  }
  // keep the converged pairs nearest the shift
  std::stable_sort(pairs.begin(), pairs.end(), [&](const Eigenpair& a, const Eigenpair& b) {
    return std::abs(a.value - sigma) < std::abs(b.value - sigma);
  });
  if (static_cast<int>(pairs.size()) > k) pairs.resize(k);
  std::stable_sort(pairs.begin(), pairs.end(), [](const Eigenpair& a, const Eigenpair& b) {
    if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
    return a.value.imag() > b.value.imag();
  });
  return pairs;
}

}  // namespace fsilab
