#pragma once

// Discrete flow-structure generator on the reduced state vector.
//
// Rows, per unknown:
//   p   : -div(U p) - div u + tau h^2 Lap_h p
//   u   : -H^{-1} K_visc u - eta u - grad p - (U . grad) u - (u . grad) U
//   w1  : w2 + U1 dw1/dx1
//   w2  : -D4 w1 - traction(u) + interface pressure
// K_visc is the variational viscous form, so the interface traction is the
// boundary row of K_visc and energy identities hold exactly at U = 0.
// The last pressure term damps the checkerboard mode that the collocated
// centered gradient cannot see; it is negative semidefinite and mass neutral.
// Assembly goes through the full node space and a prolongation P that
// fills in the slaved interface velocity.

#include <Eigen/SparseLU>
#include <complex>
#include <functional>
#include <memory>
#include <random>

#include "fsilab/metric.hpp"

namespace fsilab {

struct Params {
  double nu = 1.0;
  double lambda = 0.5;
  double eta = 1.0;
  double tau = 1.0;  // pressure stabilization weight
};

inline void validate(const Params& p) {
  require_lame(p.nu, p.lambda);
  if (!(p.eta > 0.0)) throw ParameterError("drag coefficient eta must be positive");
  if (!(p.tau >= 0.0)) throw ParameterError("pressure stabilization tau must be nonnegative");
}

struct GeneratorMatrices {
  Layout layout;
  Params params;
  SpMat G;    // full generator
  SpMat A;    // G - B
  SpMat B;    // pressure dilatation and interface transport
  SpMat LU;   // u . grad U
  SpMat P;    // reduced -> full node space
  SpMat viscous;  // K_visc on [u1; u2]
  Vec mass;   // mean-functional weights
};

namespace detail {

inline SpMat diag(const Vec& d) {
  SpMat m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (int k = 0; k < d.size(); ++k) m.insert(k, k) = d[k];
  m.makeCompressed();
  return m;
}

inline void add_block(Triplets& t, const SpMat& m, int r0, int c0, double s = 1.0) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      if (it.value() != 0.0) t.emplace_back(r0 + it.row(), c0 + it.col(), s * it.value());
}

/// Variational viscous form on [u1; u2] over all flow nodes.
inline SpMat viscous_form(const FlowOperators& ops, double nu, double lambda) {
  const int n = static_cast<int>(ops.Dx.rows());
  const SpMat H = diag(ops.weights);
  SpMat zero(n, n);
  auto hcat = [&](const SpMat& a, const SpMat& b) {
    Triplets t;
    add_block(t, a, 0, 0);
    add_block(t, b, 0, n);
    SpMat m(n, 2 * n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  };
  const SpMat E1 = hcat(ops.Dx, zero);
  const SpMat E2 = hcat(zero, ops.Dy);
  const SpMat C = hcat(ops.Dy, ops.Dx);
  const SpMat V = hcat(ops.Dx, ops.Dy);
  SpMat k = SpMat(E1.transpose() * H * E1) * (2.0 * nu);
  k += SpMat(E2.transpose() * H * E2) * (2.0 * nu);
  k += SpMat(C.transpose() * H * C) * nu;
  k += SpMat(V.transpose() * H * V) * lambda;
  return k;
}

}  // namespace detail

/// Full node-space offsets: [p | u1 | u2 | w1 | w2].
struct FullIndex {
  int np, nb;
  int p(int k) const { return k; }
  int u1(int k) const { return np + k; }
  int u2(int k) const { return 2 * np + k; }
  int w1(int i) const { return 3 * np + i; }
  int w2(int i) const { return 3 * np + nb + i; }
  int size() const { return 3 * np + 2 * nb; }
};

namespace detail {

/// Selects the rows of free unknowns: full node space -> reduced.
inline SpMat restriction(const Layout& L, const FullIndex& F) {
  const Grid& g = L.grid;
  Triplets t;
  for (int k = 0; k < L.np; ++k) t.emplace_back(L.off_p() + k, F.p(k), 1.0);
  for (int k = 0; k < L.nu1; ++k) t.emplace_back(L.off_u1() + k, F.u1(L.u1_nodes[k]), 1.0);
  for (int k = 0; k < L.nu2; ++k) t.emplace_back(L.off_u2() + k, F.u2(L.u2_nodes[k]), 1.0);
  for (int i = 1; i <= g.nx; ++i) {
    t.emplace_back(L.off_w1() + i - 1, F.w1(i), 1.0);
    t.emplace_back(L.off_w2() + i - 1, F.w2(i), 1.0);
  }
  SpMat r(L.size(), F.size());
  r.setFromTriplets(t.begin(), t.end());
  return r;
}

/// Reduced -> full, with u2 = w2 + U1 D1 w1 on the interface row.
inline SpMat prolongation(const Layout& L, const FullIndex& F, const SpMat& d1, const Vec& u1_top) {
  const Grid& g = L.grid;
  Triplets t;
  for (int k = 0; k < L.np; ++k) t.emplace_back(F.p(k), L.off_p() + k, 1.0);
  for (int k = 0; k < L.nu1; ++k) t.emplace_back(F.u1(L.u1_nodes[k]), L.off_u1() + k, 1.0);
  for (int k = 0; k < L.nu2; ++k) t.emplace_back(F.u2(L.u2_nodes[k]), L.off_u2() + k, 1.0);
  for (int i = 1; i <= g.nx; ++i) {
    t.emplace_back(F.w1(i), L.off_w1() + i - 1, 1.0);
    t.emplace_back(F.w2(i), L.off_w2() + i - 1, 1.0);
    t.emplace_back(F.u2(g.index(i, g.top())), L.off_w2() + i - 1, 1.0);
  }
  const SpMat slope = SpMat(diag(u1_top) * d1);
  for (int k = 0; k < slope.outerSize(); ++k)
    for (SpMat::InnerIterator it(slope, k); it; ++it) {
      const int i = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (i >= 1 && i <= g.nx && c >= 1 && c <= g.nx && it.value() != 0.0)
        t.emplace_back(F.u2(g.index(i, g.top())), L.off_w1() + c - 1, it.value());
    }
  SpMat p(F.size(), L.size());
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

}  // namespace detail

inline GeneratorMatrices assemble_generator(const Params& params, const AmbientField& amb,
                                            const WeightedMetric& metric) {
  validate(params);
  const Grid& g = metric.grid();
  if (!(amb.grid == g)) throw DimensionMismatch("ambient field and metric grids differ");
  const Layout& L = metric.layout();
  const FlowOperators ops(g);
  const int np = g.node_count();
  const FullIndex F{np, g.beam_count()};

  GeneratorMatrices out;
  out.layout = L;
  out.params = params;
  out.mass = L.mean_weights();

  const SpMat d1 = beam::first_derivative(g);
  const Vec u1_top = amb.interface_u1().values;
  out.P = detail::prolongation(L, F, d1, u1_top);
  const SpMat R = detail::restriction(L, F);

  Vec U1(np), U2(np), d11(np), d12(np), d21(np), d22(np), divU(np);
  for (int j = 0; j < g.nodes_y(); ++j)
    for (int i = 0; i < g.nodes_x(); ++i) {
      const AmbientPoint a = amb.at(g.x(i), g.y(j));
      const int k = g.index(i, j);
      U1[k] = a.u1;
      U2[k] = a.u2;
      d11[k] = a.d11;
      d12[k] = a.d12;
      d21[k] = a.d21;
      d22[k] = a.d22;
      divU[k] = a.div();
    }

  out.viscous = detail::viscous_form(ops, params.nu, params.lambda);
  const SpMat& K = out.viscous;
  const Vec hinv = ops.weights.cwiseInverse();
  const SpMat conv = SpMat(detail::diag(U1) * ops.Dx) + SpMat(detail::diag(U2) * ops.Dy);

  Triplets tf, tb, tl;
  using detail::add_block;

  // pressure: -div(U p) - div u
  add_block(tf, SpMat(ops.Dx * detail::diag(U1)), F.p(0), F.p(0), -1.0);
  add_block(tf, SpMat(ops.Dy * detail::diag(U2)), F.p(0), F.p(0), -1.0);
  add_block(tf, ops.Dx, F.p(0), F.u1(0), -1.0);
  add_block(tf, ops.Dy, F.p(0), F.u2(0), -1.0);
  for (int k = 0; k < np; ++k)
    if (divU[k] != 0.0) tb.emplace_back(F.p(k), F.p(k), -divU[k]);
  if (params.tau > 0.0) {
    const SpMat stab = SpMat(detail::diag(hinv) * detail::neumann_stiffness(g));
    add_block(tf, stab, F.p(0), F.p(0), -params.tau * g.hx * g.hy);
  }

  // velocity
  const SpMat HinvK = SpMat(detail::diag(Vec(hinv.replicate(2, 1))) * K);
  add_block(tf, HinvK, F.u1(0), F.u1(0), -1.0);
  for (int k = 0; k < np; ++k) {
    tf.emplace_back(F.u1(k), F.u1(k), -params.eta);
    tf.emplace_back(F.u2(k), F.u2(k), -params.eta);
  }
  add_block(tf, ops.Dx, F.u1(0), F.p(0), -1.0);
  add_block(tf, ops.Dy, F.u2(0), F.p(0), -1.0);
  add_block(tf, conv, F.u1(0), F.u1(0), -1.0);
  add_block(tf, conv, F.u2(0), F.u2(0), -1.0);
  for (int k = 0; k < np; ++k) {
    auto lu = [&](int r, int c, double v) {
      if (v == 0.0) return;
      tf.emplace_back(r, c, -v);
      tl.emplace_back(r, c, -v);
    };
    lu(F.u1(k), F.u1(k), d11[k]);
    lu(F.u1(k), F.u2(k), d12[k]);
    lu(F.u2(k), F.u1(k), d21[k]);
    lu(F.u2(k), F.u2(k), d22[k]);
  }

  // displacement: w2 + U1 dw1/dx1
  for (int i = 1; i <= g.nx; ++i) tf.emplace_back(F.w1(i), F.w2(i), 1.0);
  const SpMat transport = SpMat(detail::diag(u1_top) * d1);
  for (int k = 0; k < transport.outerSize(); ++k)
    for (SpMat::InnerIterator it(transport, k); it; ++it) {
      if (it.value() == 0.0) continue;
      const int r = F.w1(static_cast<int>(it.row())), c = F.w1(static_cast<int>(it.col()));
      tb.emplace_back(r, c, it.value());
    }

  // beam velocity: -D4 w1 - traction + interface pressure
  add_block(tf, beam::fourth_derivative(g), F.w2(0), F.w1(0), -1.0);
  const SpMat Kt = SpMat(K.transpose());
  for (int i = 1; i <= g.nx; ++i) {
    const int node = g.index(i, g.top());
    const double hx = g.weight_x(i);
    for (SpMat::InnerIterator it(Kt, np + node); it; ++it) {
      const int c = static_cast<int>(it.row());
      tf.emplace_back(F.w2(i), c < np ? F.u1(c) : F.u2(c - np), -it.value() / hx);
    }
    tf.emplace_back(F.w2(i), F.p(node), 0.5);
    tf.emplace_back(F.w2(i), F.p(g.index(i, g.top() - 1)), 0.5);
  }

  // The conservative pressure row already contains -div(U) p; only the
  // interface transport of B is added separately.
  for (const auto& e : tb)
    if (e.row() >= F.w1(0)) tf.push_back(e);

  auto reduce = [&](const Triplets& t) {
    SpMat full(F.size(), F.size());
    full.setFromTriplets(t.begin(), t.end());
    SpMat m = SpMat(R * full * out.P);
    m.prune(0.0);
    return m;
  };
  out.G = reduce(tf);
  out.B = reduce(tb);
  out.LU = reduce(tl);
  out.A = SpMat(out.G - out.B);
  return out;
}

inline Vec apply_generator(const GeneratorMatrices& gm, const Vec& v) {
  gm.layout.require_size_any(v.size());
  return gm.G * v;
}

inline RState apply_generator(const GeneratorMatrices& gm, const RState& s) {
  return gm.layout.unpack(Vec(gm.G * gm.layout.pack(s)));
}

/// Linear map with its Euclidean transpose.
struct LinearOperator {
  std::function<Vec(const Vec&)> apply;
  std::function<Vec(const Vec&)> apply_transpose;
};

inline LinearOperator as_operator(const SpMat& m) {
  return {[m](const Vec& v) { return Vec(m * v); },
          [m](const Vec& v) { return Vec(m.transpose() * v); }};
}

/// Adjoint in the weighted inner product: Gram^{-1} A^T Gram.
inline LinearOperator numerical_adjoint(const LinearOperator& a, const WeightedMetric& m) {
  const WeightedMetric* mp = &m;
  return {[a, mp](const Vec& v) { return mp->gram_solve(a.apply_transpose(mp->gram_apply(v))); },
          [a, mp](const Vec& v) { return mp->gram_apply(a.apply(mp->gram_solve(v))); }};
}

inline LinearOperator numerical_adjoint(const GeneratorMatrices& gm, const WeightedMetric& m) {
  return numerical_adjoint(as_operator(gm.G), m);
}

struct KernelReport {
  Vec zeta;              // unit Euclidean norm
  double residual = 0;   // ||G zeta||
  double mean_ratio = 0; // |mean_functional(zeta)| / ||zeta||_standard
  bool found = false;
};

/// Null vector of G by shifted inverse iteration.
inline KernelReport kernel_vector(const GeneratorMatrices& gm, const WeightedMetric& m,
                                  double tol = 1e-8) {
  const int n = gm.layout.size();
  SpMat shifted = gm.G;
  SpMat I(n, n);
  I.setIdentity();
  shifted -= 1e-9 * I;
  Eigen::SparseLU<SpMat> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw SolveFailed("kernel factorization failed");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vec x(n);
  for (int k = 0; k < n; ++k) x[k] = uni(rng);
  x.normalize();
  for (int it = 0; it < 6; ++it) {
    x = lu.solve(x);
    x.normalize();
  }
  KernelReport r;
  r.zeta = x;
  r.residual = (gm.G * x).norm();
  r.found = r.residual <= tol;
  const double snorm = std::sqrt(x.dot(m.standard() * x));
  r.mean_ratio = std::abs(gm.mass.dot(x)) / snorm;
  return r;
}

/// Smallest singular value of G on the mean-zero subspace. G maps that
/// subspace into itself (m^T G = 0), so the restriction is square.
inline double sigma_min_H0(const GeneratorMatrices& gm, int iterations = 60) {
  const int n = gm.layout.size();
  const Vec& mv = gm.mass;
  auto bordered = [&](const SpMat& a) {
    Triplets t;
    detail::add_block(t, a, 0, 0);
    for (int k = 0; k < n; ++k) {
      if (mv[k] == 0.0) continue;
      t.emplace_back(k, n, mv[k]);
      t.emplace_back(n, k, mv[k]);
    }
    SpMat b(n + 1, n + 1);
    b.setFromTriplets(t.begin(), t.end());
    return b;
  };
  Eigen::SparseLU<SpMat> fwd, bwd;
  fwd.compute(bordered(gm.G));
  bwd.compute(bordered(SpMat(gm.G.transpose())));
  if (fwd.info() != Eigen::Success || bwd.info() != Eigen::Success)
    throw SolveFailed("bordered factorization failed");
  auto project = [&](Vec v) { return Vec(v - mv * (mv.dot(v) / mv.squaredNorm())); };
  auto solve = [&](Eigen::SparseLU<SpMat>& lu, const Vec& b) {
    Vec rhs = Vec::Zero(n + 1);
    rhs.head(n) = b;
    return Vec(Vec(lu.solve(rhs)).head(n));
  };
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vec x(n);
  for (int k = 0; k < n; ++k) x[k] = uni(rng);
  x = project(x);
  x.normalize();
  double mu = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Vec y = solve(fwd, x);
    const Vec z = solve(bwd, y);
    mu = z.norm();
    x = project(z) / mu;
  }
  return 1.0 / std::sqrt(mu);
}

}  // namespace fsilab
