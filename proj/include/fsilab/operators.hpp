#pragma once

// Discrete differential and trace operators on the flow grid and the beam.
//
// First derivatives use the second-order summation-by-parts pair: centered
// differences inside, one-sided first differences on boundary rows, with the
// trapezoid weights as the norm. H D + D^T H = diag(-1, 0, ..., 0, 1) holds
// exactly, which is what makes the discrete energy identities sign tests.

#include <Eigen/Sparse>
#include <vector>

#include "fsilab/grid.hpp"

namespace fsilab {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

namespace sbp {

/// 1-D first-derivative matrix on n equispaced nodes with spacing h.
inline SpMat first_derivative(int n, double h) {
  Triplets t;
  t.reserve(2 * n);
  t.emplace_back(0, 0, -1.0 / h);
  t.emplace_back(0, 1, 1.0 / h);
  for (int i = 1; i < n - 1; ++i) {
    t.emplace_back(i, i - 1, -0.5 / h);
    t.emplace_back(i, i + 1, 0.5 / h);
  }
  t.emplace_back(n - 1, n - 2, -1.0 / h);
  t.emplace_back(n - 1, n - 1, 1.0 / h);
  SpMat d(n, n);
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

inline SpMat identity(int n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

/// Kronecker product for the x-fastest node ordering.
inline SpMat kron(const SpMat& a, const SpMat& b) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(b, kb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
  SpMat k(a.rows() * b.rows(), a.cols() * b.cols());
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

}  // namespace sbp

/// Sparse derivative and weight matrices for one grid.
struct FlowOperators {
  Grid grid;
  SpMat Dx;  // d/dx1 on all nodes
  SpMat Dy;  // d/dx2 on all nodes
  Vec weights;  // trapezoid weights per node

  explicit FlowOperators(const Grid& g) : grid(g) {
    const SpMat dx1 = sbp::first_derivative(g.nodes_x(), g.hx);
    const SpMat dy1 = sbp::first_derivative(g.nodes_y(), g.hy);
    Dx = sbp::kron(sbp::identity(g.nodes_y()), dx1);
    Dy = sbp::kron(dy1, sbp::identity(g.nodes_x()));
    weights.resize(g.node_count());
    for (int j = 0; j < g.nodes_y(); ++j)
      for (int i = 0; i < g.nodes_x(); ++i) weights[g.index(i, j)] = g.weight(i, j);
  }
};

inline void require_field(const Grid& g, const ScalarField& f, const char* what) {
  require_size(f.values, g.node_count(), what);
}

inline VectorField gradient(const Grid& g, const ScalarField& p) {
  require_field(g, p, "gradient");
  const FlowOperators ops(g);
  return {ScalarField(ops.Dx * p.values), ScalarField(ops.Dy * p.values)};
}

inline ScalarField divergence(const Grid& g, const VectorField& u) {
  require_field(g, u.x1, "divergence");
  require_field(g, u.x2, "divergence");
  const FlowOperators ops(g);
  return ScalarField(ops.Dx * u.x1.values + ops.Dy * u.x2.values);
}

/// Symmetric 2x2 stress tensor per node.
struct StressField {
  ScalarField s11;
  ScalarField s12;
  ScalarField s22;
};

inline void require_lame(double nu, double lambda) {
  if (!(nu > 0.0)) throw ParameterError("viscosity nu must be positive");
  if (!(lambda >= 0.0)) throw ParameterError("Lame coefficient lambda must be nonnegative");
}

/// sigma(u) = 2 nu eps(u) + lambda tr(eps(u)) I.
inline StressField stress(const Grid& g, const VectorField& u, double nu, double lambda) {
  require_lame(nu, lambda);
  require_field(g, u.x1, "stress");
  require_field(g, u.x2, "stress");
  const FlowOperators ops(g);
  const Vec d11 = ops.Dx * u.x1.values;
  const Vec d22 = ops.Dy * u.x2.values;
  const Vec div = d11 + d22;
  StressField s;
  s.s11 = ScalarField(2.0 * nu * d11 + lambda * div);
  s.s22 = ScalarField(2.0 * nu * d22 + lambda * div);
  s.s12 = ScalarField(nu * (ops.Dy * u.x1.values + ops.Dx * u.x2.values));
  return s;
}

inline VectorField stress_divergence(const Grid& g, const VectorField& u, double nu,
                                     double lambda) {
  const StressField s = stress(g, u, nu, lambda);
  const FlowOperators ops(g);
  return {ScalarField(ops.Dx * s.s11.values + ops.Dy * s.s12.values),
          ScalarField(ops.Dx * s.s12.values + ops.Dy * s.s22.values)};
}

// ---------------------------------------------------------------------------
// Beam operators. Beam nodes are x_i = i hx, i = 0..nx+1; the clamped ends
// carry w = 0 and the ghost value w_{-1} = w_1 (zero slope).

namespace beam {

/// Centered first difference; zero at the clamped ends.
inline SpMat first_derivative(const Grid& g) {
  const int n = g.beam_count();
  Triplets t;
  for (int i = 1; i < n - 1; ++i) {
    t.emplace_back(i, i - 1, -0.5 / g.hx);
    t.emplace_back(i, i + 1, 0.5 / g.hx);
  }
  SpMat d(n, n);
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

/// Second difference at all beam nodes with the clamped ghost closure.
/// Columns of the end nodes are dropped: clamped fields vanish there.
inline SpMat second_derivative(const Grid& g) {
  const int n = g.beam_count();
  const double c = 1.0 / (g.hx * g.hx);
  Triplets t;
  t.emplace_back(0, 1, 2.0 * c);
  t.emplace_back(n - 1, n - 2, 2.0 * c);
  for (int i = 1; i < n - 1; ++i) {
    if (i - 1 > 0) t.emplace_back(i, i - 1, c);
    t.emplace_back(i, i, -2.0 * c);
    if (i + 1 < n - 1) t.emplace_back(i, i + 1, c);
  }
  SpMat d(n, n);
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

inline Vec weights(const Grid& g) {
  Vec w(g.beam_count());
  for (int i = 0; i < g.beam_count(); ++i) w[i] = g.weight_x(i);
  return w;
}

/// Plate stiffness D2^T Hb D2: the Gram block of (D2 w, D2 v)_beam.
inline SpMat stiffness(const Grid& g) {
  const SpMat d2 = second_derivative(g);
  const Vec w = weights(g);
  SpMat hd2 = w.asDiagonal() * d2;
  return SpMat(d2.transpose() * hd2);
}

/// Fourth difference Hb^{-1} D2^T Hb D2 at all beam nodes (ends set to zero).
/// In the interior this is the 5-point stencil with ghost w_{-1} = w_1.
inline SpMat fourth_derivative(const Grid& g) {
  const SpMat k = stiffness(g);
  const Vec w = weights(g);
  Vec inv = w.cwiseInverse();
  inv[0] = 0.0;
  inv[g.beam_count() - 1] = 0.0;
  return SpMat(inv.asDiagonal() * k);
}

}  // namespace beam

inline BeamField beam_fourth_derivative(const Grid& g, const BeamField& w) {
  require_size(w.values, g.beam_count(), "beam_fourth_derivative");
  if (!w.clamped(1e-12))
    throw ParameterError("beam field violates clamped end values");
  return BeamField(beam::fourth_derivative(g) * w.values);
}

/// Plain 5-point fourth difference at nodes 2..nx-1 (no closure); other
/// entries are zero.
inline BeamField fourth_difference_interior(const Grid& g, const BeamField& w) {
  require_size(w.values, g.beam_count(), "fourth_difference_interior");
  const int n = g.beam_count();
  const double c = 1.0 / std::pow(g.hx, 4);
  Vec out = Vec::Zero(n);
  const Vec& v = w.values;
  for (int i = 2; i < n - 2; ++i)
    out[i] = c * (v[i - 2] - 4.0 * v[i - 1] + 6.0 * v[i] - 4.0 * v[i + 1] + v[i + 2]);
  return BeamField(std::move(out));
}

// ---------------------------------------------------------------------------
// Interface traces.

inline BeamField trace_interface(const Grid& g, const ScalarField& f) {
  require_field(g, f, "trace_interface");
  Vec t(g.beam_count());
  for (int i = 0; i < g.beam_count(); ++i) t[i] = f.values[g.index(i, g.top())];
  return BeamField(std::move(t));
}

/// Normal (x2) derivative on the interface row, one-sided second order.
inline BeamField normal_derivative_trace(const Grid& g, const ScalarField& f) {
  require_field(g, f, "normal_derivative_trace");
  Vec t(g.beam_count());
  const int j = g.top();
  for (int i = 0; i < g.beam_count(); ++i)
    t[i] = (3.0 * f.values[g.index(i, j)] - 4.0 * f.values[g.index(i, j - 1)] +
            f.values[g.index(i, j - 2)]) /
           (2.0 * g.hy);
  return BeamField(std::move(t));
}

struct VectorTrace {
  BeamField x1;
  BeamField x2;
};

inline VectorTrace trace_interface(const Grid& g, const VectorField& u) {
  return {trace_interface(g, u.x1), trace_interface(g, u.x2)};
}

}  // namespace fsilab
