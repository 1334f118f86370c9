#pragma once

// Commutator [Lap, h . grad] w by direct composition of difference operators,
// against its closed-form expansion.

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "fsilab/grid.hpp"

namespace fsilab {

/// Finite-difference weights for derivative orders 0..m at x0 (Fornberg).
template <class T = double>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> fornberg_weights(T x0, const std::vector<T>& x, int m) {
  const int n = static_cast<int>(x.size());
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> c =
      Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, m + 1);
  T c1 = 1.0, c4 = x[0] - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    T c2 = 1.0;
    const T c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const T c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Dense derivative matrix of the given order on n uniform points, using
/// width-point stencils shifted inward at the ends.
template <class T = double>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> stencil_matrix(int n, T h, int order, int width = 9) {
  using M = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  width = std::min(width, n);
  M d = M::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int start = std::clamp(i - width / 2, 0, n - width);
    std::vector<T> xs(width);
    for (int k = 0; k < width; ++k) xs[k] = T(start + k - i) * h;
    const M w = fornberg_weights<T>(T(0), xs, order);
    for (int k = 0; k < width; ++k) d(i, start + k) = w(k, order);
  }
  return d;
}

// Compositions run in extended precision; one-sided stencils near the ends
// amplify rounding by several orders of magnitude.
using Ext = long double;
using XMat = Eigen::Matrix<Ext, Eigen::Dynamic, Eigen::Dynamic>;
using XVec = Eigen::Matrix<Ext, Eigen::Dynamic, 1>;

struct CommutatorResult {
  Eigen::MatrixXd lhs;
  Eigen::MatrixXd rhs;
  Eigen::MatrixXd written_rhs;  // cross term 2 div(h) d12 w (2-D only)
  double discrepancy = 0.0;
  double written_discrepancy = 0.0;
};

/// 1-D: [d2, h d] w against h'' w' + 2 h' w''. Inputs are nodal values.
inline CommutatorResult commutator_check(const Vec& w, const Vec& h, double dx) {
  if (w.size() != h.size()) throw DimensionMismatch("commutator_check: field sizes differ");
  const int n = static_cast<int>(w.size());
  const XMat D1 = stencil_matrix<Ext>(n, dx, 1);
  const XMat D2 = stencil_matrix<Ext>(n, dx, 2);
  const XVec we = w.cast<Ext>(), he = h.cast<Ext>();
  const XVec w1 = D1 * we, w2 = D2 * we;
  const XVec lhs = D2 * XVec(he.cwiseProduct(w1)) - he.cwiseProduct(D1 * w2);
  const XVec rhs = (D2 * he).cwiseProduct(w1) + Ext(2) * (D1 * he).cwiseProduct(w2);
  CommutatorResult r;
  r.lhs = lhs.cast<double>();
  r.rhs = rhs.cast<double>();
  r.written_rhs = r.rhs;
  r.discrepancy = static_cast<double>((lhs - rhs).lpNorm<Eigen::Infinity>());
  r.written_discrepancy = r.discrepancy;
  return r;
}

/// 2-D: [Lap, h . grad] w on a rectangle. Matrices are indexed (i along x1,
/// j along x2).
inline CommutatorResult commutator_check(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h1,
                                         const Eigen::MatrixXd& h2, double dx, double dy) {
  if (w.rows() != h1.rows() || w.cols() != h1.cols() || w.rows() != h2.rows() ||
      w.cols() != h2.cols())
    throw DimensionMismatch("commutator_check: field sizes differ");
  const int nx = static_cast<int>(w.rows()), ny = static_cast<int>(w.cols());
  const XMat X1 = stencil_matrix<Ext>(nx, dx, 1), X2 = stencil_matrix<Ext>(nx, dx, 2);
  const XMat Y1 = stencil_matrix<Ext>(ny, dy, 1), Y2 = stencil_matrix<Ext>(ny, dy, 2);
  auto d1 = [&](const XMat& f) { return XMat(X1 * f); };
  auto d2 = [&](const XMat& f) { return XMat(f * Y1.transpose()); };
  auto d11 = [&](const XMat& f) { return XMat(X2 * f); };
  auto d22 = [&](const XMat& f) { return XMat(f * Y2.transpose()); };
  auto lap = [&](const XMat& f) { return XMat(d11(f) + d22(f)); };
  const XMat we = w.cast<Ext>(), g1 = h1.cast<Ext>(), g2 = h2.cast<Ext>();

  const XMat w1 = d1(we), w2 = d2(we);
  const XMat transport = g1.cwiseProduct(w1) + g2.cwiseProduct(w2);
  const XMat lw = lap(we);
  const XMat lhs = lap(transport) - (g1.cwiseProduct(d1(lw)) + g2.cwiseProduct(d2(lw)));

  const XMat w11 = d11(we), w22 = d22(we), w12 = d1(w2);
  const XMat base = lap(g1).cwiseProduct(w1) + lap(g2).cwiseProduct(w2) +
                    Ext(2) * d1(g1).cwiseProduct(w11) + Ext(2) * d2(g2).cwiseProduct(w22);
  const XMat rhs = base + Ext(2) * (d1(g2) + d2(g1)).cwiseProduct(w12);
  const XMat written = base + Ext(2) * (d1(g1) + d2(g2)).cwiseProduct(w12);

  CommutatorResult r;
  r.lhs = lhs.cast<double>();
  r.rhs = rhs.cast<double>();
  r.written_rhs = written.cast<double>();
  r.discrepancy = static_cast<double>((lhs - rhs).lpNorm<Eigen::Infinity>());
  r.written_discrepancy = static_cast<double>((lhs - written).lpNorm<Eigen::Infinity>());
  return r;
}

}  // namespace fsilab
