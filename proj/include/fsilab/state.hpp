#pragma once

// Flow-structure state (p, u, w1, w2) and its reduced coordinate vector.
//
// The reduced vector keeps the unknowns that evolve freely:
//   p        at every flow node,
//   u1       at nodes with 0 < i < nx+1 (u1 = 0 on the vertical walls),
//   u2       at nodes with 0 < j < ny+1 (u2 = 0 on the bottom wall; on the
//            interface it is slaved to the beam),
//   w1, w2   at the interior beam nodes (clamped ends are zero).
// On the interface, u2 = w2 + U1 dw1/dx1 is recovered when unpacking.

#include <complex>
#include <vector>

#include "fsilab/ambient.hpp"
#include "fsilab/grid.hpp"
#include "fsilab/operators.hpp"

namespace fsilab {

template <class T>
struct State {
  using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  VecT p, u1, u2, w1, w2;

  static State zeros(const Grid& g) {
    State s;
    s.p = VecT::Zero(g.node_count());
    s.u1 = VecT::Zero(g.node_count());
    s.u2 = VecT::Zero(g.node_count());
    s.w1 = VecT::Zero(g.beam_count());
    s.w2 = VecT::Zero(g.beam_count());
    return s;
  }

  void check(const Grid& g) const {
    require_size_t(p, g.node_count(), "state pressure");
    require_size_t(u1, g.node_count(), "state velocity");
    require_size_t(u2, g.node_count(), "state velocity");
    require_size_t(w1, g.beam_count(), "state displacement");
    require_size_t(w2, g.beam_count(), "state beam velocity");
  }

 private:
  static void require_size_t(const VecT& v, int n, const char* what) {
    if (v.size() != n)
      throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(n) +
                              " values, got " + std::to_string(v.size()));
  }
};

using RState = State<double>;
using CState = State<std::complex<double>>;

/// Index bookkeeping for the reduced vector.
struct Layout {
  Grid grid;
  std::vector<int> u1_nodes;  // flow-node index of each free u1 unknown
  std::vector<int> u2_nodes;
  int np = 0, nu1 = 0, nu2 = 0, nw = 0;
  Vec interface_u1;  // U1 on the beam nodes
  SpMat d1;          // beam first difference

  Layout() = default;
  Layout(const Grid& g, const AmbientField& a) : grid(g) {
    for (int j = 0; j < g.nodes_y(); ++j)
      for (int i = 0; i < g.nodes_x(); ++i) {
        if (i != 0 && i != g.nx + 1) u1_nodes.push_back(g.index(i, j));
        if (j != 0 && j != g.ny + 1) u2_nodes.push_back(g.index(i, j));
      }
    np = g.node_count();
    nu1 = static_cast<int>(u1_nodes.size());
    nu2 = static_cast<int>(u2_nodes.size());
    nw = g.nx;
    interface_u1 = a.interface_u1().values;
    d1 = beam::first_derivative(g);
  }

  int off_p() const { return 0; }
  int off_u1() const { return np; }
  int off_u2() const { return np + nu1; }
  int off_w1() const { return np + nu1 + nu2; }
  int off_w2() const { return np + nu1 + nu2 + nw; }
  int size() const { return np + nu1 + nu2 + 2 * nw; }

  template <class T>
  Eigen::Matrix<T, Eigen::Dynamic, 1> pack(const State<T>& s) const {
    s.check(grid);
    Eigen::Matrix<T, Eigen::Dynamic, 1> v(size());
    v.segment(off_p(), np) = s.p;
    for (int k = 0; k < nu1; ++k) v[off_u1() + k] = s.u1[u1_nodes[k]];
    for (int k = 0; k < nu2; ++k) v[off_u2() + k] = s.u2[u2_nodes[k]];
    v.segment(off_w1(), nw) = s.w1.segment(1, nw);
    v.segment(off_w2(), nw) = s.w2.segment(1, nw);
    return v;
  }

  template <class Derived>
  State<typename Derived::Scalar> unpack(const Eigen::MatrixBase<Derived>& v) const {
    using T = typename Derived::Scalar;
    require_size_any(v.size());
    State<T> s = State<T>::zeros(grid);
    s.p = v.segment(off_p(), np);
    for (int k = 0; k < nu1; ++k) s.u1[u1_nodes[k]] = v[off_u1() + k];
    for (int k = 0; k < nu2; ++k) s.u2[u2_nodes[k]] = v[off_u2() + k];
    s.w1.segment(1, nw) = v.segment(off_w1(), nw);
    s.w2.segment(1, nw) = v.segment(off_w2(), nw);
    const Eigen::Matrix<T, Eigen::Dynamic, 1> slope = d1.cast<T>() * s.w1;
    for (int i = 1; i <= grid.nx; ++i)
      s.u2[grid.index(i, grid.top())] = s.w2[i] + interface_u1[i] * slope[i];
    return s;
  }

  /// Weights m with mean_functional(v) = m . v.
  Vec mean_weights() const {
    Vec m = Vec::Zero(size());
    for (int j = 0; j < grid.nodes_y(); ++j)
      for (int i = 0; i < grid.nodes_x(); ++i) m[off_p() + grid.index(i, j)] = grid.weight(i, j);
    for (int i = 1; i <= grid.nx; ++i) m[off_w1() + i - 1] = grid.weight_x(i);
    return m;
  }

  void require_size_any(Eigen::Index n) const {
    if (n != size())
      throw DimensionMismatch("reduced state: expected " + std::to_string(size()) +
                              " values, got " + std::to_string(n));
  }
};

template <class T>
T mean_functional(const Grid& g, const State<T>& s) {
  s.check(g);
  T total(0);
  for (int j = 0; j < g.nodes_y(); ++j)
    for (int i = 0; i < g.nodes_x(); ++i) total += g.weight(i, j) * s.p[g.index(i, j)];
  for (int i = 0; i < g.beam_count(); ++i) total += g.weight_x(i) * s.w1[i];
  return total;
}

template <class T>
State<T> project_H0(const Grid& g, const State<T>& s) {
  State<T> r = s;
  const T shift = mean_functional(g, s) / g.area();
  r.p.array() -= shift;
  return r;
}

/// Same projection on a reduced vector.
template <class VecT>
VecT project_H0(const Layout& l, const VecT& v) {
  l.require_size_any(v.size());
  const Vec m = l.mean_weights();
  VecT r = v;
  const auto shift = m.cast<typename VecT::Scalar>().dot(v) / l.grid.area();
  r.segment(l.off_p(), l.np).array() -= shift;
  return r;
}

/// Block-diagonal standard Gram: H on p and free u, D2^T Hb D2 on w1, Hx on w2.
inline SpMat standard_gram(const Layout& l) {
  const Grid& g = l.grid;
  Triplets t;
  for (int k = 0; k < l.np; ++k) {
    const int i = k % g.nodes_x(), j = k / g.nodes_x();
    t.emplace_back(l.off_p() + k, l.off_p() + k, g.weight(i, j));
  }
  for (int k = 0; k < l.nu1; ++k) {
    const int n = l.u1_nodes[k];
    t.emplace_back(l.off_u1() + k, l.off_u1() + k, g.weight(n % g.nodes_x(), n / g.nodes_x()));
  }
  for (int k = 0; k < l.nu2; ++k) {
    const int n = l.u2_nodes[k];
    t.emplace_back(l.off_u2() + k, l.off_u2() + k, g.weight(n % g.nodes_x(), n / g.nodes_x()));
  }
  const SpMat kb = beam::stiffness(g);
  for (int a = 0; a < kb.outerSize(); ++a)
    for (SpMat::InnerIterator it(kb, a); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (r >= 1 && r <= g.nx && c >= 1 && c <= g.nx)
        t.emplace_back(l.off_w1() + r - 1, l.off_w1() + c - 1, it.value());
    }
  for (int i = 1; i <= g.nx; ++i) t.emplace_back(l.off_w2() + i - 1, l.off_w2() + i - 1, g.weight_x(i));
  SpMat s(l.size(), l.size());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

template <class T>
T standard_inner(const Layout& l, const State<T>& a, const State<T>& b) {
  const auto va = l.pack(a);
  const auto vb = l.pack(b);
  const SpMat s = standard_gram(l);
  return vb.dot(s.cast<T>() * va);
}

}  // namespace fsilab
