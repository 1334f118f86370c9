#pragma once

// Tensor-product grid of the flow rectangle [0,Lx] x [-Ly,0] and the beam
// segment on its top edge, plus the field containers used everywhere else.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>

#include "fsilab/errors.hpp"

namespace fsilab {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

enum class BoundaryTag { Interior, Omega, S };

struct Grid {
  int nx = 0;  // interior nodes along x1
  int ny = 0;  // interior nodes along x2
  double Lx = 1.0;
  double Ly = 1.0;
  double hx = 0.0;
  double hy = 0.0;

  int nodes_x() const { return nx + 2; }
  int nodes_y() const { return ny + 2; }
  int node_count() const { return nodes_x() * nodes_y(); }
  int beam_count() const { return nx + 2; }

  /// Flat index of node (i, j); i runs along x1, j from the bottom edge (j = 0)
  /// to the interface row (j = ny + 1).
  int index(int i, int j) const { return j * nodes_x() + i; }
  int top() const { return ny + 1; }

  double x(int i) const { return i * hx; }
  double y(int j) const { return -Ly + j * hy; }

  BoundaryTag tag(int i, int j) const {
    const bool edge_x = (i == 0 || i == nx + 1);
    const bool edge_y = (j == 0 || j == ny + 1);
    if (!edge_x && !edge_y) return BoundaryTag::Interior;
    if (j == ny + 1 && !edge_x) return BoundaryTag::Omega;
    return BoundaryTag::S;
  }

  /// Trapezoid weight of a flow node.
  double weight(int i, int j) const { return weight_x(i) * weight_y(j); }
  double weight_x(int i) const { return (i == 0 || i == nx + 1) ? 0.5 * hx : hx; }
  double weight_y(int j) const { return (j == 0 || j == ny + 1) ? 0.5 * hy : hy; }

  double area() const { return Lx * Ly; }

  bool operator==(const Grid& o) const {
    return nx == o.nx && ny == o.ny && Lx == o.Lx && Ly == o.Ly;
  }
};

inline Grid build_grid(int nx, int ny, double Lx, double Ly) {
  if (!(Lx > 0.0) || !(Ly > 0.0))
    throw GridError("domain extents must be positive");
  if (nx < 8 || ny < 8)
    throw GridError("grid too small: need at least 8 interior nodes per direction");
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.Lx = Lx;
  g.Ly = Ly;
  g.hx = Lx / (nx + 1);
  g.hy = Ly / (ny + 1);
  return g;
}

/// Nodal values on the full flow grid, boundary nodes included.
struct ScalarField {
  Vec values;

  ScalarField() = default;
  explicit ScalarField(Vec v) : values(std::move(v)) {}
  static ScalarField zeros(const Grid& g) { return ScalarField(Vec::Zero(g.node_count())); }

  template <class F>
  static ScalarField sample(const Grid& g, F&& f) {
    Vec v(g.node_count());
    for (int j = 0; j < g.nodes_y(); ++j)
      for (int i = 0; i < g.nodes_x(); ++i) v[g.index(i, j)] = f(g.x(i), g.y(j));
    return ScalarField(std::move(v));
  }

  double operator()(const Grid& g, int i, int j) const { return values[g.index(i, j)]; }
};

struct VectorField {
  ScalarField x1;
  ScalarField x2;
};

/// Values at the interface nodes x1 = 0, hx, ..., Lx.
struct BeamField {
  Vec values;

  BeamField() = default;
  explicit BeamField(Vec v) : values(std::move(v)) {}
  static BeamField zeros(const Grid& g) { return BeamField(Vec::Zero(g.beam_count())); }

  template <class F>
  static BeamField sample(const Grid& g, F&& f) {
    Vec v(g.beam_count());
    for (int i = 0; i < g.beam_count(); ++i) v[i] = f(g.x(i));
    return BeamField(std::move(v));
  }

  bool clamped(double tol = 1e-12) const {
    return std::abs(values[0]) <= tol && std::abs(values[values.size() - 1]) <= tol;
  }
};

inline void require_size(const Vec& v, int n, const char* what) {
  if (v.size() != n)
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(n) +
                            " values, got " + std::to_string(v.size()));
}

/// Trapezoid-weighted L2 inner product of two grid fields.
template <class A, class B>
auto grid_dot(const Grid& g, const A& a, const B& b) {
  typename A::Scalar s(0);
  for (int j = 0; j < g.nodes_y(); ++j)
    for (int i = 0; i < g.nodes_x(); ++i) {
      const int k = g.index(i, j);
      s += g.weight(i, j) * a[k] * b[k];
    }
  return s;
}

inline double grid_norm(const Grid& g, const Vec& a) { return std::sqrt(grid_dot(g, a, a)); }

inline double beam_norm(const Grid& g, const Vec& w) {
  double s = 0.0;
  for (int i = 0; i < g.beam_count(); ++i) s += g.weight_x(i) * w[i] * w[i];
  return std::sqrt(s);
}

}  // namespace fsilab
