#pragma once

// Neumann potential and harmonic Dirichlet extension on the flow grid.
//
// Both use the compact 5-point Laplacian. The Neumann problem is written in
// weak form K psi = H f + B chi, where K is the symmetric edge-sum stiffness
// matrix (equal to -H Lap_h with mirror ghosts at the boundary), bordered by
// the mean-zero gauge row. Factorizations are built once per solver.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <memory>

#include "fsilab/grid.hpp"
#include "fsilab/operators.hpp"

namespace fsilab {

struct NeumannData {
  ScalarField f;
  BeamField chi;
};

namespace detail {

/// Edge-sum stiffness: sum over grid edges of (w_edge / h) (a - b)^2.
inline SpMat neumann_stiffness(const Grid& g) {
  Triplets t;
  auto edge = [&](int a, int b, double c) {
    t.emplace_back(a, a, c);
    t.emplace_back(b, b, c);
    t.emplace_back(a, b, -c);
    t.emplace_back(b, a, -c);
  };
  for (int j = 0; j < g.nodes_y(); ++j)
    for (int i = 0; i + 1 < g.nodes_x(); ++i)
      edge(g.index(i, j), g.index(i + 1, j), g.weight_y(j) / g.hx);
  for (int j = 0; j + 1 < g.nodes_y(); ++j)
    for (int i = 0; i < g.nodes_x(); ++i)
      edge(g.index(i, j), g.index(i, j + 1), g.weight_x(i) / g.hy);
  SpMat k(g.node_count(), g.node_count());
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

/// -Lap_h on interior nodes only (homogeneous Dirichlet elsewhere).
inline SpMat dirichlet_laplacian(const Grid& g) {
  const int n = g.nx * g.ny;
  auto id = [&](int i, int j) { return (j - 1) * g.nx + (i - 1); };
  const double cx = 1.0 / (g.hx * g.hx);
  const double cy = 1.0 / (g.hy * g.hy);
  Triplets t;
  for (int j = 1; j <= g.ny; ++j)
    for (int i = 1; i <= g.nx; ++i) {
      const int r = id(i, j);
      t.emplace_back(r, r, 2.0 * cx + 2.0 * cy);
      if (i > 1) t.emplace_back(r, id(i - 1, j), -cx);
      if (i < g.nx) t.emplace_back(r, id(i + 1, j), -cx);
      if (j > 1) t.emplace_back(r, id(i, j - 1), -cy);
      if (j < g.ny) t.emplace_back(r, id(i, j + 1), -cy);
    }
  SpMat a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

}  // namespace detail

/// Cached factorizations of both elliptic problems on one grid.
class EllipticSolver {
 public:
  explicit EllipticSolver(const Grid& g) : grid_(g) {
    const int n = g.node_count();
    stiffness_ = detail::neumann_stiffness(g);
    weights_ = FlowOperators(g).weights;
    Triplets t;
    t.reserve(static_cast<std::size_t>(stiffness_.nonZeros() + 2 * n));
    for (int k = 0; k < stiffness_.outerSize(); ++k)
      for (SpMat::InnerIterator it(stiffness_, k); it; ++it)
        t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < n; ++k) {
      t.emplace_back(k, n, weights_[k]);
      t.emplace_back(n, k, weights_[k]);
    }
    SpMat bordered(n + 1, n + 1);
    bordered.setFromTriplets(t.begin(), t.end());
    neumann_ = std::make_shared<Eigen::SparseLU<SpMat>>();
    neumann_->compute(bordered);
    if (neumann_->info() != Eigen::Success) throw SolveFailed("Neumann factorization failed");

    laplacian_ = detail::dirichlet_laplacian(g);
    dirichlet_ = std::make_shared<Eigen::SparseLU<SpMat>>();
    dirichlet_->compute(laplacian_);
    if (dirichlet_->info() != Eigen::Success) throw SolveFailed("Dirichlet factorization failed");
  }

  const Grid& grid() const { return grid_; }
  const SpMat& stiffness() const { return stiffness_; }
  const Vec& weights() const { return weights_; }

  /// Solves the gauge-fixed weak system for a load vector with zero sum.
  /// The map is symmetric on such loads.
  Vec solve_load(const Vec& load) const {
    const int n = grid_.node_count();
    Vec rhs = Vec::Zero(n + 1);
    rhs.head(n) = load;
    Vec sol = neumann_->solve(rhs);
    return sol.head(n);
  }

  /// Load vector H f + B chi of the weak Neumann problem.
  Vec neumann_load(const Vec& f, const Vec& chi) const {
    Vec load = weights_.cwiseProduct(f);
    const int j = grid_.top();
    for (int i = 0; i < grid_.beam_count(); ++i)
      load[grid_.index(i, j)] += grid_.weight_x(i) * chi[i];
    return load;
  }

  ScalarField neumann(const NeumannData& d) const {
    require_size(d.f.values, grid_.node_count(), "neumann_potential");
    require_size(d.chi.values, grid_.beam_count(), "neumann_potential");
    const double total = weights_.dot(d.f.values) + beam_sum(d.chi.values);
    const double scale = d.f.values.norm() + d.chi.values.norm() + 1e-300;
    if (std::abs(total) > 1e-10 * scale)
      throw CompatibilityViolated("Neumann data violates the integral compatibility condition");
    return ScalarField(solve_load(neumann_load(d.f.values, d.chi.values)));
  }

  /// Harmonic extension of interface data (zero on S).
  ScalarField dirichlet(const BeamField& phi) const {
    require_size(phi.values, grid_.beam_count(), "dirichlet_map");
    if (!phi.clamped(1e-12))
      throw ParameterError("interface datum must vanish at the endpoints");
    return ScalarField(dirichlet_raw(phi.values));
  }

  /// Extension without the endpoint check; endpoint values are ignored.
  Vec dirichlet_raw(const Vec& phi) const {
    const Grid& g = grid_;
    Vec rhs = Vec::Zero(g.nx * g.ny);
    const double cy = 1.0 / (g.hy * g.hy);
    for (int i = 1; i <= g.nx; ++i) rhs[(g.ny - 1) * g.nx + (i - 1)] = cy * phi[i];
    const Vec in = dirichlet_->solve(rhs);
    Vec out = Vec::Zero(g.node_count());
    for (int j = 1; j <= g.ny; ++j)
      for (int i = 1; i <= g.nx; ++i) out[g.index(i, j)] = in[(j - 1) * g.nx + (i - 1)];
    for (int i = 1; i <= g.nx; ++i) out[g.index(i, g.top())] = phi[i];
    return out;
  }

  /// Transpose of dirichlet_raw as a map from interface vectors to node
  /// vectors (endpoint entries of the result are zero).
  Vec dirichlet_transpose(const Vec& y) const {
    const Grid& g = grid_;
    Vec yi(g.nx * g.ny);
    for (int j = 1; j <= g.ny; ++j)
      for (int i = 1; i <= g.nx; ++i) yi[(j - 1) * g.nx + (i - 1)] = y[g.index(i, j)];
    // The interior Laplacian is symmetric, so its inverse is too.
    const Vec s = dirichlet_->solve(yi);
    const double cy = 1.0 / (g.hy * g.hy);
    Vec out = Vec::Zero(g.beam_count());
    for (int i = 1; i <= g.nx; ++i)
      out[i] = y[g.index(i, g.top())] + cy * s[(g.ny - 1) * g.nx + (i - 1)];
    return out;
  }

  /// Interior residual of the 5-point Laplacian, relative to the field size.
  double harmonic_residual(const Vec& f) const {
    const Grid& g = grid_;
    double r = 0.0;
    for (int j = 1; j <= g.ny; ++j)
      for (int i = 1; i <= g.nx; ++i) {
        const double lap =
            (f[g.index(i - 1, j)] - 2.0 * f[g.index(i, j)] + f[g.index(i + 1, j)]) / (g.hx * g.hx) +
            (f[g.index(i, j - 1)] - 2.0 * f[g.index(i, j)] + f[g.index(i, j + 1)]) / (g.hy * g.hy);
        r = std::max(r, std::abs(lap));
      }
    const double scale = f.lpNorm<Eigen::Infinity>() / std::min(g.hx * g.hx, g.hy * g.hy);
    return scale > 0.0 ? r / scale : r;
  }

 private:
  double beam_sum(const Vec& chi) const {
    double s = 0.0;
    for (int i = 0; i < grid_.beam_count(); ++i) s += grid_.weight_x(i) * chi[i];
    return s;
  }

  Grid grid_;
  SpMat stiffness_;
  SpMat laplacian_;
  Vec weights_;
  std::shared_ptr<Eigen::SparseLU<SpMat>> neumann_;
  std::shared_ptr<Eigen::SparseLU<SpMat>> dirichlet_;
};

inline ScalarField neumann_potential(const Grid& g, const NeumannData& d) {
  return EllipticSolver(g).neumann(d);
}

inline ScalarField dirichlet_map(const Grid& g, const BeamField& phi) {
  return EllipticSolver(g).dirichlet(phi);
}

/// Discrete H1 norm: sqrt(||f||^2 + ||grad f||^2) with the stiffness form.
inline double h1_norm(const EllipticSolver& s, const Vec& f) {
  const double l2 = s.weights().dot(f.cwiseProduct(f));
  const double grad = f.dot(s.stiffness() * f);
  return std::sqrt(l2 + grad);
}

/// Discrete H2 norm of an interface field: values and first two differences.
inline double beam_h2_norm(const Grid& g, const Vec& w) {
  const Vec d1 = beam::first_derivative(g) * w;
  const Vec d2 = beam::second_derivative(g) * w;
  return std::sqrt(beam_norm(g, w) * beam_norm(g, w) + beam_norm(g, d1) * beam_norm(g, d1) +
                   beam_norm(g, d2) * beam_norm(g, d2));
}

}  // namespace fsilab
