#pragma once

// Weighted inner product on the mean-zero subspace.
//
// ((phi, phi~)) = (T phi)^T S (T phi~), where S is the standard block Gram
// and T = I + N. N maps (p, w1) into the u and w2 slots:
//   u  += -alpha D(g dw1/dx1) e2 + xi grad psi(p - c, w1)
//   w2 += h_alpha dw1/dx1 + xi w1
// N^2 = 0, so T^{-1} = I - N. The Gram matrix is applied matrix-free; both
// elliptic maps are symmetric, so N^T reuses the same factorizations.

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include "fsilab/ambient.hpp"
#include "fsilab/elliptic.hpp"
#include "fsilab/state.hpp"

namespace fsilab {

/// r(a) = a + a^2 + a^3.
inline double r_of(double u_star) { return u_star + u_star * u_star + u_star * u_star * u_star; }

/// Smaller nonnegative root of (C1 + C2 r) xi^2 + (C2 r - 1/2) xi + C2 r = 0.
inline double xi_root(double C1, double C2, double r) {
  if (!(C1 > 0.0) || !(C2 > 0.0)) throw ParameterError("metric constants C1, C2 must be positive");
  if (!(r >= 0.0)) throw ParameterError("r_U must be nonnegative");
  const double a = C1 + C2 * r;
  const double b = 0.5 - C2 * r;
  const double c = C2 * r;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0 || b <= 0.0)
    throw AmbientTooLarge("ambient field too large: no admissible weight xi (radicand " +
                          std::to_string(disc) + ")");
  return 2.0 * c / (b + std::sqrt(disc));
}

inline double xi_residual(double C1, double C2, double r, double xi) {
  return (C1 + C2 * r) * xi * xi + (C2 * r - 0.5) * xi + C2 * r;
}

struct NormBounds {
  double c1 = 1.0;
  double c2 = 1.0;
};

class WeightedMetric {
 public:
  double u_star = 0.0, r_u = 0.0, xi = 0.0, alpha = 0.0, C1 = 1.0, C2 = 1.0;
  BeamField g;
  BeamField h_alpha;

  WeightedMetric(const AmbientField& amb, double c1, double c2, const Layout& layout,
                 std::shared_ptr<const EllipticSolver> solver)
      : layout_(layout), solver_(std::move(solver)) {
    if (!(layout_.grid == amb.grid)) throw DimensionMismatch("ambient field and layout grids differ");
    if (!(solver_->grid() == layout_.grid)) throw DimensionMismatch("elliptic solver grid differs");
    C1 = c1;
    C2 = c2;
    u_star = u_star_norm(amb);
    r_u = r_of(u_star);
    xi = xi_root(C1, C2, r_u);
    alpha = 2.0 * u_star;
    const Grid& gr = layout_.grid;
    g = BeamField::sample(gr, [&](double x) { return 2.0 * x / gr.Lx - 1.0; });
    h_alpha = BeamField(amb.interface_u1().values - alpha * g.values);
    ops_ = std::make_shared<FlowOperators>(gr);
    d1_ = beam::first_derivative(gr);
    S_ = standard_gram(layout_);
    const int nw = layout_.nw;
    Eigen::MatrixXd kb = Eigen::MatrixXd(S_).block(layout_.off_w1(), layout_.off_w1(), nw, nw);
    plate_ = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(kb);
    if (plate_->info() != Eigen::Success) throw SolveFailed("plate stiffness is not positive definite");
    diag_ = Vec(S_.diagonal());
  }

  const Layout& layout() const { return layout_; }
  const Grid& grid() const { return layout_.grid; }
  const SpMat& standard() const { return S_; }
  const EllipticSolver& elliptic() const { return *solver_; }

  /// N v for a reduced vector.
  Vec apply_N(const Vec& v) const {
    layout_.require_size_any(v.size());
    const Grid& gr = layout_.grid;
    Vec out = Vec::Zero(v.size());
    if (xi == 0.0 && alpha == 0.0 && h_alpha.values.isZero(0.0)) return out;
    const Vec p = v.segment(layout_.off_p(), layout_.np);
    const Vec w1 = beam_full(v.segment(layout_.off_w1(), layout_.nw));
    const Vec slope = d1_ * w1;
    Vec gx = Vec::Zero(gr.node_count()), gy = Vec::Zero(gr.node_count());
    if (xi != 0.0) {
      const double c = (solver_->weights().dot(p) + beam_weights().dot(w1)) / gr.area();
      const Vec psi = solver_->solve_load(solver_->neumann_load(p.array() - c, w1));
      gx = xi * (ops_->Dx * psi);
      gy = xi * (ops_->Dy * psi);
    }
    if (alpha != 0.0) gy -= alpha * solver_->dirichlet_raw(g.values.cwiseProduct(slope));
    for (int k = 0; k < layout_.nu1; ++k) out[layout_.off_u1() + k] = gx[layout_.u1_nodes[k]];
    for (int k = 0; k < layout_.nu2; ++k) out[layout_.off_u2() + k] = gy[layout_.u2_nodes[k]];
    for (int i = 1; i <= gr.nx; ++i)
      out[layout_.off_w2() + i - 1] = h_alpha.values[i] * slope[i] + xi * w1[i];
    return out;
  }

  /// N^T y for a reduced vector.
  Vec apply_NT(const Vec& y) const {
    layout_.require_size_any(y.size());
    const Grid& gr = layout_.grid;
    Vec out = Vec::Zero(y.size());
    if (xi == 0.0 && alpha == 0.0 && h_alpha.values.isZero(0.0)) return out;
    Vec a1 = Vec::Zero(gr.node_count()), a2 = Vec::Zero(gr.node_count());
    for (int k = 0; k < layout_.nu1; ++k) a1[layout_.u1_nodes[k]] = y[layout_.off_u1() + k];
    for (int k = 0; k < layout_.nu2; ++k) a2[layout_.u2_nodes[k]] = y[layout_.off_u2() + k];
    const Vec b = beam_full(y.segment(layout_.off_w2(), layout_.nw));
    Vec gp = Vec::Zero(gr.node_count());
    Vec gw = Vec::Zero(gr.beam_count());
    if (xi != 0.0) {
      const Vec load = xi * (ops_->Dx.transpose() * a1 + ops_->Dy.transpose() * a2);
      const Vec s = solver_->solve_load(load);
      const Vec& h = solver_->weights();
      const double hs = h.dot(s) / gr.area();
      gp = h.cwiseProduct(s) - h * hs;
      for (int i = 0; i < gr.beam_count(); ++i)
        gw[i] = gr.weight_x(i) * s[gr.index(i, gr.top())] - gr.weight_x(i) * hs;
    }
    Vec slope_adj = h_alpha.values.cwiseProduct(b);
    if (alpha != 0.0) {
      const Vec dt = solver_->dirichlet_transpose(-alpha * a2);
      slope_adj += g.values.cwiseProduct(dt);
    }
    gw += d1_.transpose() * slope_adj + xi * b;
    out.segment(layout_.off_p(), layout_.np) = gp;
    out.segment(layout_.off_w1(), layout_.nw) = gw.segment(1, layout_.nw);
    return out;
  }

  Vec apply_T(const Vec& v) const { return v + apply_N(v); }
  Vec apply_T_inverse(const Vec& v) const { return v - apply_N(v); }

  Vec gram_apply(const Vec& v) const {
    const Vec t = apply_T(v);
    const Vec st = S_ * t;
    return st + apply_NT(st);
  }

  Eigen::VectorXcd gram_apply(const Eigen::VectorXcd& v) const {
    const Vec re = gram_apply(Vec(v.real()));
    const Vec im = gram_apply(Vec(v.imag()));
    return re.cast<std::complex<double>>() + std::complex<double>(0, 1) * im.cast<std::complex<double>>();
  }

  /// S^{-1} applied blockwise.
  Vec standard_solve(const Vec& v) const {
    Vec out = v.cwiseQuotient(diag_);
    out.segment(layout_.off_w1(), layout_.nw) = plate_->solve(v.segment(layout_.off_w1(), layout_.nw));
    return out;
  }

  Vec gram_solve(const Vec& v) const {
    const Vec a = v - apply_NT(v);
    const Vec b = standard_solve(a);
    return b - apply_N(b);
  }

  Eigen::VectorXcd gram_solve(const Eigen::VectorXcd& v) const {
    const Vec re = gram_solve(Vec(v.real()));
    const Vec im = gram_solve(Vec(v.imag()));
    return re.cast<std::complex<double>>() + std::complex<double>(0, 1) * im.cast<std::complex<double>>();
  }

  /// ((a, b)) on reduced vectors: b^H Gram a.
  double inner(const Vec& a, const Vec& b) const { return b.dot(gram_apply(a)); }
  std::complex<double> inner(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const {
    return b.dot(gram_apply(a));
  }

  double norm(const Vec& v) const { return std::sqrt(std::max(0.0, inner(v, v))); }
  double norm(const Eigen::VectorXcd& v) const {
    return std::sqrt(std::max(0.0, inner(v, v).real()));
  }

  /// Dense Gram matrix (small grids only).
  Eigen::MatrixXd gram_dense() const {
    const int n = layout_.size();
    Eigen::MatrixXd m(n, n);
    for (int k = 0; k < n; ++k) m.col(k) = gram_apply(Vec(Vec::Unit(n, k)));
    return m;
  }

  /// Extreme generalized eigenvalues of Gram against S on the mean-zero
  /// subspace, by Lanczos with full reorthogonalization.
  NormBounds norm_bounds(int steps = 80, unsigned seed = 7) const {
    const int n = layout_.size();
    Vec q = r_inverse_transpose(layout_.mean_weights());
    q.normalize();
    auto project = [&](Vec v) { return Vec(v - q * q.dot(v)); };
    auto op = [&](const Vec& y) {
      const Vec v = r_inverse(project(y));
      const Vec z = r_apply(apply_T(v));
      const Vec back = r_transpose(z);
      // The excluded direction is mapped to 1, inside [c1, c2]; mapping it to
      // 0 lets rounding leakage surface as a spurious Ritz value.
      return Vec(project(r_inverse_transpose(Vec(back + apply_NT(back)))) + q * q.dot(y));
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec v0(n);
    for (int k = 0; k < n; ++k) v0[k] = uni(rng);
    v0 = project(v0);
    v0.normalize();
    const int m = std::min(steps, n - 1);
    Eigen::MatrixXd Q(n, m + 1);
    Vec alpha_d = Vec::Zero(m), beta_d = Vec::Zero(m);
    Q.col(0) = v0;
    int used = m;
    for (int k = 0; k < m; ++k) {
      Vec w = op(Q.col(k));
      alpha_d[k] = Q.col(k).dot(w);
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= k; ++j) w -= Q.col(j) * Q.col(j).dot(w);
      beta_d[k] = w.norm();
      if (beta_d[k] < 1e-12) {
        used = k + 1;
        break;
      }
      Q.col(k + 1) = w / beta_d[k];
    }
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(used, used);
    for (int k = 0; k < used; ++k) {
      tri(k, k) = alpha_d[k];
      if (k + 1 < used) tri(k, k + 1) = tri(k + 1, k) = beta_d[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  }

 private:
  Vec beam_full(const Vec& interior) const {
    Vec w = Vec::Zero(layout_.grid.beam_count());
    w.segment(1, layout_.nw) = interior;
    return w;
  }

  Vec beam_weights() const {
    Vec w(layout_.grid.beam_count());
    for (int i = 0; i < w.size(); ++i) w[i] = layout_.grid.weight_x(i);
    return w;
  }

  // R with R^T R = S: sqrt on diagonal blocks, L^T on the plate block.
  Vec r_apply(const Vec& v) const {
    Vec out = v.cwiseProduct(diag_.cwiseSqrt());
    const auto& L = plate_->matrixL();
    out.segment(layout_.off_w1(), layout_.nw) =
        L.transpose() * v.segment(layout_.off_w1(), layout_.nw);
    return out;
  }
  Vec r_transpose(const Vec& v) const {
    Vec out = v.cwiseProduct(diag_.cwiseSqrt());
    const auto& L = plate_->matrixL();
    out.segment(layout_.off_w1(), layout_.nw) = L * v.segment(layout_.off_w1(), layout_.nw);
    return out;
  }
  Vec r_inverse(const Vec& v) const {
    Vec out = v.cwiseQuotient(diag_.cwiseSqrt());
    out.segment(layout_.off_w1(), layout_.nw) =
        plate_->matrixU().solve(v.segment(layout_.off_w1(), layout_.nw));
    return out;
  }
  Vec r_inverse_transpose(const Vec& v) const {
    Vec out = v.cwiseQuotient(diag_.cwiseSqrt());
    out.segment(layout_.off_w1(), layout_.nw) =
        plate_->matrixL().solve(v.segment(layout_.off_w1(), layout_.nw));
    return out;
  }

  Layout layout_;
  std::shared_ptr<const EllipticSolver> solver_;
  std::shared_ptr<FlowOperators> ops_;
  SpMat d1_;
  SpMat S_;
  Vec diag_;
  std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>> plate_;
};

inline WeightedMetric build_metric(const AmbientField& amb, double C1, double C2, const Layout& layout,
                                   std::shared_ptr<const EllipticSolver> solver) {
  return WeightedMetric(amb, C1, C2, layout, std::move(solver));
}

template <class T>
std::complex<double> weighted_inner(const WeightedMetric& m, const State<T>& a, const State<T>& b) {
  const Eigen::VectorXcd va = m.layout().pack(a).template cast<std::complex<double>>();
  const Eigen::VectorXcd vb = m.layout().pack(b).template cast<std::complex<double>>();
  return m.inner(va, vb);
}

}  // namespace fsilab
