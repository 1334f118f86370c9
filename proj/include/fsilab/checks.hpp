#pragma once

// Invariant checks shared by the CLI `check` command and the acceptance suite.
// Each returns a measured value and the limit it was compared against.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fsilab/commutator.hpp"
#include "fsilab/model.hpp"

namespace fsilab {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = 0.0;
  bool pass = false;
  std::string detail;
};

inline CheckResult within(std::string name, double value, double lower, double upper, std::string detail = {}) {
  CheckResult r{std::move(name), value, lower, upper, false, std::move(detail)};
  r.pass = std::isfinite(value) && value >= lower && value <= upper;
  return r;
}

inline CheckResult at_most(std::string name, double value, double upper, std::string detail = {}) {
  return within(std::move(name), value, -std::numeric_limits<double>::infinity(), upper, std::move(detail));
}

/// Random pressure and velocity with u . n = 0 on the whole boundary.
inline std::pair<ScalarField, VectorField> sbp_pair(const Grid& g, std::uint64_t seed, std::uint64_t id) {
  auto rng = sample_rng(seed, id);
  Vec p(g.node_count()), u1(g.node_count()), u2(g.node_count());
  for (int k = 0; k < g.node_count(); ++k) {
    p[k] = unit_draw(rng);
    u1[k] = unit_draw(rng);
    u2[k] = unit_draw(rng);
  }
  for (int j = 0; j < g.nodes_y(); ++j)
    for (int i = 0; i < g.nodes_x(); ++i) {
      if (i == 0 || i == g.nx + 1) u1[g.index(i, j)] = 0.0;
      if (j == 0 || j == g.ny + 1) u2[g.index(i, j)] = 0.0;
    }
  return {ScalarField(p), VectorField{ScalarField(u1), ScalarField(u2)}};
}

/// max |(p, div u) + (grad p, u)| / (|p| |u|) over random pairs.
inline double sbp_defect(const Grid& g, int pairs, std::uint64_t seed) {
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const auto [p, u] = sbp_pair(g, seed, static_cast<std::uint64_t>(k));
    const ScalarField d = divergence(g, u);
    const VectorField gp = gradient(g, p);
    const double lhs = grid_dot(g, p.values, d.values) + grid_dot(g, gp.x1.values, u.x1.values) +
                       grid_dot(g, gp.x2.values, u.x2.values);
    const double un = std::sqrt(grid_dot(g, u.x1.values, u.x1.values) + grid_dot(g, u.x2.values, u.x2.values));
    worst = std::max(worst, std::abs(lhs) / (grid_norm(g, p.values) * un));
  }
  return worst;
}

struct EllipticErrors {
  double neumann = 0.0;
  double dirichlet = 0.0;
};

/// Max-norm errors against the closed forms on the unit square with n x n cells.
inline EllipticErrors elliptic_errors(int n) {
  const Grid g = build_grid(n, n, 1.0, 1.0);
  const double pi = std::numbers::pi;
  const NeumannData d{ScalarField::sample(g, [](double, double) { return 1.0; }),
                      BeamField::sample(g, [](double) { return -1.0; })};
  const ScalarField psi = neumann_potential(g, d);
  const ScalarField psi_exact =
      ScalarField::sample(g, [](double, double y) { return -0.5 * y * y - y - 1.0 / 3.0; });
  const BeamField phi = BeamField::sample(g, [&](double x) { return std::sin(pi * x); });
  const ScalarField ext = dirichlet_map(g, phi);
  const ScalarField ext_exact = ScalarField::sample(
      g, [&](double x, double y) { return std::sin(pi * x) * std::sinh(pi * (y + 1.0)) / std::sinh(pi); });
  return {(psi.values - psi_exact.values).lpNorm<Eigen::Infinity>(),
          (ext.values - ext_exact.values).lpNorm<Eigen::Infinity>()};
}

/// max |((v, N^T y)) - ((N v, y))| relative, Euclidean pairing.
inline double transpose_defect(const WeightedMetric& m, int pairs, std::uint64_t seed) {
  double worst = 0.0;
  const int n = m.layout().size();
  for (int k = 0; k < pairs; ++k) {
    auto rng = sample_rng(seed, static_cast<std::uint64_t>(k));
    Vec v(n), y(n);
    for (int i = 0; i < n; ++i) v[i] = unit_draw(rng), y[i] = unit_draw(rng);
    const double a = m.apply_N(v).dot(y), b = v.dot(m.apply_NT(y));
    const double scale = std::max(1e-300, m.apply_N(v).norm() * y.norm() + v.norm() * m.apply_NT(y).norm());
    worst = std::max(worst, std::abs(a - b) / scale);
  }
  return worst;
}

/// max |entry| of (weighted Gram - standard Gram) for U = 0 on the same grid.
inline double zero_ambient_gram_defect(const Grid& g) {
  const AmbientField amb = ambient_preset(Preset::Zero, 0.0, g);
  const Layout l(g, amb);
  const WeightedMetric m(amb, 1.0, 1.0, l, std::make_shared<const EllipticSolver>(g));
  return (m.gram_dense() - Eigen::MatrixXd(m.standard())).cwiseAbs().maxCoeff();
}

struct AdjointDefects {
  double identity = 0.0;
  double involution = 0.0;
};

inline AdjointDefects adjoint_defects(const GeneratorMatrices& gm, const WeightedMetric& m, int pairs,
                                      std::uint64_t seed) {
  const LinearOperator adj = numerical_adjoint(gm, m);
  const LinearOperator adj2 = numerical_adjoint(adj, m);
  AdjointDefects d;
  for (int k = 0; k < pairs; ++k) {
    const Vec phi = random_state(gm.layout, seed, 2 * static_cast<std::uint64_t>(k));
    const Vec psi = random_state(gm.layout, seed, 2 * static_cast<std::uint64_t>(k) + 1);
    const Vec gphi = gm.G * phi;
    const double lhs = m.inner(gphi, psi), rhs = m.inner(phi, adj.apply(psi));
    const double scale = std::max(m.norm(gphi) * m.norm(psi), m.norm(phi) * m.norm(adj.apply(psi)));
    d.identity = std::max(d.identity, std::abs(lhs - rhs) / scale);
    const Vec back = adj2.apply(phi);
    d.involution = std::max(d.involution, (back - gphi).norm() / gphi.norm());
  }
  return d;
}

struct TrajectoryDefects {
  double mean_drift = 0.0;       // relative to |x0|
  double energy_increase = 0.0;  // worst relative per-step increase
  double decay = 1.0;            // E(T) / E(0)
  int steps = 0;
};

inline TrajectoryDefects trajectory_defects(const GeneratorMatrices& gm, const WeightedMetric& m, const Vec& x0,
                                            double dt, double T) {
  const auto [tr, xf] = evolve(gm, m, x0, dt, T);
  TrajectoryDefects d;
  d.steps = static_cast<int>(tr.t.size()) - 1;
  const double scale = std::sqrt(x0.dot(m.standard() * x0));
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    d.mean_drift = std::max(d.mean_drift, tr.mean_drift[k] / scale);
    if (k > 0 && tr.E_weighted[k - 1] > 0.0)
      d.energy_increase =
          std::max(d.energy_increase, (tr.E_weighted[k] - tr.E_weighted[k - 1]) / tr.E_weighted[k - 1]);
  }
  if (tr.E_weighted.front() > 0.0) d.decay = tr.E_weighted.back() / tr.E_weighted.front();
  return d;
}

/// |m^T G|_inf / |G|_inf: mean functional of G v vanishes for every v.
inline double invariance_defect(const GeneratorMatrices& gm) {
  const Vec row = gm.G.transpose() * gm.mass;
  double gmax = 0.0;
  for (int k = 0; k < gm.G.outerSize(); ++k)
    for (SpMat::InnerIterator it(gm.G, k); it; ++it) gmax = std::max(gmax, std::abs(it.value()));
  return row.lpNorm<Eigen::Infinity>() / (gmax * gm.mass.lpNorm<Eigen::Infinity>());
}

struct CommutatorDefects {
  double one_d = 0.0;
  double two_d = 0.0;
  double written = 0.0;  // 2 div(h) cross-term variant on h = (x1, 0), w = x1 x2, reported only
  double one_d_oracle = 0.0;
};

/// Polynomial inputs: 1-D h = x^2, w = x^3 (commutator 30 x^2); 2-D
/// h = (x1, 0), w = x1 x2 and a richer cubic pair. Errors are relative to the
/// largest lhs entry. A dyadic spacing keeps the sampled polynomials exact.
inline CommutatorDefects commutator_defects(int n = 17) {
  CommutatorDefects d;
  const double h = 1.0 / (n - 1);
  Vec x(n), hv(n), wv(n), oracle(n);
  for (int i = 0; i < n; ++i) {
    x[i] = i * h;
    hv[i] = x[i] * x[i];
    wv[i] = x[i] * x[i] * x[i];
    oracle[i] = 30.0 * x[i] * x[i];
  }
  const CommutatorResult r1 = commutator_check(wv, hv, h);
  const double s1 = std::max(1.0, r1.lhs.cwiseAbs().maxCoeff());
  d.one_d = r1.discrepancy / s1;
  d.one_d_oracle = (r1.lhs - oracle).cwiseAbs().maxCoeff() / s1;

  auto grid2 = [&](auto f) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = f(i * h, j * h);
    return m;
  };
  const std::vector<std::array<std::function<double(double, double)>, 3>> cases{
      {[](double a, double b) { return a * b; }, [](double a, double) { return a; },
       [](double, double) { return 0.0; }},
      {[](double a, double b) { return a * a * a * b + b * b; }, [](double a, double b) { return a * b; },
       [](double a, double b) { return a * a - b; }}};
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& c = cases[k];
    const CommutatorResult r2 = commutator_check(grid2(c[0]), grid2(c[1]), grid2(c[2]), h, h);
    const double s2 = std::max(1.0, r2.lhs.cwiseAbs().maxCoeff());
    d.two_d = std::max(d.two_d, r2.discrepancy / s2);
    if (k == 0) d.written = r2.written_discrepancy;
  }
  return d;
}

/// Full suite on one model. scale multiplies every tolerance.
inline std::vector<CheckResult> run_checks(const Model& M, const RunConfig& c, double scale) {
  std::vector<CheckResult> out;
  const Grid& g = M.grid;
  const std::uint64_t seed = c.resolvent.seed;
  const bool still = M.ambient.preset == Preset::Zero || c.ambient.amplitude == 0.0;

  out.push_back(at_most("sbp", sbp_defect(g, 20, seed), 1e-10 * scale, "|(p,div u)+(grad p,u)|/(|p||u|)"));

  const EllipticErrors e16 = elliptic_errors(16), e32 = elliptic_errors(32);
  const double slack = 0.5 * scale;
  out.push_back(within("elliptic_neumann", e16.neumann / e32.neumann, 4.0 - slack, 4.0 + slack,
                       "error ratio 16 -> 32"));
  out.push_back(within("elliptic_dirichlet", e16.dirichlet / e32.dirichlet, 4.0 - slack, 4.0 + slack,
                       "error ratio 16 -> 32"));

  const WeightedMetric& m = *M.metric;
  out.push_back(at_most("metric_xi", std::abs(xi_residual(m.C1, m.C2, m.r_u, m.xi)), 1e-12 * scale,
                        "quadratic residual at xi"));
  out.push_back(at_most("metric_transpose", transpose_defect(m, 10, seed), 1e-12 * scale, "N^T consistency"));
  out.push_back(at_most("metric_zero_ambient", zero_ambient_gram_defect(g), 1e-12 * scale,
                        "U = 0 Gram equals standard Gram"));
  const NormBounds nb = m.norm_bounds();
  out.push_back(within("metric_equivalence_lower", nb.c1, 0.5 / std::max(scale, 1e-300), 2.0, "c1"));
  out.push_back(within("metric_equivalence_upper", nb.c2, 0.5, 2.0 * scale, "c2"));

  const AdjointDefects ad = adjoint_defects(M.gen, m, 20, seed);
  out.push_back(at_most("adjoint_identity", ad.identity, 1e-10 * scale));
  out.push_back(at_most("adjoint_involution", ad.involution, 1e-10 * scale));

  const DissipativityReport dr = dissipativity_scan(M.gen, m, c.dissipativity.samples, seed);
  out.push_back(at_most("dissipativity", dr.max_q_over_norm2, (still ? 1e-6 : 1e-4) * scale,
                        "max Re((G v, v)) / |||v|||^2"));

  out.push_back(at_most("conservation_generator", invariance_defect(M.gen), 1e-12 * scale, "|m^T G| / |G|"));
  const TrajectoryDefects td =
      trajectory_defects(M.gen, m, random_state(M.layout, seed, 0), c.evolve.dt, c.evolve.T);
  out.push_back(at_most("conservation_drift", td.mean_drift, 1e-8 * scale, "mean functional along trajectory"));
  out.push_back(at_most("energy_monotone", td.energy_increase, 1e-8 * scale, "relative per-step increase"));

  const CommutatorDefects cd = commutator_defects();
  out.push_back(at_most("commutator_1d", std::max(cd.one_d, cd.one_d_oracle), 1e-12 * scale));
  out.push_back(at_most("commutator_2d", cd.two_d, 1e-12 * scale));
  return out;
}

}  // namespace fsilab
