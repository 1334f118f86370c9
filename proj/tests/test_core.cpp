#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fsilab/checks.hpp"
#include "fsilab/report.hpp"

using namespace fsilab;

namespace {

const double pi = std::numbers::pi;

Grid unit(int n = 16) { return build_grid(n, n, 1.0, 1.0); }

double max_interior(const Grid& g, const Vec& v, std::function<double(double, double)> f, int margin = 1) {
  double e = 0.0;
  for (int j = margin; j < g.nodes_y() - margin; ++j)
    for (int i = margin; i < g.nodes_x() - margin; ++i)
      e = std::max(e, std::abs(v[g.index(i, j)] - f(g.x(i), g.y(j))));
  return e;
}

}  // namespace

// Grid ---------------------------------------------------------------------

TEST(Grid, SpacingAndCornerTags) {
  const Grid g = build_grid(8, 8, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(g.hx, 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(g.hy, 1.0 / 9.0);
  int corners = 0;
  for (int j : {0, g.ny + 1})
    for (int i : {0, g.nx + 1}) corners += g.tag(i, j) == BoundaryTag::S;
  EXPECT_EQ(corners, 4);
  EXPECT_EQ(g.tag(3, g.top()), BoundaryTag::Omega);
  EXPECT_EQ(g.tag(3, 3), BoundaryTag::Interior);
}

TEST(Grid, Anisotropic) {
  const Grid g = build_grid(16, 8, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(g.hx, 2.0 / 17.0);
  EXPECT_DOUBLE_EQ(g.hy, 1.0 / 9.0);
}

TEST(Grid, RejectsSmallAndDegenerate) {
  EXPECT_THROW(build_grid(4, 8, 1.0, 1.0), GridError);
  EXPECT_THROW(build_grid(8, 8, 0.0, 1.0), GridError);
}

TEST(Grid, TrapezoidWeightsSumToArea) {
  const Grid g = build_grid(10, 12, 2.0, 0.5);
  const Vec one = Vec::Ones(g.node_count());
  EXPECT_NEAR(grid_dot(g, one, one), 1.0, 1e-14);
}

// Flow operators ----------------------------------------------------------------

TEST(Operators, GradientOfConstantAndAffine) {
  const Grid g = unit();
  const auto c = gradient(g, ScalarField::sample(g, [](double, double) { return 3.0; }));
  EXPECT_LT(c.x1.values.lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT(c.x2.values.lpNorm<Eigen::Infinity>(), 1e-12);
  const auto a = gradient(g, ScalarField::sample(g, [](double x, double y) { return x + 2.0 * y; }));
  EXPECT_LT((a.x1.values.array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_LT((a.x2.values.array() - 2.0).abs().maxCoeff(), 1e-12);
}

TEST(Operators, GradientOfBilinear) {
  const Grid g = unit();
  const auto d = gradient(g, ScalarField::sample(g, [](double x, double y) { return x * y; }));
  EXPECT_LT(max_interior(g, d.x1.values, [](double, double y) { return y; }, 0), 1e-12);
  EXPECT_LT(max_interior(g, d.x2.values, [](double x, double) { return x; }, 0), 1e-12);
}

TEST(Operators, Divergence) {
  const Grid g = unit();
  auto vf = [&](auto f1, auto f2) { return VectorField{ScalarField::sample(g, f1), ScalarField::sample(g, f2)}; };
  const auto d1 = divergence(g, vf([](double x, double) { return x; }, [](double, double) { return 0.0; }));
  EXPECT_LT((d1.values.array() - 1.0).abs().maxCoeff(), 1e-12);
  const auto d2 = divergence(g, vf([](double, double y) { return y; }, [](double x, double) { return -x; }));
  EXPECT_LT(d2.values.lpNorm<Eigen::Infinity>(), 1e-12);
  const auto d3 = divergence(g, vf([](double x, double) { return x * x; }, [](double, double y) { return y * y; }));
  EXPECT_LT(max_interior(g, d3.values, [](double x, double y) { return 2.0 * x + 2.0 * y; }), 1e-12);
}

TEST(Operators, Stress) {
  const Grid g = unit();
  const VectorField shear{ScalarField::sample(g, [](double, double y) { return y; }), ScalarField::zeros(g)};
  const auto s = stress(g, shear, 1.0, 0.0);
  EXPECT_LT((s.s12.values.array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_LT(s.s11.values.lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT(s.s22.values.lpNorm<Eigen::Infinity>(), 1e-12);
  const VectorField radial{ScalarField::sample(g, [](double x, double) { return x; }),
                           ScalarField::sample(g, [](double, double y) { return y; })};
  const auto r = stress(g, radial, 1.0, 1.0);
  EXPECT_LT((r.s11.values.array() - 4.0).abs().maxCoeff(), 1e-12);
  EXPECT_LT((r.s22.values.array() - 4.0).abs().maxCoeff(), 1e-12);
  EXPECT_LT(r.s12.values.lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_THROW(stress(g, radial, 0.0, 1.0), ParameterError);
  EXPECT_THROW(stress(g, radial, 1.0, -1.0), ParameterError);
}

TEST(Operators, StressDivergenceOfQuadratic) {
  const Grid g = unit();
  const VectorField u{ScalarField::sample(g, [](double x, double) { return x * x; }), ScalarField::zeros(g)};
  const auto d = stress_divergence(g, u, 1.0, 0.0);
  // Symbolic value (4, 0); one-sided boundary rows perturb the first two layers.
  EXPECT_LT(max_interior(g, d.x1.values, [](double, double) { return 4.0; }, 2), 1e-9);
  EXPECT_LT(max_interior(g, d.x2.values, [](double, double) { return 0.0; }, 2), 1e-9);
  const VectorField affine{ScalarField::sample(g, [](double x, double y) { return 2.0 * x - y; }),
                           ScalarField::sample(g, [](double x, double y) { return x + 3.0 * y; })};
  const auto z = stress_divergence(g, affine, 1.0, 0.5);
  EXPECT_LT(z.x1.values.lpNorm<Eigen::Infinity>(), 1e-9);
  EXPECT_LT(z.x2.values.lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Operators, SummationByParts) {
  EXPECT_LT(sbp_defect(unit(), 30, 3), 1e-12);
  EXPECT_LT(sbp_defect(build_grid(12, 9, 2.0, 0.7), 30, 4), 1e-12);
}

TEST(Operators, BeamFourthDerivativeOfClampedQuartic) {
  const Grid g = unit();
  const BeamField w = BeamField::sample(g, [](double x) { return x * x * (1 - x) * (1 - x); });
  const BeamField d = beam_fourth_derivative(g, w);
  // The ghost closure is exact for the quartic except at the node next to each end.
  for (int i = 2; i <= g.nx - 1; ++i) EXPECT_NEAR(d.values[i], 24.0, 1e-6) << i;
  EXPECT_EQ(d.values[0], 0.0);
  EXPECT_EQ(d.values[g.nx + 1], 0.0);
  const BeamField cubic = BeamField::sample(g, [](double x) { return x * x * x; });
  const BeamField f = fourth_difference_interior(g, cubic);
  EXPECT_LT(f.values.lpNorm<Eigen::Infinity>(), 1e-6);
  const BeamField quartic = BeamField::sample(g, [](double x) { return x * x * x * x; });
  const BeamField q = fourth_difference_interior(g, quartic);
  for (int i = 2; i <= g.nx - 1; ++i) EXPECT_NEAR(q.values[i], 24.0, 1e-6);
  EXPECT_THROW(beam_fourth_derivative(g, quartic), ParameterError);
}

TEST(Operators, InterfaceTraces) {
  const Grid g = unit();
  const auto t0 = trace_interface(g, ScalarField::sample(g, [](double, double y) { return y; }));
  EXPECT_LT(t0.values.lpNorm<Eigen::Infinity>(), 1e-15);
  const auto t1 = trace_interface(g, ScalarField::sample(g, [](double x, double) { return x; }));
  for (int i = 0; i < g.beam_count(); ++i) EXPECT_DOUBLE_EQ(t1.values[i], g.x(i));
  const auto dn = normal_derivative_trace(g, ScalarField::sample(g, [](double, double y) { return y * y; }));
  EXPECT_LT(dn.values.lpNorm<Eigen::Infinity>(), 1e-12);
}

// Elliptic maps ----------------------------------------------------------------

TEST(Elliptic, NeumannZeroData) {
  const Grid g = unit();
  const auto psi = neumann_potential(g, {ScalarField::zeros(g), BeamField::zeros(g)});
  EXPECT_LT(psi.values.lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(Elliptic, NeumannQuadraticAndGauge) {
  const EllipticErrors e16 = elliptic_errors(16), e32 = elliptic_errors(32);
  EXPECT_LT(e32.neumann, 1e-3);
  const double ratio = e16.neumann / e32.neumann;
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
  const Grid g = unit();
  const auto psi = neumann_potential(g, {ScalarField::sample(g, [](double, double) { return 1.0; }),
                                         BeamField::sample(g, [](double) { return -1.0; })});
  EXPECT_NEAR(grid_dot(g, psi.values, Vec(Vec::Ones(g.node_count()))), 0.0, 1e-12);
}

TEST(Elliptic, NeumannIncompatible) {
  const Grid g = unit();
  EXPECT_THROW(neumann_potential(g, {ScalarField::sample(g, [](double, double) { return 1.0; }), BeamField::zeros(g)}),
               CompatibilityViolated);
}

TEST(Elliptic, DirichletSinh) {
  const EllipticErrors e16 = elliptic_errors(16), e32 = elliptic_errors(32);
  const double ratio = e16.dirichlet / e32.dirichlet;
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
  const Grid g = unit();
  EXPECT_LT(dirichlet_map(g, BeamField::zeros(g)).values.lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_THROW(dirichlet_map(g, BeamField::sample(g, [](double x) { return 1.0 - x; })), ParameterError);
}

TEST(Elliptic, DirichletTransposeIsAdjoint) {
  const Grid g = build_grid(10, 9, 1.3, 0.8);
  const EllipticSolver s(g);
  auto rng = sample_rng(1, 2);
  Vec phi(g.beam_count()), y(g.node_count());
  for (int i = 0; i < phi.size(); ++i) phi[i] = unit_draw(rng);
  for (int i = 0; i < y.size(); ++i) y[i] = unit_draw(rng);
  phi[0] = phi[phi.size() - 1] = 0.0;
  EXPECT_NEAR(s.dirichlet_raw(phi).dot(y), phi.dot(s.dirichlet_transpose(y)), 1e-11);
  EXPECT_LT(s.harmonic_residual(s.dirichlet_raw(phi)), 1e-12);
}

// Ambient fields -----------------------------------------------------------------

TEST(Ambient, Presets) {
  const Grid g = unit();
  EXPECT_EQ(ambient_preset("zero", 1.0, g).U.x1.values.lpNorm<Eigen::Infinity>(), 0.0);
  const AmbientField c = ambient_preset(Preset::Compressive, 0.3, g);
  for (int j = 0; j < g.nodes_y(); ++j)
    for (int i = 0; i < g.nodes_x(); ++i) {
      EXPECT_NEAR(c.at(g.x(i), g.y(j)).div(), 0.3 * pi * std::cos(pi * g.x(i)), 1e-14);
      if (i == 0 || i == g.nx + 1) EXPECT_NEAR(c.U.x1.values[g.index(i, j)], 0.0, 1e-15);
    }
  EXPECT_LT(c.U.x2.values.lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_THROW(ambient_preset("vortex", 1.0, g), ParameterError);
}

TEST(Ambient, SolenoidalDiscreteDivergence) {
  const Grid sq = unit();
  EXPECT_LT(divergence(sq, ambient_preset(Preset::Solenoidal, 1.0, sq).U).values.lpNorm<Eigen::Infinity>(), 1e-12);
  double prev = 0.0;
  for (int n : {16, 32}) {
    const Grid g = build_grid(n, 2 * n, 1.0, 1.0);
    const AmbientField a = ambient_preset(Preset::Solenoidal, 1.0, g);
    const double r = max_interior(g, divergence(g, a.U).values, [](double, double) { return 0.0; });
    if (prev > 0.0) EXPECT_GT(prev / r, 3.5);
    prev = r;
  }
}

TEST(Ambient, UStarNorm) {
  const Grid g = unit();
  EXPECT_EQ(u_star_norm(ambient_preset(Preset::Zero, 1.0, g)), 0.0);
  EXPECT_NEAR(u_star_norm(ambient_preset(Preset::Compressive, 0.1, g)), 1.8152789708268946, 1e-14);
  for (Preset p : {Preset::UniformShear, Preset::Solenoidal, Preset::Compressive})
    EXPECT_NEAR(u_star_norm(ambient_preset(p, 0.6, g)), 3.0 * u_star_norm(ambient_preset(p, 0.2, g)), 1e-13);
}

// Metric ------------------------------------------------------------------------

TEST(Metric, XiRoot) {
  EXPECT_NEAR(xi_root(1.0, 1.0, 0.01), 0.021347495331640303, 1e-15);
  EXPECT_EQ(xi_root(1.0, 1.0, 0.0), 0.0);
  EXPECT_THROW(xi_root(1.0, 1.0, 0.2), AmbientTooLarge);
  EXPECT_NEAR(xi_residual(2.0, 0.5, 0.03, xi_root(2.0, 0.5, 0.03)), 0.0, 1e-16);
  EXPECT_NEAR(r_of(0.01), 0.010101, 1e-17);
}

TEST(Metric, ZeroAmbientIsStandard) {
  const Grid g = build_grid(8, 8, 1.0, 1.0);
  EXPECT_EQ(zero_ambient_gram_defect(g), 0.0);
  const Model M = build_model(g, Preset::Zero, 0.0, Params{}, 1.0, 1.0);
  EXPECT_EQ(M.metric->xi, 0.0);
  EXPECT_EQ(M.metric->alpha, 0.0);
  EXPECT_EQ(M.metric->h_alpha.values.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Metric, WeightedInnerProperties) {
  const Grid g = build_grid(8, 8, 1.0, 1.0);
  const Model M = build_model(g, Preset::Compressive, 0.01, Params{}, 1.0, 0.01);
  const WeightedMetric& m = *M.metric;
  EXPECT_LT(transpose_defect(m, 5, 9), 1e-13);
  const Eigen::MatrixXd G = m.gram_dense();
  EXPECT_LT((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-10 * G.cwiseAbs().maxCoeff());
  const RState a = M.layout.unpack(random_state(M.layout, 5, 0));
  const RState b = M.layout.unpack(random_state(M.layout, 5, 1));
  const auto ab = weighted_inner(m, a, b), ba = weighted_inner(m, b, a);
  EXPECT_NEAR(std::abs(ab - std::conj(ba)), 0.0,
              1e-12 * std::sqrt(weighted_inner(m, a, a).real() * weighted_inner(m, b, b).real()));
  EXPECT_GT(weighted_inner(m, a, a).real(), 0.0);
  const Vec v = random_state(M.layout, 5, 2);
  EXPECT_LT((m.gram_solve(m.gram_apply(v)) - v).norm(), 1e-10 * v.norm());
}

TEST(Metric, NormEquivalence) {
  const Grid g = build_grid(8, 8, 1.0, 1.0);
  const Model M = build_model(g, Preset::Compressive, 0.05, Params{}, 1.0, 0.01);
  const NormBounds nb = M.metric->norm_bounds();
  EXPECT_GE(nb.c1, 0.5);
  EXPECT_LE(nb.c1, nb.c2);
  EXPECT_LE(nb.c2, 2.0);
}

// State ------------------------------------------------------------------------

TEST(State, MeanFunctional) {
  const Grid g = unit();
  RState s = RState::zeros(g);
  EXPECT_EQ(mean_functional(g, s), 0.0);
  s.p.setOnes();
  EXPECT_NEAR(mean_functional(g, s), 1.0, 1e-14);
  const double c = -83521.0 / 2784.0;  // -1 / (trapezoid sum of x^2 (1-x)^2 on 17 cells)
  s.w1 = BeamField::sample(g, [&](double x) { return c * x * x * (1 - x) * (1 - x); }).values;
  EXPECT_NEAR(mean_functional(g, s), 0.0, 1e-13);
}

TEST(State, ProjectionAndPacking) {
  const Grid g = unit();
  RState s = RState::zeros(g);
  s.p.setOnes();
  const RState p = project_H0(g, s);
  EXPECT_LT(p.p.lpNorm<Eigen::Infinity>(), 1e-14);
  const AmbientField a = ambient_preset(Preset::Compressive, 0.01, g);
  const Layout l(g, a);
  const Vec v = random_state(l, 3, 4);
  EXPECT_LT(std::abs(l.mean_weights().dot(v)), 1e-14);
  EXPECT_LT((project_H0(l, v) - v).norm(), 1e-14);
  const Vec w = Vec::LinSpaced(l.size(), -1.0, 2.0);
  EXPECT_LT((project_H0(l, project_H0(l, w)) - project_H0(l, w)).norm(), 1e-13);
  EXPECT_LT((l.pack(l.unpack(v)) - v).norm(), 1e-15);
  EXPECT_THROW(l.unpack(Vec(Vec::Zero(l.size() - 1))), DimensionMismatch);
}

// Configuration -----------------------------------------------------------------

TEST(Config, MinimalFileGetsDefaults) {
  const RunConfig c = parse_config("[grid]\nnx = 12\nny = 10\n");
  EXPECT_EQ(c.grid.nx, 12);
  EXPECT_EQ(c.grid.ny, 10);
  EXPECT_EQ(c.physics.nu, 1.0);
  EXPECT_EQ(c.ambient.preset, "zero");
  EXPECT_EQ(c.resolvent.a_list.size(), 6u);
  EXPECT_EQ(c.resolvent.b_list.size(), 5u);
  EXPECT_TRUE(c.output.emit_plots);
}

TEST(Config, FullFile) {
  const RunConfig c = parse_config(
      "[grid]\nnx = 9\nny = 11\nLx = 2\n[ambient]\npreset = compressive\namplitude = 0.01\n[metric]\nC2 = 0.01\n"
      "[resolvent]\na_list = 1, 0.5, 0.25\nb_list = 0, 2\nseed = 17\n[output]\nemit_plots = false\n");
  EXPECT_EQ(c.grid.Lx, 2.0);
  EXPECT_EQ(c.resolvent.a_list, (std::vector<double>{1.0, 0.5, 0.25}));
  EXPECT_EQ(c.resolvent.seed, 17u);
  EXPECT_FALSE(c.output.emit_plots);
}

TEST(Config, Errors) {
  try {
    parse_config("[grid]\nnx = 9\nny = 9\nfoo = 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("grid.foo"), std::string::npos);
  }
  EXPECT_THROW(parse_config("[grid]\nnx = nine\nny = 9\n"), ParseError);
  EXPECT_THROW(parse_config("[grid]\n"), ValidationError);
  EXPECT_THROW(parse_config("[grid]\nnx = 4\nny = 9\n"), ValidationError);
  try {
    parse_config("[grid]\nnx = 9\nny = 9\n[ambient]\npreset = compressive\namplitude = 10\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("too large"), std::string::npos);
  }
  EXPECT_THROW(parse_config("[grid]\nnx = 9\nny = 9\n[resolvent]\na_list = 1e-2, 1e-1\n"), ValidationError);
  EXPECT_THROW(load_config("/nonexistent/run.ini"), IoError);
}

// Report ------------------------------------------------------------------------

TEST(Report, CsvRoundTrip) {
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(fmt17(v)), v);
  Table t{{"a", "b"}, {{1.0, v}, {-2.5, 1e-300}}};
  const std::string s = t.csv();
  EXPECT_EQ(s.substr(0, 4), "a,b\n");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
  EnergyTrace tr;
  tr.t = {0.0};
  tr.E_weighted = {1.0};
  tr.E_standard = {1.0};
  tr.mean_drift = {0.0};
  EXPECT_EQ(energy_table(tr).header, (std::vector<std::string>{"t", "E_weighted", "E_standard", "mean_drift"}));
  EXPECT_EQ(resolvent_table({}).header.size(), 6u);
  EXPECT_EQ(spectrum_table({}).header.size(), 4u);
  EXPECT_EQ(dissipativity_table({}).header.size(), 4u);
}

TEST(Report, SvgChart) {
  const std::string svg = svg_chart("t", "x", "y", {{"s", {1, 2, 3}, {1, 4, 9}}}, false, true);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
  EXPECT_EQ(json_number(std::nan("")).get<std::string>(), "nan");
}
