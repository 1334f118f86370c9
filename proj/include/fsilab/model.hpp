#pragma once

// Everything one run needs, built from a configuration.

#include <memory>

#include "fsilab/analysis.hpp"
#include "fsilab/config.hpp"

namespace fsilab {

struct Model {
  Grid grid;
  AmbientField ambient;
  Layout layout;
  std::shared_ptr<const EllipticSolver> elliptic;
  std::shared_ptr<const WeightedMetric> metric;
  GeneratorMatrices gen;
};

inline Model build_model(const Grid& g, Preset preset, double amplitude, const Params& params, double C1,
                         double C2) {
  Model m;
  m.grid = g;
  m.ambient = ambient_preset(preset, amplitude, g);
  m.layout = Layout(g, m.ambient);
  m.elliptic = std::make_shared<const EllipticSolver>(g);
  m.metric = std::make_shared<const WeightedMetric>(m.ambient, C1, C2, m.layout, m.elliptic);
  m.gen = assemble_generator(params, m.ambient, *m.metric);
  return m;
}

inline Params params_of(const RunConfig& c) {
  return {c.physics.nu, c.physics.lambda, c.physics.eta, c.physics.tau};
}

inline Model build_model(const RunConfig& c) {
  const Grid g = build_grid(c.grid.nx, c.grid.ny, c.grid.Lx, c.grid.Ly);
  return build_model(g, parse_preset(c.ambient.preset), c.ambient.amplitude, params_of(c), c.metric.C1,
                     c.metric.C2);
}

}  // namespace fsilab
