#pragma once

// Ambient (background) velocity fields with analytic derivatives.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fsilab/grid.hpp"

namespace fsilab {

enum class Preset { Zero, UniformShear, Solenoidal, Compressive };

inline Preset parse_preset(const std::string& name) {
  if (name == "zero") return Preset::Zero;
  if (name == "uniform-shear") return Preset::UniformShear;
  if (name == "solenoidal") return Preset::Solenoidal;
  if (name == "compressive") return Preset::Compressive;
  throw ParameterError("unknown ambient preset: " + name);
}

inline std::string preset_name(Preset p) {
  switch (p) {
    case Preset::Zero: return "zero";
    case Preset::UniformShear: return "uniform-shear";
    case Preset::Solenoidal: return "solenoidal";
    case Preset::Compressive: return "compressive";
  }
  return "zero";
}

/// Point values of U and its first derivatives; dij = d U_i / d x_j.
struct AmbientPoint {
  double u1 = 0, u2 = 0;
  double d11 = 0, d12 = 0, d21 = 0, d22 = 0;
  double div() const { return d11 + d22; }
};

struct AmbientField {
  Preset preset = Preset::Zero;
  double s = 0.0;
  Grid grid;
  VectorField U;

  double kx() const { return std::numbers::pi / grid.Lx; }
  double ky() const { return std::numbers::pi / grid.Ly; }

  AmbientPoint at(double x, double y) const {
    AmbientPoint a;
    const double k = kx(), l = ky();
    switch (preset) {
      case Preset::Zero:
        break;
      case Preset::Compressive:
        a.u1 = s * std::sin(k * x);
        a.d11 = s * k * std::cos(k * x);
        break;
      case Preset::UniformShear: {
        const double r = (y + grid.Ly) / grid.Ly;
        a.u1 = s * std::sin(k * x) * r * r;
        a.d11 = s * k * std::cos(k * x) * r * r;
        a.d12 = s * std::sin(k * x) * 2.0 * r / grid.Ly;
        break;
      }
      case Preset::Solenoidal:
        a.u1 = s * l * std::sin(k * x) * std::cos(l * y);
        a.u2 = -s * k * std::cos(k * x) * std::sin(l * y);
        a.d11 = s * l * k * std::cos(k * x) * std::cos(l * y);
        a.d12 = -s * l * l * std::sin(k * x) * std::sin(l * y);
        a.d21 = s * k * k * std::sin(k * x) * std::sin(l * y);
        a.d22 = -s * k * l * std::cos(k * x) * std::cos(l * y);
        break;
    }
    return a;
  }

  /// Tangential component on the interface, x2 = 0.
  BeamField interface_u1() const {
    return BeamField::sample(grid, [&](double x) { return at(x, 0.0).u1; });
  }

  ScalarField div() const {
    return ScalarField::sample(grid, [&](double x, double y) { return at(x, y).div(); });
  }
};

inline AmbientField ambient_preset(Preset p, double s, const Grid& g) {
  if (!(s >= 0.0)) throw ParameterError("ambient amplitude must be nonnegative");
  AmbientField a;
  a.preset = p;
  a.s = s;
  a.grid = g;
  a.U.x1 = ScalarField::sample(g, [&](double x, double y) { return a.at(x, y).u1; });
  a.U.x2 = ScalarField::sample(g, [&](double x, double y) { return a.at(x, y).u2; });
  return a;
}

inline AmbientField ambient_preset(const std::string& name, double s, const Grid& g) {
  return ambient_preset(parse_preset(name), s, g);
}

/// sup|U| + sup|div U| + ||U on the interface||_C2, from closed-form sups.
/// The C2 term sums the sups of the trace and its first two derivatives.
inline double u_star_norm(const AmbientField& a) {
  const double s = a.s, k = a.kx(), l = a.ky();
  switch (a.preset) {
    case Preset::Zero:
      return 0.0;
    case Preset::Compressive:
    case Preset::UniformShear:
      return s + s * k + s * (1.0 + k + k * k);
    case Preset::Solenoidal:
      return s * std::max(k, l) + s * l * (1.0 + k + k * k);
  }
  return 0.0;
}

}  // namespace fsilab
