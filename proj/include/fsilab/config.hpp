#pragma once

// Run configuration: INI file with [section] headers and key = value lines.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "fsilab/ambient.hpp"
#include "fsilab/errors.hpp"
#include "fsilab/metric.hpp"

namespace fsilab {

/// Malformed file, unknown key or unreadable value.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Well-formed file whose values fail a precondition.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  struct {
    int nx = 0, ny = 0;
    double Lx = 1.0, Ly = 1.0;
  } grid;
  struct {
    double nu = 1.0, lambda = 0.5, eta = 1.0, tau = 1.0;
  } physics;
  struct {
    std::string preset = "zero";
    double amplitude = 0.0;
  } ambient;
  struct {
    double C1 = 1.0, C2 = 1.0, delta = 0.25;
  } metric;
  struct {
    std::vector<double> a_list{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<double> b_list{0.0, 1.0, -1.0, 10.0, -10.0};
    int samples = 4;
    std::uint64_t seed = 42;
  } resolvent;
  struct {
    double dt = 0.05, T = 5.0;
  } evolve;
  struct {
    int count = 8;
    double shift = 0.05;
  } spectrum;
  struct {
    int samples = 50;
  } dissipativity;
  struct {
    double tolerance = 1.0;  // scale applied to every pinned check tolerance
  } check;
  struct {
    std::string directory = "out";
    bool emit_plots = true;
  } output;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::string s = text;
  for (char& c : s)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("invalid number '" + tok + "' for key " + key);
    }
  }
  return out;
}

template <class T>
T parse_value(const std::string& key, const std::string& text);

template <>
inline double parse_value<double>(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text);
  if (v.size() != 1) throw ParseError("expected one number for key " + key);
  return v[0];
}

template <>
inline int parse_value<int>(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid integer '" + text + "' for key " + key);
  }
}

template <>
inline std::uint64_t parse_value<std::uint64_t>(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid integer '" + text + "' for key " + key);
  }
}

template <>
inline bool parse_value<bool>(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError("invalid boolean '" + text + "' for key " + key);
}

template <>
inline std::string parse_value<std::string>(const std::string&, const std::string& text) {
  return text;
}

}  // namespace detail

/// Validates every module precondition the run will rely on.
inline void validate(const RunConfig& c) {
  if (c.grid.nx == 0 || c.grid.ny == 0) throw ValidationError("grid.nx and grid.ny are required");
  Grid g;
  try {
    g = build_grid(c.grid.nx, c.grid.ny, c.grid.Lx, c.grid.Ly);
  } catch (const GridError& e) {
    throw ValidationError(e.what());
  }
  if (!(c.physics.nu > 0.0)) throw ValidationError("physics.nu must be positive");
  if (!(c.physics.lambda >= 0.0)) throw ValidationError("physics.lambda must be nonnegative");
  if (!(c.physics.eta > 0.0)) throw ValidationError("physics.eta must be positive");
  if (!(c.physics.tau >= 0.0)) throw ValidationError("physics.tau must be nonnegative");
  AmbientField amb;
  try {
    amb = ambient_preset(c.ambient.preset, c.ambient.amplitude, g);
  } catch (const ParameterError& e) {
    throw ValidationError(e.what());
  }
  if (!(c.metric.C1 > 0.0) || !(c.metric.C2 > 0.0)) throw ValidationError("metric.C1 and metric.C2 must be positive");
  if (!(c.metric.delta > 0.0)) throw ValidationError("metric.delta must be positive");
  try {
    (void)xi_root(c.metric.C1, c.metric.C2, r_of(u_star_norm(amb)));
  } catch (const AmbientTooLarge& e) {
    throw ValidationError(e.what());
  }
  const auto& a = c.resolvent.a_list;
  if (a.empty() || c.resolvent.b_list.empty()) throw ValidationError("resolvent lists must be nonempty");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k] > 0.0)) throw ValidationError("resolvent.a_list entries must be positive");
    if (k > 0 && !(a[k] < a[k - 1])) throw ValidationError("resolvent.a_list must be strictly decreasing");
  }
  if (c.resolvent.samples < 0) throw ValidationError("resolvent.samples must be nonnegative");
  if (!(c.evolve.dt > 0.0)) throw ValidationError("evolve.dt must be positive");
  if (!(c.evolve.T >= 0.0)) throw ValidationError("evolve.T must be nonnegative");
  if (c.spectrum.count < 1) throw ValidationError("spectrum.count must be at least 1");
  if (c.dissipativity.samples < 1) throw ValidationError("dissipativity.samples must be at least 1");
  if (!(c.check.tolerance >= 0.0)) throw ValidationError("check.tolerance must be nonnegative");
}

inline RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(std::string("malformed configuration: ") + e.message() + " (line " +
                     std::to_string(e.line()) + ")");
  }

  RunConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, Setter> keys;
  auto bind = [&](const std::string& name, auto& field) {
    using T = std::decay_t<decltype(field)>;
    keys[name] = [&field](const std::string& k, const std::string& v) {
      field = detail::parse_value<T>(k, v);
    };
  };
  auto bind_list = [&](const std::string& name, std::vector<double>& field) {
    keys[name] = [&field](const std::string& k, const std::string& v) { field = detail::parse_list(k, v); };
  };
  bind("grid.nx", c.grid.nx);
  bind("grid.ny", c.grid.ny);
  bind("grid.Lx", c.grid.Lx);
  bind("grid.Ly", c.grid.Ly);
  bind("physics.nu", c.physics.nu);
  bind("physics.lambda", c.physics.lambda);
  bind("physics.eta", c.physics.eta);
  bind("physics.tau", c.physics.tau);
  bind("ambient.preset", c.ambient.preset);
  bind("ambient.amplitude", c.ambient.amplitude);
  bind("metric.C1", c.metric.C1);
  bind("metric.C2", c.metric.C2);
  bind("metric.delta", c.metric.delta);
  bind_list("resolvent.a_list", c.resolvent.a_list);
  bind_list("resolvent.b_list", c.resolvent.b_list);
  bind("resolvent.samples", c.resolvent.samples);
  bind("resolvent.seed", c.resolvent.seed);
  bind("evolve.dt", c.evolve.dt);
  bind("evolve.T", c.evolve.T);
  bind("spectrum.count", c.spectrum.count);
  bind("spectrum.shift", c.spectrum.shift);
  bind("dissipativity.samples", c.dissipativity.samples);
  bind("check.tolerance", c.check.tolerance);
  bind("output.directory", c.output.directory);
  bind("output.emit_plots", c.output.emit_plots);

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ParseError("key outside any section: " + section);
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = keys.find(full);
      if (it == keys.end()) throw ParseError("unknown configuration key: " + full);
      it->second(full, value.data());
    }
  }
  validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read configuration file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace fsilab
