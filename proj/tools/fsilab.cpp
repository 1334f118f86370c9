#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "fsilab/checks.hpp"
#include "fsilab/report.hpp"

namespace fs = std::filesystem;
using namespace fsilab;

namespace {

enum Exit { kOk = 0, kConfig = 2, kCheck = 3, kIo = 4 };

struct Context {
  RunConfig cfg;
  fs::path out;
};

void emit(const Context& c, const std::string& name, const Table& t) {
  write_text(c.out / name, t.csv());
  std::cout << "wrote " << (c.out / name).string() << " (" << t.rows.size() << " rows)\n";
}

void plot(const Context& c, const std::string& name, const std::string& svg) {
  if (c.cfg.output.emit_plots) write_text(c.out / name, svg);
}

int cmd_check(const Context& c) {
  const Model M = build_model(c.cfg);
  const auto results = run_checks(M, c.cfg, c.cfg.check.tolerance);
  Json summary;
  summary["grid"] = {{"nx", c.cfg.grid.nx}, {"ny", c.cfg.grid.ny}};
  summary["ambient"] = {{"preset", preset_name(M.ambient.preset)}, {"amplitude", c.cfg.ambient.amplitude}};
  summary["tolerance_scale"] = c.cfg.check.tolerance;
  bool all = true;
  Json list = Json::array();
  for (const auto& r : results) {
    all = all && r.pass;
    std::printf("%-26s %s  value=%.6e  bounds=[%.3e, %.3e]\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.value,
                r.lower, r.upper);
    list.push_back({{"name", r.name},
                    {"pass", r.pass},
                    {"value", json_number(r.value)},
                    {"lower", json_number(r.lower)},
                    {"upper", json_number(r.upper)},
                    {"detail", r.detail}});
  }
  summary["checks"] = list;
  summary["pass"] = all;
  write_text(c.out / "check_summary.json", summary.dump(2) + "\n");
  if (!all) {
    for (const auto& r : results)
      if (!r.pass) std::cerr << "check failed: " << r.name << "\n";
    return kCheck;
  }
  return kOk;
}

int cmd_simulate(const Context& c) {
  const Model M = build_model(c.cfg);
  const Vec x0 = random_state(M.layout, c.cfg.resolvent.seed, 0);
  const auto [tr, xf] = evolve(M.gen, *M.metric, x0, c.cfg.evolve.dt, c.cfg.evolve.T);
  emit(c, "energy.csv", energy_table(tr));
  plot(c, "energy.svg",
       svg_chart("energy", "t", "E", {{"E_weighted", tr.t, tr.E_weighted}, {"E_standard", tr.t, tr.E_standard}},
                 false, true));
  return kOk;
}

int cmd_resolvent(const Context& c) {
  const Model M = build_model(c.cfg);
  const auto& r = c.cfg.resolvent;
  const auto samples = random_states(M.layout, r.samples, r.seed);
  const SweepResult sw = resolvent_sweep(M.gen, *M.metric, r.b_list, r.a_list, samples);
  emit(c, "resolvent.csv", resolvent_table(sw.records));
  if (sw.failed_cells > 0) std::cerr << sw.failed_cells << " sweep cells failed to solve\n";
  std::vector<Series> series;
  for (double b : r.b_list) {
    Series s{"b = " + fmt17(b), {}, {}};
    for (double a : r.a_list) {
      double worst = 0.0;
      for (const auto& rec : sw.records)
        if (rec.b == b && rec.a == a) worst = std::max(worst, rec.criterion_value);
      s.x.push_back(a);
      s.y.push_back(worst);
    }
    series.push_back(std::move(s));
  }
  plot(c, "resolvent.svg", svg_chart("criterion value (max over samples)", "a", "sqrt(a) |||x|||", series, true, true));
  return sw.failed_cells > 0 ? kCheck : kOk;
}

int cmd_spectrum(const Context& c) {
  const Model M = build_model(c.cfg);
  const auto eig = spectrum_leading(M.gen, c.cfg.spectrum.count, c.cfg.spectrum.shift);
  emit(c, "spectrum.csv", spectrum_table(eig));
  Series s{"eigenvalues", {}, {}};
  for (const auto& e : eig) s.x.push_back(e.value.real()), s.y.push_back(e.value.imag());
  plot(c, "spectrum.svg", svg_chart("leading eigenvalues", "Re", "Im", {s}));
  for (const auto& e : eig)
    if (!e.converged) std::cerr << "eigenvalue " << fmt17(e.value.real()) << " not converged\n";
  return kOk;
}

int cmd_dissipativity(const Context& c) {
  const Model M = build_model(c.cfg);
  const auto rep = dissipativity_scan(M.gen, *M.metric, c.cfg.dissipativity.samples, c.cfg.resolvent.seed,
                                      c.cfg.metric.delta);
  emit(c, "dissipativity.csv", dissipativity_table(rep));
  const Table t = dissipativity_table(rep);
  plot(c, "dissipativity.svg",
       svg_chart("dissipativity", "sample", "Re((Gv,v))/|||v|||^2", {{"q", t.column(0), t.column(1)}}));
  std::printf("max q/|||v|||^2 = %s\n", fmt17(rep.max_q_over_norm2).c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete flow-structure stability laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  const std::vector<std::pair<std::string, int (*)(const Context&)>> commands{
      {"check", cmd_check},
      {"simulate", cmd_simulate},
      {"resolvent", cmd_resolvent},
      {"spectrum", cmd_spectrum},
      {"dissipativity", cmd_dissipativity}};
  const std::vector<std::string> help{"run the invariant suite", "implicit time stepping, energy.csv",
                                      "resolvent sweep, resolvent.csv", "leading eigenvalues, spectrum.csv",
                                      "dissipativity scan, dissipativity.csv"};
  for (std::size_t k = 0; k < commands.size(); ++k) {
    CLI::App* sub = app.add_subcommand(commands[k].first, help[k]);
    sub->add_option("--config", config_path, "INI configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "random seed (overrides resolvent.seed)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  Context ctx;
  try {
    ctx.cfg = load_config(config_path);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  }
  if (seed) ctx.cfg.resolvent.seed = *seed;
  if (!out_dir.empty()) ctx.cfg.output.directory = out_dir;
  ctx.out = ctx.cfg.output.directory;

  try {
    ensure_directory(ctx.out);
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) return fn(ctx);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kCheck;
  }
  return kOk;
}
