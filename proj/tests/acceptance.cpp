// Acceptance suite: one line per criterion. Exit status is nonzero only for
// failures outside kKnownFailures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "fsilab/checks.hpp"
#include "fsilab/report.hpp"

using namespace fsilab;

namespace {

// Pinned tolerances.
constexpr double kXiTol = 1e-12;
constexpr double kXiOracle = 0.021347495331640303;  // root-finder, 40 digits, C1 = C2 = 1, r = 0.01
constexpr double kRatioLo = 3.5, kRatioHi = 4.5;
constexpr double kSbpTol = 1e-10;
constexpr double kGramTol = 1e-12;
constexpr double kNormLo = 0.5, kNormHi = 2.0;
constexpr double kDissRest = 1e-6, kDissMoving = 1e-4;
constexpr double kAdjTol = 1e-10;
constexpr double kDriftTol = 1e-8, kEnergyTol = 1e-8;
constexpr double kContraction = 1e-8;
constexpr double kCriterionRatio = 1.0 / 3.0;
constexpr double kKernelFloor = 0.01, kKernelDrift = 0.2;
constexpr double kSigmaFloor = 1e-6;
constexpr double kCommTol = 1e-12;

constexpr int kN = 32;              // main grid
constexpr double kC2Moving = 0.01;  // C2 for the s = 0.01 / 0.05 runs; C1 = 1

// Criterion 5 with U != 0 is known not to hold for this metric.
const std::set<int> kKnownFailures{5};

struct Line {
  bool pass = false;
  std::string text;
};

Grid grid(int n = kN) { return build_grid(n, n, 1.0, 1.0); }

Model at_rest(int n = kN) { return build_model(grid(n), Preset::Zero, 0.0, Params{}, 1.0, 1.0); }

Model with_preset(Preset p, double s, int n = kN) { return build_model(grid(n), p, s, Params{}, 1.0, kC2Moving); }

std::string sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

const Preset kPresets[] = {Preset::Compressive, Preset::UniformShear, Preset::Solenoidal};

Line c1() {
  const double xi = xi_root(1.0, 1.0, 0.01);
  const double err = std::abs(xi - kXiOracle);
  const bool zero = xi_root(1.0, 1.0, 0.0) == 0.0 && xi_root(3.0, 0.2, 0.0) == 0.0;
  bool thrown = false;
  try {
    xi_root(1.0, 1.0, 0.2);
  } catch (const AmbientTooLarge&) {
    thrown = true;
  }
  return {err <= kXiTol && zero && thrown,
          "xi=" + fmt17(xi) + " |err|=" + sci(err) + " xi(r=0)=0:" + (zero ? "yes" : "no") +
              " r=0.2 rejected:" + (thrown ? "yes" : "no")};
}

Line c2() {
  const EllipticErrors a = elliptic_errors(16), b = elliptic_errors(32);
  const double rd = a.dirichlet / b.dirichlet, rn = a.neumann / b.neumann;
  const bool ok = rd >= kRatioLo && rd <= kRatioHi && rn >= kRatioLo && rn <= kRatioHi;
  return {ok, "dirichlet ratio=" + sci(rd) + " neumann ratio=" + sci(rn)};
}

Line c3() {
  const double d = std::max(sbp_defect(grid(), 100, 31), sbp_defect(build_grid(20, 13, 2.0, 0.5), 100, 32));
  return {d <= kSbpTol, "max relative defect=" + sci(d) + " over 2x100 pairs"};
}

Line c4() {
  const double g0 = zero_ambient_gram_defect(grid(16));
  bool ok = g0 <= kGramTol;
  std::string t = "U=0 gram defect=" + sci(g0) + " (16x16)";
  for (double s : {0.01, 0.05}) {
    const Model M = with_preset(Preset::Compressive, s);
    const NormBounds nb = M.metric->norm_bounds();
    ok = ok && nb.c1 >= kNormLo && nb.c1 <= nb.c2 && nb.c2 <= kNormHi;
    t += " s=" + sci(s) + ":[" + sci(nb.c1) + "," + sci(nb.c2) + "]";
  }
  return {ok, t};
}

Line c5() {
  const Model M0 = at_rest();
  const double q0 = dissipativity_scan(M0.gen, *M0.metric, 200, 51).max_q_over_norm2;
  bool ok = q0 <= kDissRest;
  std::string t = "U=0 max q=" + sci(q0);
  for (Preset p : kPresets) {
    const Model M = with_preset(p, 0.01);
    const double q = dissipativity_scan(M.gen, *M.metric, 200, 51).max_q_over_norm2;
    ok = ok && q <= kDissMoving;
    t += " " + preset_name(p) + "=" + sci(q);
  }
  return {ok, t};
}

Line c6() {
  bool ok = true;
  std::string t;
  for (bool moving : {false, true}) {
    const Model M = moving ? with_preset(Preset::Compressive, 0.01) : at_rest();
    const AdjointDefects d = adjoint_defects(M.gen, *M.metric, 100, 61);
    ok = ok && d.identity <= kAdjTol && d.involution <= kAdjTol;
    t += std::string(moving ? " compressive" : "U=0") + ": identity=" + sci(d.identity) +
         " involution=" + sci(d.involution);
  }
  return {ok, t};
}

Line c7() {
  bool ok = true;
  std::string t;
  for (bool moving : {false, true}) {
    const Model M = moving ? with_preset(Preset::Compressive, 0.01) : at_rest();
    const TrajectoryDefects d = trajectory_defects(M.gen, *M.metric, random_state(M.layout, 71, 0), 0.05, 10.0);
    ok = ok && d.steps == 200 && d.mean_drift <= kDriftTol && d.energy_increase <= kEnergyTol;
    t += std::string(moving ? " compressive" : "U=0") + ": drift=" + sci(d.mean_drift) +
         " max increase=" + sci(d.energy_increase);
  }
  return {ok, t};
}

struct SweepStats {
  double contraction = 0.0;  // max a |||R f||| / |||f|||
  double ratio = 0.0;        // max criterion(a_min) / criterion(a_max)
  int failed = 0;
};

SweepStats sweep_stats(const Model& M, std::uint64_t seed) {
  const RunConfig defaults;
  const auto& as = defaults.resolvent.a_list;
  const auto& bs = defaults.resolvent.b_list;
  const auto samples = random_states(M.layout, 20, seed);
  const SweepResult sw = resolvent_sweep(M.gen, *M.metric, bs, as, samples);
  SweepStats st;
  st.failed = sw.failed_cells;
  const std::size_t na = as.size(), ns = samples.size();
  for (const auto& r : sw.records)
    st.contraction = std::max(st.contraction, r.a * r.norm_weighted / M.metric->norm(samples[r.sample_id]));
  for (std::size_t b = 0; b < bs.size(); ++b)
    for (std::size_t s = 0; s < ns; ++s) {
      const double first = sw.records[(b * na) * ns + s].criterion_value;
      const double last = sw.records[(b * na + na - 1) * ns + s].criterion_value;
      st.ratio = std::max(st.ratio, last / first);
    }
  return st;
}

Line c8() {
  bool ok = true;
  std::string t;
  for (bool moving : {false, true}) {
    const Model M = moving ? with_preset(Preset::Compressive, 0.01) : at_rest();
    const SweepStats st = sweep_stats(M, 81);
    ok = ok && st.failed == 0 && st.contraction <= 1.0 + kContraction;
    t += std::string(moving ? " compressive" : "U=0") + ": max a|||R f|||/|||f|||=" + sci(st.contraction);
  }
  return {ok, t};
}

Line c9() {
  const Model M0 = at_rest();
  const SweepStats s0 = sweep_stats(M0, 91);
  bool ok = s0.failed == 0 && s0.ratio <= kCriterionRatio;
  std::string t = "U=0 max ratio=" + sci(s0.ratio);
  for (Preset p : kPresets) {
    const Model M = with_preset(p, 0.01);
    const SweepStats st = sweep_stats(M, 91);
    ok = ok && st.failed == 0 && st.ratio <= kCriterionRatio;
    t += " " + preset_name(p) + "=" + sci(st.ratio);
  }
  return {ok, t};
}

Line c10() {
  bool ok = true;
  std::string t;
  double r16 = 0.0;
  for (int n : {16, 32}) {
    const Model M = with_preset(Preset::Compressive, 0.01, n);
    const KernelReport k = kernel_vector(M.gen, *M.metric);
    const double smin = sigma_min_H0(M.gen);
    ok = ok && k.found && k.mean_ratio >= kKernelFloor && smin > kSigmaFloor;
    t += (n == 16 ? "" : " ") + std::to_string(n) + ": ratio=" + sci(k.mean_ratio) + " sigma_min=" + sci(smin);
    if (n == 16) {
      r16 = k.mean_ratio;
    } else {
      const double drift = std::abs(k.mean_ratio - r16) / r16;
      ok = ok && drift <= kKernelDrift;
      t += " drift=" + sci(drift);
    }
  }
  return {ok, t};
}

Line c11() {
  const CommutatorDefects d = commutator_defects();
  const bool ok = d.one_d <= kCommTol && d.one_d_oracle <= kCommTol && d.two_d <= kCommTol;
  return {ok, "1-D=" + sci(std::max(d.one_d, d.one_d_oracle)) + " 2-D=" + sci(d.two_d) +
                  " written cross-term discrepancy=" + sci(d.written) + " (reported)"};
}

std::string csv_run(int threads) {
  const Model M = with_preset(Preset::Compressive, 0.01, 16);
  const RunConfig defaults;
  const auto samples = random_states(M.layout, 4, 1234);
  const SweepResult sw =
      resolvent_sweep(M.gen, *M.metric, defaults.resolvent.b_list, defaults.resolvent.a_list, samples, threads);
  const auto [tr, xf] = evolve(M.gen, *M.metric, random_state(M.layout, 1234, 0), 0.05, 1.0);
  const auto rep = dissipativity_scan(M.gen, *M.metric, 20, 1234);
  const auto eig = spectrum_leading(M.gen, 6);
  return resolvent_table(sw.records).csv() + energy_table(tr).csv() + dissipativity_table(rep).csv() +
         spectrum_table(eig).csv();
}

Line c12() {
  const std::string a = csv_run(1), b = csv_run(1), c = csv_run(3);
  const bool ok = a == b && a == c && !a.empty();
  return {ok, "repeat identical:" + std::string(a == b ? "yes" : "no") +
                  " thread-count independent:" + (a == c ? "yes" : "no") + " bytes=" + std::to_string(a.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Line()>>> criteria{
      {"xi formula oracle", c1},
      {"elliptic oracles", c2},
      {"summation by parts", c3},
      {"metric reduction and equivalence", c4},
      {"dissipativity", c5},
      {"adjoint identity", c6},
      {"conservation and energy monotonicity", c7},
      {"resolvent contraction", c8},
      {"pointwise resolvent criterion", c9},
      {"kernel geometry", c10},
      {"commutator identities", c11},
      {"determinism", c12}};
  int unexpected = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    const auto t0 = std::chrono::steady_clock::now();
    Line line;
    try {
      line = criteria[k].second();
    } catch (const std::exception& e) {
      line = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = kKnownFailures.count(id) > 0;
    if (!line.pass && !known) ++unexpected;
    std::printf("[%s] %2d %s: %s (%.1fs)%s\n", line.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                line.text.c_str(), secs, !line.pass && known ? " [known failure]" : "");
    std::fflush(stdout);
  }
  std::printf("%d unexpected failure(s)\n", unexpected);
  return unexpected == 0 ? 0 : 1;
}
