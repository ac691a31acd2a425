// Acceptance runs. `rodflow_acceptance N` runs criterion N (1..10); with no
// argument every criterion runs in turn. One PASS/FAIL line per criterion.

#include "support.hpp"

#include "rodflow/experiments.hpp"
#include "rodflow/flow.hpp"
#include "rodflow/io.hpp"
#include "rodflow/selfavoid.hpp"
#include "rodflow/specialfn.hpp"
#include "rodflow/topology.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

using namespace rodflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (ok ? "" : "[x] ") << what << "; ";
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunResult run_steps(const Scenario& sc, long steps, const Observer& obs = {}) {
  FlowConfig cfg = sc.config;
  cfg.max_steps = steps;
  cfg.eps_stop = 1e-300;  // fixed step budgets
  RunOptions opts;
  opts.keep_records = false;
  opts.observer = obs;
  return run_flow(sc.initial, cfg, sc.bc, opts);
}

// Twist dissipation on the straight rod.
Outcome ac1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = build_scenario("uniframe");
  const double e0 = energy_breakdown(sc.initial, sc.config).twisting;
  double worst_twist = std::abs(total_twist(sc.initial) - 1.0);
  double best = std::numeric_limits<double>::infinity();
  double last = e0;
  const RunResult r = run_steps(sc, 6000, [&](long, const DiagnosticsRecord& rec, const RodState&) {
    worst_twist = std::max(worst_twist, std::abs(rec.total_twist - 1.0));
    best = std::min(best, std::abs(rec.energy.twisting - kPi) / kPi);
    last = rec.energy.twisting;
  });
  const double secs = seconds_since(t0);
  o.require(std::abs(e0 - 4.0 * kPi) <= 0.02 * 4.0 * kPi, "initial twisting " + fmt(e0) + " vs 4pi");
  o.require(std::abs(last - kPi) <= 0.02 * kPi, "twisting at step " + std::to_string(r.last_step) + " " + fmt(last) + " vs pi");
  o.require(worst_twist <= 1e-3, "max |Tw-1| " + fmt(worst_twist));
  o.require(secs < 120.0, "runtime " + fmt(secs) + " s");
  return o;
}

// Stability threshold on the closed twisted rod, reduced resolution.
Outcome ac2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioOverrides ov;
  ov.N = 100;
  ov.epsilon = 1e-5;
  {
    const Scenario sc = build_scenario("michell(2.5)", ov);
    const double e0 = energy_breakdown(sc.initial, sc.config).twisting;
    double drift = 0.0;
    run_steps(sc, 50000, [&](long, const DiagnosticsRecord& rec, const RodState&) {
      drift = std::max(drift, std::abs(rec.energy.twisting - e0) / e0);
    });
    o.require(drift < 1e-3, "beta 2.5: max relative twisting change " + fmt(drift));
  }
  {
    const Scenario sc = build_scenario("michell(4.2)", ov);
    double low = std::numeric_limits<double>::infinity();
    const RunResult r = run_steps(sc, 200000, [&](long, const DiagnosticsRecord& rec, const RodState&) {
      low = std::min(low, rec.energy.twisting);
    });
    const double tw = total_twist(r.final_state);
    o.require(low < 27.0 * kPi / 4.0, "beta 4.2: min twisting " + fmt(low) + " vs 27pi/4");
    o.require(std::abs(tw - 2.2) <= 0.05, "beta 4.2: final Tw " + fmt(tw));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 1800.0, "runtime " + fmt(secs) + " s");
  return o;
}

// Energy decrease in every scenario at the default step size.
Outcome ac3() {
  Outcome o;
  for (const auto& name : scenario_names()) {
    ScenarioOverrides ov;
    ov.N = name == "imper_a" ? 200 : 100;
    const Scenario sc = build_scenario(name, ov);
    const RunResult r = run_steps(sc, 5000);
    const double final_e = energy_breakdown(r.final_state, sc.config).total;
    const double bound = r.initial_energy.total;
    const bool telescoped = final_e + r.dissipation <= bound + 1e-10 * std::abs(bound);
    o.require(r.energy_increases == 0 && telescoped,
              name + ": increases " + std::to_string(r.energy_increases) + ", max rel " + fmt(r.max_relative_increase) +
                  ", E+D-E0 " + fmt(final_e + r.dissipation - bound));
  }
  return o;
}

// Unit-length violation against the step size.
Outcome ac4() {
  Outcome o;
  double v[2];
  for (int k = 0; k < 2; ++k) {
    ScenarioOverrides ov;
    Scenario sc = build_scenario("uniframe");
    if (k == 1) sc.config.tau *= 0.5;
    double worst = constraint_violation(sc.initial);
    run_steps(sc, 5000, [&](long, const DiagnosticsRecord& rec, const RodState&) {
      worst = std::max(worst, rec.violation);
    });
    v[k] = worst;
  }
  const double ratio = v[1] / v[0];
  o.require(std::isfinite(v[0]) && std::isfinite(v[1]), "violations " + fmt(v[0]) + ", " + fmt(v[1]));
  o.require(std::abs(ratio - 0.5) <= 0.125, "ratio " + fmt(ratio));
  return o;
}

// Discrete energy of the exactly framed twisted circle under refinement.
Outcome ac5() {
  Outcome o;
  const double kappa = 2.0, beta = 3.0;
  const double exact = kappa * kPi + kPi * beta * beta;
  FlowConfig cfg;
  cfg.kappa = kappa;
  cfg.epsilon = 1e-3;
  double prev = 0.0;
  for (int N : {50, 100, 200, 400}) {
    const RodState s = make_circle_rod(2.0 * kPi, N, beta);
    const EnergyBreakdown e = energy_breakdown(s, cfg);
    const double err = std::abs(e.total - exact);
    o.require(e.penalty <= 1e-20, "N " + std::to_string(N) + " penalty " + fmt(e.penalty));
    if (prev > 0.0) o.require(prev / err >= 1.8, "N " + std::to_string(N) + " error " + fmt(err) + " factor " + fmt(prev / err));
    else o.detail << "N 50 error " << fmt(err) << "; ";
    prev = err;
  }
  return o;
}

// Topological quantities.
Outcome ac6() {
  Outcome o;
  const RodState planar = make_circle_rod(2.0 * kPi, 200, 0.0);
  const double wr = writhe(planar.curve, *planar.mesh);
  o.require(std::abs(wr) < 1e-2, "planar writhe " + fmt(wr));
  for (int n : {1, 2, 5}) {
    const double tw = total_twist(make_circle_rod(2.0 * kPi, 200, n));
    o.require(std::abs(tw - n) <= 1e-3, "Tw for beta " + std::to_string(n) + " " + fmt(tw));
  }
  const RodState bent = perturb_out_of_plane(make_circle_rod(2.0 * kPi, 400, 2.0), 0.1, 3.0);
  const double res = calugareanu_residual(bent);
  o.require(std::abs(res) < 2e-2, "Lk-Tw-Wr " + fmt(res));
  for (double beta : {1.0, 3.0, 4.2}) {
    const double q = uniformity_quotient(make_circle_rod(2.0 * kPi, 400, beta), 2.0).value_or(0.0);
    o.require(std::abs(q - 1.0) <= 1e-3, "uniform frame quotient " + fmt(q));
  }
  // closed twisted rod past the threshold, through the instability
  const Scenario sc = build_scenario("michell(4.2)");
  long total = 0, close = 0;
  double worst = 0.0;
  run_steps(sc, 200000, [&](long, const DiagnosticsRecord& rec, const RodState&) {
    if (!rec.uniformity) return;
    const double dev = std::abs(*rec.uniformity - 1.0);
    ++total;
    if (dev < 1.0 / 200.0) ++close;
    worst = std::max(worst, dev);
  });
  const double frac = total ? static_cast<double>(close) / total : 0.0;
  o.require(frac >= 0.75, "quotient within 1/200 on " + fmt(100.0 * frac) + "% of steps (max dev " + fmt(worst) + ")");
  return o;
}

// Figure-eight threshold and the elliptic-function gates.
Outcome ac7() {
  Outcome o;
  const double m = figure_eight_modulus();
  o.require(m > 0.8261 && m < 0.8262, "modulus " + fmt(m));
  o.require(std::abs(complete_K(m) - 2.321) <= 1e-3, "K " + fmt(complete_K(m)));
  const double L = 4.0 * std::sqrt(2.0) * incomplete_E(kPi / 2, -2.0);
  o.require(std::abs(L - 12.357) <= 1e-3, "length gate " + fmt(L));
  ScenarioOverrides ov;
  ov.N = 100;
  {
    ov.kappa = 0.6;
    const Scenario sc = build_scenario("f8(0.6)", ov);
    double peak = 0.0;
    long when = -1;
    run_steps(sc, 200000, [&](long k, const DiagnosticsRecord& rec, const RodState&) {
      if (std::abs(rec.total_twist) > peak) peak = std::abs(rec.total_twist);
      if (when < 0 && std::abs(rec.total_twist) > 0.5) when = k;
    });
    o.require(peak > 0.5, "kappa 0.6: max |Tw| " + fmt(peak) + (when > 0 ? " (0.5 passed at step " + std::to_string(when) + ")" : ""));
  }
  {
    ov.kappa = 0.45;
    const Scenario sc = build_scenario("f8(0.45)", ov);
    double peak = 0.0;
    run_steps(sc, 200000, [&](long, const DiagnosticsRecord& rec, const RodState&) {
      peak = std::max(peak, std::abs(rec.total_twist));
    });
    o.require(peak < 0.05, "kappa 0.45: max |Tw| " + fmt(peak));
  }
  return o;
}

// First variations against central differences.
Outcome ac8() {
  Outcome o;
  std::mt19937_64 rng(2024);
  const EnergyTerm terms[] = {EnergyTerm::bending, EnergyTerm::G_h, EnergyTerm::N_h, EnergyTerm::penalty, EnergyTerm::TP};
  const char* names[] = {"bending", "G_h", "N_h", "penalty", "TP"};
  FlowConfig cfg;
  cfg.kappa = 1.5;  // theta < 1 so the residual term is active
  cfg.epsilon = 1e-2;
  cfg.rho = 0.1;
  for (int t = 0; t < 5; ++t) {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const RodState s = testing::tilted(
          trial % 2 ? testing::random_open_state(rng, 16) : testing::random_closed_state(rng, 16, 2.0), rng, 0.05);
      for (Field f : {Field::curve, Field::director}) {
        const Eigen::Index n = f == Field::curve ? s.mesh->num_curve_dofs() : s.mesh->num_director_dofs();
        const Eigen::VectorXd d = testing::random_direction(rng, n);
        const double an = directional_derivative(terms[t], s, d, f, cfg);
        const double fd = testing::fd_derivative(terms[t], s, f, d, cfg);
        const double scale = std::max({std::abs(an), std::abs(fd), 1e-12});
        worst = std::max(worst, std::abs(an - fd) / scale);
      }
    }
    o.require(worst <= 1e-6, std::string(names[t]) + " max rel err " + fmt(worst));
  }
  return o;
}

// Self-avoidance.
Outcome ac9() {
  Outcome o;
  double radius_err = 0.0;
  for (double R : {0.5, 1.0, 3.0})
    for (double s : {0.0, 0.9, 2.2})
      for (double u : {0.3, 1.5, 3.0}) {
        const Vec3 p(R * std::cos(s), R * std::sin(s), 0.0), t(-std::sin(s), std::cos(s), 0.0);
        const Vec3 x(R * std::cos(s + u), R * std::sin(s + u), 0.0);
        radius_err = std::max(radius_err, std::abs(tp_radius(p, t, x) - R));
      }
  o.require(radius_err <= 1e-10, "radius err " + fmt(radius_err));

  const RodState c = make_circle_rod(2.0 * kPi, 100, 0.0);
  const TangentPointParams tp = TangentPointParams::for_mesh(*c.mesh);
  const double e = tp_energy(c.curve, *c.mesh, tp);
  // dense midpoint sum at 10x the quadrature resolution
  const int M = 3000;
  const double h = 2.0 * kPi / M;
  double brute = 0.0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const double a = (i + 0.5) * h, b = (j + 0.5) * h;
      double d = std::abs(a - b);
      d = std::min(d, 2.0 * kPi - d);
      if (d < tp.cutoff) continue;
      const Vec3 p(std::cos(b), std::sin(b), 0.0), t(-std::sin(b), std::cos(b), 0.0), x(std::cos(a), std::sin(a), 0.0);
      brute += std::pow(2.0 * tp_radius(p, t, x), -tp.q) / tp.q * h * h;
    }
  o.require(std::abs(e - brute) <= 5e-3 * brute, "circle TP " + fmt(e) + " vs " + fmt(brute));

  for (double rho : {0.1, 0.0}) {
    ScenarioOverrides ov;
    ov.N = 200;
    ov.rho = rho;
    const Scenario sc = build_scenario("imper_a", ov);
    double dmin = min_strand_distance(sc.initial.curve, *sc.initial.mesh, 0.0, 4, default_exec());
    long at = 0;
    try {
      run_steps(sc, 20000, [&](long k, const DiagnosticsRecord&, const RodState& s) {
        const double d = min_strand_distance(s.curve, *s.mesh, 0.0, 4, default_exec());
        if (d < dmin) {
          dmin = d;
          at = k;
        }
      });
    } catch (const std::exception& ex) {
      o.detail << "rho " << fmt(rho) << " stopped: " << ex.what() << "; ";
    }
    if (rho > 0.0) o.require(dmin >= 0.02, "rho 0.1: min distance " + fmt(dmin) + " at step " + std::to_string(at));
    else o.require(dmin < 0.005, "rho 0: min distance " + fmt(dmin) + " at step " + std::to_string(at));
  }
  return o;
}

bool same_record(const DiagnosticsRecord& a, const DiagnosticsRecord& b) {
  auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.step == b.step && eq(a.energy.bending, b.energy.bending) && eq(a.energy.twisting, b.energy.twisting) &&
         eq(a.energy.penalty, b.energy.penalty) && eq(a.energy.tangent_point, b.energy.tangent_point) &&
         eq(a.energy.total, b.energy.total) && eq(a.total_twist, b.total_twist) &&
         a.uniformity.has_value() == b.uniformity.has_value() &&
         (!a.uniformity || eq(*a.uniformity, *b.uniformity)) && eq(a.vy, b.vy) && eq(a.vb, b.vb) &&
         eq(a.violation, b.violation);
}

// Interrupted runs resumed from a checkpoint file against straight runs.
Outcome ac10() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "rodflow_acceptance_resume";
  fs::create_directories(dir);
  for (const char* name : {"uniframe", "f8"}) {
    ScenarioOverrides ov;
    ov.N = 100;
    const Scenario sc = build_scenario(name, ov);
    const long total = 1000, cut = 500;
    FlowConfig cfg = sc.config;
    cfg.eps_stop = 1e-300;
    cfg.max_steps = total;
    const RunResult straight = run_flow(sc.initial, cfg, sc.bc);

    cfg.max_steps = cut;
    const RunResult first = run_flow(sc.initial, cfg, sc.bc);
    const fs::path ck = dir / (std::string(name) + ".bin");
    write_checkpoint(ck, {sc.name, first.last_step, cfg, sc.bc, first.final_state});
    const Checkpoint back = read_checkpoint(ck);
    FlowConfig cfg2 = back.config;
    cfg2.max_steps = total - back.step;
    RunOptions opts;
    opts.start_step = back.step;
    const RunResult second = run_flow(back.state, cfg2, back.bc, opts);

    std::vector<DiagnosticsRecord> joined = first.records;
    joined.insert(joined.end(), second.records.begin(), second.records.end());
    bool same = joined.size() == straight.records.size();
    for (std::size_t i = 0; same && i < joined.size(); ++i) same = same_record(joined[i], straight.records[i]);
    same = same && pack_curve(second.final_state.curve) == pack_curve(straight.final_state.curve) &&
           pack_director(second.final_state.director) == pack_director(straight.final_state.director);
    o.require(same, std::string(name) + ": " + std::to_string(joined.size()) + " records compared");
  }
  fs::remove_all(dir);
  return o;
}

const std::function<Outcome()> kCriteria[] = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10};
const char* kTitles[] = {"twist dissipation",  "stability threshold", "energy monotonicity", "violation scaling",
                         "energy consistency", "topology",            "figure-eight threshold",
                         "gradient fidelity",  "self-avoidance",      "determinism"};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  if (argc > 1) {
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  } else {
    for (int i = 1; i <= 10; ++i) which.push_back(i);
  }
  int failures = 0;
  for (int id : which) {
    if (id < 1 || id > 10) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = kCriteria[id - 1]();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail << "exception: " << e.what();
    }
    std::cout << "AC" << id << ' ' << (r.pass ? "PASS" : "FAIL") << ' ' << kTitles[id - 1] << " (" << fmt(seconds_since(t0))
              << " s): " << r.detail.str() << std::endl;
    if (!r.pass) ++failures;
  }
  return failures ? 1 : 0;
}
