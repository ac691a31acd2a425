// Batch driver: run scenarios, sweep presets, and report frame topology.

#include "rodflow/experiments.hpp"
#include "rodflow/flow.hpp"
#include "rodflow/io.hpp"
#include "rodflow/topology.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <future>
#include <iostream>
#include <random>
#include <string>

namespace fs = std::filesystem;
using namespace rodflow;

namespace {

struct RunArgs {
  std::string scenario;
  long steps = -1;
  double tau = 0.0, eps = 0.0, rho = -1.0, q = 0.0, noise = 0.0, perturb = -1.0;
  double kappa = 0.0, beta = -1.0;
  int N = 0;
  unsigned long seed = 0;
  std::string out;
  std::string resume;
  long log_every = 10;
  long dump_every = 500;
  bool quiet = false;
};

ScenarioOverrides overrides_from(const RunArgs& a) {
  ScenarioOverrides o;
  if (a.N > 0) o.N = a.N;
  if (a.kappa > 0.0) o.kappa = a.kappa;
  if (a.beta >= 0.0) o.beta = a.beta;
  if (a.tau > 0.0) o.tau = a.tau;
  if (a.eps > 0.0) o.epsilon = a.eps;
  if (a.rho >= 0.0) o.rho = a.rho;
  if (a.q > 0.0) o.q = a.q;
  if (a.perturb >= 0.0) o.perturbation = a.perturb;
  return o;
}

// Seeded nodal noise on positions, followed by the same tangent/director repair
// as the out-of-plane perturbation.
RodState add_noise(const RodState& s, double amplitude, unsigned long seed) {
  if (amplitude <= 0.0) return s;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, amplitude);
  RodState out = s;
  const Mesh1D& m = *s.mesh;
  const int first = m.periodic() ? 0 : 1;
  const int last = m.periodic() ? m.num_curve_nodes() : m.num_curve_nodes() - 1;
  for (int i = first; i < last; ++i) {
    Vec3& p = out.curve.pos[static_cast<std::size_t>(i)];
    for (int k = 0; k < 3; ++k) p(k) += gauss(rng);
  }
  for (int j = 0; j < m.num_director_nodes(); ++j) {
    const Vec3& t = out.curve.der[static_cast<std::size_t>(m.curve_node(j))];
    Vec3& b = out.director.dir[static_cast<std::size_t>(j)];
    b = (b - b.dot(t) * t).normalized();
  }
  return out;
}

int run_command(const RunArgs& a) {
  Checkpoint start;
  bool resumed = false;
  if (!a.resume.empty()) {
    start = read_checkpoint(a.resume);
    resumed = true;
  } else {
    Scenario sc = build_scenario(a.scenario, overrides_from(a));
    start.scenario = sc.name;
    start.step = 0;
    start.config = sc.config;
    start.bc = sc.bc;
    start.state = add_noise(sc.initial, a.noise, a.seed);
  }
  const long target = a.steps >= 0 ? a.steps : start.config.max_steps;
  if (target < start.step) throw InvalidArgument("--steps is below the checkpoint step");

  const fs::path out = a.out.empty() ? fs::path("out") / start.scenario : fs::path(a.out);
  fs::create_directories(out / "frames");
  const fs::path csv = out / "records.csv";
  const fs::path ckpt = out / "checkpoint.bin";

  if (resumed) truncate_records(csv, start.step);
  RecordWriter writer(csv, resumed);
  if (!resumed) {
    const EnergyBreakdown e0 = energy_breakdown(start.state, start.config);
    writer.write(make_record(0, start.state, e0, start.config.kappa, 0.0, 0.0, 0.0));
    write_frame(out / "frames" / "0.tsv", {0, start.config.kappa, start.state});
    write_checkpoint(ckpt, start);
  }

  FlowConfig cfg = start.config;
  cfg.max_steps = target - start.step;
  RunOptions opts;
  opts.start_step = start.step;
  opts.keep_records = false;
  long last_logged = -1;
  opts.observer = [&](long step, const DiagnosticsRecord& rec, const RodState& state) {
    if (a.log_every > 0 && step % a.log_every == 0) {
      writer.write(rec);
      last_logged = step;
    }
    if (a.dump_every > 0 && step % a.dump_every == 0) {
      writer.flush();
      write_frame(out / "frames" / (std::to_string(step) + ".tsv"), {step, start.config.kappa, state});
      write_checkpoint(ckpt, {start.scenario, step, start.config, start.bc, state});
    }
    if (!a.quiet && a.log_every > 0 && step % (a.log_every * 100) == 0) {
      std::cerr << start.scenario << " step " << step << " total " << rec.energy.total << " twist "
                << rec.total_twist << '\n';
    }
  };

  try {
    const RunResult res = run_flow(start.state, cfg, start.bc, opts);
    if (res.last_step != last_logged && res.steps_taken > 0) {
      const EnergyBreakdown e = energy_breakdown(res.final_state, start.config);
      writer.write(make_record(res.last_step, res.final_state, e, start.config.kappa, std::nan(""), std::nan(""), 0.0));
    }
    writer.flush();
    write_frame(out / "frames" / (std::to_string(res.last_step) + ".tsv"),
                {res.last_step, start.config.kappa, res.final_state});
    write_checkpoint(ckpt, {start.scenario, res.last_step, start.config, start.bc, res.final_state});
    if (!a.quiet) {
      std::cerr << start.scenario << ": " << res.steps_taken << " steps" << (res.converged ? " (converged)" : "")
                << ", energy increases flagged: " << res.energy_increases << '\n';
    }
  } catch (const FlowAbort& e) {
    writer.flush();
    write_checkpoint(ckpt, {start.scenario, e.step(), start.config, start.bc, e.last_good()});
    throw;
  }
  return 0;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

int diag_command(const std::string& path, double offset) {
  const FrameDump f = read_frame(path);
  const double kappa = f.kappa > 0.0 ? f.kappa : 2.0;
  const TopologyReport r = topology_report(f.state, kappa, offset);
  nlohmann::ordered_json j;
  j["frame"] = path;
  j["step"] = f.step;
  j["nodes"] = f.state.mesh->num_director_nodes();
  j["periodic"] = f.state.mesh->periodic();
  j["length"] = f.state.mesh->length();
  j["total_twist"] = r.total_twist;
  j["writhe"] = optional_json(r.writhe);
  j["linking_number"] = optional_json(r.linking_number);
  j["calugareanu_residual"] = optional_json(r.calugareanu_residual);
  j["uniformity_quotient"] = optional_json(r.uniformity_quotient);
  j["near_self_intersection"] = r.near_self_intersection;
  j["constraint_violation"] = constraint_violation(f.state);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int sweep_command(const std::string& family, const RunArgs& base, int jobs) {
  const std::vector<std::string> names = sweep_preset(family);
  const fs::path root = base.out.empty() ? fs::path("out") / ("sweep_" + family) : fs::path(base.out);
  std::vector<std::future<int>> running;
  int failures = 0;
  auto drain = [&](std::size_t keep) {
    while (running.size() > keep) {
      failures += running.front().get();
      running.erase(running.begin());
    }
  };
  for (const auto& name : names) {
    RunArgs a = base;
    a.scenario = name;
    a.out = (root / name).string();
    a.quiet = true;
    drain(static_cast<std::size_t>(std::max(1, jobs)) - 1);
    running.push_back(std::async(std::launch::async, [a] {
      try {
        run_command(a);
        std::cerr << a.scenario << ": done\n";
        return 0;
      } catch (const std::exception& e) {
        std::cerr << a.scenario << ": " << e.what() << '\n';
        return 1;
      }
    }));
  }
  drain(0);
  return failures ? 1 : 0;
}

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--steps", a.steps, "Target step index (absolute)");
  cmd->add_option("--tau", a.tau, "Time step size");
  cmd->add_option("--eps", a.eps, "Penalty parameter epsilon");
  cmd->add_option("--rho", a.rho, "Tangent-point weight");
  cmd->add_option("--q", a.q, "Tangent-point exponent");
  cmd->add_option("--seed", a.seed, "Seed for --noise");
  cmd->add_option("--noise", a.noise, "Standard deviation of random nodal noise");
  cmd->add_option("--perturb", a.perturb, "Out-of-plane perturbation amplitude");
  cmd->add_option("--N", a.N, "Number of elements");
  cmd->add_option("--kappa", a.kappa, "Bending/twisting ratio");
  cmd->add_option("--beta", a.beta, "Initial twist rate");
  cmd->add_option("--out", a.out, "Output directory");
  cmd->add_option("--log-every", a.log_every, "Record cadence");
  cmd->add_option("--dump-every", a.dump_every, "Frame and checkpoint cadence");
  cmd->add_flag("--quiet", a.quiet, "No progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rodflow: bending-torsion gradient flow for elastic rods"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("scenario", run_args.scenario, "uniframe, michell(beta), overtwist, f8(kappa), clamped, imper_a, imper_b");
  run->add_option("--resume", run_args.resume, "Continue from a checkpoint");
  add_run_options(run, run_args);

  RunArgs sweep_args;
  std::string family;
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run a preset sweep");
  sweep->add_option("family", family, "michell or f8")->required();
  sweep->add_option("--jobs", jobs, "Concurrent runs");
  add_run_options(sweep, sweep_args);

  std::string frame;
  double offset = 0.0;
  auto* diag = app.add_subcommand("diag", "Topology report of a frame dump as JSON");
  diag->add_option("frame", frame, "Frame TSV file")->required();
  diag->add_option("--offset", offset, "Ribbon offset for the linking number");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      if (run_args.scenario.empty() == run_args.resume.empty()) {
        std::cerr << "run: give either a scenario or --resume\n";
        return 2;
      }
      return run_command(run_args);
    }
    if (*sweep) return sweep_command(family, sweep_args, jobs);
    if (*diag) return diag_command(frame, offset);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
