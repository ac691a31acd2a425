#include "rodflow/flow.hpp"

#include "rodflow/topology.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace rodflow {

double constraint_violation(const RodState& state) {
  double vy = 0.0, vb = 0.0;
  for (const Vec3& d : state.curve.der) vy = std::max(vy, std::abs(d.squaredNorm() - 1.0));
  for (const Vec3& b : state.director.dir) vb = std::max(vb, std::abs(b.squaredNorm() - 1.0));
  return vy + vb;
}

DiagnosticsRecord make_record(long step, const RodState& state, const EnergyBreakdown& energy, double /*kappa*/,
                              double vy, double vb, double wall_ms) {
  DiagnosticsRecord r;
  r.step = step;
  r.energy = energy;
  r.total_twist = total_twist(state);
  r.uniformity = uniformity_quotient(r.total_twist, state.mesh->length(), energy.twisting);
  r.vy = vy;
  r.vb = vb;
  r.violation = constraint_violation(state);
  r.wall_ms = wall_ms;
  return r;
}

RodFlow::RodFlow(std::shared_ptr<const Mesh1D> mesh, FlowConfig cfg, BoundaryCondition bc)
    : mesh_(std::move(mesh)), cfg_(cfg), bc_(bc) {
  if (!mesh_) throw InvalidArgument("RodFlow: missing mesh");
  cfg_.validate();
  if ((bc_.kind == BcKind::periodic) != mesh_->periodic())
    throw InvalidArgument("RodFlow: boundary condition does not match mesh periodicity");
  forms_ = FlowForms::build(*mesh_, cfg_);
}

StepResult RodFlow::step(const RodState& state, const EnergyBreakdown* energy_before, long step_index) {
  const auto t0 = std::chrono::steady_clock::now();
  if (state.mesh.get() != mesh_.get() && !(state.mesh && state.mesh->nodes().size() == mesh_->nodes().size()))
    throw InvalidArgument("RodFlow::step: state lives on a different mesh");

  StepResult out;
  out.energy_before = energy_before ? *energy_before : energy_breakdown(state, cfg_);

  try {
    const LinearSystem cs = assemble_curve_step(state, cfg_, forms_);
    const ConstraintSet cc = build_constraints(state, Field::curve, bc_);
    const Eigen::VectorXd v = curve_solver_.solve(cs.matrix, cs.rhs, cc).x;
    const HermiteCurve curve_new = unpack_curve(pack_curve(state.curve) + cfg_.tau * v);

    const LinearSystem ds = assemble_director_step(state, curve_new, cfg_, forms_);
    const ConstraintSet dc = build_constraints(state, Field::director, bc_);
    const Eigen::VectorXd u = director_solver_.solve(ds.matrix, ds.rhs, dc).x;

    out.state.mesh = state.mesh;
    out.state.curve = curve_new;
    out.state.director = unpack_director(pack_director(state.director) + cfg_.tau * u);
    out.vy_norm = std::sqrt(std::max(0.0, v.dot(forms_.star * v)));
    out.vb_norm = std::sqrt(std::max(0.0, u.dot(forms_.dagger * u)));
  } catch (const SingularSystemError& e) {
    throw SingularSystemError("step " + std::to_string(step_index) + ": " + e.what());
  }

  out.energy_after = energy_breakdown(out.state, cfg_);
  const double before = out.energy_before.total;
  out.energy_increased = out.energy_after.total > before + 1e-10 * std::abs(before);
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

StepResult flow_step(const RodState& state, const FlowConfig& cfg, const BoundaryCondition& bc) {
  RodFlow flow(state.mesh, cfg, bc);
  return flow.step(state);
}

RunResult run_flow(const RodState& state0, const FlowConfig& cfg, const BoundaryCondition& bc,
                   const RunOptions& options) {
  RodFlow flow(state0.mesh, cfg, bc);
  RunResult result;
  result.final_state = state0;
  result.last_step = options.start_step;
  EnergyBreakdown energy = energy_breakdown(state0, cfg);
  result.initial_energy = energy;
  if (!std::isfinite(energy.total)) throw FlowAbort("initial energy is not finite", state0, options.start_step);

  for (long k = 1; k <= cfg.max_steps; ++k) {
    const long step = options.start_step + k;
    StepResult sr = flow.step(result.final_state, &energy, step);
    if (!std::isfinite(sr.energy_after.total) || !std::isfinite(sr.vy_norm) || !std::isfinite(sr.vb_norm)) {
      throw FlowAbort("non-finite energy at step " + std::to_string(step), result.final_state, step - 1);
    }
    if (sr.energy_increased) {
      ++result.energy_increases;
      const double rel = (sr.energy_after.total - energy.total) / std::max(std::abs(energy.total), 1e-300);
      result.max_relative_increase = std::max(result.max_relative_increase, rel);
    }
    result.dissipation += cfg.tau * (sr.vy_norm * sr.vy_norm + sr.vb_norm * sr.vb_norm);
    energy = sr.energy_after;
    result.final_state = std::move(sr.state);
    result.steps_taken = k;
    result.last_step = step;

    if (options.keep_records || options.observer) {
      const DiagnosticsRecord rec =
          make_record(step, result.final_state, energy, cfg.kappa, sr.vy_norm, sr.vb_norm, sr.wall_ms);
      if (options.observer) options.observer(step, rec, result.final_state);
      if (options.keep_records) result.records.push_back(rec);
    }
    if (sr.vy_norm + sr.vb_norm <= cfg.eps_stop) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace rodflow
