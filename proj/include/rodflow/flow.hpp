#pragma once

// Semi-implicit constrained gradient flow: one curve solve, then one director
// solve per step, each in the linearized admissible space.

#include "rodflow/kkt.hpp"
#include "rodflow/rod_model.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace rodflow {

struct StepResult {
  RodState state;
  double vy_norm = 0.0;  // |d_t y| in the curve metric
  double vb_norm = 0.0;  // |d_t b| in the director metric
  EnergyBreakdown energy_before;
  EnergyBreakdown energy_after;
  bool energy_increased = false;
  double wall_ms = 0.0;
};

struct DiagnosticsRecord {
  long step = 0;
  EnergyBreakdown energy;
  double total_twist = 0.0;
  std::optional<double> uniformity;
  double vy = 0.0;
  double vb = 0.0;
  double violation = 0.0;  // max |y'(z)|^2 - 1| + max ||b(z)|^2 - 1|
  double wall_ms = 0.0;
};

// Max-norm deviation of nodal tangent and director lengths from one.
double constraint_violation(const RodState& state);

DiagnosticsRecord make_record(long step, const RodState& state, const EnergyBreakdown& energy, double kappa,
                              double vy, double vb, double wall_ms);

// Holds the constant forms and the symbolic factorizations for one mesh and
// configuration.
class RodFlow {
 public:
  RodFlow(std::shared_ptr<const Mesh1D> mesh, FlowConfig cfg, BoundaryCondition bc);

  // Performs one step. `energy_before` may be supplied to avoid re-evaluating it.
  StepResult step(const RodState& state, const EnergyBreakdown* energy_before = nullptr, long step_index = 0);

  const FlowConfig& config() const { return cfg_; }
  const BoundaryCondition& bc() const { return bc_; }
  const FlowForms& forms() const { return forms_; }

 private:
  std::shared_ptr<const Mesh1D> mesh_;
  FlowConfig cfg_;
  BoundaryCondition bc_;
  FlowForms forms_;
  KktSolver curve_solver_;
  KktSolver director_solver_;
};

StepResult flow_step(const RodState& state, const FlowConfig& cfg, const BoundaryCondition& bc);

// Thrown when the energy becomes non-finite; carries the last finite state.
class FlowAbort : public Error {
 public:
  FlowAbort(const std::string& what, RodState last_good, long step)
      : Error(what), last_good_(std::move(last_good)), step_(step) {}
  const RodState& last_good() const { return last_good_; }
  long step() const { return step_; }

 private:
  RodState last_good_;
  long step_;
};

using Observer = std::function<void(long step, const DiagnosticsRecord& record, const RodState& state)>;

struct RunOptions {
  long start_step = 0;        // index of state0; steps continue from start_step + 1
  bool keep_records = true;
  Observer observer;
};

struct RunResult {
  RodState final_state;
  std::vector<DiagnosticsRecord> records;
  long steps_taken = 0;
  long last_step = 0;
  bool converged = false;
  long energy_increases = 0;
  double max_relative_increase = 0.0;
  double dissipation = 0.0;  // tau * sum(|d_t y|^2 + |d_t b|^2)
  EnergyBreakdown initial_energy;
};

// Iterates until |d_t y| + |d_t b| <= eps_stop or cfg.max_steps steps have
// been taken in this call. Records cover steps start_step+1, ... only.
RunResult run_flow(const RodState& state0, const FlowConfig& cfg, const BoundaryCondition& bc,
                   const RunOptions& options = {});

}  // namespace rodflow
