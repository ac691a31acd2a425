#pragma once

// Rod state, boundary conditions, and the split discrete bending-torsion
// energy together with its term-wise first variations.

#include "rodflow/mesh_fem.hpp"

#include <Eigen/SparseCore>

#include <memory>
#include <string_view>

namespace rodflow {

enum class BcKind { periodic, clamped_both, clamped_director_only };

std::string_view to_string(BcKind kind);
BcKind bc_kind_from_string(std::string_view name);

// Endpoint targets. For periodic curves only the director targets are used.
struct BoundaryCondition {
  BcKind kind = BcKind::periodic;
  Vec3 y0 = Vec3::Zero(), dy0 = Vec3::UnitX();
  Vec3 yL = Vec3::Zero(), dyL = Vec3::UnitX();
  Vec3 b0 = Vec3::UnitY(), bL = Vec3::UnitY();
};

struct FlowConfig {
  double kappa = 2.0;
  double epsilon = 1e-3;
  double tau = 1e-3;
  double rho = 0.0;
  double q = 4.0;
  double eps_stop = 1e-7;
  long max_steps = 200000;
  // Weights of the (L2, H1, H2) parts of the curve metric and (L2, H1) of the
  // director metric.
  double star_weights[3] = {1.0, 1.0, 1.0};
  double dagger_weights[2] = {1.0, 1.0};

  double theta() const;
  void validate() const;
};

double theta(double kappa);

struct RodState {
  std::shared_ptr<const Mesh1D> mesh;
  HermiteCurve curve;
  DirectorField director;
};

// Reads the endpoint values of a state into a boundary condition of the given kind.
BoundaryCondition bc_from_state(const RodState& state, BcKind kind);

struct EnergyBreakdown {
  double bending = 0.0;
  double twisting = 0.0;
  double penalty = 0.0;
  double tangent_point = 0.0;
  double total = 0.0;
};

// Element-by-element evaluation with exact or degree-5 Gauss integration.
EnergyBreakdown energy_breakdown(const RodState& state, const FlowConfig& cfg);

// Same energy through assembled quadratic forms; used as an independent route.
EnergyBreakdown energy_breakdown_assembled(const RodState& state, const FlowConfig& cfg);

// Individual pieces of the twisting term.
struct TwistParts {
  double convex = 0.0;    // (theta/2)|b'|^2
  double concave = 0.0;   // (theta/2)|Q_h b . y''|^2, enters with a minus sign
  double residual = 0.0;  // N_h
};
TwistParts twist_parts(const RodState& state, double kappa);

double penalty_energy(const HermiteCurve& curve, const DirectorField& director, const Mesh1D& mesh,
                      double epsilon);

struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

// Constant forms shared by every step on one mesh.
struct FlowForms {
  Eigen::SparseMatrix<double> bending;   // curve (v'', w'')
  Eigen::SparseMatrix<double> star;      // curve metric
  Eigen::SparseMatrix<double> h1;        // director (r', s')
  Eigen::SparseMatrix<double> dagger;    // director metric
  Eigen::SparseMatrix<double> curve_base;     // star + tau kappa bending
  Eigen::SparseMatrix<double> director_base;  // dagger + tau theta h1

  static FlowForms build(const Mesh1D& mesh, const FlowConfig& cfg);
};

// Step (1): system for the curve velocity v with y^k = y^{k-1} + tau v.
LinearSystem assemble_curve_step(const RodState& prev, const FlowConfig& cfg, const FlowForms& forms);
LinearSystem assemble_curve_step(const RodState& prev, const FlowConfig& cfg);

// Step (2): system for the director velocity u with b^k = b^{k-1} + tau u.
LinearSystem assemble_director_step(const RodState& prev, const HermiteCurve& curve_new,
                                    const FlowConfig& cfg, const FlowForms& forms);
LinearSystem assemble_director_step(const RodState& prev, const HermiteCurve& curve_new,
                                    const FlowConfig& cfg);

enum class EnergyTerm { bending, G_h, N_h, penalty, TP };
enum class Field { curve, director };

EnergyTerm energy_term_from_string(std::string_view name);

// Value of one term: bending, G_h = (theta/2)|b'|^2 - (theta/2)|Q_h b . y''|^2,
// N_h, penalty, and the unweighted tangent-point energy.
double term_value(EnergyTerm term, const RodState& state, const FlowConfig& cfg);

// Gradient of a term with respect to the curve or director dof vector.
Eigen::VectorXd term_gradient(EnergyTerm term, const RodState& state, Field which, const FlowConfig& cfg);

// Analytic first variation of a term along a dof-space direction.
double directional_derivative(EnergyTerm term, const RodState& state, const Eigen::VectorXd& direction,
                              Field which, const FlowConfig& cfg);

}  // namespace rodflow
