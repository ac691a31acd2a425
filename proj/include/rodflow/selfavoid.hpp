#pragma once

// Tangent-point self-avoidance functional with a diagonal cutoff.

#include "rodflow/kernels.hpp"
#include "rodflow/mesh_fem.hpp"

namespace rodflow {

struct TangentPointParams {
  double q = 4.0;
  double rho = 0.0;
  double cutoff = 0.0;    // parameter strip half-width; 2 h_max by default
  int subdivisions = 1;   // 3-point Gauss rule on each of this many sub-intervals
  Exec exec = Exec::serial;

  static TangentPointParams for_mesh(const Mesh1D& mesh, double q = 4.0, double rho = 0.0);
  void validate() const;
};

// Radius of the circle through x that is tangent to t_p at p.
double tp_radius(const Vec3& p, const Vec3& t_p, const Vec3& x);

double tp_energy(const HermiteCurve& curve, const Mesh1D& mesh, const TangentPointParams& params);

// Gradient of tp_energy with respect to the curve dof vector.
Eigen::VectorXd tp_gradient(const HermiteCurve& curve, const Mesh1D& mesh, const TangentPointParams& params);

struct TpValueGradient {
  double energy = 0.0;
  Eigen::VectorXd gradient;
};
TpValueGradient tp_energy_gradient(const HermiteCurve& curve, const Mesh1D& mesh,
                                   const TangentPointParams& params);

// Minimum off-diagonal distance between strands of the sampled curve, with
// pairs closer than `cutoff` in parameter ignored (2 h_max if cutoff <= 0).
double min_strand_distance(const HermiteCurve& curve, const Mesh1D& mesh, double cutoff = 0.0,
                           int samples_per_element = 4, Exec exec = Exec::serial);

}  // namespace rodflow
