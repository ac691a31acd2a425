#pragma once

// Twist, writhe, linking number and related frame diagnostics.

#include "rodflow/kernels.hpp"
#include "rodflow/rod_model.hpp"

#include <optional>
#include <vector>

namespace rodflow {

// (1/2pi) times the integral of the rotation rate of b about y', which is
// det(y', b, b') / (|y'| |b|^2); 3-point Gauss rule per element.
double total_twist(const RodState& state);

// Same integral restricted to [a, b].
double total_twist_between(const RodState& state, double a, double b);

// Element means of the twist rate; sum(h_e * rate_e) = 2pi * total_twist.
std::vector<double> twist_rate_profile(const RodState& state);

struct WritheResult {
  double value = 0.0;
  double min_distance = 0.0;
  bool near_self_intersection = false;  // min off-diagonal distance below 1e-6
};

double writhe(const HermiteCurve& curve, const Mesh1D& mesh, Exec exec = Exec::serial);
WritheResult writhe_report(const HermiteCurve& curve, const Mesh1D& mesh, Exec exec = Exec::serial);

struct LinkingResult {
  double raw = 0.0;
  long rounded = 0;
};

// Linking number of y and y + offset * b, both sampled as polygons.
// offset <= 0 selects 0.05 * h_min.
LinkingResult linking_number(const HermiteCurve& curve, const DirectorField& director, const Mesh1D& mesh,
                             double offset = 0.0, int samples_per_element = 4, Exec exec = Exec::serial);

// Plain closed polygon pair.
double gauss_linking(const std::vector<Vec3>& a, const std::vector<Vec3>& b, Exec exec = Exec::serial);

double calugareanu_residual(const RodState& state, double offset = 0.0);

// (2pi^2 / L) Tw^2 over the twisting energy; empty when that energy is not positive.
std::optional<double> uniformity_quotient(const RodState& state, double kappa);
std::optional<double> uniformity_quotient(double total_twist, double length, double twisting_energy);

struct TopologyReport {
  double total_twist = 0.0;
  std::optional<double> writhe;
  std::optional<double> linking_number;
  std::optional<double> calugareanu_residual;
  std::optional<double> uniformity_quotient;
  bool near_self_intersection = false;
};

// Closed-curve quantities are filled only for periodic states whose frame closes.
TopologyReport topology_report(const RodState& state, double kappa, double offset = 0.0);

// True when the state is periodic and b(L) equals b(0) to `tol`.
bool frame_closes(const RodState& state, double tol = 1e-8);

}  // namespace rodflow
