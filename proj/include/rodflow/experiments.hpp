#pragma once

// Initial framed curves and parameter bundles for the reference experiments.

#include "rodflow/rod_model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rodflow {

struct Perturbation {
  double amplitude = 0.0;
  double frequency = 0.0;  // full periods of sin over the parameter domain
};

struct Scenario {
  std::string name;
  RodState initial;
  FlowConfig config;
  BoundaryCondition bc;
  Perturbation perturbation;
  double beta_ini = 0.0;
};

// Circle of length L (radius L/2pi) in the xy-plane with a director rotating
// at rate beta about the tangent, starting from the inward normal. Periodic.
RodState make_circle_rod(double L, int N, double beta);

struct TwistInterval {
  double end;   // right end of the interval; the last one must equal L
  double rate;  // twist rate on the interval
};

// Straight segment along x whose director turns about x with the given
// piecewise-constant rate, starting from e_y. Open mesh.
RodState make_straight_piecewise_twist(double L, int N, const std::vector<TwistInterval>& rates);

// Planar figure-eight of length 4K(m) with director e_z.
Scenario make_figure_eight(int N, double kappa);

// Curve (s/2, cos s - 1, 0), s in [0, 4pi], resampled to arclength nodes; the
// director turns at rate beta_ini per original parameter. Clamped at both ends.
Scenario make_clamped_cosine(int N, double beta_ini);

// Adds amplitude * sin(frequency * 2pi x / L) to the z coordinate at every node
// (with its derivative), renormalizes nodal tangents, and projects and
// normalizes the directors.
RodState perturb_out_of_plane(const RodState& state, double amplitude, double frequency);

// Arclength reparametrization of a regular curve c on [s0, s1].
class ArclengthMap {
 public:
  using Speed = std::function<double(double)>;
  ArclengthMap(Speed speed, double s0, double s1, int panels = 4096);

  double length() const { return table_.back(); }
  double arclength(double s) const;       // from s0 to s
  double parameter(double sigma) const;   // inverse of arclength

 private:
  double panel_integral(double a, double b) const;
  Speed speed_;
  double s0_, s1_;
  std::vector<double> table_;
};

struct ScenarioOverrides {
  std::optional<int> N;
  std::optional<double> kappa;
  std::optional<double> beta;
  std::optional<double> tau;
  std::optional<double> epsilon;
  std::optional<double> rho;
  std::optional<double> q;
  std::optional<double> perturbation;  // amplitude
};

// Names: uniframe, michell, michell(beta), overtwist, f8, f8(kappa), clamped,
// imper_a, imper_b.
Scenario build_scenario(std::string_view name, const ScenarioOverrides& overrides = {});

std::vector<std::string> scenario_names();

// Preset sweeps: michell(beta* + 2^l/10) and f8(1/2 + 2^l/10).
std::vector<std::string> sweep_preset(std::string_view family);

}  // namespace rodflow
