#pragma once

// One-dimensional partitions, the cubic Hermite (curve) and piecewise linear
// (director) spaces over them, and the constant bilinear forms of the flow.
//
// Dof layout. Curve dofs are node-major: node i owns [position(3), derivative(3)]
// at offset 6*i. On a periodic mesh node N is folded onto node 0, so there are
// N curve nodes; on an open mesh there are N+1. Directors always live on all
// N+1 nodes (the director is clamped at both ends even for closed curves, so
// b(0) and b(L) are independent values).

#include "rodflow/common.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace rodflow {

class Mesh1D {
 public:
  Mesh1D(std::vector<double> nodes, bool periodic);

  // Uniform partition z_i = i*L/N.
  static Mesh1D uniform(double length, int elements, bool periodic);

  int num_elements() const { return static_cast<int>(nodes_.size()) - 1; }
  int num_curve_nodes() const { return periodic_ ? num_elements() : num_elements() + 1; }
  int num_director_nodes() const { return num_elements() + 1; }
  int num_curve_dofs() const { return 6 * num_curve_nodes(); }
  int num_director_dofs() const { return 3 * num_director_nodes(); }

  bool periodic() const { return periodic_; }
  double length() const { return nodes_.back(); }
  double h_max() const { return h_max_; }
  double h_min() const { return h_min_; }
  double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::span<const double> nodes() const { return nodes_; }
  double element_length(int e) const { return node(e + 1) - node(e); }

  // Curve node carrying the dofs of mesh node i (folds N onto 0 if periodic).
  int curve_node(int i) const { return (periodic_ && i == num_elements()) ? 0 : i; }

  // Trapezoidal weight of mesh node i, i.e. the integral of its hat function.
  double lumped_weight(int i) const;

  // Element index and local coordinate t in [0,1] of a parameter x.
  // Periodic meshes wrap x; open meshes reject x outside [0,L].
  std::pair<int, double> locate(double x) const;

  // Periodic (or plain) distance between two parameters.
  double parameter_distance(double x, double xt) const;

 private:
  std::vector<double> nodes_;
  bool periodic_;
  double h_max_ = 0.0;
  double h_min_ = 0.0;
};

Mesh1D build_mesh(double length, int elements, bool periodic);

struct HermiteCurve {
  std::vector<Vec3> pos;
  std::vector<Vec3> der;
};

struct DirectorField {
  std::vector<Vec3> dir;
};

// Flat dof vectors in the layout described above.
Eigen::VectorXd pack_curve(const HermiteCurve& curve);
HermiteCurve unpack_curve(const Eigen::VectorXd& dofs);
Eigen::VectorXd pack_director(const DirectorField& director);
DirectorField unpack_director(const Eigen::VectorXd& dofs);

inline int curve_dof(int node, int slot, int comp) { return 6 * node + 3 * slot + comp; }
inline int director_dof(int node, int comp) { return 3 * node + comp; }

// Cubic Hermite shape functions on an element of length h at local t in [0,1],
// ordered (value at left, slope at left, value at right, slope at right).
// d1 and d2 are derivatives with respect to the global parameter.
struct HermiteBasis {
  std::array<double, 4> v;
  std::array<double, 4> d1;
  std::array<double, 4> d2;
};
HermiteBasis hermite_basis(double t, double h);

// Three-point Gauss-Legendre rule on [0,1], exact to degree 5.
struct GaussRule {
  std::array<double, 3> t;
  std::array<double, 3> w;
};
const GaussRule& gauss3();

// Local dofs of one element: X[0]=y(left), X[1]=y'(left), X[2]=y(right), X[3]=y'(right).
struct ElementCurve {
  std::array<Vec3, 4> X;
  double h;

  Vec3 value(const HermiteBasis& B) const;
  Vec3 first(const HermiteBasis& B) const;
  Vec3 second(const HermiteBasis& B) const;
};
ElementCurve element_curve(const HermiteCurve& curve, const Mesh1D& mesh, int e);

struct PointEval {
  Vec3 y, dy, ddy, b, db;
};

// Values of the Hermite curve and linear director at parameter x. At a node
// the one-sided director slope is taken from the right (from the left at x=L).
PointEval eval_state(const HermiteCurve& curve, const DirectorField& director, const Mesh1D& mesh,
                     double x);

// Elementwise mean of the linear director.
Vec3 qh_average(const DirectorField& director, const Mesh1D& mesh, int element);

using SmoothCurveFn = std::function<std::pair<Vec3, Vec3>(double)>;  // (y, y') at x
using SmoothDirectorFn = std::function<Vec3(double)>;

struct InterpolatedRod {
  HermiteCurve curve;
  DirectorField director;
};

// Nodal interpolation: Hermite dofs (y(z), y'(z)), director dofs b(z).
InterpolatedRod interpolate_smooth(const SmoothCurveFn& y, const SmoothDirectorFn& b,
                                   const Mesh1D& mesh);

enum class FormKind {
  bending,         // (v'', w'') on curve dofs
  curve_mass,      // (v, w) on curve dofs
  curve_slope,     // (v', w') on curve dofs
  star_metric,     // curve_mass + curve_slope + bending
  h1_stiffness,    // (r', s') on director dofs
  director_mass,   // (r, s) on director dofs
  lumped_pairing,  // <r, s>_h: trapezoidal nodal lumping on director dofs
  dagger_metric,   // director_mass + h1_stiffness
};

struct FormMatrix {
  FormKind kind;
  Eigen::SparseMatrix<double> matrix;
};

// Exact closed-form element integrals; no runtime quadrature.
FormMatrix assemble_form(const Mesh1D& mesh, FormKind kind);

// Closed-form 4x4 element matrices for one scalar component.
using Mat4 = std::array<std::array<double, 4>, 4>;
Mat4 hermite_bending_local(double h);
Mat4 hermite_slope_local(double h);
Mat4 hermite_mass_local(double h);

}  // namespace rodflow
