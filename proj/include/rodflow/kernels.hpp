#pragma once

// All-pairs kernels over curve quadrature points and polylines. Each kernel
// has a serial and an OpenMP path; both sum in the same fixed order, so they
// return bit-identical results.

#include "rodflow/mesh_fem.hpp"

#include <vector>

namespace rodflow {

enum class Exec { serial, parallel };

// Parallel when more than one OpenMP thread is available.
Exec default_exec();

// Curve values at the Gauss points of every element. With subdivisions = s
// each element is split into s equal parts carrying a 3-point rule each.
struct QuadCloud {
  int elements = 0;
  int per_element = 0;
  double period = 0.0;  // L for closed curves, 0 for open ones
  std::vector<double> x;  // parameter
  std::vector<double> w;  // quadrature weight, element length included
  std::vector<Vec3> y;
  std::vector<Vec3> dy;
  std::vector<HermiteBasis> basis;

  int size() const { return static_cast<int>(x.size()); }
  double param_distance(int a, int b) const;
};

QuadCloud sample_quadrature(const HermiteCurve& curve, const Mesh1D& mesh, int subdivisions = 1);

// Sum over ordered point pairs (s, s~) with parameter distance >= cutoff of
// w w~ (1/q)|u x T|^q |u|^{-2q} |T|^{1-q} |S|, where u = y(s) - y(s~),
// T = y'(s~), S = y'(s). Throws on a non-finite contribution.
double tp_energy_kernel(const QuadCloud& cloud, double q, double cutoff, Exec exec);

struct PointGradient {
  double energy = 0.0;
  std::vector<Vec3> gy;   // derivative with respect to y at each point
  std::vector<Vec3> gdy;  // derivative with respect to y' at each point
};
PointGradient tp_gradient_kernel(const QuadCloud& cloud, double q, double cutoff, Exec exec);

// (1/4pi) sum of w w~ det(y(s) - y(s~), y'(s), y'(s~)) / |y(s) - y(s~)|^3.
double writhe_kernel(const QuadCloud& cloud, double cutoff, Exec exec);

// Gauss linking number of two closed polygons by the exact solid-angle formula
// for segment pairs. Vertices are listed without repeating the first.
double linking_kernel(const std::vector<Vec3>& a, const std::vector<Vec3>& b, Exec exec);

// Smallest distance between segments of one polyline whose midpoints are at
// least `cutoff` apart in parameter.
struct SegmentDistance {
  double distance = 0.0;
  int first = -1;
  int second = -1;
};
SegmentDistance min_segment_distance_kernel(const std::vector<Vec3>& vertices,
                                            const std::vector<double>& params, double period,
                                            double cutoff, Exec exec);

double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);

}  // namespace rodflow
