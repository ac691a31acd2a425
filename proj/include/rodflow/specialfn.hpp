#pragma once

// Elliptic integrals and Jacobi elliptic functions, parameter convention m = k^2.

namespace rodflow {

// Carlson symmetric integrals.
double carlson_rf(double x, double y, double z);
double carlson_rd(double x, double y, double z);

// K(m) by the arithmetic-geometric mean; m < 1 (negative m allowed).
double complete_K(double m);

// E(m) = E(pi/2, m); m <= 1.
double complete_E(double m);

// E(phi, m) for any real phi with m sin^2(phi) < 1 wherever it is evaluated.
double incomplete_E(double phi, double m);

struct JacobiValues {
  double am = 0.0;
  double sn = 0.0;
  double cn = 1.0;
  double dn = 1.0;
};

// Descending Landen transformation; 0 <= m < 1.
JacobiValues jacobi(double u, double m);

struct AmCn {
  double am;
  double cn;
};
AmCn jacobi_am_cn(double u, double m);

// The m in (0,1) with 2 E(pi/2, m) = K(m).
double figure_eight_modulus();

}  // namespace rodflow
