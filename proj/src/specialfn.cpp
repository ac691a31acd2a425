#include "rodflow/specialfn.hpp"

#include "rodflow/common.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rodflow {

double carlson_rf(double x, double y, double z) {
  if (x < 0.0 || y < 0.0 || z < 0.0 || (x == 0.0) + (y == 0.0) + (z == 0.0) > 1)
    throw InvalidArgument("carlson_rf: arguments must be nonnegative with at most one zero");
  for (int it = 0; it < 200; ++it) {
    const double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
    const double lam = sx * (sy + sz) + sy * sz;
    x = 0.25 * (x + lam);
    y = 0.25 * (y + lam);
    z = 0.25 * (z + lam);
    const double mu = (x + y + z) / 3.0;
    const double dx = 1.0 - x / mu, dy = 1.0 - y / mu, dz = 1.0 - z / mu;
    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) < 1e-4) {
      const double e2 = dx * dy - dz * dz;
      const double e3 = dx * dy * dz;
      return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / std::sqrt(mu);
    }
  }
  throw Error("carlson_rf: no convergence");
}

double carlson_rd(double x, double y, double z) {
  if (x < 0.0 || y < 0.0 || !(z > 0.0) || (x == 0.0 && y == 0.0))
    throw InvalidArgument("carlson_rd: invalid arguments");
  double sum = 0.0, fac = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
    const double lam = sx * (sy + sz) + sy * sz;
    sum += fac / (sz * (z + lam));
    fac *= 0.25;
    x = 0.25 * (x + lam);
    y = 0.25 * (y + lam);
    z = 0.25 * (z + lam);
    const double mu = (x + y + 3.0 * z) / 5.0;
    const double dx = 1.0 - x / mu, dy = 1.0 - y / mu, dz = 1.0 - z / mu;
    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) < 1e-4) {
      const double ea = dx * dy, eb = dz * dz;
      const double ec = ea - eb, ed = ea - 6.0 * eb, ee = ed + ec + ec;
      const double s = ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 4.5 / 26.0 * dz * ee) +
                       dz * (ee / 6.0 + dz * (-9.0 / 22.0 * ec + dz * 3.0 / 26.0 * ea));
      return 3.0 * sum + fac * (1.0 + s) / (mu * std::sqrt(mu));
    }
  }
  throw Error("carlson_rd: no convergence");
}

double complete_K(double m) {
  if (!(m < 1.0)) throw InvalidArgument("complete_K: parameter must be < 1");
  double a = 1.0, b = std::sqrt(1.0 - m);
  for (int it = 0; it < 100 && std::abs(a - b) > 1e-16 * a; ++it) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return kPi / (a + b);
}

namespace {

double complete_E_carlson(double m) {
  return carlson_rf(0.0, 1.0 - m, 1.0) - m / 3.0 * carlson_rd(0.0, 1.0 - m, 1.0);
}

// |phi| <= pi/2, 0 <= m sin^2(phi) < 1.
double incomplete_E_carlson(double phi, double m) {
  const double s = std::sin(phi), c = std::cos(phi);
  const double s2 = s * s;
  const double y = 1.0 - m * s2;
  if (!(y > 0.0)) throw InvalidArgument("incomplete_E: m sin^2(phi) must be < 1");
  if (s == 0.0) return 0.0;
  return s * carlson_rf(c * c, y, 1.0) - m / 3.0 * s * s2 * carlson_rd(c * c, y, 1.0);
}

// Imaginary-modulus transformation: m < 0 maps to mu = -m/(1-m) in (0,1).
double incomplete_E_reduced(double phi, double m) {
  if (m >= 0.0) return incomplete_E_carlson(phi, m);
  const double mu = -m / (1.0 - m);
  const double s = std::sin(phi);
  const double st = std::sqrt(1.0 - m) * s / std::sqrt(1.0 - m * s * s);
  const double th = std::asin(std::clamp(st, -1.0, 1.0));
  const double sth = std::sin(th), cth = std::cos(th);
  return std::sqrt(1.0 - m) * (incomplete_E_carlson(th, mu) - mu * sth * cth / std::sqrt(1.0 - mu * sth * sth));
}

}  // namespace

double complete_E(double m) {
  if (!(m <= 1.0)) throw InvalidArgument("complete_E: parameter must be <= 1");
  if (m == 1.0) return 1.0;
  if (m < 0.0) return std::sqrt(1.0 - m) * complete_E_carlson(-m / (1.0 - m));
  return complete_E_carlson(m);
}

double incomplete_E(double phi, double m) {
  if (!std::isfinite(phi) || !std::isfinite(m)) throw InvalidArgument("incomplete_E: non-finite argument");
  const double n = std::round(phi / kPi);
  const double r = phi - n * kPi;
  if (n == 0.0) return incomplete_E_reduced(r, m);
  if (!(m < 1.0)) throw InvalidArgument("incomplete_E: m sin^2(phi) must be < 1");
  return 2.0 * n * complete_E(m) + incomplete_E_reduced(r, m);
}

JacobiValues jacobi(double u, double m) {
  if (!(m >= 0.0 && m < 1.0)) throw InvalidArgument("jacobi: parameter must be in [0,1)");
  if (!std::isfinite(u)) throw InvalidArgument("jacobi: non-finite argument");
  JacobiValues v;
  if (m == 0.0) {
    v.am = u;
  } else {
    constexpr int kMax = 40;
    double a[kMax + 1], c[kMax + 1];
    a[0] = 1.0;
    double b = std::sqrt(1.0 - m);
    c[0] = std::sqrt(m);
    int n = 0;
    while (n < kMax && std::abs(c[n]) > 1e-17) {
      a[n + 1] = 0.5 * (a[n] + b);
      c[n + 1] = 0.5 * (a[n] - b);
      b = std::sqrt(a[n] * b);
      ++n;
    }
    double phi = std::ldexp(a[n] * u, n);
    for (int k = n; k > 0; --k) phi = 0.5 * (phi + std::asin(c[k] / a[k] * std::sin(phi)));
    v.am = phi;
  }
  v.sn = std::sin(v.am);
  v.cn = std::cos(v.am);
  v.dn = std::sqrt(1.0 - m * v.sn * v.sn);
  return v;
}

AmCn jacobi_am_cn(double u, double m) {
  const JacobiValues v = jacobi(u, m);
  return {v.am, v.cn};
}

double figure_eight_modulus() {
  double lo = 0.5, hi = 0.99;
  auto f = [](double m) { return 2.0 * complete_E(m) - complete_K(m); };
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rodflow
