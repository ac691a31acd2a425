#pragma once

// Helpers shared by the unit and acceptance tests: random admissible states,
// finite differences, and an adaptive quadrature oracle.

#include "rodflow/experiments.hpp"
#include "rodflow/rod_model.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace rodflow::testing {

inline Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  return {g(rng), g(rng), g(rng)};
}

// Nodal noise on a valid state, then unit tangents and unit directors normal to them.
inline RodState jitter(const RodState& s, std::mt19937_64& rng, double pos_scale, double der_scale,
                       double dir_scale) {
  RodState out = s;
  for (auto& p : out.curve.pos) p += random_vec(rng, pos_scale);
  for (auto& d : out.curve.der) d = (d + random_vec(rng, der_scale)).normalized();
  const Mesh1D& m = *s.mesh;
  for (int j = 0; j < m.num_director_nodes(); ++j) {
    const Vec3& t = out.curve.der[static_cast<std::size_t>(m.curve_node(j))];
    Vec3& b = out.director.dir[static_cast<std::size_t>(j)];
    b += random_vec(rng, dir_scale);
    b = (b - b.dot(t) * t).normalized();
  }
  return out;
}

// Directors pushed off the normal plane, so the penalty is not identically zero.
inline RodState tilted(const RodState& s, std::mt19937_64& rng, double amount) {
  RodState out = s;
  for (auto& b : out.director.dir) b = (b + random_vec(rng, amount)).normalized();
  return out;
}

inline RodState random_closed_state(std::mt19937_64& rng, int N, double beta) {
  return jitter(make_circle_rod(2.0 * kPi, N, beta), rng, 0.02, 0.1, 0.1);
}

inline RodState random_open_state(std::mt19937_64& rng, int N) {
  const RodState s = make_straight_piecewise_twist(3.0, N, {{1.0, 3.0}, {3.0, -1.0}});
  return jitter(s, rng, 0.05, 0.2, 0.1);
}

inline Eigen::VectorXd random_direction(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = g(rng);
  return d / d.norm();
}

inline RodState shifted(const RodState& s, Field which, const Eigen::VectorXd& d, double t) {
  RodState out = s;
  if (which == Field::curve) out.curve = unpack_curve(pack_curve(s.curve) + t * d);
  else out.director = unpack_director(pack_director(s.director) + t * d);
  return out;
}

// Central difference of a term along d.
inline double fd_derivative(EnergyTerm term, const RodState& s, Field which, const Eigen::VectorXd& d,
                            const FlowConfig& cfg, double delta = 1e-5) {
  const double ep = term_value(term, shifted(s, which, d, delta), cfg);
  const double em = term_value(term, shifted(s, which, d, -delta), cfg);
  return (ep - em) / (2.0 * delta);
}

// Adaptive Simpson rule.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int depth = 50) {
  struct R {
    static double step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth) {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double err = left + right - whole;
      if (depth <= 0 || std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
      return step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  };
  // 64 panels first, so periodic integrands cannot fool the first error test
  constexpr int kPanels = 64;
  double sum = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double lo = a + (b - a) * k / kPanels, hi = a + (b - a) * (k + 1) / kPanels;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    sum += R::step(f, lo, hi, fa, fm, fb, whole, tol / kPanels, depth);
  }
  return sum;
}

}  // namespace rodflow::testing
