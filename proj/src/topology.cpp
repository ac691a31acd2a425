#include "rodflow/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rodflow {

namespace {

inline double twist_integrand(const Vec3& dy, const Vec3& b, const Vec3& db) {
  return dy.cross(b).dot(db) / (dy.norm() * b.squaredNorm());
}

// Integral of the twist rate over [t0, t1] (local coordinates) of element e.
double element_twist(const RodState& s, int e, double t0, double t1) {
  const Mesh1D& m = *s.mesh;
  const ElementCurve ec = element_curve(s.curve, m, e);
  const Vec3& b0 = s.director.dir[static_cast<std::size_t>(e)];
  const Vec3& b1 = s.director.dir[static_cast<std::size_t>(e + 1)];
  const Vec3 db = (b1 - b0) / ec.h;
  const GaussRule& g = gauss3();
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double t = t0 + (t1 - t0) * g.t[static_cast<std::size_t>(i)];
    const Vec3 dy = ec.first(hermite_basis(t, ec.h));
    const Vec3 b = (1.0 - t) * b0 + t * b1;
    sum += g.w[static_cast<std::size_t>(i)] * twist_integrand(dy, b, db);
  }
  return sum * (t1 - t0) * ec.h;
}

void require_state(const RodState& s) {
  if (!s.mesh) throw InvalidArgument("rod state has no mesh");
}

}  // namespace

double total_twist(const RodState& state) {
  require_state(state);
  double sum = 0.0;
  for (int e = 0; e < state.mesh->num_elements(); ++e) sum += element_twist(state, e, 0.0, 1.0);
  return sum / (2.0 * kPi);
}

double total_twist_between(const RodState& state, double a, double b) {
  require_state(state);
  const Mesh1D& m = *state.mesh;
  if (!(0.0 <= a && a <= b && b <= m.length())) throw InvalidArgument("total_twist_between: need 0 <= a <= b <= L");
  double sum = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) {
    const double z0 = m.node(e), z1 = m.node(e + 1);
    const double lo = std::max(a, z0), hi = std::min(b, z1);
    if (hi <= lo) continue;
    const double h = z1 - z0;
    sum += element_twist(state, e, (lo - z0) / h, (hi - z0) / h);
  }
  return sum / (2.0 * kPi);
}

std::vector<double> twist_rate_profile(const RodState& state) {
  require_state(state);
  const Mesh1D& m = *state.mesh;
  std::vector<double> rate(static_cast<std::size_t>(m.num_elements()));
  for (int e = 0; e < m.num_elements(); ++e)
    rate[static_cast<std::size_t>(e)] = element_twist(state, e, 0.0, 1.0) / m.element_length(e);
  return rate;
}

WritheResult writhe_report(const HermiteCurve& curve, const Mesh1D& mesh, Exec exec) {
  if (!mesh.periodic()) throw InvalidArgument("writhe: curve is not closed");
  const QuadCloud cloud = sample_quadrature(curve, mesh);
  WritheResult r;
  r.value = writhe_kernel(cloud, 2.0 * mesh.h_max(), exec);
  r.min_distance = min_segment_distance_kernel(cloud.y, cloud.x, cloud.period, 2.0 * mesh.h_max(), exec).distance;
  r.near_self_intersection = r.min_distance < 1e-6;
  return r;
}

double writhe(const HermiteCurve& curve, const Mesh1D& mesh, Exec exec) {
  if (!mesh.periodic()) throw InvalidArgument("writhe: curve is not closed");
  return writhe_kernel(sample_quadrature(curve, mesh), 2.0 * mesh.h_max(), exec);
}

double gauss_linking(const std::vector<Vec3>& a, const std::vector<Vec3>& b, Exec exec) {
  return linking_kernel(a, b, exec);
}

bool frame_closes(const RodState& state, double tol) {
  require_state(state);
  if (!state.mesh->periodic()) return false;
  return (state.director.dir.back() - state.director.dir.front()).norm() <= tol;
}

LinkingResult linking_number(const HermiteCurve& curve, const DirectorField& director, const Mesh1D& mesh,
                             double offset, int samples_per_element, Exec exec) {
  if (!mesh.periodic()) throw InvalidArgument("linking_number: curve is not closed");
  if ((director.dir.back() - director.dir.front()).norm() > 1e-8)
    throw InvalidArgument("linking_number: frame does not close");
  if (samples_per_element < 1) throw InvalidArgument("linking_number: need at least one sample per element");
  if (offset <= 0.0) offset = 0.05 * mesh.h_min();

  std::vector<Vec3> a, b;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementCurve ec = element_curve(curve, mesh, e);
    const Vec3& b0 = director.dir[static_cast<std::size_t>(e)];
    const Vec3& b1 = director.dir[static_cast<std::size_t>(e + 1)];
    for (int s = 0; s < samples_per_element; ++s) {
      const double t = static_cast<double>(s) / samples_per_element;
      const Vec3 y = ec.value(hermite_basis(t, ec.h));
      const Vec3 d = (1.0 - t) * b0 + t * b1;
      a.push_back(y);
      b.push_back(y + offset * d.normalized());
    }
  }
  double gap = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(a.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      gap = std::min(gap, segment_distance(a[static_cast<std::size_t>(i)], a[static_cast<std::size_t>((i + 1) % n)],
                                           b[static_cast<std::size_t>(j)], b[static_cast<std::size_t>((j + 1) % n)]));
    }
  }
  if (!(gap > 1e-3 * offset)) throw InvalidArgument("linking_number: curve and its offset are not disjoint");
  LinkingResult r;
  r.raw = linking_kernel(a, b, exec);
  r.rounded = std::lround(r.raw);
  return r;
}

double calugareanu_residual(const RodState& state, double offset) {
  require_state(state);
  if (!frame_closes(state)) throw InvalidArgument("calugareanu_residual: needs a closed curve with closing frame");
  const double lk = linking_number(state.curve, state.director, *state.mesh, offset).raw;
  return lk - total_twist(state) - writhe(state.curve, *state.mesh);
}

std::optional<double> uniformity_quotient(double tw, double length, double twisting_energy) {
  if (!(twisting_energy > 0.0)) return std::nullopt;
  return (2.0 * kPi * kPi / length) * tw * tw / twisting_energy;
}

std::optional<double> uniformity_quotient(const RodState& state, double kappa) {
  require_state(state);
  const TwistParts t = twist_parts(state, kappa);
  return uniformity_quotient(total_twist(state), state.mesh->length(), t.convex - t.concave + t.residual);
}

TopologyReport topology_report(const RodState& state, double kappa, double offset) {
  require_state(state);
  TopologyReport r;
  r.total_twist = total_twist(state);
  r.uniformity_quotient = uniformity_quotient(state, kappa);
  if (state.mesh->periodic()) {
    const WritheResult w = writhe_report(state.curve, *state.mesh);
    r.writhe = w.value;
    r.near_self_intersection = w.near_self_intersection;
    if (frame_closes(state) && !w.near_self_intersection) {
      r.linking_number = linking_number(state.curve, state.director, *state.mesh, offset).raw;
      r.calugareanu_residual = *r.linking_number - r.total_twist - *r.writhe;
    }
  }
  return r;
}

}  // namespace rodflow
