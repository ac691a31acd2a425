#include "rodflow/selfavoid.hpp"

#include <cmath>
#include <limits>

namespace rodflow {

TangentPointParams TangentPointParams::for_mesh(const Mesh1D& mesh, double q, double rho) {
  TangentPointParams p;
  p.q = q;
  p.rho = rho;
  p.cutoff = 2.0 * mesh.h_max();
  return p;
}

void TangentPointParams::validate() const {
  if (!(q > 2.0)) throw InvalidArgument("tangent-point exponent q must exceed 2");
  if (!(rho >= 0.0)) throw InvalidArgument("tangent-point weight rho must be nonnegative");
  if (!(cutoff > 0.0)) throw InvalidArgument("tangent-point cutoff must be positive");
  if (subdivisions < 1) throw InvalidArgument("tangent-point subdivisions must be >= 1");
}

double tp_radius(const Vec3& p, const Vec3& t_p, const Vec3& x) {
  const Vec3 u = x - p;
  const double u2 = u.squaredNorm();
  if (u2 == 0.0) throw InvalidArgument("tp_radius: x coincides with p");
  const double c = u.cross(t_p).norm();
  if (c == 0.0) return std::numeric_limits<double>::infinity();
  return u2 / (2.0 * c);
}

double tp_energy(const HermiteCurve& curve, const Mesh1D& mesh, const TangentPointParams& params) {
  params.validate();
  const QuadCloud cloud = sample_quadrature(curve, mesh, params.subdivisions);
  return tp_energy_kernel(cloud, params.q, params.cutoff, params.exec);
}

TpValueGradient tp_energy_gradient(const HermiteCurve& curve, const Mesh1D& mesh, const TangentPointParams& params) {
  params.validate();
  const QuadCloud cloud = sample_quadrature(curve, mesh, params.subdivisions);
  const PointGradient pg = tp_gradient_kernel(cloud, params.q, params.cutoff, params.exec);

  TpValueGradient out;
  out.energy = pg.energy;
  out.gradient = Eigen::VectorXd::Zero(mesh.num_curve_dofs());
  const int pe = cloud.per_element;
  for (int e = 0; e < cloud.elements; ++e) {
    const int nodes[2] = {mesh.curve_node(e), mesh.curve_node(e + 1)};
    for (int a = e * pe; a < (e + 1) * pe; ++a) {
      const auto A = static_cast<std::size_t>(a);
      const HermiteBasis& B = cloud.basis[A];
      for (int k = 0; k < 4; ++k) {
        const Vec3 g = (B.v[static_cast<std::size_t>(k)] * pg.gy[A] + B.d1[static_cast<std::size_t>(k)] * pg.gdy[A]);
        out.gradient.segment<3>(curve_dof(nodes[k / 2], k % 2, 0)) += g;
      }
    }
  }
  return out;
}

Eigen::VectorXd tp_gradient(const HermiteCurve& curve, const Mesh1D& mesh, const TangentPointParams& params) {
  return tp_energy_gradient(curve, mesh, params).gradient;
}

double min_strand_distance(const HermiteCurve& curve, const Mesh1D& mesh, double cutoff, int samples_per_element,
                           Exec exec) {
  if (samples_per_element < 1) throw InvalidArgument("min_strand_distance: need at least one sample per element");
  if (cutoff <= 0.0) cutoff = 2.0 * mesh.h_max();
  std::vector<Vec3> verts;
  std::vector<double> params;
  const int ne = mesh.num_elements();
  for (int e = 0; e < ne; ++e) {
    const ElementCurve ec = element_curve(curve, mesh, e);
    for (int s = 0; s < samples_per_element; ++s) {
      const double t = static_cast<double>(s) / samples_per_element;
      verts.push_back(ec.value(hermite_basis(t, ec.h)));
      params.push_back(mesh.node(e) + t * ec.h);
    }
  }
  if (!mesh.periodic()) {
    verts.push_back(curve.pos.back());
    params.push_back(mesh.length());
  }
  return min_segment_distance_kernel(verts, params, mesh.periodic() ? mesh.length() : 0.0, cutoff, exec).distance;
}

}  // namespace rodflow
