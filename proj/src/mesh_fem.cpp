#include "rodflow/mesh_fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rodflow {

Mesh1D::Mesh1D(std::vector<double> nodes, bool periodic) : nodes_(std::move(nodes)), periodic_(periodic) {
  if (nodes_.size() < 4) throw InvalidArgument("Mesh1D: need at least 3 elements");
  if (nodes_.front() != 0.0) throw InvalidArgument("Mesh1D: first node must be 0");
  h_max_ = 0.0;
  h_min_ = nodes_.back();
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    const double h = nodes_[i + 1] - nodes_[i];
    if (!(h > 0.0)) throw InvalidArgument("Mesh1D: nodes must be strictly increasing");
    h_max_ = std::max(h_max_, h);
    h_min_ = std::min(h_min_, h);
  }
}

Mesh1D Mesh1D::uniform(double length, int elements, bool periodic) {
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("build_mesh: length must be positive");
  if (elements < 3) throw InvalidArgument("build_mesh: need N >= 3 elements");
  std::vector<double> z(static_cast<std::size_t>(elements) + 1);
  for (int i = 0; i <= elements; ++i) z[static_cast<std::size_t>(i)] = length * i / elements;
  z.back() = length;
  return Mesh1D(std::move(z), periodic);
}

Mesh1D build_mesh(double length, int elements, bool periodic) {
  return Mesh1D::uniform(length, elements, periodic);
}

double Mesh1D::lumped_weight(int i) const {
  const int n = num_elements();
  double w = 0.0;
  if (i > 0) w += 0.5 * element_length(i - 1);
  if (i < n) w += 0.5 * element_length(i);
  return w;
}

std::pair<int, double> Mesh1D::locate(double x) const {
  const double L = length();
  if (!std::isfinite(x)) throw InvalidArgument("locate: non-finite parameter");
  if (x < 0.0 || x > L) {
    if (!periodic_) throw InvalidArgument("locate: parameter " + std::to_string(x) + " outside [0,L]");
    x = std::fmod(x, L);
    if (x < 0.0) x += L;
  }
  const int n = num_elements();
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  int e = static_cast<int>(it - nodes_.begin()) - 1;
  e = std::clamp(e, 0, n - 1);
  const double t = (x - node(e)) / element_length(e);
  return {e, std::clamp(t, 0.0, 1.0)};
}

double Mesh1D::parameter_distance(double x, double xt) const {
  double d = std::abs(x - xt);
  if (periodic_) d = std::min(d, length() - d);
  return d;
}

Eigen::VectorXd pack_curve(const HermiteCurve& curve) {
  const int n = static_cast<int>(curve.pos.size());
  Eigen::VectorXd v(6 * n);
  for (int i = 0; i < n; ++i) {
    v.segment<3>(6 * i) = curve.pos[static_cast<std::size_t>(i)];
    v.segment<3>(6 * i + 3) = curve.der[static_cast<std::size_t>(i)];
  }
  return v;
}

HermiteCurve unpack_curve(const Eigen::VectorXd& dofs) {
  if (dofs.size() % 6 != 0) throw InvalidArgument("unpack_curve: length is not a multiple of 6");
  const int n = static_cast<int>(dofs.size() / 6);
  HermiteCurve c;
  c.pos.resize(static_cast<std::size_t>(n));
  c.der.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    c.pos[static_cast<std::size_t>(i)] = dofs.segment<3>(6 * i);
    c.der[static_cast<std::size_t>(i)] = dofs.segment<3>(6 * i + 3);
  }
  return c;
}

Eigen::VectorXd pack_director(const DirectorField& director) {
  const int n = static_cast<int>(director.dir.size());
  Eigen::VectorXd v(3 * n);
  for (int i = 0; i < n; ++i) v.segment<3>(3 * i) = director.dir[static_cast<std::size_t>(i)];
  return v;
}

DirectorField unpack_director(const Eigen::VectorXd& dofs) {
  if (dofs.size() % 3 != 0) throw InvalidArgument("unpack_director: length is not a multiple of 3");
  const int n = static_cast<int>(dofs.size() / 3);
  DirectorField d;
  d.dir.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d.dir[static_cast<std::size_t>(i)] = dofs.segment<3>(3 * i);
  return d;
}

HermiteBasis hermite_basis(double t, double h) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  HermiteBasis B;
  B.v = {1.0 - 3.0 * t2 + 2.0 * t3, h * (t - 2.0 * t2 + t3), 3.0 * t2 - 2.0 * t3, h * (t3 - t2)};
  B.d1 = {(6.0 * t2 - 6.0 * t) / h, 1.0 - 4.0 * t + 3.0 * t2, (6.0 * t - 6.0 * t2) / h, 3.0 * t2 - 2.0 * t};
  B.d2 = {(12.0 * t - 6.0) / (h * h), (6.0 * t - 4.0) / h, (6.0 - 12.0 * t) / (h * h), (6.0 * t - 2.0) / h};
  return B;
}

const GaussRule& gauss3() {
  static const GaussRule rule = [] {
    const double a = 0.5 * std::sqrt(3.0 / 5.0);
    return GaussRule{{0.5 - a, 0.5, 0.5 + a}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }();
  return rule;
}

Vec3 ElementCurve::value(const HermiteBasis& B) const {
  return B.v[0] * X[0] + B.v[1] * X[1] + B.v[2] * X[2] + B.v[3] * X[3];
}
Vec3 ElementCurve::first(const HermiteBasis& B) const {
  return B.d1[0] * X[0] + B.d1[1] * X[1] + B.d1[2] * X[2] + B.d1[3] * X[3];
}
Vec3 ElementCurve::second(const HermiteBasis& B) const {
  return B.d2[0] * X[0] + B.d2[1] * X[1] + B.d2[2] * X[2] + B.d2[3] * X[3];
}

ElementCurve element_curve(const HermiteCurve& curve, const Mesh1D& mesh, int e) {
  const auto a = static_cast<std::size_t>(mesh.curve_node(e));
  const auto b = static_cast<std::size_t>(mesh.curve_node(e + 1));
  return ElementCurve{{curve.pos[a], curve.der[a], curve.pos[b], curve.der[b]}, mesh.element_length(e)};
}

PointEval eval_state(const HermiteCurve& curve, const DirectorField& director, const Mesh1D& mesh, double x) {
  const auto [e, t] = mesh.locate(x);
  const ElementCurve ec = element_curve(curve, mesh, e);
  const HermiteBasis B = hermite_basis(t, ec.h);
  const Vec3& b0 = director.dir[static_cast<std::size_t>(e)];
  const Vec3& b1 = director.dir[static_cast<std::size_t>(e + 1)];
  PointEval p;
  p.y = ec.value(B);
  p.dy = ec.first(B);
  p.ddy = ec.second(B);
  p.b = (1.0 - t) * b0 + t * b1;
  p.db = (b1 - b0) / ec.h;
  return p;
}

Vec3 qh_average(const DirectorField& director, const Mesh1D& mesh, int element) {
  if (element < 0 || element >= mesh.num_elements()) throw InvalidArgument("qh_average: element index out of range");
  return 0.5 * (director.dir[static_cast<std::size_t>(element)] + director.dir[static_cast<std::size_t>(element + 1)]);
}

InterpolatedRod interpolate_smooth(const SmoothCurveFn& y, const SmoothDirectorFn& b, const Mesh1D& mesh) {
  InterpolatedRod rod;
  const int nc = mesh.num_curve_nodes();
  rod.curve.pos.resize(static_cast<std::size_t>(nc));
  rod.curve.der.resize(static_cast<std::size_t>(nc));
  for (int i = 0; i < nc; ++i) {
    const auto [p, d] = y(mesh.node(i));
    rod.curve.pos[static_cast<std::size_t>(i)] = p;
    rod.curve.der[static_cast<std::size_t>(i)] = d;
  }
  const int nd = mesh.num_director_nodes();
  rod.director.dir.resize(static_cast<std::size_t>(nd));
  for (int i = 0; i < nd; ++i) rod.director.dir[static_cast<std::size_t>(i)] = b(mesh.node(i));
  return rod;
}

Mat4 hermite_bending_local(double h) {
  const double c = 1.0 / (h * h * h);
  return {{{12 * c, 6 * h * c, -12 * c, 6 * h * c},
           {6 * h * c, 4 * h * h * c, -6 * h * c, 2 * h * h * c},
           {-12 * c, -6 * h * c, 12 * c, -6 * h * c},
           {6 * h * c, 2 * h * h * c, -6 * h * c, 4 * h * h * c}}};
}

Mat4 hermite_slope_local(double h) {
  const double c = 1.0 / (30.0 * h);
  return {{{36 * c, 3 * h * c, -36 * c, 3 * h * c},
           {3 * h * c, 4 * h * h * c, -3 * h * c, -h * h * c},
           {-36 * c, -3 * h * c, 36 * c, -3 * h * c},
           {3 * h * c, -h * h * c, -3 * h * c, 4 * h * h * c}}};
}

Mat4 hermite_mass_local(double h) {
  const double c = h / 420.0;
  return {{{156 * c, 22 * h * c, 54 * c, -13 * h * c},
           {22 * h * c, 4 * h * h * c, 13 * h * c, -3 * h * h * c},
           {54 * c, 13 * h * c, 156 * c, -22 * h * c},
           {-13 * h * c, -3 * h * h * c, -22 * h * c, 4 * h * h * c}}};
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_curve_local(Triplets& trip, const Mesh1D& mesh, int e, const Mat4& K, double scale) {
  const int nodes[2] = {mesh.curve_node(e), mesh.curve_node(e + 1)};
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) {
      const double v = scale * K[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      for (int c = 0; c < 3; ++c) {
        trip.emplace_back(curve_dof(nodes[k / 2], k % 2, c), curve_dof(nodes[l / 2], l % 2, c), v);
      }
    }
  }
}

void add_director_local(Triplets& trip, int e, const std::array<std::array<double, 2>, 2>& K) {
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      for (int c = 0; c < 3; ++c)
        trip.emplace_back(director_dof(e + k, c), director_dof(e + l, c), K[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
}

}  // namespace

FormMatrix assemble_form(const Mesh1D& mesh, FormKind kind) {
  const int ne = mesh.num_elements();
  const bool on_curve = kind == FormKind::bending || kind == FormKind::curve_mass ||
                        kind == FormKind::curve_slope || kind == FormKind::star_metric;
  const int n = on_curve ? mesh.num_curve_dofs() : mesh.num_director_dofs();
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(ne) * 48 * 3);

  for (int e = 0; e < ne; ++e) {
    const double h = mesh.element_length(e);
    switch (kind) {
      case FormKind::bending:
        add_curve_local(trip, mesh, e, hermite_bending_local(h), 1.0);
        break;
      case FormKind::curve_mass:
        add_curve_local(trip, mesh, e, hermite_mass_local(h), 1.0);
        break;
      case FormKind::curve_slope:
        add_curve_local(trip, mesh, e, hermite_slope_local(h), 1.0);
        break;
      case FormKind::star_metric:
        add_curve_local(trip, mesh, e, hermite_mass_local(h), 1.0);
        add_curve_local(trip, mesh, e, hermite_slope_local(h), 1.0);
        add_curve_local(trip, mesh, e, hermite_bending_local(h), 1.0);
        break;
      case FormKind::h1_stiffness:
        add_director_local(trip, e, {{{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}}});
        break;
      case FormKind::director_mass:
        add_director_local(trip, e, {{{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}}});
        break;
      case FormKind::dagger_metric:
        add_director_local(trip, e, {{{h / 3.0 + 1.0 / h, h / 6.0 - 1.0 / h}, {h / 6.0 - 1.0 / h, h / 3.0 + 1.0 / h}}});
        break;
      case FormKind::lumped_pairing:
        add_director_local(trip, e, {{{h / 2.0, 0.0}, {0.0, h / 2.0}}});
        break;
    }
  }
  FormMatrix F{kind, Eigen::SparseMatrix<double>(n, n)};
  F.matrix.setFromTriplets(trip.begin(), trip.end());
  F.matrix.prune(0.0);
  return F;
}

}  // namespace rodflow
