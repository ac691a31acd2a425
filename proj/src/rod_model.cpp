#include "rodflow/rod_model.hpp"

#include "rodflow/selfavoid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rodflow {

std::string_view to_string(BcKind kind) {
  switch (kind) {
    case BcKind::periodic: return "periodic";
    case BcKind::clamped_both: return "clamped_both";
    case BcKind::clamped_director_only: return "clamped_director_only";
  }
  return "unknown";
}

BcKind bc_kind_from_string(std::string_view name) {
  if (name == "periodic") return BcKind::periodic;
  if (name == "clamped_both") return BcKind::clamped_both;
  if (name == "clamped_director_only") return BcKind::clamped_director_only;
  throw InvalidArgument("unknown boundary condition '" + std::string(name) + "'");
}

double theta(double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  return std::min(0.5 * kappa, 1.0);
}

double FlowConfig::theta() const { return rodflow::theta(kappa); }

void FlowConfig::validate() const {
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (!(rho >= 0.0)) throw InvalidArgument("rho must be nonnegative");
  if (!(q > 2.0)) throw InvalidArgument("q must exceed 2");
  if (!(eps_stop > 0.0)) throw InvalidArgument("eps_stop must be positive");
  if (max_steps < 0) throw InvalidArgument("max_steps must be nonnegative");
  for (double w : star_weights)
    if (!(w > 0.0)) throw InvalidArgument("curve metric weights must be positive");
  for (double w : dagger_weights)
    if (!(w > 0.0)) throw InvalidArgument("director metric weights must be positive");
}

BoundaryCondition bc_from_state(const RodState& state, BcKind kind) {
  BoundaryCondition bc;
  bc.kind = kind;
  bc.y0 = state.curve.pos.front();
  bc.dy0 = state.curve.der.front();
  const int last = state.mesh->curve_node(state.mesh->num_elements());
  bc.yL = state.curve.pos[static_cast<std::size_t>(last)];
  bc.dyL = state.curve.der[static_cast<std::size_t>(last)];
  bc.b0 = state.director.dir.front();
  bc.bL = state.director.dir.back();
  return bc;
}

namespace {

struct ElementView {
  ElementCurve ec;
  Vec3 b0, b1, q, db;
};

inline ElementView element_view(const HermiteCurve& curve, const DirectorField& director, const Mesh1D& mesh, int e) {
  ElementView v{element_curve(curve, mesh, e), director.dir[static_cast<std::size_t>(e)],
                director.dir[static_cast<std::size_t>(e + 1)], Vec3::Zero(), Vec3::Zero()};
  v.q = 0.5 * (v.b0 + v.b1);
  v.db = (v.b1 - v.b0) / v.ec.h;
  return v;
}

// Per-element Gauss basis values, cached for the element length.
struct ElementQuad {
  std::array<HermiteBasis, 3> B;
};
inline ElementQuad element_quad(double h) {
  const GaussRule& g = gauss3();
  return {{hermite_basis(g.t[0], h), hermite_basis(g.t[1], h), hermite_basis(g.t[2], h)}};
}

void check_state(const RodState& state) {
  if (!state.mesh) throw InvalidArgument("rod state has no mesh");
  const Mesh1D& m = *state.mesh;
  if (static_cast<int>(state.curve.pos.size()) != m.num_curve_nodes() ||
      static_cast<int>(state.curve.der.size()) != m.num_curve_nodes() ||
      static_cast<int>(state.director.dir.size()) != m.num_director_nodes()) {
    throw InvalidArgument("rod state size does not match its mesh");
  }
  for (int i = 0; i < m.num_curve_nodes(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!state.curve.pos[k].allFinite() || !state.curve.der[k].allFinite())
      throw CorruptStateError("non-finite curve value at node " + std::to_string(i));
  }
  for (int j = 0; j < m.num_director_nodes(); ++j)
    if (!state.director.dir[static_cast<std::size_t>(j)].allFinite())
      throw CorruptStateError("non-finite director at node " + std::to_string(j));
}

TangentPointParams tp_params(const Mesh1D& mesh, const FlowConfig& cfg) {
  TangentPointParams p = TangentPointParams::for_mesh(mesh, cfg.q, cfg.rho);
  p.exec = default_exec();
  return p;
}

// Local 4x4 matrix times the four local 3-vectors.
inline Vec3 local_apply(const Mat4& K, int k, const std::array<Vec3, 4>& X) {
  const auto& r = K[static_cast<std::size_t>(k)];
  return r[0] * X[0] + r[1] * X[1] + r[2] * X[2] + r[3] * X[3];
}

inline void scatter_curve(Eigen::VectorXd& g, const Mesh1D& mesh, int e, int k, const Vec3& v) {
  const int node = mesh.curve_node(e + k / 2);
  g.segment<3>(curve_dof(node, k % 2, 0)) += v;
}

// Gradient of (theta/2)|Q_h b . y''|^2 with respect to curve dofs.
void add_concave_curve(Eigen::VectorXd& g, const RodState& s, double th, double sign) {
  const Mesh1D& m = *s.mesh;
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementView v = element_view(s.curve, s.director, m, e);
    const Mat4 K = hermite_bending_local(v.ec.h);
    for (int k = 0; k < 4; ++k) {
      scatter_curve(g, m, e, k, (sign * th * v.q.dot(local_apply(K, k, v.ec.X))) * v.q);
    }
  }
}

// Gradient of (theta/2)|Q_h b . y''|^2 with respect to director dofs, y'' from `curve`.
void add_concave_director(Eigen::VectorXd& g, const HermiteCurve& curve, const DirectorField& director,
                          const Mesh1D& m, double th, double sign) {
  const GaussRule& gr = gauss3();
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementView v = element_view(curve, director, m, e);
    const ElementQuad Q = element_quad(v.ec.h);
    Vec3 a = Vec3::Zero();  // integral of y'' (y'' . q)
    for (int i = 0; i < 3; ++i) {
      const Vec3 ypp = v.ec.second(Q.B[static_cast<std::size_t>(i)]);
      a += (gr.w[static_cast<std::size_t>(i)] * v.ec.h * ypp.dot(v.q)) * ypp;
    }
    g.segment<3>(director_dof(e, 0)) += (sign * 0.5 * th) * a;
    g.segment<3>(director_dof(e + 1, 0)) += (sign * 0.5 * th) * a;
  }
}

// Gradient of N_h with respect to curve dofs.
void add_residual_curve(Eigen::VectorXd& g, const RodState& s, double th, double sign) {
  if (th >= 1.0) return;
  const Mesh1D& m = *s.mesh;
  const GaussRule& gr = gauss3();
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementView v = element_view(s.curve, s.director, m, e);
    const ElementQuad Q = element_quad(v.ec.h);
    const Vec3 c = v.q.cross(v.db);
    std::array<double, 4> coef{0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      const HermiteBasis& B = Q.B[static_cast<std::size_t>(i)];
      const double f = v.ec.first(B).dot(c) * gr.w[static_cast<std::size_t>(i)] * v.ec.h;
      for (int k = 0; k < 4; ++k) coef[static_cast<std::size_t>(k)] += f * B.d1[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < 4; ++k) scatter_curve(g, m, e, k, (sign * (1.0 - th) * coef[static_cast<std::size_t>(k)]) * c);
  }
}

// Gradient of N_h with respect to director dofs.
void add_residual_director(Eigen::VectorXd& g, const RodState& s, double th, double sign) {
  if (th >= 1.0) return;
  const Mesh1D& m = *s.mesh;
  const GaussRule& gr = gauss3();
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementView v = element_view(s.curve, s.director, m, e);
    const ElementQuad Q = element_quad(v.ec.h);
    const Vec3 c = v.q.cross(v.db);
    Vec3 a = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
      const Vec3 yp = v.ec.first(Q.B[static_cast<std::size_t>(i)]);
      a += (gr.w[static_cast<std::size_t>(i)] * v.ec.h * yp.dot(c)) * yp;
    }
    const Vec3 mid = 0.5 * v.db.cross(a);
    const Vec3 jump = a.cross(v.q) / v.ec.h;
    const double f = sign * (1.0 - th);
    g.segment<3>(director_dof(e, 0)) += f * (mid - jump);
    g.segment<3>(director_dof(e + 1, 0)) += f * (mid + jump);
  }
}

// Gradient of (1/2eps) sum_j w_j (y'(z_j) . b_j)^2.
void add_penalty_curve(Eigen::VectorXd& g, const HermiteCurve& curve, const DirectorField& director, const Mesh1D& m,
                       double epsilon, double sign) {
  for (int j = 0; j <= m.num_elements(); ++j) {
    const int n = m.curve_node(j);
    const Vec3& b = director.dir[static_cast<std::size_t>(j)];
    const double p = curve.der[static_cast<std::size_t>(n)].dot(b);
    g.segment<3>(curve_dof(n, 1, 0)) += (sign * m.lumped_weight(j) * p / epsilon) * b;
  }
}

void add_penalty_director(Eigen::VectorXd& g, const HermiteCurve& curve, const DirectorField& director,
                          const Mesh1D& m, double epsilon, double sign) {
  for (int j = 0; j <= m.num_elements(); ++j) {
    const Vec3& d = curve.der[static_cast<std::size_t>(m.curve_node(j))];
    const double p = d.dot(director.dir[static_cast<std::size_t>(j)]);
    g.segment<3>(director_dof(j, 0)) += (sign * m.lumped_weight(j) * p / epsilon) * d;
  }
}

using Triplets = std::vector<Eigen::Triplet<double>>;

// Adds s * w_j v_j v_j^T at the given 3x3 diagonal blocks.
void add_rank_one_blocks(Triplets& trip, int offset_stride, int offset_shift, const std::vector<Vec3>& vecs,
                         const std::vector<int>& rows, const std::vector<double>& weights, double s) {
  for (std::size_t j = 0; j < vecs.size(); ++j) {
    const int base = offset_stride * rows[j] + offset_shift;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trip.emplace_back(base + a, base + b, s * weights[j] * vecs[j](a) * vecs[j](b));
  }
}

Eigen::SparseMatrix<double> curve_penalty_matrix(const DirectorField& director, const Mesh1D& m, double scale) {
  std::vector<Vec3> vecs;
  std::vector<int> rows;
  std::vector<double> w;
  for (int j = 0; j <= m.num_elements(); ++j) {
    vecs.push_back(director.dir[static_cast<std::size_t>(j)]);
    rows.push_back(m.curve_node(j));
    w.push_back(m.lumped_weight(j));
  }
  Triplets trip;
  add_rank_one_blocks(trip, 6, 3, vecs, rows, w, scale);
  Eigen::SparseMatrix<double> P(m.num_curve_dofs(), m.num_curve_dofs());
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

Eigen::SparseMatrix<double> director_penalty_matrix(const HermiteCurve& curve, const Mesh1D& m, double scale) {
  std::vector<Vec3> vecs;
  std::vector<int> rows;
  std::vector<double> w;
  for (int j = 0; j <= m.num_elements(); ++j) {
    vecs.push_back(curve.der[static_cast<std::size_t>(m.curve_node(j))]);
    rows.push_back(j);
    w.push_back(m.lumped_weight(j));
  }
  Triplets trip;
  add_rank_one_blocks(trip, 3, 0, vecs, rows, w, scale);
  Eigen::SparseMatrix<double> P(m.num_director_dofs(), m.num_director_dofs());
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

}  // namespace

double penalty_energy(const HermiteCurve& curve, const DirectorField& director, const Mesh1D& mesh, double epsilon) {
  double sum = 0.0;
  for (int j = 0; j <= mesh.num_elements(); ++j) {
    const double p = curve.der[static_cast<std::size_t>(mesh.curve_node(j))].dot(director.dir[static_cast<std::size_t>(j)]);
    sum += mesh.lumped_weight(j) * p * p;
  }
  return sum / (2.0 * epsilon);
}

TwistParts twist_parts(const RodState& state, double kappa) {
  check_state(state);
  const double th = theta(kappa);
  const Mesh1D& m = *state.mesh;
  const GaussRule& gr = gauss3();
  TwistParts t;
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementView v = element_view(state.curve, state.director, m, e);
    const ElementQuad Q = element_quad(v.ec.h);
    const Vec3 c = v.q.cross(v.db);
    t.convex += 0.5 * th * v.db.squaredNorm() * v.ec.h;
    for (int i = 0; i < 3; ++i) {
      const HermiteBasis& B = Q.B[static_cast<std::size_t>(i)];
      const double w = gr.w[static_cast<std::size_t>(i)] * v.ec.h;
      const double g = v.q.dot(v.ec.second(B));
      const double f = v.ec.first(B).dot(c);
      t.concave += 0.5 * th * w * g * g;
      t.residual += 0.5 * (1.0 - th) * w * f * f;
    }
  }
  return t;
}

EnergyBreakdown energy_breakdown(const RodState& state, const FlowConfig& cfg) {
  check_state(state);
  const Mesh1D& m = *state.mesh;
  const GaussRule& gr = gauss3();
  EnergyBreakdown E;
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementCurve ec = element_curve(state.curve, m, e);
    for (int i = 0; i < 3; ++i) {
      const Vec3 ypp = ec.second(hermite_basis(gr.t[static_cast<std::size_t>(i)], ec.h));
      E.bending += 0.5 * cfg.kappa * gr.w[static_cast<std::size_t>(i)] * ec.h * ypp.squaredNorm();
    }
  }
  const TwistParts t = twist_parts(state, cfg.kappa);
  E.twisting = t.convex - t.concave + t.residual;
  E.penalty = penalty_energy(state.curve, state.director, m, cfg.epsilon);
  if (cfg.rho > 0.0) E.tangent_point = tp_energy(state.curve, m, tp_params(m, cfg));
  E.total = E.bending + E.twisting + E.penalty + cfg.rho * E.tangent_point;
  return E;
}

EnergyBreakdown energy_breakdown_assembled(const RodState& state, const FlowConfig& cfg) {
  check_state(state);
  const Mesh1D& m = *state.mesh;
  const double th = cfg.theta();
  const Eigen::VectorXd x = pack_curve(state.curve);
  const Eigen::VectorXd b = pack_director(state.director);
  const FormMatrix Kb = assemble_form(m, FormKind::bending);
  const FormMatrix K1 = assemble_form(m, FormKind::h1_stiffness);

  EnergyBreakdown E;
  E.bending = 0.5 * cfg.kappa * x.dot(Kb.matrix * x);

  double concave = 0.0, residual = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) {
    const ElementView v = element_view(state.curve, state.director, m, e);
    const Mat4 K = hermite_bending_local(v.ec.h);
    const Mat4 S = hermite_slope_local(v.ec.h);
    const Vec3 c = v.q.cross(v.db);
    for (int k = 0; k < 4; ++k) {
      for (int l = 0; l < 4; ++l) {
        const auto K_kl = K[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
        const auto S_kl = S[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
        const Vec3& Xk = v.ec.X[static_cast<std::size_t>(k)];
        const Vec3& Xl = v.ec.X[static_cast<std::size_t>(l)];
        concave += K_kl * v.q.dot(Xk) * v.q.dot(Xl);
        residual += S_kl * c.dot(Xk) * c.dot(Xl);
      }
    }
  }
  E.twisting = 0.5 * th * b.dot(K1.matrix * b) - 0.5 * th * concave + 0.5 * (1.0 - th) * residual;

  const FormMatrix W = assemble_form(m, FormKind::lumped_pairing);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(m.num_director_dofs());
  for (int j = 0; j <= m.num_elements(); ++j) {
    p(director_dof(j, 0)) =
        state.curve.der[static_cast<std::size_t>(m.curve_node(j))].dot(state.director.dir[static_cast<std::size_t>(j)]);
  }
  E.penalty = p.dot(W.matrix * p) / (2.0 * cfg.epsilon);
  if (cfg.rho > 0.0) E.tangent_point = tp_energy(state.curve, m, tp_params(m, cfg));
  E.total = E.bending + E.twisting + E.penalty + cfg.rho * E.tangent_point;
  return E;
}

FlowForms FlowForms::build(const Mesh1D& mesh, const FlowConfig& cfg) {
  FlowForms f;
  f.bending = assemble_form(mesh, FormKind::bending).matrix;
  f.h1 = assemble_form(mesh, FormKind::h1_stiffness).matrix;
  f.star = cfg.star_weights[0] * assemble_form(mesh, FormKind::curve_mass).matrix +
           cfg.star_weights[1] * assemble_form(mesh, FormKind::curve_slope).matrix + cfg.star_weights[2] * f.bending;
  f.dagger = cfg.dagger_weights[0] * assemble_form(mesh, FormKind::director_mass).matrix + cfg.dagger_weights[1] * f.h1;
  f.curve_base = f.star + (cfg.tau * cfg.kappa) * f.bending;
  f.director_base = f.dagger + (cfg.tau * cfg.theta()) * f.h1;
  return f;
}

LinearSystem assemble_curve_step(const RodState& prev, const FlowConfig& cfg, const FlowForms& forms) {
  check_state(prev);
  const Mesh1D& m = *prev.mesh;
  const double th = cfg.theta();
  const Eigen::VectorXd x = pack_curve(prev.curve);

  LinearSystem sys;
  sys.matrix = forms.curve_base + curve_penalty_matrix(prev.director, m, cfg.tau / cfg.epsilon);
  sys.rhs = -cfg.kappa * (forms.bending * x);
  add_penalty_curve(sys.rhs, prev.curve, prev.director, m, cfg.epsilon, -1.0);
  add_concave_curve(sys.rhs, prev, th, 1.0);
  add_residual_curve(sys.rhs, prev, th, -1.0);
  if (cfg.rho > 0.0) sys.rhs -= cfg.rho * tp_gradient(prev.curve, m, tp_params(m, cfg));
  return sys;
}

LinearSystem assemble_curve_step(const RodState& prev, const FlowConfig& cfg) {
  return assemble_curve_step(prev, cfg, FlowForms::build(*prev.mesh, cfg));
}

LinearSystem assemble_director_step(const RodState& prev, const HermiteCurve& curve_new, const FlowConfig& cfg,
                                    const FlowForms& forms) {
  check_state(prev);
  const Mesh1D& m = *prev.mesh;
  const double th = cfg.theta();
  const Eigen::VectorXd b = pack_director(prev.director);

  LinearSystem sys;
  sys.matrix = forms.director_base + director_penalty_matrix(curve_new, m, cfg.tau / cfg.epsilon);
  sys.rhs = -th * (forms.h1 * b);
  add_penalty_director(sys.rhs, curve_new, prev.director, m, cfg.epsilon, -1.0);
  const HermiteCurve& curve_g = th >= 1.0 ? curve_new : prev.curve;
  add_concave_director(sys.rhs, curve_g, prev.director, m, th, 1.0);
  add_residual_director(sys.rhs, prev, th, -1.0);
  return sys;
}

LinearSystem assemble_director_step(const RodState& prev, const HermiteCurve& curve_new, const FlowConfig& cfg) {
  return assemble_director_step(prev, curve_new, cfg, FlowForms::build(*prev.mesh, cfg));
}

EnergyTerm energy_term_from_string(std::string_view name) {
  if (name == "bending") return EnergyTerm::bending;
  if (name == "G_h" || name == "G") return EnergyTerm::G_h;
  if (name == "N_h" || name == "N") return EnergyTerm::N_h;
  if (name == "penalty") return EnergyTerm::penalty;
  if (name == "TP" || name == "tp") return EnergyTerm::TP;
  throw InvalidArgument("unknown energy term '" + std::string(name) + "'");
}

double term_value(EnergyTerm term, const RodState& state, const FlowConfig& cfg) {
  check_state(state);
  switch (term) {
    case EnergyTerm::bending: {
      FlowConfig c = cfg;
      c.rho = 0.0;
      return energy_breakdown(state, c).bending;
    }
    case EnergyTerm::G_h: {
      const TwistParts t = twist_parts(state, cfg.kappa);
      return t.convex - t.concave;
    }
    case EnergyTerm::N_h:
      return twist_parts(state, cfg.kappa).residual;
    case EnergyTerm::penalty:
      return penalty_energy(state.curve, state.director, *state.mesh, cfg.epsilon);
    case EnergyTerm::TP:
      return tp_energy(state.curve, *state.mesh, tp_params(*state.mesh, cfg));
  }
  throw InvalidArgument("unknown energy term");
}

Eigen::VectorXd term_gradient(EnergyTerm term, const RodState& state, Field which, const FlowConfig& cfg) {
  check_state(state);
  const Mesh1D& m = *state.mesh;
  const double th = cfg.theta();
  const bool curve = which == Field::curve;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(curve ? m.num_curve_dofs() : m.num_director_dofs());
  switch (term) {
    case EnergyTerm::bending:
      if (curve) g = cfg.kappa * (assemble_form(m, FormKind::bending).matrix * pack_curve(state.curve));
      break;
    case EnergyTerm::G_h:
      if (curve) {
        add_concave_curve(g, state, th, -1.0);
      } else {
        g = th * (assemble_form(m, FormKind::h1_stiffness).matrix * pack_director(state.director));
        add_concave_director(g, state.curve, state.director, m, th, -1.0);
      }
      break;
    case EnergyTerm::N_h:
      if (curve) add_residual_curve(g, state, th, 1.0);
      else add_residual_director(g, state, th, 1.0);
      break;
    case EnergyTerm::penalty:
      if (curve) add_penalty_curve(g, state.curve, state.director, m, cfg.epsilon, 1.0);
      else add_penalty_director(g, state.curve, state.director, m, cfg.epsilon, 1.0);
      break;
    case EnergyTerm::TP:
      if (curve) g = tp_gradient(state.curve, m, tp_params(m, cfg));
      break;
  }
  return g;
}

double directional_derivative(EnergyTerm term, const RodState& state, const Eigen::VectorXd& direction, Field which,
                              const FlowConfig& cfg) {
  const Eigen::VectorXd g = term_gradient(term, state, which, cfg);
  if (g.size() != direction.size()) throw InvalidArgument("directional_derivative: direction has wrong size");
  return g.dot(direction);
}

}  // namespace rodflow
