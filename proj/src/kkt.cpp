#include "rodflow/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rodflow {

namespace {

using RowTriplets = std::vector<Eigen::Triplet<double>>;

void check_vector(const Vec3& v, const char* what, int node) {
  if (!v.allFinite()) throw CorruptStateError(std::string("non-finite ") + what + " at node " + std::to_string(node));
  if (v.norm() < 1e-8) throw CorruptStateError(std::string("degenerate ") + what + " at node " + std::to_string(node));
}

}  // namespace

ConstraintSet prune_dependent_rows(const SparseRowMatrix& rows, double tol) {
  const int ncols = static_cast<int>(rows.cols());
  std::vector<double> scratch(static_cast<std::size_t>(ncols), 0.0);
  std::vector<char> touched_flag(static_cast<std::size_t>(ncols), 0);
  std::vector<int> touched;
  std::vector<std::vector<std::pair<int, double>>> basis;
  std::vector<std::vector<int>> col_to_basis(static_cast<std::size_t>(ncols));
  std::vector<int> kept;

  auto touch = [&](int c) {
    if (!touched_flag[static_cast<std::size_t>(c)]) {
      touched_flag[static_cast<std::size_t>(c)] = 1;
      touched.push_back(c);
    }
  };

  for (int r = 0; r < rows.rows(); ++r) {
    double norm0 = 0.0;
    for (SparseRowMatrix::InnerIterator it(rows, r); it; ++it) {
      scratch[static_cast<std::size_t>(it.col())] += it.value();
      touch(static_cast<int>(it.col()));
      norm0 += it.value() * it.value();
    }
    norm0 = std::sqrt(norm0);
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<int> cand;
      for (int c : touched)
        for (int q : col_to_basis[static_cast<std::size_t>(c)]) cand.push_back(q);
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      for (int q : cand) {
        double alpha = 0.0;
        for (const auto& [c, v] : basis[static_cast<std::size_t>(q)]) alpha += v * scratch[static_cast<std::size_t>(c)];
        for (const auto& [c, v] : basis[static_cast<std::size_t>(q)]) {
          scratch[static_cast<std::size_t>(c)] -= alpha * v;
          touch(c);
        }
      }
    }
    double norm = 0.0;
    for (int c : touched) norm += scratch[static_cast<std::size_t>(c)] * scratch[static_cast<std::size_t>(c)];
    norm = std::sqrt(norm);
    if (norm0 > 0.0 && norm > tol * norm0) {
      std::vector<std::pair<int, double>> q;
      std::sort(touched.begin(), touched.end());
      const int id = static_cast<int>(basis.size());
      for (int c : touched) {
        const double v = scratch[static_cast<std::size_t>(c)] / norm;
        if (v != 0.0) {
          q.emplace_back(c, v);
          col_to_basis[static_cast<std::size_t>(c)].push_back(id);
        }
      }
      basis.push_back(std::move(q));
      kept.push_back(r);
    }
    for (int c : touched) {
      scratch[static_cast<std::size_t>(c)] = 0.0;
      touched_flag[static_cast<std::size_t>(c)] = 0;
    }
    touched.clear();
  }

  RowTriplets trip;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    for (SparseRowMatrix::InnerIterator it(rows, kept[k]); it; ++it)
      trip.emplace_back(static_cast<int>(k), static_cast<int>(it.col()), it.value());
  }
  ConstraintSet out;
  out.rows.resize(static_cast<Eigen::Index>(kept.size()), ncols);
  out.rows.setFromTriplets(trip.begin(), trip.end());
  out.removed = static_cast<int>(rows.rows()) - static_cast<int>(kept.size());
  return out;
}

ConstraintSet build_constraints(const RodState& state, Field which, const BoundaryCondition& bc) {
  if (!state.mesh) throw InvalidArgument("build_constraints: state has no mesh");
  const Mesh1D& m = *state.mesh;
  const bool periodic_mesh = m.periodic();
  if ((bc.kind == BcKind::periodic) != periodic_mesh)
    throw InvalidArgument("build_constraints: boundary condition does not match mesh periodicity");

  RowTriplets trip;
  int row = 0;
  auto pin = [&](int dof0) {
    for (int c = 0; c < 3; ++c) trip.emplace_back(row++, dof0 + c, 1.0);
  };

  int ncols = 0;
  if (which == Field::curve) {
    ncols = m.num_curve_dofs();
    const int last = m.num_curve_nodes() - 1;
    if (bc.kind == BcKind::clamped_both) {
      pin(curve_dof(0, 0, 0));
      pin(curve_dof(0, 1, 0));
      pin(curve_dof(last, 0, 0));
      pin(curve_dof(last, 1, 0));
    }
    for (int i = 0; i < m.num_curve_nodes(); ++i) {
      const Vec3& d = state.curve.der[static_cast<std::size_t>(i)];
      check_vector(d, "curve derivative", i);
      if (!state.curve.pos[static_cast<std::size_t>(i)].allFinite())
        throw CorruptStateError("non-finite curve position at node " + std::to_string(i));
      for (int c = 0; c < 3; ++c) trip.emplace_back(row, curve_dof(i, 1, c), d(c));
      ++row;
    }
  } else {
    ncols = m.num_director_dofs();
    pin(director_dof(0, 0));
    pin(director_dof(m.num_director_nodes() - 1, 0));
    for (int j = 0; j < m.num_director_nodes(); ++j) {
      const Vec3& b = state.director.dir[static_cast<std::size_t>(j)];
      check_vector(b, "director", j);
      for (int c = 0; c < 3; ++c) trip.emplace_back(row, director_dof(j, c), b(c));
      ++row;
    }
  }
  SparseRowMatrix raw(row, ncols);
  raw.setFromTriplets(trip.begin(), trip.end());
  return prune_dependent_rows(raw, 1e-10);
}

struct KktSolver::Impl {
  // Primary path: LDL^T of the symmetrically permuted bordered matrix, with each
  // multiplier ordered directly after the last dof its row touches.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  Eigen::SparseMatrix<double> K;
  std::vector<int> perm;  // original index -> permuted index
  std::vector<int> outer, inner;
  bool analyzed = false;
  bool use_lu = false;
  std::vector<Eigen::Triplet<double>> trip;

  void build_permutation(int n, const ConstraintSet& C) {
    const int m = C.size();
    std::vector<std::vector<int>> after(static_cast<std::size_t>(n));
    for (int r = 0; r < m; ++r) {
      int last = -1;
      for (SparseRowMatrix::InnerIterator it(C.rows, r); it; ++it) last = std::max(last, static_cast<int>(it.col()));
      if (last < 0) throw SingularSystemError("bordered system has an empty constraint row");
      after[static_cast<std::size_t>(last)].push_back(n + r);
    }
    perm.assign(static_cast<std::size_t>(n + m), -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
      perm[static_cast<std::size_t>(i)] = next++;
      for (int r : after[static_cast<std::size_t>(i)]) perm[static_cast<std::size_t>(r)] = next++;
    }
  }

  bool same_pattern() const {
    return analyzed && static_cast<int>(outer.size()) == K.outerSize() + 1 &&
           static_cast<Eigen::Index>(inner.size()) == K.nonZeros() &&
           std::equal(outer.begin(), outer.end(), K.outerIndexPtr()) &&
           std::equal(inner.begin(), inner.end(), K.innerIndexPtr());
  }
};

KktSolver::KktSolver() : impl_(std::make_unique<Impl>()) {}
KktSolver::~KktSolver() = default;
KktSolver::KktSolver(KktSolver&&) noexcept = default;
KktSolver& KktSolver::operator=(KktSolver&&) noexcept = default;

KktSolution KktSolver::solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs, const ConstraintSet& C) {
  const int n = static_cast<int>(A.rows());
  const int m = C.size();
  if (A.cols() != n || rhs.size() != n || (m > 0 && C.rows.cols() != n))
    throw InvalidArgument("solve_kkt: dimension mismatch");
  Impl& I = *impl_;
  I.build_permutation(n, C);
  const auto P = [&I](int i) { return I.perm[static_cast<std::size_t>(i)]; };

  auto& trip = I.trip;
  trip.clear();
  trip.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * C.rows.nonZeros()));
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      trip.emplace_back(P(static_cast<int>(it.row())), P(static_cast<int>(it.col())), it.value());
  for (int r = 0; r < m; ++r) {
    for (SparseRowMatrix::InnerIterator it(C.rows, r); it; ++it) {
      trip.emplace_back(P(n + r), P(static_cast<int>(it.col())), it.value());
      trip.emplace_back(P(static_cast<int>(it.col())), P(n + r), it.value());
    }
  }
  Eigen::SparseMatrix<double>& K = I.K;
  K.resize(n + m, n + m);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();

  if (!I.same_pattern()) {
    I.ldlt.analyzePattern(K);
    I.outer.assign(K.outerIndexPtr(), K.outerIndexPtr() + K.outerSize() + 1);
    I.inner.assign(K.innerIndexPtr(), K.innerIndexPtr() + K.nonZeros());
    I.analyzed = true;
    I.use_lu = false;
  }

  Eigen::VectorXd prhs = Eigen::VectorXd::Zero(n + m);
  for (int i = 0; i < n; ++i) prhs(P(i)) = rhs(i);

  Eigen::VectorXd psol;
  bool ok = false;
  if (!I.use_lu) {
    I.ldlt.factorize(K);
    if (I.ldlt.info() == Eigen::Success) {
      psol = I.ldlt.solve(prhs);
      ok = psol.allFinite();
    }
    if (!ok) I.use_lu = true;
  }
  if (!ok) {
    I.lu.analyzePattern(K);
    I.lu.factorize(K);
    if (I.lu.info() != Eigen::Success) {
      I.analyzed = false;
      throw SingularSystemError("bordered system factorization failed: " + I.lu.lastErrorMessage());
    }
    psol = I.lu.solve(prhs);
    if (I.lu.info() != Eigen::Success || !psol.allFinite())
      throw SingularSystemError("bordered system solve produced non-finite values");
  }
  KktSolution out{Eigen::VectorXd(n), Eigen::VectorXd(m)};
  for (int i = 0; i < n; ++i) out.x(i) = psol(P(i));
  for (int r = 0; r < m; ++r) out.multipliers(r) = psol(P(n + r));
  return out;
}

Eigen::VectorXd solve_kkt(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs, const ConstraintSet& C) {
  KktSolver solver;
  return solver.solve(A, rhs, C).x;
}

}  // namespace rodflow
