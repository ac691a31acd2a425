#include "support.hpp"

#include "rodflow/kkt.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace rodflow;

namespace {

SparseRowMatrix sparse_rows(const Eigen::MatrixXd& C) { return C.sparseView(); }

ConstraintSet as_set(const Eigen::MatrixXd& C) {
  ConstraintSet s;
  s.rows = sparse_rows(C);
  return s;
}

// Dense bordered solve.
Eigen::VectorXd dense_kkt(const Eigen::MatrixXd& A, const Eigen::VectorXd& r, const Eigen::MatrixXd& C) {
  const Eigen::Index n = A.rows(), m = C.rows();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = A;
  K.topRightCorner(n, m) = C.transpose();
  K.bottomLeftCorner(m, n) = C;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  rhs.head(n) = r;
  return K.fullPivLu().solve(rhs).head(n);
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n) {
  Eigen::MatrixXd B(n, n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = g(rng);
  return B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_SUITE("kkt") {
  TEST_CASE("constraint rows for a closed curve") {
    const RodState s = make_circle_rod(2.0 * kPi, 20, 1.0);
    BoundaryCondition bc;
    const ConstraintSet cc = build_constraints(s, Field::curve, bc);
    CHECK(cc.size() == 20);
    CHECK(cc.removed == 0);
    for (int i = 0; i < 20; ++i) {
      const Vec3& d = s.curve.der[static_cast<std::size_t>(i)];
      for (int c = 0; c < 3; ++c) CHECK(cc.rows.coeff(i, curve_dof(i, 1, c)) == d(c));
    }
    // director: 6 pin rows, 21 tangency rows, the two end tangency rows are dependent
    const ConstraintSet cd = build_constraints(s, Field::director, bc);
    CHECK(cd.size() == 6 + 21 - 2);
    CHECK(cd.removed == 2);
  }

  TEST_CASE("clamped curve adds position and slope pins") {
    const RodState s = make_straight_piecewise_twist(2.0, 10, {{2.0, 1.0}});
    const BoundaryCondition bc = bc_from_state(s, BcKind::clamped_both);
    const ConstraintSet cc = build_constraints(s, Field::curve, bc);
    CHECK(cc.size() + cc.removed == 12 + 11);
    CHECK(cc.removed == 2);
    const BoundaryCondition dir_only = bc_from_state(s, BcKind::clamped_director_only);
    CHECK(build_constraints(s, Field::curve, dir_only).size() == 11);
    CHECK_THROWS_AS(build_constraints(s, Field::curve, BoundaryCondition{}), InvalidArgument);
  }

  TEST_CASE("degenerate vectors are rejected") {
    RodState s = make_circle_rod(2.0 * kPi, 12, 1.0);
    s.director.dir[4] = Vec3::Zero();
    CHECK_THROWS_AS(build_constraints(s, Field::director, BoundaryCondition{}), CorruptStateError);
  }

  TEST_CASE("pruning removes linear combinations") {
    Eigen::MatrixXd C(4, 5);
    C << 1, 2, 0, 0, 1,
         0, 1, 1, 0, 0,
         1, 3, 1, 0, 1,
         0, 0, 0, 2, 0;
    const ConstraintSet p = prune_dependent_rows(sparse_rows(C));
    CHECK(p.size() == 3);
    CHECK(p.removed == 1);
    CHECK(p.rows.coeff(2, 3) == 2.0);
  }

  TEST_CASE("projection with the identity form") {
    const int n = 6;
    const Eigen::SparseMatrix<double> A = Eigen::MatrixXd::Identity(n, n).sparseView();
    Eigen::MatrixXd C(1, n);
    C << 0.3, -1.0, 0.0, 2.0, 0.5, 0.0;
    Eigen::VectorXd r(n);
    r << 1, 2, 3, 4, 5, 6;
    const Eigen::VectorXd v = solve_kkt(A, r, as_set(C));
    const Eigen::VectorXd c = C.row(0).transpose();
    const Eigen::VectorXd expect = r - c * (c.dot(r) / c.squaredNorm());
    CHECK((v - expect).norm() < 1e-14);
    CHECK(solve_kkt(A, Eigen::VectorXd::Zero(n), as_set(C)).norm() == 0.0);
  }

  TEST_CASE("random systems against a dense factorization") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    KktSolver solver;
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 30, m = 7;
      const Eigen::MatrixXd A = random_spd(rng, n);
      Eigen::MatrixXd C(m, n);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) C(i, j) = g(rng);
      Eigen::VectorXd r(n);
      for (int i = 0; i < n; ++i) r(i) = g(rng);
      const KktSolution s = solver.solve(A.sparseView(), r, as_set(C));
      CHECK((A * s.x + C.transpose() * s.multipliers - r).norm() <= 1e-10 * r.norm());
      CHECK((C * s.x).norm() <= 1e-10);
      CHECK((s.x - dense_kkt(A, r, C)).norm() <= 1e-10 * s.x.norm());
    }
  }

  TEST_CASE("banded rod-like systems with repeated patterns") {
    std::mt19937_64 rng(12);
    const RodState base = make_circle_rod(2.0 * kPi, 15, 2.0);
    const Eigen::SparseMatrix<double> A = assemble_form(*base.mesh, FormKind::star_metric).matrix;
    KktSolver solver;
    for (int trial = 0; trial < 3; ++trial) {
      const RodState s = testing::jitter(base, rng, 0.01, 0.1, 0.1);
      const ConstraintSet C = build_constraints(s, Field::curve, BoundaryCondition{});
      const Eigen::VectorXd r = testing::random_direction(rng, A.rows());
      const KktSolution sol = solver.solve(A, r, C);
      const Eigen::VectorXd expect = dense_kkt(Eigen::MatrixXd(A), r, Eigen::MatrixXd(C.rows));
      CHECK((sol.x - expect).norm() <= 1e-10 * expect.norm());
      CHECK((C.rows * sol.x).norm() <= 1e-12);
    }
  }

  TEST_CASE("dependent constraint rows make the system singular") {
    const int n = 4;
    const Eigen::SparseMatrix<double> A = Eigen::MatrixXd::Identity(n, n).sparseView();
    Eigen::MatrixXd C(2, n);
    C << 1, 1, 0, 0,
         2, 2, 0, 0;
    CHECK_THROWS_AS(solve_kkt(A, Eigen::VectorXd::Ones(n), as_set(C)), SingularSystemError);
    CHECK_THROWS_AS(solve_kkt(A, Eigen::VectorXd::Ones(n + 1), as_set(C)), InvalidArgument);
  }
}
