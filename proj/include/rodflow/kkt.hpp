#pragma once

// Linearized nodal constraints and the bordered saddle-point solve.

#include "rodflow/rod_model.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>

namespace rodflow {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct ConstraintSet {
  SparseRowMatrix rows;  // one linear functional per row, on curve or director dofs
  int removed = 0;       // rows dropped as linearly dependent

  int size() const { return static_cast<int>(rows.rows()); }
};

// Tangency rows (w'(z).y'(z) = 0 or r(z).b(z) = 0, one per node) plus
// homogeneous boundary rows. Dependent rows are removed.
ConstraintSet build_constraints(const RodState& state, Field which, const BoundaryCondition& bc);

// Drops rows that are linearly dependent on earlier ones (two-pass
// Gram-Schmidt on sparse rows, relative tolerance `tol`).
ConstraintSet prune_dependent_rows(const SparseRowMatrix& rows, double tol = 1e-10);

struct KktSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;
};

// Factorizes [[A, C^T], [C, 0]] and keeps the symbolic analysis for later
// systems with the same sparsity pattern.
class KktSolver {
 public:
  KktSolver();
  ~KktSolver();
  KktSolver(KktSolver&&) noexcept;
  KktSolver& operator=(KktSolver&&) noexcept;

  KktSolution solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs, const ConstraintSet& C);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd solve_kkt(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs, const ConstraintSet& C);

}  // namespace rodflow
