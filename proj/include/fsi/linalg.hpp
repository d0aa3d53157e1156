#pragma once
#include <Eigen/Sparse>
#include <functional>
#include <vector>

namespace fsi {

using SpMat = Eigen::SparseMatrix<double>;
using DVec = Eigen::VectorXd;

struct SolveReport {
  int iterations = 0;
  double final_residual = 0;
  bool converged = false;
};

// Element-contribution accumulator with symmetric Dirichlet elimination:
// pinned dofs keep a unit diagonal, their coupling moves to the rhs, and
// symmetry (hence positive definiteness) of the free block is preserved.
struct SparseSystem {
  int n = 0;
  std::vector<Eigen::Triplet<double>> trips;
  DVec rhs;
  std::vector<uint8_t> pinned;
  DVec pin_value;

  explicit SparseSystem(int size) : n(size), rhs(DVec::Zero(size)), pinned(size_t(size), 0),
                                    pin_value(DVec::Zero(size)) {}
  void add(int i, int j, double v) { trips.emplace_back(i, j, v); }
  void add_rhs(int i, double v) { rhs[i] += v; }
  void pin(int i, double v) {
    pinned[size_t(i)] = 1;
    pin_value[i] = v;
  }
  void finalize(SpMat& a, DVec& b) const;
};

// Conjugate gradients for symmetric positive definite systems.
// Throws std::runtime_error if the matrix is detectably nonsymmetric or a
// direction of nonpositive curvature appears (precondition violation).
// Exhausting maxit is reported via converged=false, not thrown.
SolveReport solve_spd(const SpMat& a, const DVec& b, DVec& x, double tol, int maxit);

struct NewtonOptions {
  double tol = 1e-11;       // on |r| relative to max(1, |r0|)
  int maxit = 25;
  int max_backtrack = 8;
  bool fd_check = false;    // validate jacobian columns against central FD
  double fd_step = 1e-7;
  double fd_tol = 1e-4;
  int fd_cols = 5;
};

struct NewtonReport {
  int iterations = 0;
  double residual_norm = 0;
  bool converged = false;
};

// Newton on residual(x) = 0 with a sparse jacobian callback. Non-finite
// residuals and jacobian factorization failures throw; non-convergence is
// reported. The accepted iterate's residual norm is recomputed from a fresh
// residual call so the report matches an independent evaluation.
NewtonReport solve_newton(const std::function<DVec(const DVec&)>& residual,
                          const std::function<SpMat(const DVec&)>& jacobian, DVec& x,
                          const NewtonOptions& opts);

}  // namespace fsi
