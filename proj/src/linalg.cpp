#include "fsi/linalg.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

namespace fsi {

void SparseSystem::finalize(SpMat& a, DVec& b) const {
  b = rhs;
  std::vector<Eigen::Triplet<double>> kept;
  kept.reserve(trips.size() + size_t(n));
  for (const auto& t : trips) {
    bool pi = pinned[size_t(t.row())], pj = pinned[size_t(t.col())];
    if (pi) continue;
    if (pj) {
      b[t.row()] -= t.value() * pin_value[t.col()];
      continue;
    }
    kept.push_back(t);
  }
  for (int i = 0; i < n; ++i)
    if (pinned[size_t(i)]) {
      kept.emplace_back(i, i, 1.0);
      b[i] = pin_value[i];
    }
  a.resize(n, n);
  a.setFromTriplets(kept.begin(), kept.end());
}

SolveReport solve_spd(const SpMat& a, const DVec& b, DVec& x, double tol, int maxit) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw std::runtime_error("solve_spd: dimension mismatch");
  {
    SpMat diff = a - SpMat(a.transpose());
    double asym = diff.coeffs().cwiseAbs().sum();
    double scale = a.coeffs().cwiseAbs().sum();
    if (asym > 1e-12 * std::max(1.0, scale))
      throw std::runtime_error("solve_spd: matrix flagged SPD is not symmetric");
  }
  if (x.size() != b.size()) x = DVec::Zero(b.size());
  SolveReport rep;
  DVec r = b - a * x;
  DVec p = r;
  double rr = r.squaredNorm();
  const double stop = tol * tol * std::max(1.0, b.squaredNorm());
  for (rep.iterations = 0; rep.iterations < maxit; ++rep.iterations) {
    if (rr <= stop) {
      rep.converged = true;
      break;
    }
    DVec ap = a * p;
    double pap = p.dot(ap);
    if (!(pap > 0))
      throw std::runtime_error("solve_spd: nonpositive curvature, matrix is not positive definite");
    double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (!rep.converged && rr <= stop) rep.converged = true;
  rep.final_residual = std::sqrt(rr);
  return rep;
}

NewtonReport solve_newton(const std::function<DVec(const DVec&)>& residual,
                          const std::function<SpMat(const DVec&)>& jacobian, DVec& x,
                          const NewtonOptions& opts) {
  NewtonReport rep;
  DVec r = residual(x);
  if (!r.allFinite()) throw std::runtime_error("solve_newton: non-finite residual");
  double rn = r.norm();
  // same convention as solve_spd: tolerance relative to the initial
  // residual, with an absolute floor of one
  const double stop = opts.tol * std::max(1.0, rn);
  for (rep.iterations = 0; rep.iterations < opts.maxit; ++rep.iterations) {
    if (rn <= stop) {
      rep.converged = true;
      break;
    }
    SpMat j = jacobian(x);
    if (opts.fd_check) {
      // spot-check a few jacobian columns against central differences
      for (int k = 0; k < opts.fd_cols && k < int(x.size()); ++k) {
        int col = (k * 2654435761u) % unsigned(x.size());
        DVec xp = x, xm = x;
        xp[col] += opts.fd_step;
        xm[col] -= opts.fd_step;
        DVec fd = (residual(xp) - residual(xm)) / (2 * opts.fd_step);
        DVec jc = j.col(col);
        double err = (fd - jc).norm() / std::max(1.0, jc.norm());
        if (err > opts.fd_tol)
          throw std::logic_error("solve_newton: jacobian column " + std::to_string(col) +
                                 " disagrees with finite differences, rel err " +
                                 std::to_string(err));
      }
    }
    Eigen::SparseLU<SpMat> lu;
    lu.compute(j);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("solve_newton: jacobian factorization failed");
    DVec dx = lu.solve(-r);
    if (lu.info() != Eigen::Success || !dx.allFinite())
      throw std::runtime_error("solve_newton: jacobian solve failed");
    // light backtracking; plain Newton step when it already reduces the residual
    double step = 1.0;
    DVec x_try, r_try;
    double rn_try = 0;
    int bt = 0;
    for (;; ++bt) {
      x_try = x + step * dx;
      r_try = residual(x_try);
      if (!r_try.allFinite()) throw std::runtime_error("solve_newton: non-finite residual");
      rn_try = r_try.norm();
      if (rn_try < rn || bt >= opts.max_backtrack) break;
      step *= 0.5;
    }
    x = x_try;
    r = r_try;
    rn = rn_try;
  }
  if (!rep.converged && rn <= stop) rep.converged = true;
  rep.residual_norm = rn;
  return rep;
}

}  // namespace fsi
