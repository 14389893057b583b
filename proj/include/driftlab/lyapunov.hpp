#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "driftlab/drift_model.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Solves the continuous Lyapunov equation A X + X A^T + C = 0 for stable A.
// Small problems go through the p^2-dimensional linear system; larger ones
// through a complex Schur reduction. The factorization is cached so iterative
// refinement and repeated right-hand sides are cheap.
class LyapunovSolver {
 public:
  static constexpr int kDirectMaxDim = 32;

  explicit LyapunovSolver(const MatrixXd& a) : n_(static_cast<int>(a.rows())) {
    if (a.rows() != a.cols()) throw config_error("lyapunov: matrix must be square");
    use_direct_ = n_ <= kDirectMaxDim;
    if (use_direct_) {
      // vec(A X + X A^T) = (I (x) A + A (x) I) vec(X), column-major vec.
      MatrixXd m = MatrixXd::Zero(n_ * n_, n_ * n_);
      for (int j = 0; j < n_; ++j) {
        m.block(j * n_, j * n_, n_, n_) += a;
        for (int l = 0; l < n_; ++l) {
          for (int i = 0; i < n_; ++i) {
            m(j * n_ + i, l * n_ + i) += a(j, l);
          }
        }
      }
      lu_.compute(m);
    } else {
      Eigen::ComplexSchur<MatrixXcd> schur(a.cast<std::complex<double>>());
      if (schur.info() != Eigen::Success) throw numeric_error("lyapunov: Schur reduction failed");
      t_ = schur.matrixT();
      u_ = schur.matrixU();
    }
  }

  MatrixXd solve(const MatrixXd& c) const {
    if (c.rows() != n_ || c.cols() != n_) throw config_error("lyapunov: rhs must be p x p");
    if (use_direct_) {
      const Eigen::Map<const VectorXd> rhs(c.data(), n_ * n_);
      VectorXd v = lu_.solve(-rhs);
      return Eigen::Map<const MatrixXd>(v.data(), n_, n_);
    }
    // With A = U T U^H the equation becomes T Y + Y T^H = W; upper triangular
    // T lets the columns be solved back to front.
    const MatrixXcd w = -u_.adjoint() * c * u_;
    MatrixXcd y = MatrixXcd::Zero(n_, n_);
    for (int j = n_ - 1; j >= 0; --j) {
      VectorXcd rhs = w.col(j);
      if (j + 1 < n_) {
        rhs.noalias() -= y.rightCols(n_ - j - 1) * t_.row(j).tail(n_ - j - 1).adjoint();
      }
      MatrixXcd shifted = t_;
      shifted.diagonal().array() += std::conj(t_(j, j));
      y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    return (u_ * y * u_.adjoint()).real();
  }

 private:
  int n_;
  bool use_direct_ = true;
  Eigen::PartialPivLU<MatrixXd> lu_;
  MatrixXcd t_, u_;
};

// Stationary covariance of dx = A x dt + db: the solution of
// A S + S A^T + I = 0, symmetrized and refined until the max-norm residual is
// below `residual_tol`.
inline MatrixXd stationary_covariance(const InteractionMatrix& a_in,
                                      double residual_tol = 1e-10) {
  const MatrixXd& a = a_in.entries;
  a_in.validate();
  if (stability_margin(a) <= 0.0) {
    throw numeric_error("stationary covariance requires lambda_max((A+A^T)/2) < 0");
  }
  const int n = a_in.dim();
  const MatrixXd eye = MatrixXd::Identity(n, n);
  LyapunovSolver solver(a);
  MatrixXd sigma = solver.solve(eye);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  for (int pass = 0; pass < 3; ++pass) {
    const MatrixXd residual = a * sigma + sigma * a.transpose() + eye;
    if (residual.cwiseAbs().maxCoeff() <= 0.1 * residual_tol) break;
    sigma += solver.solve(residual);
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
  }
  const MatrixXd residual = a * sigma + sigma * a.transpose() + eye;
  if (residual.cwiseAbs().maxCoeff() > residual_tol) {
    throw numeric_error("lyapunov solve did not reach the residual tolerance");
  }
  return sigma;
}

// Draws x ~ N(0, S) with S the stationary covariance, via Cholesky.
// Deterministic per seed.
inline VectorXd sample_stationary(const InteractionMatrix& a, std::uint64_t seed) {
  const MatrixXd sigma = stationary_covariance(a);
  Eigen::LLT<MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw numeric_error("stationary covariance is not positive definite");
  }
  Rng rng(seed);
  VectorXd xi(a.dim());
  for (int i = 0; i < xi.size(); ++i) xi[i] = rng.gaussian();
  return llt.matrixL() * xi;
}

}  // namespace driftlab
