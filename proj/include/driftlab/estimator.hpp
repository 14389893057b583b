#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

#include "driftlab/drift_model.hpp"
#include "driftlab/simulate.hpp"

namespace driftlab {

// Regression view of a discretized path: one feature row per step (states or
// basis evaluations) and the raw increments as targets.
struct RegressionData {
  MatrixXd features;  // n x q
  MatrixXd targets;   // n x p, row t = x_{t+1} - x_t
  double eta = 0.0;
};

inline RegressionData build_regression(const Trajectory& traj,
                                       const std::optional<Basis>& basis = {}) {
  const int n = traj.n_steps();
  if (n < 1) throw config_error("regression needs a trajectory with >= 2 states");
  RegressionData data;
  data.eta = traj.eta;
  data.targets = traj.states.bottomRows(n) - traj.states.topRows(n);
  if (!basis) {
    data.features = traj.states.topRows(n);
    return data;
  }
  if (basis->input_dim != traj.dim()) {
    throw config_error("basis input dimension does not match the trajectory");
  }
  data.features.resize(n, basis->size());
  VectorXd row(basis->size());
  for (int t = 0; t < n; ++t) {
    basis->eval_into(traj.states.row(t).transpose(), row);
    data.features.row(t) = row.transpose();
  }
  return data;
}

// Sufficient statistics of the penalized least-squares objective: the
// feature Gram matrix and feature/target cross moments.
struct RegressionStats {
  MatrixXd gram;   // F^T F, q x q
  MatrixXd cross;  // F^T Y, q x p
  long n = 0;
  double eta = 0.0;

  int feature_count() const { return static_cast<int>(gram.rows()); }
  int target_count() const { return static_cast<int>(cross.cols()); }
};

inline RegressionStats compile_regression(const RegressionData& data) {
  RegressionStats stats;
  stats.gram.noalias() = data.features.transpose() * data.features;
  stats.cross.noalias() = data.features.transpose() * data.targets;
  stats.n = data.features.rows();
  stats.eta = data.eta;
  return stats;
}

struct LassoOptions {
  double tol = 1e-8;      // stop when the largest coordinate update is below this
  long max_sweeps = 10000;
  bool warm_path = true;  // anneal lambda geometrically from lambda_max
  int path_points = 6;
};

struct LassoReport {
  long sweeps = 0;
  bool converged = true;
};

namespace detail {

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

// Cyclic coordinate descent for one target row of
//   min_a (1/(2 n eta)) sum_t (y_t - eta <a, f_t>)^2 + lambda |a|_1
// on the compiled statistics. `a` is updated in place.
inline void lasso_row(const RegressionStats& stats, int target, double lambda,
                      const LassoOptions& opt, VectorXd& a, LassoReport* report) {
  const int q = stats.feature_count();
  const double inv_n = 1.0 / static_cast<double>(stats.n);
  const double scale = stats.eta * inv_n;
  const VectorXd r = stats.cross.col(target) * inv_n;
  VectorXd quad(q);
  for (int j = 0; j < q; ++j) quad[j] = scale * stats.gram(j, j);
  // c_j = r_j - (eta/n) (S a)_j, maintained incrementally.
  VectorXd c = r;
  if (a.squaredNorm() != 0.0) c.noalias() -= scale * (stats.gram * a);
  for (long sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double max_update = 0.0;
    for (int j = 0; j < q; ++j) {
      if (quad[j] <= 0.0) continue;  // degenerate feature column stays put
      const double z = c[j] + quad[j] * a[j];
      const double next = soft_threshold(z, lambda) / quad[j];
      const double delta = next - a[j];
      if (delta != 0.0) {
        c.noalias() -= (scale * delta) * stats.gram.col(j);
        a[j] = next;
        max_update = std::max(max_update, std::abs(delta));
      }
    }
    if (report) ++report->sweeps;
    if (max_update < opt.tol) return;
  }
  if (report) report->converged = false;
}

}  // namespace detail

// Smallest penalty at which a target row's solution is identically zero.
inline double lasso_lambda_max(const RegressionStats& stats, int target) {
  return stats.cross.col(target).cwiseAbs().maxCoeff() / static_cast<double>(stats.n);
}

// Row-wise l1-penalized least squares on compiled statistics. Rows of the
// returned coefficient matrix decouple; each is solved by cyclic coordinate
// descent with soft thresholding, warm-started along a decreasing lambda path.
inline MatrixXd l1_estimate(const RegressionStats& stats, double lambda,
                            const LassoOptions& opt = {}, LassoReport* report = nullptr,
                            const MatrixXd* warm_start = nullptr) {
  if (lambda < 0.0) throw config_error("penalty must be >= 0");
  if (stats.n < 2) throw config_error("need at least 2 increments");
  const int q = stats.feature_count();
  const int p = stats.target_count();
  MatrixXd coeffs = MatrixXd::Zero(p, q);
  if (warm_start != nullptr) {
    if (warm_start->rows() != p || warm_start->cols() != q) {
      throw config_error("warm start has the wrong shape");
    }
    coeffs = *warm_start;
  }
  LassoReport local;
  LassoReport* rep = report ? report : &local;
  rep->sweeps = 0;
  rep->converged = true;
  for (int i = 0; i < p; ++i) {
    VectorXd a = coeffs.row(i).transpose();
    if (opt.warm_path && lambda > 0.0 && warm_start == nullptr) {
      const double lam_max = lasso_lambda_max(stats, i);
      if (lam_max > lambda) {
        for (int s = opt.path_points - 1; s >= 1; --s) {
          const double lam = lambda * std::pow(lam_max / lambda,
                                               static_cast<double>(s) / opt.path_points);
          detail::lasso_row(stats, i, lam, opt, a, nullptr);
        }
      }
    }
    detail::lasso_row(stats, i, lambda, opt, a, rep);
    coeffs.row(i) = a.transpose();
  }
  return coeffs;
}

inline MatrixXd l1_drift_estimate(const RegressionData& data, double lambda,
                                  const LassoOptions& opt = {},
                                  LassoReport* report = nullptr) {
  return l1_estimate(compile_regression(data), lambda, opt, report);
}

// Gradient of the smooth objective part at `row_coeffs` for one target row;
// at an optimum it lies in [-lambda, lambda], equal to -lambda sign(a_j) on
// active coordinates.
inline VectorXd lasso_smooth_gradient(const RegressionStats& stats, const VectorXd& row_coeffs,
                                      int target) {
  const double inv_n = 1.0 / static_cast<double>(stats.n);
  return (stats.eta * inv_n) * (stats.gram * row_coeffs) - inv_n * stats.cross.col(target);
}

// Entrywise sign with a dead zone: sign(c) if |c| > tau, else 0.
inline MatrixXi signed_support(const MatrixXd& coeffs, double tau) {
  if (tau < 0.0) throw config_error("threshold must be >= 0");
  MatrixXi signs(coeffs.rows(), coeffs.cols());
  for (int i = 0; i < coeffs.rows(); ++i) {
    for (int j = 0; j < coeffs.cols(); ++j) {
      const double c = coeffs(i, j);
      signs(i, j) = std::abs(c) > tau ? (c > 0.0 ? 1 : -1) : 0;
    }
  }
  return signs;
}

// Outcome of one structure-recovery attempt.
struct RecoveryResult {
  MatrixXi estimated_sign;
  MatrixXi truth_sign;
  bool success = false;
  VectorXi row_errors;  // per-row mismatch counts
  double lambda = 0.0;
  double threshold = 0.0;
};

inline RecoveryResult compare_signed_support(MatrixXi estimated, MatrixXi truth, double lambda,
                                             double tau) {
  if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols()) {
    throw config_error("sign matrices must have equal shapes");
  }
  RecoveryResult result;
  result.row_errors = VectorXi::Zero(estimated.rows());
  for (int i = 0; i < estimated.rows(); ++i) {
    for (int j = 0; j < estimated.cols(); ++j) {
      if (estimated(i, j) != truth(i, j)) ++result.row_errors[i];
    }
  }
  result.success = result.row_errors.sum() == 0;
  result.estimated_sign = std::move(estimated);
  result.truth_sign = std::move(truth);
  result.lambda = lambda;
  result.threshold = tau;
  return result;
}

// Default penalty for the increments regression. The rate shape
// sqrt(log q / T) is calibrated on the continuous-time objective; the
// discrete objective used here scales the smooth gradient by eta, so eta is
// folded in to keep one constant c usable across step sizes.
inline double l1_default_lambda(int q, double total_time, double eta, double c = 1.0) {
  if (q <= 1 || !(total_time > 0.0)) return 0.0;
  return c * eta * std::sqrt(std::log(static_cast<double>(q)) / total_time);
}

// Threshold fallback when no coupling floor is known: the midpoint of the
// widest gap between consecutive sorted coefficient magnitudes (zero included
// as the floor value).
inline double tau_by_largest_gap(const MatrixXd& coeffs) {
  std::vector<double> mags;
  mags.reserve(coeffs.size() + 1);
  mags.push_back(0.0);
  for (int i = 0; i < coeffs.rows(); ++i) {
    for (int j = 0; j < coeffs.cols(); ++j) mags.push_back(std::abs(coeffs(i, j)));
  }
  std::sort(mags.begin(), mags.end());
  double best_gap = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i + 1 < mags.size(); ++i) {
    const double gap = mags[i + 1] - mags[i];
    if (gap > best_gap) {
      best_gap = gap;
      tau = 0.5 * (mags[i + 1] + mags[i]);
    }
  }
  return tau;
}

}  // namespace driftlab
